"""Adequate filtrations F_i^[j] and their conjugate families wF_i^[j].

Conventions: F_i^[s(i)] = 0, F_i^[0] = F_i^[r+1] = F_i, wF_i^[0] = E_i and
wF_i^[r+1] = 0.  Only j in 1..r with j != s(i) is stored on the Hodge side.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .crystal import DieudonneModule, FiltrationProfile, InvalidModule, ValidationReport
from .semilinear import (
    Matrix,
    Submodule,
    SummandError,
    adapted_basis,
    image_hull,
    smith_normal_form,
)


class FiltrationError(ValueError):
    """Construction failed at a given (i, j)."""

    def __init__(self, msg, where=()):
        super().__init__(f"{msg} at (i, j) = {where}" if where else msg)
        self.where = where


@dataclass
class AdequateFiltration:
    profile: FiltrationProfile
    hodge_side: dict
    conj_side: dict
    hodge: list
    consumed: dict = field(default_factory=dict)
    N: int = 0

    @property
    def f(self) -> int:
        return len(self.hodge)

    @property
    def h(self) -> int:
        return self.profile.h

    @property
    def precision(self) -> int:
        """Digits to which every piece is determined by the construction."""
        return self.N - max(self.consumed.values(), default=0)

    def F(self, i: int, j: int) -> Submodule:
        s = self.profile.s[i]
        if j == s:
            return Submodule.zero(self.hodge[i].ctx, self.h)
        if j == 0 or j == self.profile.r + 1:
            return self.hodge[i]
        return self.hodge_side[(i, j)]

    def wF(self, i: int, j: int) -> Submodule:
        if j == 0:
            return Submodule.full(self.hodge[i].ctx, self.h)
        if j == self.profile.r + 1:
            return Submodule.zero(self.hodge[i].ctx, self.h)
        return self.conj_side[(i, j)]

    def rank(self, i: int, j: int) -> int:
        """Expected rank of F_i^[j]."""
        d, delta, s = self.hodge[i].rank, self.profile.delta, self.profile.s[i]
        if j == s:
            return 0
        if j in (0, self.profile.r + 1):
            return d
        return d - delta[j] if j < s else self.h + d - delta[j]


def _preimage(A: Matrix, X: Submodule, dp: int) -> Submodule:
    """A^{-1}(X) for X inside the (rank dp) image of A."""
    h = A.rows
    snf = smith_normal_form(A)
    c = snf.L @ X.basis
    if not c.select_rows(range(dp, h)).is_zero():
        raise SummandError("target not inside the image of V")
    top = c.select_rows(range(dp))
    block = top.vstack(Matrix.zeros(A.ctx, h - dp, top.cols))
    free = Matrix.identity(A.ctx, h).columns(range(dp, h))
    return Submodule.from_basis(snf.R @ block.hstack(free))


def conjugate_piece(D: DieudonneModule, i: int, j: int, F_prev_j: Submodule, s_prev: int) -> Submodule:
    """wF_i^[j] from F_{i-1}^[j]: V-preimage for j <= s(i-1), F-image otherwise."""
    h, delta = D.h, D.profile.delta
    dp = D.d[D.prev(i)]
    X = F_prev_j.frobenius()
    if j <= s_prev:
        out = _preimage(D.V[i], X, dp)
    else:
        out = image_hull(D.F[i] @ X.basis, h - delta[j])
    if out.rank != h - delta[j]:
        raise FiltrationError(f"conjugate piece has rank {out.rank}, expected {h - delta[j]}", (i, j))
    return out


def _lower_piece(X: Submodule, wprev: Submodule, wcur: Submodule, target: int, n: int,
                 rng: random.Random | None):
    """Rank-``target`` summand of X lying in wcur (X inside wprev)."""
    ctx = X.ctx
    P, ranks = adapted_basis([wcur, wprev], n, ctx)
    lo, hi = ranks
    co = P.inverse() @ X.basis
    if hi < n and not co.select_rows(range(hi, n)).is_zero():
        raise SummandError("previous piece escapes the conjugate filtration")
    M = co.select_rows(range(lo, hi))
    snf = smith_normal_form(M)
    a, rows = X.rank, M.rows
    if a - rows != target:
        raise SummandError(f"cutting equations leave rank {a - rows}, expected {target}")
    K = snf.R.columns(range(rows, a))
    consumed = max((c for c in snf.sigma if c < ctx.N), default=0)
    if rng is not None:
        K = K.copy()
        for k, c in enumerate(snf.sigma):
            if c == 0:
                continue
            shift = ctx.N - c if c < ctx.N else 0
            for col in range(K.cols):
                t = _rand_scalar(ctx, rng, shift)
                if t.v:
                    for row in range(a):
                        K.entries[row][col] = K.entries[row][col] + t * snf.R.entries[row][k]
    basis = X.basis @ K
    return Submodule.from_basis(basis), consumed


def _upper_piece(G: Submodule, Y: Matrix, target: int, n: int, rng: random.Random | None):
    """Rank-``target`` summand of G containing the columns of Y."""
    ctx = G.ctx
    g = G.rank
    co = G.coordinates(Y)
    if g < n and not co.select_rows(range(g, n)).is_zero():
        raise SummandError("hull generators escape the ambient piece")
    snf = smith_normal_form(co.select_rows(range(g)))
    if snf.rank > target:
        raise SummandError(f"span needs {snf.rank} generators, more than {target}")
    U = snf.U
    consumed = max((c for c in snf.sigma[:target] if c < ctx.N), default=0)
    if rng is not None and target < g:
        U = U.copy()
        for k in range(target):
            c = snf.sigma[k] if k < len(snf.sigma) else ctx.N
            if c == 0:
                continue
            shift = ctx.N - c if c < ctx.N else 0
            for m in range(target, g):
                t = _rand_scalar(ctx, rng, shift)
                if t.v:
                    for row in range(g):
                        U.entries[row][k] = U.entries[row][k] + t * U.entries[row][m]
    lift = G.witness.columns(range(g)) @ U
    rest = G.witness.columns(range(g, n))
    wit = lift.hstack(rest)
    return Submodule(lift.columns(range(target)), wit), consumed


def _rand_scalar(ctx, rng, min_digit):
    if min_digit >= ctx.N:
        return ctx.zero()
    q, dec = ctx.p ** ctx.f, ctx.field.decode
    return ctx.elem({t: dec(rng.randrange(q)) for t in range(min_digit, ctx.N) if rng.random() < 0.5})


def build_adequate(D: DieudonneModule, seed_shift: int = 0, variant: random.Random | int | None = None
                   ) -> AdequateFiltration:
    """Inductive construction over j = 1..r, propagating cyclically in i.

    ``seed_shift`` picks which i with s(i) = j starts the propagation.
    ``variant`` (an RNG or seed) replaces every choice left open by the
    construction with a random admissible one, producing another adequate
    filtration of the same module.
    """
    rng = random.Random(variant) if isinstance(variant, int) else variant
    prof = D.profile
    f, h, r, s = D.f, D.h, prof.r, prof.s
    try:
        hodge = [D.hodge_submodule(i) for i in range(f)]
    except SummandError as exc:
        raise InvalidModule(str(exc)) from exc
    AF = AdequateFiltration(prof, {}, {}, hodge, {}, D.ctx.N)
    for j in range(1, r + 1):
        seeds = [i for i in range(f) if s[i] == j]
        i0 = seeds[seed_shift % len(seeds)]
        for k in range(1, f + 1):
            i = (i0 + k) % f
            ip = D.prev(i)
            try:
                AF.conj_side[(i, j)] = conjugate_piece(D, i, j, AF.F(ip, j), s[ip])
            except SummandError as exc:
                raise FiltrationError(str(exc), (i, j)) from exc
            if s[i] == j:
                continue
            target = AF.rank(i, j)
            try:
                if j < s[i]:
                    piece, used = _lower_piece(AF.F(i, j - 1), AF.wF(i, j - 1), AF.wF(i, j), target, h, rng)
                else:
                    G = Submodule.full(D.ctx, h) if j == s[i] + 1 else AF.F(i, j - 1)
                    Y = hodge[i].basis.hstack(AF.wF(i, j).basis)
                    piece, used = _upper_piece(G, Y, target, h, rng)
            except SummandError as exc:
                raise FiltrationError(str(exc), (i, j)) from exc
            AF.hodge_side[(i, j)] = piece
            AF.consumed[(i, j)] = used
    return AF


def conjugate_family(D: DieudonneModule, hodge_side: dict) -> dict:
    """Recompute every wF_i^[j] (1 <= j <= r) from a given Hodge side."""
    prof = D.profile
    tmp = AdequateFiltration(prof, hodge_side, {}, [D.hodge_submodule(i) for i in range(D.f)], {}, D.ctx.N)
    out = {}
    for j in range(1, prof.r + 1):
        for i in range(D.f):
            ip = D.prev(i)
            out[(i, j)] = conjugate_piece(D, i, j, tmp.F(ip, j), prof.s[ip])
    return out


def from_hodge_side(D: DieudonneModule, hodge_side: dict, consumed: dict | None = None) -> AdequateFiltration:
    prof = D.profile
    hodge = [D.hodge_submodule(i) for i in range(D.f)]
    AF = AdequateFiltration(prof, dict(hodge_side), {}, hodge, dict(consumed or {}), D.ctx.N)
    AF.conj_side = conjugate_family(D, AF.hodge_side)
    return AF


def verify_adequate(D: DieudonneModule, AF: AdequateFiltration) -> ValidationReport:
    rep = ValidationReport()
    prof = D.profile
    f, r, s = D.f, prof.r, prof.s
    if prof != AF.profile:
        rep.add("profile", False, (), f"{AF.profile} vs {prof}")
        return rep
    missing = False
    for i in range(f):
        for j in range(1, r + 1):
            if j == s[i]:
                continue
            S = AF.hodge_side.get((i, j))
            if S is None:
                rep.add("piece present", False, (i, j))
                missing = True
                continue
            rep.add("rank", S.rank == AF.rank(i, j), (i, j), f"{S.rank} vs {AF.rank(i, j)}")
            ok = S.witness.columns(range(S.rank)) == S.basis
            try:
                S.witness_inverse
            except Exception:
                ok = False
            rep.add("direct summand", ok, (i, j))
    if missing:
        return rep
    for i in range(f):
        # chain 0 < F^[s-1] < ... < F^[1] < F < F^[r] < ... < F^[s+1] < E
        chain = [AF.F(i, j) for j in range(s[i] - 1, 0, -1)] + [AF.F(i, 0)] + \
                [AF.F(i, j) for j in range(r, s[i], -1)]
        for lo, hi in zip(chain, chain[1:]):
            rep.add("chain inclusion", hi.contains(lo.basis), (i,))
        for j in range(1, r + 1):
            if j < s[i]:
                rep.add("adequate F in wF", AF.wF(i, j).contains(AF.F(i, j).basis), (i, j))
            elif j > s[i]:
                rep.add("adequate wF in F", AF.F(i, j).contains(AF.wF(i, j).basis), (i, j))
    try:
        fresh = conjugate_family(D, AF.hodge_side)
        for key, S in fresh.items():
            mine = AF.conj_side.get(key)
            rep.add("conjugate consistency", mine is not None and mine.equals(S), key)
    except (SummandError, FiltrationError, KeyError) as exc:
        rep.add("conjugate consistency", False, (), str(exc))
    return rep


def compare_mod(AF1: AdequateFiltration, AF2: AdequateFiltration, cutoff) -> bool:
    """Do the two Hodge-side families agree modulo s^ceil(cutoff * N)?"""
    cutoff = Fraction(cutoff)
    if not 0 < cutoff <= 1:
        raise ValueError("cutoff must lie in (0, 1]")
    digits = math.ceil(cutoff * AF1.N)
    if AF1.profile != AF2.profile or set(AF1.hodge_side) != set(AF2.hodge_side):
        return False
    return all(AF1.hodge_side[k].equals(AF2.hodge_side[k], digits) for k in AF1.hodge_side)
