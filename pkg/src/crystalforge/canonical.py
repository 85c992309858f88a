"""Quotient crystals of subgroups, partial degrees and the degree theorem.

A subgroup C of G[p] enters only through its crystal: surjections
pi_i : E_i -> E_{C,i} compatible with V and F.  Partial codegrees are read off
det V_C (or, when delta_j > d_i, off F on the kernels) divided by p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .crystal import DieudonneModule, ValidationReport
from .exactring import PrecisionError, RingContext, RingElem
from .filtration import AdequateFiltration
from .invariants import InvariantReport, link_sum
from .semilinear import (
    Matrix,
    Submodule,
    adapted_basis,
    image_hull,
    kernel_summand,
    natural_map_det,
    smith_normal_form,
)


class QuotientError(ValueError):
    pass


# --- Raynaud pieces -------------------------------------------------------------

@dataclass(frozen=True)
class RaynaudParams:
    va: tuple
    vb: tuple
    ua: tuple | None = None
    ub: tuple | None = None

    def __post_init__(self):
        va = tuple(Fraction(x) for x in self.va)
        vb = tuple(Fraction(x) for x in self.vb)
        object.__setattr__(self, "va", va)
        object.__setattr__(self, "vb", vb)
        if len(va) != len(vb):
            raise ValueError("parameter lists differ in length")
        for a, b in zip(va, vb):
            if not (0 <= a <= 1 and a + b == 1):
                raise ValueError(f"need 0 <= v_a <= 1 and v_a + v_b = 1, got {a}, {b}")

    @property
    def f(self) -> int:
        return len(self.va)

    @property
    def degrees(self) -> tuple:
        return self.va

    @property
    def codegrees(self) -> tuple:
        return self.vb

    def dual(self) -> "RaynaudParams":
        return RaynaudParams(self.vb, self.va, self.ub, self.ua)


@dataclass
class RaynaudCrystal:
    params: RaynaudParams
    V: list
    F: list


def _scaled_generator(ctx: RingContext, v: Fraction, unit: RingElem | None) -> RingElem:
    """s^(v N) times a unit, 0 once v >= 1."""
    if v >= 1:
        return ctx.zero()
    k = v * ctx.N
    if k.denominator != 1:
        raise PrecisionError(f"valuation {v} is not representable with N = {ctx.N}")
    g = ctx.s_power(int(k))
    return g if unit is None else g * unit


def raynaud_crystal(ctx: RingContext, params: RaynaudParams) -> RaynaudCrystal:
    """V_i of valuation p v_b(i-1), F_i of valuation p v_a(i-1) (1 x 1 matrices)."""
    if params.f != ctx.f:
        raise ValueError("parameter count must equal f")
    for x in params.va + params.vb:
        if (x * ctx.N).denominator != 1:
            raise PrecisionError(f"parameter {x} is not representable with N = {ctx.N}")
    V, F = [], []
    for i in range(ctx.f):
        k = (i - 1) % ctx.f
        ub = params.ub[k] if params.ub else None
        ua = params.ua[k] if params.ua else None
        V.append(Matrix(ctx, [[_scaled_generator(ctx, ctx.p * params.vb[k], ub)]]))
        F.append(Matrix(ctx, [[_scaled_generator(ctx, ctx.p * params.va[k], ua)]]))
    return RaynaudCrystal(params, V, F)


def raynaud_chain_module(ctx: RingContext, digits: Sequence[int]) -> DieudonneModule:
    """h = 2, d = (1, ..., 1) with F_i = span(e1) and wF_i = span(e1 + s^b_i e2).

    Its conjugate quotient E / wF is a Raynaud piece whose codegrees are b_i / N
    when these are small.
    """
    from .crystal import assemble, coordinate_submodule

    one, zero = ctx.one(), ctx.zero()
    hodge = [coordinate_submodule(ctx, 2, [0]) for _ in range(ctx.f)]
    conj = []
    for b in digits:
        col = Matrix(ctx, [[one], [ctx.s_power(b) if b < ctx.N else zero]])
        conj.append(Submodule.from_basis(col))
    return assemble(ctx, 2, (1,) * ctx.f, hodge, conj)


# --- quotient crystals -----------------------------------------------------------

def _right_inverse(pi: Matrix) -> Matrix:
    snf = smith_normal_form(pi)
    if any(c != 0 for c in snf.sigma) or len(snf.sigma) != pi.rows:
        raise QuotientError(f"projection is not surjective (SNF {snf.sigma})")
    k = pi.rows
    return snf.R.columns(range(k)) @ snf.L


@dataclass
class QuotientCrystal:
    parent: DieudonneModule
    level: int
    rank: int
    proj: list
    V: list
    F: list
    kernels: list
    codegrees: dict = field(default_factory=dict)

    @property
    def floors(self) -> dict:
        d = self.parent.d
        return {i: Fraction(max(self.rank - d[i], 0)) for i in range(self.parent.f)}

    @property
    def degree(self) -> Fraction:
        return sum(self.codegrees.values(), Fraction(0))

    @property
    def alpha(self) -> Fraction:
        return self.degree - sum(self.floors.values(), Fraction(0))

    def to_dict(self) -> dict:
        frac = lambda q: [q.numerator, q.denominator]
        return {"level": self.level, "rank": self.rank,
                "codegrees": [frac(self.codegrees[i]) for i in sorted(self.codegrees)],
                "alpha": frac(self.alpha)}


def attach_quotient(D: DieudonneModule, proj: Sequence[Matrix], level: int | None = None) -> QuotientCrystal:
    """Induce V_C, F_C through the surjections and compute codegrees."""
    f, h = D.f, D.h
    delta = proj[0].rows
    if any(P.shape != (delta, h) for P in proj) or len(proj) != f:
        raise QuotientError("projections must all be delta x h, one per embedding")
    prof = D.profile
    if level is None:
        if delta not in prof.delta[1:-1]:
            raise QuotientError(f"rank {delta} is not one of the delta_j {prof.delta[1:-1]}")
        level = prof.delta.index(delta)
    elif prof.delta[level] != delta:
        raise QuotientError(f"rank {delta} does not match delta_{level} = {prof.delta[level]}")
    sec = [_right_inverse(P) for P in proj]
    V, F = [], []
    for i in range(f):
        ip = D.prev(i)
        tp = proj[ip].frobenius()
        Vc = tp @ D.V[i] @ sec[i]
        Fc = proj[i] @ D.F[i] @ sec[ip].frobenius()
        if Vc @ proj[i] != tp @ D.V[i]:
            raise QuotientError(f"V does not descend to the quotient at i={i}")
        if Fc @ tp != proj[i] @ D.F[i]:
            raise QuotientError(f"F does not descend to the quotient at i={i}")
        V.append(Vc)
        F.append(Fc)
    kernels = [kernel_summand(P, h - delta) for P in proj]
    Q = QuotientCrystal(D, level, delta, list(proj), V, F, kernels)
    for i in range(f):
        nx = D.next(i)
        if delta <= D.d[i]:
            x = V[nx].det()
            base = Fraction(0)
        else:
            x = natural_map_det(D.F[nx], None, kernels[i].frobenius(), None, kernels[nx], h, ctx=D.ctx)
            base = Fraction(delta - D.d[i])
        v = x.valuation().value
        if v >= 1:
            raise PrecisionError(f"determinant vanishes at i={i}: codegree needs p*deg < 1")
        Q.codegrees[i] = base + v / D.p
    return Q


def quotient_by_conjugate(D: DieudonneModule, AF: AdequateFiltration, j: int) -> list:
    """Projections E_i -> E_i / wF_i^[j]; wF^[j] is stable under V and F."""
    out = []
    for i in range(D.f):
        W = AF.wF(i, j)
        P, _ = adapted_basis([W], D.h, D.ctx)
        out.append(P.inverse().select_rows(range(W.rank, D.h)))
    return out


def is_canonical(Q: QuotientCrystal, strong: bool = False) -> bool:
    bound = Fraction(1, Q.parent.p + 1) if strong else Fraction(1, 2)
    return Q.alpha < bound


def _hodge_image_sigma(D, Q, i):
    """Elementary divisors of omega_G,i -> omega_C,i (or the dual side)."""
    if Q.rank <= D.d[i]:
        return smith_normal_form(Q.proj[i] @ D.hodge[i]).sigma
    F = D.hodge_submodule(i)
    co = F.coordinates(Q.kernels[i].basis).select_rows(range(F.rank, D.h))
    return smith_normal_form(co).sigma


def companion_filtration(D: DieudonneModule, Q: QuotientCrystal, i: int) -> Submodule | None:
    """G_i: kernel meets Hodge (delta_j < d_i) or kernel plus Hodge (delta_j > d_i)."""
    F = D.hodge_submodule(i)
    K = Q.kernels[i]
    if Q.rank < D.d[i]:
        cut = Q.proj[i] @ F.basis
        snf = smith_normal_form(cut)
        basis = F.basis @ snf.R.columns(range(Q.rank, F.rank))
        return Submodule.from_basis(basis)
    if Q.rank > D.d[i]:
        return image_hull(F.basis.hstack(K.basis), D.h + D.d[i] - Q.rank, strict=False)
    return None


def check_degree_theorem(D: DieudonneModule, AF: AdequateFiltration, Q: QuotientCrystal,
                         rep: InvariantReport) -> ValidationReport:
    out = ValidationReport()
    j, alpha, p = Q.level, Q.alpha, D.p
    out.add("strong canonical", is_canonical(Q, strong=True), (), f"alpha = {alpha}")
    cap = 1 - 2 * alpha
    for i in range(D.f):
        floor = Q.floors[i]
        deg = Q.codegrees[i]
        out.add("budget floor", deg >= floor, (i,), f"{deg} < {floor}")
        out.add("coordinate cap", deg <= floor + alpha, (i,), f"{deg} > {floor} + {alpha}")
        w = rep.h[(i, j)][1]
        out.add("degree theorem", min(deg - floor, cap) == min(w, cap), (i,),
                f"deg = {deg}, floor + w = {floor + w}")
        sig = _hodge_image_sigma(D, Q, i)
        lim = alpha * D.ctx.N
        out.add("free quotient", all(c <= lim for c in sig), (i,), f"SNF {sig}, bound {alpha}")
        G = companion_filtration(D, Q, i)
        if G is not None:
            digits = math.ceil(cap * D.ctx.N)
            out.add("kernel matches filtration", digits <= 0 or G.equals(AF.F(i, j), digits), (i,))
    for i in range(D.f):
        if D.profile.s[i] != j:
            continue
        tot = sum((p ** k * (Q.codegrees[(i - k) % D.f] - max(D.d[i] - D.d[(i - k) % D.f], 0))
                   for k in range(D.f)), Fraction(0))
        out.add("Hasse from degrees", min(Fraction(1), tot) == rep.Ha[i][1], (i,),
                f"{tot} vs v(Ha) = {rep.Ha[i][1]}")
        out.add("Hasse from degrees via link", min(Fraction(1), tot) == link_sum(D, rep, i), (i,))
    return out


def check_graded_degrees(D: DieudonneModule, chain: dict, rep: InvariantReport) -> ValidationReport:
    """Graded pieces of a chain {level: QuotientCrystal} against v(m) and v(n)."""
    out = ValidationReport()
    prof = D.profile
    r, delta = prof.r, prof.delta

    def codeg(k, i):
        if k == 0:
            return Fraction(0)
        if k == r + 1:
            return Fraction(D.h - D.d[i])
        return chain[k].codegrees[i] if k in chain else None

    for i in range(D.f):
        s = prof.s[i]
        for k in range(1, min(s, r) + 1):
            a, b = codeg(k, i), codeg(k - 1, i)
            if a is not None and b is not None:
                out.add("graded m", a - b == rep.m[(i, k)][1], (i, k), f"{a - b} vs {rep.m[(i, k)][1]}")
        for k in range(max(s, 1), r + 1):
            a, b = codeg(k + 1, i), codeg(k, i)
            if a is not None and b is not None:
                deg = (delta[k + 1] - delta[k]) - (a - b)
                out.add("graded n", deg == rep.n[(i, k)][1], (i, k), f"{deg} vs {rep.n[(i, k)][1]}")
    return out
