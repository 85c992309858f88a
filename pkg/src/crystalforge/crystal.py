"""Crystal data ``(E_i, V_i, F_i, Hodge_i)`` over R_N, validation and generators.

Indices are 0-based and cyclic: ``V[i]`` maps E_i to the Frobenius twist of
E_{i-1}, ``F[i]`` goes back, and ``hodge[i]`` is an h x d_i basis matrix.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .exactring import NotDivisible, RingContext, RingElem
from .semilinear import (
    Matrix,
    Submodule,
    SummandError,
    image_hull,
    kernel_summand,
    smith_normal_form,
)


class InvalidModule(ValueError):
    pass


@dataclass
class Check:
    name: str
    ok: bool
    where: tuple = ()
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    def add(self, name, ok, where=(), detail=""):
        self.checks.append(Check(name, bool(ok), tuple(where), detail))
        return bool(ok)

    def extend(self, other: "ValidationReport"):
        self.checks.extend(other.checks)
        return self

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def to_dict(self):
        return {"ok": self.ok, "checks": [
            {"name": c.name, "ok": c.ok, "where": list(c.where), "detail": c.detail} for c in self.checks]}

    def summary(self) -> str:
        bad = self.failures()
        head = f"{len(self.checks) - len(bad)}/{len(self.checks)} checks passed"
        return "\n".join([head] + [f"  FAIL {c.name} at {c.where}: {c.detail}" for c in bad])


@dataclass(frozen=True)
class FiltrationProfile:
    """Distinct intermediate Hodge ranks.

    ``delta`` runs over delta_0 = 0 < delta_1 < ... < delta_r < delta_{r+1} = h
    and ``s[i]`` is the index with d_i = delta_{s[i]}.
    """

    h: int
    r: int
    delta: tuple
    s: tuple

    @classmethod
    def from_type(cls, d: Sequence[int], h: int) -> "FiltrationProfile":
        mids = sorted({x for x in d if 0 < x < h})
        delta = (0, *mids, h)
        s = tuple(delta.index(x) for x in d)
        return cls(h, len(mids), delta, s)


@dataclass(eq=False)
class DieudonneModule:
    ctx: RingContext
    h: int
    d: tuple
    V: list
    F: list
    hodge: list
    hodge_witness: list | None = None

    def __post_init__(self):
        self.d = tuple(self.d)
        if len(self.d) != self.ctx.f or not (len(self.V) == len(self.F) == len(self.hodge) == self.ctx.f):
            raise InvalidModule("need one matrix of each kind per embedding")
        for i, x in enumerate(self.d):
            if not 0 <= x <= self.h:
                raise InvalidModule(f"type entry d_{i} = {x} outside [0, {self.h}]")

    @property
    def f(self) -> int:
        return self.ctx.f

    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def profile(self) -> FiltrationProfile:
        return FiltrationProfile.from_type(self.d, self.h)

    def prev(self, i: int) -> int:
        return (i - 1) % self.f

    def next(self, i: int) -> int:
        return (i + 1) % self.f

    def hodge_submodule(self, i: int) -> Submodule:
        if self.hodge_witness is not None:
            return Submodule.from_basis(self.hodge[i], self.hodge_witness[i])
        return Submodule.from_basis(self.hodge[i])

    def twisted_hodge(self, i: int) -> Submodule:
        """phi(F_{i-1}) inside the twist of E_{i-1}: the target of V_i."""
        return self.hodge_submodule(self.prev(i)).frobenius()

    def conjugate(self, i: int) -> Submodule:
        return conjugate_submodule(self, i)

    def same_as(self, other: "DieudonneModule") -> bool:
        """Bit-for-bit equality of V, F, Hodge bases (and witnesses when both carry one)."""
        if (self.ctx != other.ctx or self.h != other.h or self.d != other.d):
            return False
        pairs = list(zip(self.V, other.V)) + list(zip(self.F, other.F)) + list(zip(self.hodge, other.hodge))
        if self.hodge_witness is not None and other.hodge_witness is not None:
            pairs += list(zip(self.hodge_witness, other.hodge_witness))
        return all(a == b and a.min_prec() == b.min_prec() for a, b in pairs)


def conjugate_submodule(D: DieudonneModule, i: int) -> Submodule:
    """wF_i = ker V_i (= im F_i for valid data)."""
    rank = D.h - D.d[D.prev(i)]
    try:
        return kernel_summand(D.V[i], rank)
    except SummandError as exc:
        raise InvalidModule(f"conjugate filtration at i={i}: {exc}") from exc


def validate(D: DieudonneModule) -> ValidationReport:
    rep = ValidationReport()
    h, ctx = D.h, D.ctx
    for i in range(D.f):
        dp = D.d[D.prev(i)]
        A, B, H = D.V[i], D.F[i], D.hodge[i]
        if not rep.add("shapes", A.shape == (h, h) and B.shape == (h, h) and H.shape == (h, D.d[i]), (i,)):
            continue
        rep.add("B·A = 0", (B @ A).is_zero(), (i,))
        rep.add("A·B = 0", (A @ B).is_zero(), (i,))
        sH = smith_normal_form(H)
        rep.add("hodge summand", all(c == 0 for c in sH.sigma), (i,), f"SNF {sH.sigma}")
        if D.hodge_witness is not None:
            Wt = D.hodge_witness[i]
            ok = Wt.shape == (h, h) and Wt.columns(range(D.d[i])) == H
            if ok:
                try:
                    Wt.inverse()
                except NotDivisible:
                    ok = False
            rep.add("hodge witness", ok, (i,))
        sA, sB = smith_normal_form(A), smith_normal_form(B)
        rep.add("V elementary divisors", set(sA.sigma) <= {0, ctx.N} and sA.unit_rank == dp, (i,),
                f"SNF {sA.sigma}, expected {dp} units")
        rep.add("F elementary divisors", set(sB.sigma) <= {0, ctx.N} and sB.unit_rank == h - dp, (i,),
                f"SNF {sB.sigma}, expected {h - dp} units")
        try:
            phiH = D.twisted_hodge(i)
        except (SummandError, NotDivisible) as exc:
            rep.add("twisted hodge summand", False, (i,), str(exc))
            continue
        try:
            ker_V = kernel_summand(A, h - dp)
            im_F = image_hull(B, h - dp)
            rep.add("ker V = im F", ker_V.equals(im_F) and im_F.contains(B), (i,))
        except SummandError as exc:
            rep.add("ker V = im F", False, (i,), str(exc))
        try:
            ker_F = kernel_summand(B, dp)
            rep.add("ker F = phi(Hodge)", ker_F.equals(phiH), (i,))
        except SummandError as exc:
            rep.add("ker F = phi(Hodge)", False, (i,), str(exc))
        try:
            im_V = image_hull(A, dp)
            rep.add("im V = phi(Hodge)", im_V.equals(phiH) and phiH.contains(A), (i,))
        except SummandError as exc:
            rep.add("im V = phi(Hodge)", False, (i,), str(exc))
    return rep


# --- generators ---------------------------------------------------------------

def _ctx(p, f, N, ctx):
    if ctx is not None:
        return ctx
    return RingContext(p, f, N if N is not None else 4 * p * f)


def coordinate_submodule(ctx, h, idx: Sequence[int]) -> Submodule:
    idx = list(idx)
    rest = [k for k in range(h) if k not in idx]
    wit = Matrix.identity(ctx, h).columns(idx + rest)
    return Submodule(wit.columns(range(len(idx))), wit)


def mu_ordinary(p: int, f: int, h: int, d: Sequence[int], N: int | None = None,
                ctx: RingContext | None = None) -> DieudonneModule:
    """Split datum: V_i = diag(1^{d_{i-1}}, 0), F_i = diag(0, 1^{h-d_{i-1}})."""
    ctx = _ctx(p, f, N, ctx)
    d = tuple(d)
    if len(d) != f or any(not 0 <= x <= h for x in d):
        raise InvalidModule(f"bad type {d} for f={f}, h={h}")
    one, zero = ctx.one(), ctx.zero()
    V, F, H = [], [], []
    for i in range(f):
        dp = d[(i - 1) % f]
        V.append(Matrix.diagonal(ctx, [one] * dp + [zero] * (h - dp)))
        F.append(Matrix.diagonal(ctx, [zero] * dp + [one] * (h - dp)))
        H.append(Matrix.identity(ctx, h).columns(range(d[i])))
    return DieudonneModule(ctx, h, d, V, F, H)


def supersingular(p: int, N: int | None = None, c: RingElem | int | None = None,
                  ctx: RingContext | None = None) -> DieudonneModule:
    """f = 1, h = 2: V = F = [[0,1],[0,0]] with Hodge line (1, c).

    c must be killed by Frobenius (v(c) >= 1/p); its valuation is the Hasse
    invariant of the datum.
    """
    ctx = _ctx(p, 1, N, ctx)
    one, zero = ctx.one(), ctx.zero()
    c = zero if c is None else (c if isinstance(c, RingElem) else ctx.elem(c))
    if not c.frobenius().is_zero():
        raise InvalidModule("Hodge slope must have valuation >= 1/p")
    A = Matrix(ctx, [[zero, one], [zero, zero]])
    H = Matrix(ctx, [[one], [c]])
    return DieudonneModule(ctx, 2, (1,), [A], [A.copy()], [H])


def assemble(ctx: RingContext, h: int, d: Sequence[int], hodge: Sequence[Submodule],
             conj: Sequence[Submodule], alpha: Sequence[Matrix] | None = None,
             beta: Sequence[Matrix] | None = None) -> DieudonneModule:
    """The valid datum with given Hodge and conjugate summands.

    V_i sends the complement of conj[i] isomorphically (via alpha[i]) onto
    phi(hodge[i-1]); F_i sends the complement of phi(hodge[i-1]) onto conj[i]
    via beta[i].  Any valid datum arises this way.
    """
    f = ctx.f
    d = tuple(d)
    V, F = [], []
    for i in range(f):
        dp = d[(i - 1) % f]
        P = hodge[(i - 1) % f].frobenius().witness
        K = conj[i]
        if K.rank != h - dp or hodge[(i - 1) % f].rank != dp:
            raise InvalidModule(f"rank mismatch at i={i}")
        Q = K.witness
        a = alpha[i] if alpha is not None else Matrix.identity(ctx, dp)
        b = beta[i] if beta is not None else Matrix.identity(ctx, h - dp)
        Pinv, Qinv = P.inverse(), Q.inverse()
        V.append(P.columns(range(dp)) @ a @ Qinv.select_rows(range(h - dp, h)))
        F.append(Q.columns(range(h - dp)) @ b @ Pinv.select_rows(range(dp, h)))
    H = [S.basis for S in hodge]
    W = [S.witness for S in hodge]
    return DieudonneModule(ctx, h, d, V, F, H, W)


def random_unit(ctx: RingContext, rng: random.Random) -> RingElem:
    q, dec = ctx.p ** ctx.f, ctx.field.decode
    terms = {t: dec(rng.randrange(q)) for t in range(1, ctx.N) if rng.random() < 0.3}
    terms[0] = dec(rng.randrange(1, q))
    return ctx.elem(terms)


def random_elem(ctx: RingContext, rng: random.Random, min_digit: int = 0, density: float = 0.3) -> RingElem:
    q, dec = ctx.p ** ctx.f, ctx.field.decode
    return ctx.elem({t: dec(rng.randrange(q)) for t in range(min_digit, ctx.N) if rng.random() < density})


def random_invertible(ctx: RingContext, n: int, rng: random.Random) -> Matrix:
    """Lower-unitriangular x diagonal units x upper-unitriangular, then a row permutation."""
    one, zero = ctx.one(), ctx.zero()
    Lm = Matrix(ctx, [[one if i == j else (random_elem(ctx, rng) if j < i else zero) for j in range(n)]
                      for i in range(n)], n, n)
    Um = Matrix(ctx, [[one if i == j else (random_elem(ctx, rng) if j > i else zero) for j in range(n)]
                      for i in range(n)], n, n)
    Dm = Matrix.diagonal(ctx, [random_unit(ctx, rng) for _ in range(n)])
    perm = list(range(n))
    rng.shuffle(perm)
    return (Lm @ Dm @ Um).select_rows(perm)


def perturbed_submodule(base: Submodule, rng: random.Random, min_digit: int) -> Submodule:
    """Move a coordinate summand by terms of s-adic order >= min_digit."""
    ctx, n, r = base.ctx, base.ambient_rank, base.rank
    if min_digit >= ctx.N or r in (0, n):
        return base
    Z = Matrix(ctx, [[random_elem(ctx, rng, min_digit) for _ in range(r)] for _ in range(n)], n, r)
    coords = base.witness_inverse @ Z
    for a in range(r):
        for b in range(r):
            coords.entries[a][b] = ctx.zero()
    Zc = base.witness @ coords
    wit = base.witness.columns(range(r)) + Zc
    full = wit.hstack(base.witness.columns(range(r, n)))
    return Submodule(wit, full)


def random_module(ctx: RingContext, h: int, d: Sequence[int], rng: random.Random,
                  min_digit: int = 1, split: bool = True) -> DieudonneModule:
    """Random valid datum near a coordinate configuration.

    With ``split`` the base is the mu-ordinary coordinate layout, so small
    ``min_digit`` gives small positive invariants; otherwise Hodge and
    conjugate coordinates are chosen at random (Ekedahl-Oort-like shapes).
    """
    f = ctx.f
    d = tuple(d)
    hodge, conj = [], []
    for i in range(f):
        dp = d[(i - 1) % f]
        if split:
            T = list(range(d[i]))
            Wc = list(range(dp, h))
        else:
            T = sorted(rng.sample(range(h), d[i]))
            Wc = sorted(rng.sample(range(h), h - dp))
        hodge.append(perturbed_submodule(coordinate_submodule(ctx, h, T), rng, min_digit))
        conj.append(perturbed_submodule(coordinate_submodule(ctx, h, Wc), rng, min_digit))
    alpha = [random_invertible(ctx, d[(i - 1) % f], rng) for i in range(f)]
    beta = [random_invertible(ctx, h - d[(i - 1) % f], rng) for i in range(f)]
    return assemble(ctx, h, d, hodge, conj, alpha, beta)


def permutation_module(ctx: RingContext, h: int, d: Sequence[int], rng: random.Random) -> DieudonneModule:
    return random_module(ctx, h, d, rng, min_digit=ctx.N, split=False)


def gauge_twist(D: DieudonneModule, g: Sequence[Matrix]) -> DieudonneModule:
    """Change of basis E_i -> g_i E_i."""
    try:
        ginv = [x.inverse() for x in g]
    except NotDivisible as exc:
        raise InvalidModule("gauge matrix is not invertible") from exc
    V, F, H = [], [], []
    for i in range(D.f):
        j = D.prev(i)
        V.append(g[j].frobenius() @ D.V[i] @ ginv[i])
        F.append(g[i] @ D.F[i] @ ginv[j].frobenius())
        H.append(g[i] @ D.hodge[i])
    W = None if D.hodge_witness is None else [g[i] @ D.hodge_witness[i] for i in range(D.f)]
    return DieudonneModule(D.ctx, D.h, D.d, V, F, H, W)


def perturb_hodge(D: DieudonneModule, i: int, Z: Matrix) -> DieudonneModule:
    """H_i <- H_i + Z, where Z is killed by Frobenius."""
    if Z.shape != D.hodge[i].shape:
        raise InvalidModule("perturbation has the wrong shape")
    N, p = D.ctx.N, D.ctx.p
    for row in Z.entries:
        for z in row:
            if z.v and p * z.val_digits() < N:
                raise InvalidModule(f"perturbation entry {z!r} has valuation below 1/p")
    H = list(D.hodge)
    H[i] = H[i] + Z
    W = None
    if D.hodge_witness is not None:
        W = list(D.hodge_witness)
        W[i] = H[i].hstack(W[i].columns(range(D.d[i], D.h)))
    return DieudonneModule(D.ctx, D.h, D.d, list(D.V), list(D.F), H, W)


def direct_sum(D1: DieudonneModule, D2: DieudonneModule) -> DieudonneModule:
    """Block-diagonal sum of two data over the same ring."""
    if D1.ctx != D2.ctx:
        raise InvalidModule("summands live over different rings")
    ctx, h1, h2 = D1.ctx, D1.h, D2.h

    def block(X, Y):
        top = X.hstack(Matrix.zeros(ctx, X.rows, Y.cols))
        return top.vstack(Matrix.zeros(ctx, Y.rows, X.cols).hstack(Y))

    def hodge_block(M1, M2, i):
        # Hodge columns of both summands first, then the complements
        d1, d2 = D1.d[i], D2.d[i]
        B = block(M1, M2)
        order = list(range(d1)) + list(range(M1.cols, M1.cols + d2)) + \
            list(range(d1, M1.cols)) + list(range(M1.cols + d2, M1.cols + M2.cols))
        return B.columns(order[: B.cols])

    V = [block(a, b) for a, b in zip(D1.V, D2.V)]
    F = [block(a, b) for a, b in zip(D1.F, D2.F)]
    H = [block(a, b) for a, b in zip(D1.hodge, D2.hodge)]
    W = None
    if D1.hodge_witness is not None and D2.hodge_witness is not None:
        W = [hodge_block(a, b, i) for i, (a, b) in enumerate(zip(D1.hodge_witness, D2.hodge_witness))]
    d = tuple(a + b for a, b in zip(D1.d, D2.d))
    return DieudonneModule(ctx, h1 + h2, d, V, F, H, W)
