"""Refined Hasse invariants, graded sections and the mu-ordinary invariants Ha_i.

Every line bundle is trivialised by the wedge of the stored witness bases, so
section values are ring elements defined up to units; valuations are the
basis-free content.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .crystal import DieudonneModule, ValidationReport
from .exactring import RingElem
from .filtration import AdequateFiltration, build_adequate
from .semilinear import Matrix, exterior_power, natural_map_det, smith_normal_form


def _val(x: RingElem) -> Fraction:
    return x.valuation().value


@dataclass
class InvariantReport:
    h: dict = field(default_factory=dict)       # (i, j) -> (value, valuation)
    m: dict = field(default_factory=dict)
    n: dict = field(default_factory=dict)
    Ha: dict = field(default_factory=dict)      # i -> (value, valuation)
    precision: int = 0
    N: int = 0

    @property
    def w_grid(self) -> dict:
        return {k: v for k, (_, v) in self.h.items()}

    @property
    def w(self) -> Fraction:
        return sum((v for _, v in self.h.values()), Fraction(0))

    @property
    def Ha_total(self) -> Fraction:
        return min(Fraction(1), sum((v for _, v in self.Ha.values()), Fraction(0)))

    def to_dict(self) -> dict:
        frac = lambda q: [q.numerator, q.denominator]
        grid = lambda g: [{"i": i, "j": j, "valuation": frac(v)} for (i, j), (_, v) in sorted(g.items())]
        return {
            "w": grid(self.h),
            "m": grid(self.m),
            "n": grid(self.n),
            "Ha": [{"i": i, "valuation": frac(v)} for i, (_, v) in sorted(self.Ha.items())],
            "Ha_total": frac(self.Ha_total),
            "w_sum": frac(self.w),
            "precision": frac(Fraction(self.precision, self.N)),
        }

    def table(self, f: int, r: int) -> str:
        lines = ["i \\ j " + " ".join(f"{j:>7}" for j in range(1, r + 1)) + "      Ha"]
        for i in range(f):
            cells = [str(self.h[(i, j)][1]) if (i, j) in self.h else "-" for j in range(1, r + 1)]
            ha = str(self.Ha[i][1]) if i in self.Ha else "-"
            lines.append(f"{i:>5} " + " ".join(f"{c:>7}" for c in cells) + f" {ha:>7}")
        return "\n".join(lines)


def _section(L, X_lo, X_hi, Y_lo, Y_hi, h) -> tuple:
    x = natural_map_det(L, X_lo, X_hi, Y_lo, Y_hi, h, ctx=(X_hi or X_lo or Y_hi or Y_lo).ctx)
    return x, _val(x)


def refined_hasse(D: DieudonneModule, AF: AdequateFiltration, report: InvariantReport | None = None
                  ) -> InvariantReport:
    """h_i^[j]: F/F^[j] -> E/wF^[j] for j <= s(i), wF^[j] -> F^[j]/F otherwise."""
    rep = report or InvariantReport(precision=AF.precision, N=D.ctx.N)
    prof = D.profile
    for i in range(D.f):
        s = prof.s[i]
        for j in range(1, prof.r + 1):
            if j <= s:
                rep.h[(i, j)] = _section(None, AF.F(i, j), AF.F(i, 0), AF.wF(i, j), None, D.h)
            else:
                rep.h[(i, j)] = _section(None, None, AF.wF(i, j), AF.F(i, 0), AF.F(i, j), D.h)
    return rep


def graded_sections(D: DieudonneModule, AF: AdequateFiltration, report: InvariantReport | None = None
                    ) -> InvariantReport:
    """m_i^[j] for 1 <= j <= s(i); n_i^[j] for s(i) <= j <= r (j >= 1)."""
    rep = report or InvariantReport(precision=AF.precision, N=D.ctx.N)
    prof = D.profile
    r = prof.r
    for i in range(D.f):
        s = prof.s[i]
        for j in range(1, min(s, r) + 1):
            rep.m[(i, j)] = _section(None, AF.F(i, j), AF.F(i, j - 1), AF.wF(i, j), AF.wF(i, j - 1), D.h)
        for j in range(max(s, 1), r + 1):
            if j == s:
                rep.n[(i, j)] = _section(None, AF.wF(i, j + 1), AF.wF(i, j), AF.F(i, j + 1), None, D.h)
            else:
                rep.n[(i, j)] = _section(None, AF.wF(i, j + 1), AF.wF(i, j), AF.F(i, j + 1), AF.F(i, j), D.h)
    return rep


def f_map(D: DieudonneModule, i: int, d: int, preimage_shift: Matrix | None = None,
          complement_shift: Matrix | None = None) -> Matrix:
    """The wedge map f_i^d from the d-th exterior power of E_i to that of phi(E_{i-1}).

    Above rank d_{i-1} it is evaluated on an adapted basis [u | w] with w a basis
    of im F_i, u a complement and y chosen preimages of w under F_i:
    u_1..u_{d'} ^ w_T maps to V u_1 ^ ... ^ V u_{d'} ^ y_T, other monomials to 0.
    The optional shifts move y inside ker F_i and u by elements of im F_i.
    """
    h = D.h
    dp = D.d[D.prev(i)]
    if not 0 <= d <= h:
        raise ValueError(f"degree {d} out of range")
    A, B = D.V[i], D.F[i]
    if d <= dp:
        return exterior_power(A, d)
    snf = smith_normal_form(B)
    k = h - dp
    w = snf.U.columns(range(k))
    y = snf.R.columns(range(k))
    u = snf.U.columns(range(k, h))
    if preimage_shift is not None:
        y = y + preimage_shift
    if complement_shift is not None:
        u = u + complement_shift
    P = u.hstack(w)
    Vu = A @ u
    subsets = list(itertools.combinations(range(h), d))
    cols = []
    z = D.ctx.zero()
    for S in subsets:
        if S[:dp] != tuple(range(dp)):
            cols.append([z] * len(subsets))
            continue
        T = [t - dp for t in S[dp:]]
        img = Vu.hstack(y.columns(T))
        cols.append(exterior_power(img, d).column(0))
    adapted = Matrix.from_columns(D.ctx, cols, len(subsets))
    return adapted @ exterior_power(P.inverse(), d)


def mu_hasse(D: DieudonneModule, report: InvariantReport | None = None) -> InvariantReport:
    """Ha_i: the f-fold twisted composite of wedge maps on the top wedge of F_i."""
    rep = report or InvariantReport(precision=D.ctx.N, N=D.ctx.N)
    f = D.f
    for i in range(f):
        d = D.d[i]
        if d == 0:
            continue
        H = D.hodge[i]
        vec = exterior_power(H, d)
        for m in range(f):
            k = (i - m) % f
            vec = f_map(D, k, d).frobenius(m) @ vec
        ref = exterior_power(H, d).frobenius(f)
        pivot = next(t for t in range(ref.rows) if ref[t, 0].is_unit())
        ha = vec[pivot, 0] * ref[pivot, 0].inverse()
        if vec != ref.scale(ha):
            raise ArithmeticError(f"composite does not preserve the Hodge line at i={i}")
        rep.Ha[i] = (ha, _val(ha))
    return rep


def compute_invariants(D: DieudonneModule, AF: AdequateFiltration | None = None) -> InvariantReport:
    AF = AF or build_adequate(D)
    rep = InvariantReport(precision=AF.precision, N=D.ctx.N)
    refined_hasse(D, AF, rep)
    graded_sections(D, AF, rep)
    mu_hasse(D, rep)
    return rep


def link_sum(D: DieudonneModule, rep: InvariantReport, i: int) -> Fraction:
    """min(1, sum_k p^k w_{i-k}^[s(i)])."""
    s = D.profile.s[i]
    tot = sum((D.p ** k * rep.h[((i - k) % D.f, s)][1] for k in range(D.f)), Fraction(0))
    return min(Fraction(1), tot)


def check_link(D: DieudonneModule, rep: InvariantReport) -> ValidationReport:
    out = ValidationReport()
    for i in range(D.f):
        if D.d[i] in (0, D.h):
            continue
        lhs, rhs = link_sum(D, rep, i), rep.Ha[i][1]
        out.add("link", lhs == rhs, (i,), f"{lhs} vs v(Ha)={rhs}")
    return out


def check_factorization(D: DieudonneModule, rep: InvariantReport) -> ValidationReport:
    """v(h^[j]) = sum of v(m^[k]) (k <= j) or of v(n^[k]) (k >= j), below the clamp at 1."""
    out = ValidationReport()
    prof = D.profile
    for (i, j), (_, w) in rep.h.items():
        s = prof.s[i]
        if j <= s:
            tot = sum(rep.m[(i, k)][1] for k in range(1, j + 1))
        else:
            tot = sum(rep.n[(i, k)][1] for k in range(j, prof.r + 1))
        out.add("factorization", w == min(Fraction(1), tot), (i, j), f"{w} vs {tot}")
    return out


def conjugate_power_det(D: DieudonneModule, AF: AdequateFiltration, i: int, j: int) -> RingElem:
    """det of V_{i+1} on E/wF^[j] (j <= s(i)) or of F_{i+1} on phi(wF_i^[j]) (j > s(i))."""
    nx = D.next(i)
    tw = AF.wF(i, j).frobenius()
    if j <= D.profile.s[i]:
        return natural_map_det(D.V[nx], AF.wF(nx, j), None, tw, None, D.h, ctx=D.ctx)
    return natural_map_det(D.F[nx], None, tw, None, AF.wF(nx, j), D.h, ctx=D.ctx)


def check_conjugate_power(D: DieudonneModule, AF: AdequateFiltration, rep: InvariantReport) -> ValidationReport:
    out = ValidationReport()
    for (i, j), (_, w) in rep.h.items():
        v = _val(conjugate_power_det(D, AF, i, j))
        want = min(Fraction(1), D.p * w)
        out.add("conjugate power", v == want, (i, j), f"{v} vs {want}")
    return out
