"""Dual crystal datum, transported filtrations and the duality checks."""

from __future__ import annotations

from .crystal import DieudonneModule, ValidationReport, validate
from .exactring import RingElem
from .filtration import AdequateFiltration, from_hodge_side, verify_adequate
from .invariants import InvariantReport, compute_invariants
from .semilinear import Submodule, det_division_free, natural_map_det, orthogonal_complement


def dual_module(D: DieudonneModule) -> DieudonneModule:
    """V' = F^T, F' = V^T, Hodge' = annihilator of the Hodge summand."""
    comps = [orthogonal_complement(D.hodge_submodule(i)) for i in range(D.f)]
    return DieudonneModule(
        D.ctx, D.h, tuple(D.h - x for x in D.d),
        [B.transpose() for B in D.F],
        [A.transpose() for A in D.V],
        [S.basis for S in comps],
        [S.witness for S in comps],
    )


def dual_filtration(D: DieudonneModule, AF: AdequateFiltration, Dd: DieudonneModule | None = None
                    ) -> tuple[DieudonneModule, AdequateFiltration]:
    """Annihilators with reversed index: F'^[r+1-j] = (F^[j])^perp."""
    Dd = Dd or dual_module(D)
    r = AF.profile.r
    side = {(i, r + 1 - j): orthogonal_complement(S) for (i, j), S in AF.hodge_side.items()}
    consumed = {(i, r + 1 - j): c for (i, j), c in AF.consumed.items()}
    return Dd, from_hodge_side(Dd, side, consumed)


def complementary_sections(B: Submodule, C: Submodule) -> tuple[RingElem, RingElem, RingElem]:
    """det(C -> A/B), det(B -> A/C) and det(B + C -> A) for summands of complementary rank.

    With the adapted bases used by ``natural_map_det`` one has exactly
    x * det(P_B) = det[B | C] and y * det(P_C) = det[C | B].
    """
    n = B.ambient_rank
    ctx = B.ctx
    x = natural_map_det(None, None, C, B, None, n, ctx=ctx)
    y = natural_map_det(None, None, B, C, None, n, ctx=ctx)
    z = det_division_free(B.basis.hstack(C.basis))
    return x, y, z


def check_duality(D: DieudonneModule, AF: AdequateFiltration, rep: InvariantReport | None = None
                  ) -> ValidationReport:
    out = ValidationReport()
    rep = rep or compute_invariants(D, AF)
    Dd, AFd = dual_filtration(D, AF)
    out.add("dual validates", validate(Dd).ok)
    out.add("dual filtration adequate", verify_adequate(Dd, AFd).ok)
    repd = compute_invariants(Dd, AFd)
    r = AF.profile.r
    for (i, j), (_, w) in rep.h.items():
        wd = repd.h[(i, r + 1 - j)][1]
        out.add("w duality", w == wd, (i, j), f"{w} vs {wd}")
    for (i, j), (_, v) in rep.m.items():
        vd = repd.n[(i, r + 1 - j)][1]
        out.add("m/n duality", v == vd, (i, j), f"{v} vs {vd}")
    for (i, j), (_, v) in rep.n.items():
        vd = repd.m[(i, r + 1 - j)][1]
        out.add("n/m duality", v == vd, (i, j), f"{v} vs {vd}")
    for i, (_, v) in rep.Ha.items():
        if i in repd.Ha and 0 < D.d[i] < D.h:
            out.add("Hasse duality", v == repd.Ha[i][1], (i,), f"{v} vs {repd.Ha[i][1]}")
    out.add("double dual", dual_module(Dd).same_as(D))
    return out
