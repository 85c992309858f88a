"""Exact crystal data over truncated valuation rings: adequate filtrations,
refined partial Hasse invariants, duality and canonical-subgroup degrees."""

from .exactring import FiniteField, RingContext, RingElem, Valuation
from .semilinear import Matrix, Submodule, smith_normal_form
from .crystal import DieudonneModule, FiltrationProfile, ValidationReport, validate
from .filtration import AdequateFiltration, build_adequate, compare_mod, verify_adequate
from .invariants import InvariantReport, compute_invariants
from .duality import check_duality, dual_module, dual_filtration
from .canonical import QuotientCrystal, RaynaudParams, attach_quotient, check_degree_theorem

__version__ = "0.1.0"

__all__ = [
    "FiniteField", "RingContext", "RingElem", "Valuation",
    "Matrix", "Submodule", "smith_normal_form",
    "DieudonneModule", "FiltrationProfile", "ValidationReport", "validate",
    "AdequateFiltration", "build_adequate", "compare_mod", "verify_adequate",
    "InvariantReport", "compute_invariants",
    "check_duality", "dual_module", "dual_filtration",
    "QuotientCrystal", "RaynaudParams", "attach_quotient", "check_degree_theorem",
]
