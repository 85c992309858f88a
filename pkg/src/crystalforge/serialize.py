"""JSON encoding of ring elements, matrices, modules, filtrations and reports.

All numbers are integers; rationals are written as [numerator, denominator].
"""

from __future__ import annotations

import json
from fractions import Fraction

from .crystal import DieudonneModule
from .exactring import RingContext, RingElem
from .filtration import AdequateFiltration, from_hodge_side
from .semilinear import Matrix, Submodule

SCHEMA = "crystal-forge/1"


class SchemaError(ValueError):
    def __init__(self, path, msg):
        super().__init__(f"{path}: {msg}")
        self.path = path


def frac(q) -> list:
    q = Fraction(q)
    return [q.numerator, q.denominator]


def unfrac(x, path="$") -> Fraction:
    if not (isinstance(x, list) and len(x) == 2 and all(isinstance(t, int) for t in x)) or x[1] == 0:
        raise SchemaError(path, "expected [numerator, denominator]")
    return Fraction(x[0], x[1])


def _req(obj, key, path, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(path, f"missing field '{key}'")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise SchemaError(f"{path}.{key}", f"expected {kind.__name__}")
    return val


def context_to_json(ctx: RingContext, h: int | None = None) -> dict:
    out = {"p": ctx.p, "f": ctx.f, "N": ctx.N, "modulus": list(ctx.modulus)}
    if h is not None:
        out["h"] = h
    return out


def context_from_json(obj, path="$.context") -> RingContext:
    p = _req(obj, "p", path, int)
    f = _req(obj, "f", path, int)
    N = _req(obj, "N", path, int)
    modulus = obj.get("modulus")
    try:
        return RingContext(p, f, N, tuple(modulus) if modulus is not None else None)
    except (ValueError, TypeError) as exc:
        raise SchemaError(path, str(exc)) from exc


def elem_to_json(x: RingElem) -> dict:
    return {"prec": x.prec, "terms": [{"e": e, "c": list(c)} for e, c in sorted(x.coeffs.items())]}


def elem_from_json(ctx: RingContext, obj, path="$") -> RingElem:
    prec = _req(obj, "prec", path, int)
    if not 0 <= prec <= ctx.N:
        raise SchemaError(f"{path}.prec", f"must lie in [0, {ctx.N}]")
    terms = _req(obj, "terms", path, list)
    coeffs = {}
    for k, t in enumerate(terms):
        e = _req(t, "e", f"{path}.terms[{k}]", int)
        c = _req(t, "c", f"{path}.terms[{k}]", list)
        if not 0 <= e < prec:
            raise SchemaError(f"{path}.terms[{k}].e", f"exponent {e} outside [0, prec)")
        if len(c) > ctx.f or not all(isinstance(a, int) for a in c):
            raise SchemaError(f"{path}.terms[{k}].c", f"expected at most {ctx.f} integers")
        coeffs[e] = tuple(c)
    return ctx.elem(coeffs, prec)


def matrix_to_json(M: Matrix) -> list:
    return [[elem_to_json(x) for x in row] for row in M.entries]


def matrix_from_json(ctx, obj, path="$", rows=None, cols=None) -> Matrix:
    if not isinstance(obj, list) or not all(isinstance(r, list) for r in obj):
        raise SchemaError(path, "expected a row-major array of arrays")
    ents = [[elem_from_json(ctx, x, f"{path}[{a}][{b}]") for b, x in enumerate(row)] for a, row in enumerate(obj)]
    if rows is not None and len(ents) != rows:
        raise SchemaError(path, f"expected {rows} rows")
    if cols is not None and any(len(r) != cols for r in ents):
        raise SchemaError(path, f"expected {cols} columns")
    try:
        return Matrix(ctx, ents, len(ents), cols if cols is not None else (len(ents[0]) if ents else 0))
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from exc


def module_to_json(D: DieudonneModule) -> dict:
    out = {
        "schema": SCHEMA,
        "context": context_to_json(D.ctx, D.h),
        "d": list(D.d),
        "V": [matrix_to_json(A) for A in D.V],
        "F": [matrix_to_json(B) for B in D.F],
        "hodge": [matrix_to_json(H) for H in D.hodge],
    }
    if D.hodge_witness is not None:
        out["hodge_witness"] = [matrix_to_json(W) for W in D.hodge_witness]
    return out


def _check_schema(obj):
    if not isinstance(obj, dict):
        raise SchemaError("$", "expected an object")
    if obj.get("schema") != SCHEMA:
        raise SchemaError("$.schema", f"expected '{SCHEMA}'")


def module_from_json(obj) -> DieudonneModule:
    _check_schema(obj)
    ctx = context_from_json(_req(obj, "context", "$"))
    h = _req(obj["context"], "h", "$.context", int)
    d = _req(obj, "d", "$", list)
    if len(d) != ctx.f or not all(isinstance(x, int) and 0 <= x <= h for x in d):
        raise SchemaError("$.d", f"expected {ctx.f} integers in [0, {h}]")
    mats = {}
    for key in ("V", "F", "hodge"):
        arr = _req(obj, key, "$", list)
        if len(arr) != ctx.f:
            raise SchemaError(f"$.{key}", f"expected {ctx.f} matrices")
        mats[key] = [matrix_from_json(ctx, m, f"$.{key}[{i}]", h, d[i] if key == "hodge" else h)
                     for i, m in enumerate(arr)]
    wit = None
    if "hodge_witness" in obj:
        arr = _req(obj, "hodge_witness", "$", list)
        if len(arr) != ctx.f:
            raise SchemaError("$.hodge_witness", f"expected {ctx.f} matrices")
        wit = [matrix_from_json(ctx, m, f"$.hodge_witness[{i}]", h, h) for i, m in enumerate(arr)]
    return DieudonneModule(ctx, h, tuple(d), mats["V"], mats["F"], mats["hodge"], wit)


def submodule_to_json(S: Submodule) -> dict:
    return {"basis": matrix_to_json(S.basis), "witness": matrix_to_json(S.witness), "prec": S.prec}


def submodule_from_json(ctx, obj, path="$") -> Submodule:
    wit = matrix_from_json(ctx, _req(obj, "witness", path, list), f"{path}.witness")
    basis = matrix_from_json(ctx, _req(obj, "basis", path, list), f"{path}.basis", wit.rows)
    return Submodule(basis, wit, obj.get("prec"))


def filtration_to_json(D: DieudonneModule, AF: AdequateFiltration) -> dict:
    return {
        "schema": SCHEMA,
        "context": context_to_json(D.ctx, D.h),
        "profile": {"r": AF.profile.r, "delta": list(AF.profile.delta), "s": list(AF.profile.s)},
        "precision": frac(Fraction(AF.precision, D.ctx.N)),
        "pieces": [{"i": i, "j": j, "consumed": AF.consumed.get((i, j), 0), **submodule_to_json(S)}
                   for (i, j), S in sorted(AF.hodge_side.items())],
        "conjugate": [{"i": i, "j": j, **submodule_to_json(S)} for (i, j), S in sorted(AF.conj_side.items())],
    }


def filtration_from_json(D: DieudonneModule, obj) -> AdequateFiltration:
    _check_schema(obj)
    side, consumed = {}, {}
    for k, piece in enumerate(_req(obj, "pieces", "$", list)):
        path = f"$.pieces[{k}]"
        key = (_req(piece, "i", path, int), _req(piece, "j", path, int))
        side[key] = submodule_from_json(D.ctx, piece, path)
        consumed[key] = piece.get("consumed", 0)
    return from_hodge_side(D, side, consumed)


def quotient_from_json(ctx, h, obj) -> tuple[int, list]:
    rank = _req(obj, "rank", "$", int)
    proj = _req(obj, "proj", "$", list)
    if len(proj) != ctx.f:
        raise SchemaError("$.proj", f"expected {ctx.f} matrices")
    return rank, [matrix_from_json(ctx, m, f"$.proj[{i}]", rank, h) for i, m in enumerate(proj)]


def quotient_to_json(rank: int, proj) -> dict:
    return {"schema": SCHEMA, "rank": rank, "proj": [matrix_to_json(P) for P in proj]}


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=False)


def report_from_json(obj) -> dict:
    """Valuation grids of an invariant report: {"w": {(i, j): q}, ..., "Ha": {i: q}}."""
    out = {}
    for key in ("w", "m", "n"):
        cells = _req(obj, key, "$", list)
        out[key] = {(_req(c, "i", f"$.{key}", int), _req(c, "j", f"$.{key}", int)):
                    unfrac(_req(c, "valuation", f"$.{key}"), f"$.{key}") for c in cells}
    out["Ha"] = {_req(c, "i", "$.Ha", int): unfrac(_req(c, "valuation", "$.Ha"), "$.Ha")
                 for c in _req(obj, "Ha", "$", list)}
    for key in ("Ha_total", "w_sum", "precision"):
        out[key] = unfrac(_req(obj, key, "$"), f"$.{key}")
    return out
