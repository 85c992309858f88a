"""Command-line front end: ``crystal-forge <command> ...``.

Exit status: 0 when every requested check passes, 1 when a check fails,
2 on unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import serialize as ser
from .canonical import QuotientError, attach_quotient, check_degree_theorem, is_canonical, quotient_by_conjugate
from .corpus import hodge_perturbation, random_corpus
from .crystal import (
    InvalidModule,
    gauge_twist,
    mu_ordinary,
    perturb_hodge,
    random_invertible,
    random_module,
    supersingular,
    validate,
)
from .exactring import PrecisionError, RingContext
from .filtration import FiltrationError, build_adequate, compare_mod, verify_adequate
from .invariants import check_conjugate_power, check_factorization, check_link, compute_invariants
from .duality import check_duality, dual_module

ENV_N = "CRYSTAL_FORGE_N"


@dataclass
class RunConfig:
    command: str
    recipe: str | None = None
    inputs: list = field(default_factory=list)
    output: str | None = None
    p: int = 3
    f: int = 1
    h: int = 2
    N: int | None = None
    d: tuple = ()
    modulus: tuple | None = None
    i: int = 0
    c_digit: int | None = None
    min_digit: int = 1
    shifted: bool = False
    seed_shift: int = 0
    variant: int | None = None
    filtration: str | None = None
    quotient: str | None = None
    level: int | None = None
    count: int = 100
    jobs: int = 1
    seed: int = 0
    format: str = "json"

    def resolved_N(self) -> int:
        if self.N is not None:
            return self.N
        env = os.environ.get(ENV_N)
        return int(env) if env else 4 * self.p * self.f


class InputError(Exception):
    pass


def _load_json(path):
    try:
        with (sys.stdin if path == "-" else open(path)) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _load_module(path):
    try:
        return ser.module_from_json(_load_json(path))
    except ser.SchemaError as exc:
        raise InputError(f"{path}: {exc}") from exc
    except InvalidModule as exc:
        raise InputError(f"{path}: {exc}") from exc


def _emit(cfg: RunConfig, payload: dict, table: str | None = None):
    text = table if (cfg.format == "table" and table is not None) else ser.dumps(payload)
    if cfg.output and cfg.output != "-":
        with open(cfg.output, "w") as fh:
            fh.write(ser.dumps(payload) + "\n")
        if cfg.format == "table" and table is not None:
            print(table)
    else:
        print(text)


def _filtration_for(cfg, D):
    if cfg.filtration:
        try:
            return ser.filtration_from_json(D, _load_json(cfg.filtration))
        except ser.SchemaError as exc:
            raise InputError(f"{cfg.filtration}: {exc}") from exc
    return build_adequate(D, seed_shift=cfg.seed_shift, variant=cfg.variant)


def cmd_gen(cfg: RunConfig) -> int:
    rng = random.Random(cfg.seed)
    if cfg.recipe == "mu-ordinary":
        ctx = RingContext(cfg.p, cfg.f, cfg.resolved_N(), cfg.modulus)
        D = mu_ordinary(cfg.p, cfg.f, cfg.h, cfg.d or (1,) * cfg.f, ctx=ctx)
    elif cfg.recipe == "supersingular":
        ctx = RingContext(cfg.p, 1, cfg.resolved_N(), cfg.modulus)
        c = None if cfg.c_digit is None else ctx.s_power(cfg.c_digit)
        D = supersingular(cfg.p, ctx=ctx, c=c)
    elif cfg.recipe == "random":
        ctx = RingContext(cfg.p, cfg.f, cfg.resolved_N(), cfg.modulus)
        D = random_module(ctx, cfg.h, cfg.d or (1,) * cfg.f, rng, cfg.min_digit, split=not cfg.shifted)
    elif cfg.recipe in ("gauge", "perturb"):
        if not cfg.inputs:
            raise InputError(f"gen {cfg.recipe} needs an input module")
        D = _load_module(cfg.inputs[0])
        if cfg.recipe == "gauge":
            D = gauge_twist(D, [random_invertible(D.ctx, D.h, rng) for _ in range(D.f)])
        else:
            if not 0 <= cfg.i < D.f:
                raise InputError(f"embedding index {cfg.i} out of range")
            D = perturb_hodge(D, cfg.i, hodge_perturbation(D, cfg.i, rng))
    else:
        raise InputError(f"unknown recipe {cfg.recipe}")
    _emit(cfg, ser.module_to_json(D))
    return 0


def cmd_validate(cfg):
    D = _load_module(cfg.inputs[0])
    rep = validate(D)
    _emit(cfg, rep.to_dict(), rep.summary())
    return 0 if rep.ok else 1


def cmd_filtration(cfg):
    D = _load_module(cfg.inputs[0])
    AF = _filtration_for(cfg, D)
    rep = verify_adequate(D, AF)
    payload = ser.filtration_to_json(D, AF)
    payload["verification"] = rep.to_dict()
    _emit(cfg, payload, rep.summary())
    return 0 if rep.ok else 1


def cmd_invariants(cfg):
    D = _load_module(cfg.inputs[0])
    AF = _filtration_for(cfg, D)
    inv = compute_invariants(D, AF)
    checks = check_link(D, inv).extend(check_factorization(D, inv)).extend(check_conjugate_power(D, AF, inv))
    payload = inv.to_dict()
    payload["checks"] = checks.to_dict()
    _emit(cfg, payload, inv.table(D.f, D.profile.r) + "\n" + checks.summary())
    return 0 if checks.ok else 1


def cmd_dual(cfg):
    D = _load_module(cfg.inputs[0])
    AF = _filtration_for(cfg, D)
    rep = check_duality(D, AF)
    payload = {"module": ser.module_to_json(dual_module(D)), "report": rep.to_dict()}
    _emit(cfg, payload, rep.summary())
    return 0 if rep.ok else 1


def cmd_canonical(cfg):
    D = _load_module(cfg.inputs[0])
    AF = _filtration_for(cfg, D)
    if cfg.quotient:
        try:
            rank, proj = ser.quotient_from_json(D.ctx, D.h, _load_json(cfg.quotient))
        except ser.SchemaError as exc:
            raise InputError(f"{cfg.quotient}: {exc}") from exc
    elif cfg.level is not None:
        if not 1 <= cfg.level <= D.profile.r:
            raise InputError(f"level must lie in 1..{D.profile.r}")
        proj = quotient_by_conjugate(D, AF, cfg.level)
    else:
        raise InputError("give --quotient FILE or --level j")
    try:
        Q = attach_quotient(D, proj)
    except QuotientError as exc:
        raise InputError(str(exc)) from exc
    inv = compute_invariants(D, AF)
    rep = check_degree_theorem(D, AF, Q, inv)
    payload = {"quotient": Q.to_dict(), "canonical": is_canonical(Q), "strong": is_canonical(Q, strong=True),
               "report": rep.to_dict()}
    table = (f"level {Q.level}, codegrees {[str(Q.codegrees[i]) for i in range(D.f)]}, alpha {Q.alpha}\n"
             + rep.summary())
    _emit(cfg, payload, table)
    return 0 if rep.ok else 1


def _fuzz_item(args):
    it, seed = args
    D = it.module
    AF = build_adequate(D)
    inv = compute_invariants(D, AF)
    passed, failures = [], []
    for key, rep in (("link", check_link(D, inv)), ("factorization", check_factorization(D, inv)),
                     ("conjugate_power", check_conjugate_power(D, AF, inv)),
                     ("duality", check_duality(D, AF, inv))):
        if rep.ok:
            passed.append(key)
        else:
            failures.append({"index": it.index, "kind": it.kind, "check": key, "detail": rep.summary()})
    if inv.w < Fraction(1, 2):
        passed.append("uniqueness_eligible")
        AF2 = build_adequate(D, seed_shift=1, variant=random.Random(seed * 100003 + it.index))
        inv2 = compute_invariants(D, AF2)
        if inv2.w_grid == inv.w_grid and compare_mod(AF, AF2, 1 - inv.w):
            passed.append("uniqueness")
        else:
            failures.append({"index": it.index, "kind": it.kind, "check": "uniqueness"})
    return passed, failures


def fuzz_run(count: int, seed: int, N: int, jobs: int = 1) -> dict:
    """Items are independent; with jobs > 1 they run in worker processes.
    Results are merged in corpus order so the report does not depend on jobs."""
    items = random_corpus(count, seed, N)
    tally = {"link": 0, "duality": 0, "uniqueness": 0, "uniqueness_eligible": 0,
             "factorization": 0, "conjugate_power": 0}
    failures = []
    work = [(it, seed) for it in items]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_fuzz_item, work, chunksize=max(1, count // (4 * jobs))))
    else:
        results = map(_fuzz_item, work)
    for passed, fails in results:
        for key in passed:
            tally[key] += 1
        failures.extend(fails)
    return {"count": count, "seed": seed, "N": N, "passed": tally, "failures": failures}


def cmd_fuzz(cfg):
    N = cfg.N if cfg.N is not None else int(os.environ.get(ENV_N, 12))
    out = fuzz_run(cfg.count, cfg.seed, N, cfg.jobs)
    t = out["passed"]
    table = (f"link {t['link']}/{cfg.count}  duality {t['duality']}/{cfg.count}  "
             f"factorization {t['factorization']}/{cfg.count}  conjugate power {t['conjugate_power']}/{cfg.count}  "
             f"uniqueness {t['uniqueness']}/{t['uniqueness_eligible']}")
    _emit(cfg, out, table)
    return 0 if not out["failures"] else 1


COMMANDS = {"gen": cmd_gen, "validate": cmd_validate, "filtration": cmd_filtration,
            "invariants": cmd_invariants, "dual": cmd_dual, "canonical": cmd_canonical, "fuzz": cmd_fuzz}


def _int_tuple(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="write JSON here (default stdout)")
    common.add_argument("--format", choices=("json", "table"), default="json")
    common.add_argument("--N", type=int, help=f"truncation level (default ${ENV_N} or 4pf)")
    common.add_argument("--seed", type=int, default=0)

    pipe = argparse.ArgumentParser(add_help=False)
    pipe.add_argument("--seed-shift", type=int, default=0, help="start the filtration induction elsewhere")
    pipe.add_argument("--variant", type=int, help="seed for a randomised admissible filtration")
    pipe.add_argument("--filtration", help="use a stored filtration instead of building one")

    ap = argparse.ArgumentParser(prog="crystal-forge", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="emit a module")
    g.add_argument("recipe", choices=("mu-ordinary", "supersingular", "random", "gauge", "perturb"))
    g.add_argument("inputs", nargs="*")
    g.add_argument("--p", type=int, default=3)
    g.add_argument("--f", type=int, default=1)
    g.add_argument("--h", type=int, default=2)
    g.add_argument("--d", type=_int_tuple, default=())
    g.add_argument("--modulus", type=_int_tuple)
    g.add_argument("--i", type=int, default=0, help="embedding for the perturb recipe")
    g.add_argument("--c-digit", type=int, help="supersingular Hodge slope s^k")
    g.add_argument("--min-digit", type=int, default=1)
    g.add_argument("--shifted", action="store_true", help="random coordinate layout for the random recipe")

    for name, parents, hlp in (("validate", [common], "check the crystal axioms"),
                               ("filtration", [common, pipe], "build and verify an adequate filtration"),
                               ("invariants", [common, pipe], "refined and mu-ordinary Hasse invariants"),
                               ("dual", [common, pipe], "dual module and duality checks"),
                               ("canonical", [common, pipe], "degrees of a quotient crystal")):
        sp = sub.add_parser(name, parents=parents, help=hlp)
        sp.add_argument("inputs", nargs=1)
        if name == "canonical":
            sp.add_argument("--quotient", help="quotient JSON {rank, proj}")
            sp.add_argument("--level", type=int, help="use E / wF^[level] as the quotient")

    fz = sub.add_parser("fuzz", parents=[common], help="random corpus through every theorem check")
    fz.add_argument("--count", type=int, default=100)
    fz.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    keys = RunConfig.__dataclass_fields__.keys()
    vals = {k: getattr(ns, k) for k in keys if hasattr(ns, k) and getattr(ns, k) is not None}
    return RunConfig(**vals)


def _fail(cfg, kind, exc, code):
    print(f"{kind}: {exc}", file=sys.stderr)
    payload = {"ok": False, "error": kind, "detail": str(exc)}
    where = getattr(exc, "where", None)
    if where:
        payload["where"] = list(where) if isinstance(where, tuple) else where
    _emit(cfg, payload, f"{kind}: {exc}")
    return code


def run(cfg: RunConfig) -> int:
    """Dispatch; a JSON report (possibly an error record) is always written."""
    try:
        return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        return _fail(cfg, "input error", exc, 2)
    except (FiltrationError, PrecisionError) as exc:
        return _fail(cfg, "check failed", exc, 1)
    except (ValueError, ArithmeticError) as exc:
        return _fail(cfg, "input error", exc, 2)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
