"""Tabulate quotient codegrees against the refined Hasse valuations.

For each module the conjugate quotients E / wF^[j] are attached and their
partial codegrees printed next to w_(i,j).  Quotients whose determinant
vanishes at this precision are listed as skipped.

    python3 scripts/degree_table.py [--N 24]
"""

import argparse
from fractions import Fraction

from crystalforge.canonical import attach_quotient, check_degree_theorem, quotient_by_conjugate, raynaud_chain_module
from crystalforge.crystal import direct_sum, mu_ordinary
from crystalforge.exactring import PrecisionError, RingContext
from crystalforge.filtration import build_adequate
from crystalforge.invariants import compute_invariants


def modules(N):
    yield "split (3,2,3,(1,2))", mu_ordinary(3, 2, 3, (1, 2), N=N)
    for p, f, digits in [(2, 1, [1]), (3, 1, [3]), (3, 2, [1, 2]), (2, 3, [1, 0, 2])]:
        ctx = RingContext(p, f, N)
        yield f"chain p={p} b={digits}", raynaud_chain_module(ctx, digits)
    ctx = RingContext(3, 2, N)
    yield "chain (1,0) + chain (0,2)", direct_sum(raynaud_chain_module(ctx, [1, 0]), raynaud_chain_module(ctx, [0, 2]))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=24)
    a = ap.parse_args()
    print(f"{'module':28s} {'j':>2s} {'codegrees':24s} {'w':24s} {'alpha':>6s}  check")
    for name, D in modules(a.N):
        AF = build_adequate(D)
        rep = compute_invariants(D, AF)
        for j in range(1, D.profile.r + 1):
            w = ", ".join(str(rep.h[(i, j)][1]) for i in range(D.f))
            try:
                Q = attach_quotient(D, quotient_by_conjugate(D, AF, j), j)
            except PrecisionError:
                print(f"{name:28s} {j:2d} {'skipped':24s} {w:24s}")
                continue
            cd = ", ".join(str(Q.codegrees[i]) for i in range(D.f))
            if Q.alpha <= Fraction(1, D.p + 2):
                verdict = "ok" if check_degree_theorem(D, AF, Q, rep).ok else "FAIL"
            else:
                verdict = "outside range"
            print(f"{name:28s} {j:2d} {cd:24s} {w:24s} {str(Q.alpha):>6s}  {verdict}")


if __name__ == "__main__":
    main()
