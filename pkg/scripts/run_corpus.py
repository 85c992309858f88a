"""Run the randomized corpus through the full pipeline and print a tally.

    python3 scripts/run_corpus.py --count 100 --seed 7 --N 12
"""

import argparse
import collections
import time

from crystalforge.cli import fuzz_run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--N", type=int, default=12)
    ap.add_argument("--jobs", type=int, default=1)
    a = ap.parse_args()

    t0 = time.perf_counter()
    out = fuzz_run(a.count, a.seed, a.N, a.jobs)
    dt = time.perf_counter() - t0
    tally = out["passed"]
    for key in ("link", "duality", "factorization", "conjugate_power"):
        print(f"{key:16s} {tally[key]:4d}/{a.count}")
    print(f"{'uniqueness':16s} {tally['uniqueness']:4d}/{tally['uniqueness_eligible']} (w < 1/2)")
    by_kind = collections.Counter((f["kind"], f["check"]) for f in out["failures"])
    for (kind, check), n in sorted(by_kind.items()):
        print(f"  failure: {check} on {kind} x{n}")
    print(f"{dt:.1f}s")


if __name__ == "__main__":
    main()
