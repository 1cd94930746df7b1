#!/usr/bin/env python3
"""Wall-clock scaling of the check over rank, at n = 10r.

Prints one line per (r, k, seed) with the verdict and elapsed seconds, plus a
per-rank summary.  Useful for sizing deadlines before a big sweep.
"""
import argparse
import sys
import time
from collections import defaultdict
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sscheck import GenSpec, check_ssc, generate


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", type=int, nargs="+", default=[4, 6, 8])
    ap.add_argument("--k", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--deadline", type=float, default=60.0)
    args = ap.parse_args()

    per_rank = defaultdict(list)
    for r in args.r:
        for k in args.k:
            if k > r - 1:
                continue
            for seed in range(args.seeds):
                H = generate(GenSpec(r=r, n=10 * r, k=k, seed=seed))
                t0 = time.perf_counter()
                report = check_ssc(H, deadline=args.deadline)
                dt = time.perf_counter() - t0
                per_rank[r].append(dt)
                print(
                    f"r={r} k={k} seed={seed}: {report.verdict.value:8s} "
                    f"({report.method.value}) {dt:7.3f}s",
                    flush=True,
                )
    print()
    for r, times in sorted(per_rank.items()):
        print(f"r={r}: mean {sum(times)/len(times):.3f}s, max {max(times):.3f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
