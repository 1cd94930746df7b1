#!/usr/bin/env python3
"""Desk-scale phase-transition sweep over k-sparse random matrices.

For each rank r the sweep runs every sparsity level k = 1..r-1 at n = 5r and
n = 10r, counting how often the sufficiently scattered condition holds over
the trials.  Success counts drop as k grows; the drop-off point moves to
larger k when n doubles.  Writes one CSV per n-multiplier plus a combined
success-count table to stdout.

Ranks beyond 10 are hidden behind --large: near the transition those runs can
take minutes per instance even with generous deadlines.
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sscheck import synth


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", type=int, nargs="+", default=[3, 4, 5, 6, 7, 8])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--deadline", type=float, default=300.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--outdir", default="phase_transition_out")
    ap.add_argument("--large", action="store_true",
                    help="allow r > 10 (can take hours near the transition)")
    args = ap.parse_args()

    if not args.large and any(r > 10 for r in args.r):
        ap.error("ranks above 10 need --large")

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    k_list = list(range(1, max(args.r)))

    for nmult in (5, 10):
        print(f"=== n = {nmult} r ===", flush=True)
        records = synth.run_grid(
            args.r,
            k_list,
            nmult,
            args.trials,
            args.deadline,
            seed_base=args.seed,
            progress=lambda rec: print(
                f"  r={rec.r} k={rec.k} n={rec.n}: ssc {rec.ssc_count}/{rec.trials} "
                f"(ncssc-not-ssc {rec.ncssc_not_ssc_count}, timeouts {rec.timeout_count}, "
                f"mean {rec.mean_time_s:.2f}s)",
                flush=True,
            ),
        )
        csv_path = outdir / f"grid_n{nmult}r.csv"
        synth.write_csv(records, csv_path)
        print(f"wrote {csv_path}")
        print(synth.format_grid(records))
        print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
