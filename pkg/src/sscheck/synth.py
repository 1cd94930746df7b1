"""Synthetic instance generation and the phase-transition experiment harness.

Matrices have k-sparse columns: the support of each column is a uniformly
random k-subset of the rows, and the nonzero values are a uniform sample from
the probability simplex (k unit exponentials, normalized).  Streams come from
the counter-based Philox generator keyed by (seed, column), so any column of
any instance is reproducible bit for bit regardless of execution order or
platform; only ``Generator.random`` is consumed, the most stable primitive.
"""
from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import FactorMatrix, Tolerances
from . import bnb, ssc

__all__ = [
    "GenSpec",
    "ExperimentRecord",
    "generate",
    "run_grid",
    "write_csv",
    "format_grid",
    "CSV_FIELDS",
]

CSV_FIELDS = [
    "r",
    "k",
    "n",
    "trials",
    "ssc_count",
    "ncssc_not_ssc_count",
    "timeout_count",
    "mean_time_s",
]


@dataclass(frozen=True)
class GenSpec:
    """Parameters of one synthetic instance: r x n with k-sparse columns."""

    r: int
    n: int
    k: int
    seed: int

    def __post_init__(self) -> None:
        if self.r < 2:
            raise ValueError(f"r must be at least 2, got {self.r}")
        if not 1 <= self.k <= self.r - 1:
            raise ValueError(f"k must satisfy 1 <= k <= r-1, got k={self.k}, r={self.r}")
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")


@dataclass(frozen=True)
class ExperimentRecord:
    r: int
    k: int
    n: int
    trials: int
    ssc_count: int
    ncssc_not_ssc_count: int
    timeout_count: int
    mean_time_s: float

    def as_row(self) -> dict:
        return {f: getattr(self, f) for f in CSV_FIELDS}


def _column(spec: GenSpec, j: int) -> np.ndarray:
    rng = np.random.Generator(
        np.random.Philox(key=np.array([spec.seed, j], dtype=np.uint64))
    )
    scores = rng.random(spec.r)
    support = np.argsort(scores, kind="stable")[: spec.k]
    draws = rng.random(spec.k)
    values = -np.log1p(-draws)  # unit exponentials from uniforms in [0, 1)
    col = np.zeros(spec.r)
    col[support] = values / values.sum()
    return col


def generate(spec: GenSpec) -> FactorMatrix:
    """Deterministic k-sparse instance for the given spec."""
    cols = np.stack([_column(spec, j) for j in range(spec.n)], axis=1)
    return FactorMatrix(cols)


def _run_trial(args):
    r, k, n, seed, deadline, tol, method = args
    H = generate(GenSpec(r=r, n=n, k=k, seed=seed))
    t0 = time.perf_counter()
    report = ssc.check_ssc(H, tol, deadline, method=method)
    elapsed = time.perf_counter() - t0
    is_ssc = report.verdict is ssc.Verdict.HOLDS
    timed_out = report.verdict is ssc.Verdict.UNKNOWN
    ncssc_not_ssc = (
        report.verdict is ssc.Verdict.FAILS
        and report.reason is not ssc.Reason.NCSSC_FAILED
    )
    return is_ssc, ncssc_not_ssc, timed_out, elapsed


def run_grid(
    r_list,
    k_list,
    n_multiplier: int,
    trials: int,
    deadline: float = bnb.DEFAULT_DEADLINE,
    *,
    seed_base: int = 0,
    tol: Tolerances | None = None,
    method: str = "auto",
    workers: int = 1,
    progress=None,
) -> list[ExperimentRecord]:
    """One record per valid (r, k) cell with n = n_multiplier * r.

    Trial t of a cell uses seed ``seed_base + t``; cells with k > r-1 are
    skipped.  Individual deadline hits are tallied, never raised.  Results do
    not depend on the worker count because every trial is fully seeded.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    records = []
    for r in r_list:
        for k in k_list:
            if not 1 <= k <= r - 1:
                continue
            n = n_multiplier * r
            jobs = [
                (r, k, n, seed_base + t, deadline, tol, method) for t in range(trials)
            ]
            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    outcomes = list(pool.map(_run_trial, jobs))
            else:
                outcomes = [_run_trial(j) for j in jobs]
            rec = ExperimentRecord(
                r=r,
                k=k,
                n=n,
                trials=trials,
                ssc_count=sum(o[0] for o in outcomes),
                ncssc_not_ssc_count=sum(o[1] for o in outcomes),
                timeout_count=sum(o[2] for o in outcomes),
                mean_time_s=float(np.mean([o[3] for o in outcomes])),
            )
            records.append(rec)
            if progress is not None:
                progress(rec)
    return records


def write_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for rec in records:
            writer.writerow(rec.as_row())


def format_grid(records) -> str:
    """Success-count table: one row per r, one column per k, '/' where the
    cell is invalid and '.' where it was not run."""
    rs = sorted({rec.r for rec in records})
    ks = sorted({rec.k for rec in records})
    by_cell = {(rec.r, rec.k): rec for rec in records}
    width = max(6, max(len(str(k)) for k in ks) + 2)
    lines = ["SSC successes per (r, k) cell"]
    header = "r\\k".rjust(4) + "".join(str(k).rjust(width) for k in ks)
    lines.append(header)
    for r in rs:
        cells = []
        for k in ks:
            if k > r - 1:
                cells.append("/".rjust(width))
            elif (r, k) in by_cell:
                rec = by_cell[(r, k)]
                mark = f"{rec.ssc_count}/{rec.trials}"
                if rec.timeout_count:
                    mark += "*"
                cells.append(mark.rjust(width))
            else:
                cells.append(".".rjust(width))
        lines.append(str(r).rjust(4) + "".join(cells))
    if any(rec.timeout_count for rec in records):
        lines.append("(* = at least one trial hit the deadline)")
    return "\n".join(lines)
