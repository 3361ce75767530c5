"""Paired benchmark of the default and oblivious kernels on random sub-matrix problems.

Each trial draws three random Morton-hybrid matrices and a random conformable
triple of sub-matrices, runs the selected kernels on identical inputs, checks
their outputs agree, and records base-case call counts and median wall time.
Trials can be aggregated by percentage increase in base-case calls.
"""
from __future__ import annotations

import argparse
import csv
import logging
import statistics
import sys
import time
from collections import defaultdict
from dataclasses import dataclass, field
from os import PathLike
from typing import Iterable, Optional, Sequence

import numpy as np

from ._validation import block_exponent
from .field import FieldModulus
from .layout import MortonHybridMatrix
from .multiply import (
    InstrumentCounters,
    MultiplyProblem,
    mm_default,
    mm_naive,
    mm_oblivious,
)
from .submatrix import SubmatrixDesc

log = logging.getLogger(__name__)

ALGOS = ("default", "oblivious", "both")

TRIAL_HEADER = (
    "trial,sigmaA,rA,cA,sigmaB,rB,cB,sigmaC,rC,cC,"
    "calls_default,calls_obl,macs,time_default_ns,time_obl_ns"
).split(",")
AGGREGATE_HEADER = ["pct_inc_calls", "pct_of_exp", "avg_imp", "min_imp", "max_imp"]
TIME_COLUMNS = ("time_default_ns", "time_obl_ns")


class KernelMismatchError(RuntimeError):
    """Two kernels produced different outputs for the same problem."""


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 512
    t: int = 32
    q: int = 2
    seed: int = 0
    trials: int = 100
    algo: str = "both"
    repeats: int = 3
    aligned_fraction: float = 0.1

    def __post_init__(self):
        if block_exponent(self.n, self.t) is None:
            raise ValueError(f"--n {self.n} is not 2**m * {self.t}")
        if self.trials < 1:
            raise ValueError("trial count must be >= 1")
        if self.repeats < 1:
            raise ValueError("repeat count must be >= 1")
        if not 0.0 <= self.aligned_fraction <= 1.0:
            raise ValueError("aligned fraction must lie in [0, 1]")
        if self.algo not in ALGOS:
            raise ValueError(f"algo must be one of {ALGOS}, got {self.algo!r}")
        FieldModulus(self.q)


@dataclass
class TrialRecord:
    trial: int
    descriptors: tuple[tuple[int, int, int], ...]
    macs: int
    counters: dict[str, InstrumentCounters] = field(default_factory=dict)
    times_ns: dict[str, int] = field(default_factory=dict)

    @property
    def calls_default(self) -> Optional[int]:
        c = self.counters.get("default")
        return None if c is None else c.base_case_calls

    @property
    def calls_obl(self) -> Optional[int]:
        c = self.counters.get("oblivious")
        return None if c is None else c.base_case_calls

    @property
    def pct_call_increase(self) -> float:
        d, o = self.calls_default, self.calls_obl
        if d is None or o is None:
            raise ValueError("call increase needs both kernels")
        return round(100.0 * (o - d) / d, 2)

    @property
    def pct_improvement(self) -> float:
        d, o = self.times_ns.get("default"), self.times_ns.get("oblivious")
        if d is None or o is None:
            raise ValueError("runtime improvement needs both kernels")
        if d == 0:
            return 0.0
        return 100.0 * (d - o) / d

    def as_row(self) -> list:
        (sa, ra, ca), (sb, rb, cb), (sc, rc, cc) = self.descriptors

        def opt(v):
            return "" if v is None else v

        return [
            self.trial, sa, ra, ca, sb, rb, cb, sc, rc, cc,
            opt(self.calls_default), opt(self.calls_obl), self.macs,
            opt(self.times_ns.get("default")), opt(self.times_ns.get("oblivious")),
        ]


@dataclass(frozen=True)
class AggregateRow:
    pct_call_increase: float
    pct_of_experiments: float
    avg_improvement: float
    min_improvement: float
    max_improvement: float
    count: int = 0

    def as_row(self) -> list[str]:
        return [
            f"{v:.2f}" for v in (
                self.pct_call_increase, self.pct_of_experiments,
                self.avg_improvement, self.min_improvement, self.max_improvement,
            )
        ]


def gen_problem(cfg: ExperimentConfig, rng: np.random.Generator) -> MultiplyProblem:
    """Three fresh random matrices and a random conformable sub-matrix triple.

    With probability ``cfg.aligned_fraction`` the triple is aligned: every
    extent is ``2**a * T`` and every corner sits on a block boundary. Otherwise
    extents are uniform in ``[1, N]`` and corners uniform among in-bounds cells.
    """
    n, t, q = cfg.n, cfg.t, cfg.q
    A = MortonHybridMatrix.random(n, t, q, rng)
    B = MortonHybridMatrix.random(n, t, q, rng)
    C = MortonHybridMatrix.random(n, t, q, rng)
    aligned = rng.random() < cfg.aligned_fraction
    if aligned:
        sizes = [t << a for a in range(block_exponent(n, t) + 1)]
        r, k, c = (sizes[int(v)] for v in rng.integers(0, len(sizes), size=3))

        def corner(rows, cols):
            return (int(rng.integers(0, (n - rows) // t + 1)) * t,
                    int(rng.integers(0, (n - cols) // t + 1)) * t)
    else:
        r, k, c = (int(v) for v in rng.integers(1, n + 1, size=3))

        def corner(rows, cols):
            return int(rng.integers(0, n - rows + 1)), int(rng.integers(0, n - cols + 1))

    return MultiplyProblem(
        SubmatrixDesc.at(A, *corner(r, c), r, c),
        SubmatrixDesc.at(B, *corner(r, k), r, k),
        SubmatrixDesc.at(C, *corner(k, c), k, c),
    )


_KERNELS = {"default": mm_default, "oblivious": mm_oblivious}


def _timed(kernel, problem: MultiplyProblem, initial: np.ndarray) -> int:
    problem.sA.matrix.data[:] = initial
    t0 = time.perf_counter_ns()
    kernel(problem, InstrumentCounters(track_jumps=False))
    return time.perf_counter_ns() - t0


def run_trial(problem: MultiplyProblem, algos: Sequence[str], repeats: int = 3,
              trial: int = 0) -> TrialRecord:
    """Run ``algos`` on ``problem`` and cross-check their outputs.

    The first, instrumented run of each kernel doubles as its warm-up. Timed
    repetitions alternate between kernels and report the median.
    """
    out = problem.sA.matrix
    initial = out.data.copy()
    rec = TrialRecord(
        trial=trial,
        descriptors=tuple((s.sigma, s.r, s.c) for s in (problem.sA, problem.sB, problem.sC)),
        macs=problem.macs,
    )
    results = {}
    for name in algos:
        out.data[:] = initial
        rec.counters[name] = _KERNELS[name](problem)
        results[name] = out.data.copy()
    if len(algos) == 1:
        out.data[:] = initial
        mm_naive(problem)
        results["naive"] = out.data.copy()
    names = list(results)
    for other in names[1:]:
        if not np.array_equal(results[names[0]], results[other]):
            raise KernelMismatchError(f"trial {trial}: {names[0]} and {other} outputs differ")
    for name, cnt in rec.counters.items():
        if cnt.scalar_macs != rec.macs:
            raise KernelMismatchError(
                f"trial {trial}: {name} performed {cnt.scalar_macs} MACs, expected {rec.macs}"
            )
    samples: dict[str, list[int]] = defaultdict(list)
    for _ in range(repeats):
        for name in algos:
            samples[name].append(_timed(_KERNELS[name], problem, initial))
    rec.times_ns = {name: int(statistics.median(v)) for name, v in samples.items()}
    out.data[:] = results[names[0]]
    return rec


def run_trials(cfg: ExperimentConfig) -> list[TrialRecord]:
    rng = np.random.default_rng(cfg.seed)
    algos = ("default", "oblivious") if cfg.algo == "both" else (cfg.algo,)
    records = []
    for trial in range(cfg.trials):
        problem = gen_problem(cfg, rng)
        rec = run_trial(problem, algos, cfg.repeats, trial)
        log.debug("trial %d: %s", trial, rec.as_row())
        records.append(rec)
    return records


def aggregate(records: Iterable[TrialRecord]) -> list[AggregateRow]:
    """Group trials by percentage increase in base-case calls."""
    records = list(records)
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    groups: dict[float, list[float]] = defaultdict(list)
    for rec in records:
        groups[rec.pct_call_increase].append(rec.pct_improvement)
    total = len(records)
    rows = []
    for bucket in sorted(groups):
        imps = groups[bucket]
        rows.append(AggregateRow(
            pct_call_increase=bucket,
            pct_of_experiments=100.0 * len(imps) / total,
            avg_improvement=sum(imps) / len(imps),
            min_improvement=min(imps),
            max_improvement=max(imps),
            count=len(imps),
        ))
    return rows


def write_csv(items: Sequence, path: str | PathLike, kind: str = "auto") -> None:
    """Write trial records or aggregate rows to ``path``.

    ``kind`` is ``"trials"``, ``"aggregate"`` or ``"auto"`` (inferred from the
    first item; an empty sequence is written as an aggregate header).
    """
    items = list(items)
    if kind == "auto":
        kind = "trials" if items and isinstance(items[0], TrialRecord) else "aggregate"
    header = TRIAL_HEADER if kind == "trials" else AGGREGATE_HEADER
    try:
        with open(path, "w", newline="", encoding="ascii") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for it in items:
                w.writerow(it.as_row())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def format_table(rows: Sequence[AggregateRow]) -> str:
    lines = ["% Inc. in Calls  % of Exp.  Avg. Imp.  Min. Imp.  Max. Imp."]
    for r in rows:
        lines.append(
            f"{r.pct_call_increase:15.2f}  {r.pct_of_experiments:9.2f}  "
            f"{r.avg_improvement:9.2f}  {r.min_improvement:9.2f}  {r.max_improvement:9.2f}"
        )
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bench",
        description="Compare default and alignment-preserving sub-matrix multiplication.",
    )
    p.add_argument("--n", type=int, default=512, help="matrix side, 2**m * T (default 512)")
    p.add_argument("--t", type=int, default=32, help="truncation block side (default 32)")
    p.add_argument("--q", type=int, default=2, help="prime field modulus (default 2)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--algo", choices=ALGOS, default="both")
    p.add_argument("--csv", required=True, help="per-trial CSV output path")
    p.add_argument("--aggregate", help="aggregate CSV output path (needs --algo both)")
    p.add_argument("--repeats", type=int, default=3, help="timed repetitions per kernel")
    p.add_argument("--aligned-fraction", type=float, default=0.1,
                   help="share of trials drawn as fully aligned triples (default 0.1)")
    p.add_argument("--full-scale", action="store_true", help="use N=2048 regardless of --n")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    n = 2048 if args.full_scale else args.n
    try:
        cfg = ExperimentConfig(n=n, t=args.t, q=args.q, seed=args.seed, trials=args.trials,
                               algo=args.algo, repeats=args.repeats,
                               aligned_fraction=args.aligned_fraction)
    except ValueError as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return 2
    if args.aggregate and cfg.algo != "both":
        print("bench: error: --aggregate requires --algo both", file=sys.stderr)
        return 2
    try:
        records = run_trials(cfg)
    except KernelMismatchError as exc:
        print(f"bench: correctness failure: {exc}", file=sys.stderr)
        return 1
    try:
        write_csv(records, args.csv, kind="trials")
        if cfg.algo == "both":
            rows = aggregate(records)
            if args.aggregate:
                write_csv(rows, args.aggregate, kind="aggregate")
            print(format_table(rows))
    except OSError as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
