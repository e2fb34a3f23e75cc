"""Detection scoring: match flags to true drifts, aggregate, write reports.

A detection counts as a true positive when it lands inside the
acceptance window after a true drift; matching is greedy one-to-one in
truth order so results do not depend on how ties could be broken.
Reports micro-average across runs by summing counts before recomputing
the ratios.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .detector import _atomic_write_bytes

__all__ = [
    "MatchConfig",
    "EvalReport",
    "match_detections",
    "aggregate",
    "write_report",
    "write_detection_trace",
]


@dataclass(frozen=True, slots=True)
class MatchConfig:
    """Acceptance window: a detection at d matches a drift at g when
    g <= d <= g + window."""

    window: int = 1000

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError(f"window must be positive, got {self.window!r}")


@dataclass(slots=True)
class EvalReport:
    """Match counts for one or more runs, with derived quality metrics."""

    tp: int = 0
    fp: int = 0
    fn: int = 0
    delays: list[int] = field(default_factory=list)
    n_runs: int = 1

    @property
    def precision(self) -> float:
        total = self.tp + self.fp
        return self.tp / total if total else 0.0

    @property
    def recall(self) -> float:
        total = self.tp + self.fn
        return self.tp / total if total else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2.0 * p * r / (p + r) if p + r else 0.0

    @property
    def mean_delay(self) -> float:
        return sum(self.delays) / len(self.delays) if self.delays else math.nan

    @property
    def fp_per_run(self) -> float:
        return self.fp / self.n_runs


def match_detections(
    truth_positions: Sequence[int],
    detections: Sequence[int],
    config: MatchConfig = MatchConfig(),
) -> EvalReport:
    """Score one run's detections against the true drift positions.

    Both sequences must be sorted ascending. Each truth takes the
    earliest still-unmatched detection inside its window; everything
    a truth cannot claim is a false positive, every truth left empty a
    false negative.
    """
    for name, seq in (("truth_positions", truth_positions), ("detections", detections)):
        for prev, cur in zip(seq, seq[1:]):
            if cur < prev:
                raise ValueError(f"{name} must be sorted ascending")
    window = config.window
    delays: list[int] = []
    i = 0
    n = len(detections)
    for g in truth_positions:
        while i < n and detections[i] < g:
            i += 1  # too early for this and every later truth: FP
        if i < n and detections[i] <= g + window:
            delays.append(detections[i] - g)
            i += 1
    tp = len(delays)
    return EvalReport(
        tp=tp,
        fp=len(detections) - tp,
        fn=len(truth_positions) - tp,
        delays=delays,
    )


def aggregate(reports: Iterable[EvalReport]) -> EvalReport:
    """Micro-average: sum counts and pool delays across runs."""
    total: EvalReport | None = None
    for report in reports:
        if total is None:
            total = EvalReport(
                report.tp, report.fp, report.fn, list(report.delays), report.n_runs
            )
        else:
            total.tp += report.tp
            total.fp += report.fp
            total.fn += report.fn
            total.delays.extend(report.delays)
            total.n_runs += report.n_runs
    if total is None:
        raise ValueError("cannot aggregate zero reports")
    return total


def write_report(
    path: str | os.PathLike[str],
    rows: Iterable[tuple[str, str, EvalReport]],
) -> None:
    """Write (experiment, detector, report) rows as a sorted CSV.

    Deterministic for identical inputs: fixed column formats, rows
    sorted by experiment then detector, written atomically.
    """
    lines = ["experiment,detector,delay,fp_per_run,precision,recall,f1"]
    for experiment, detector, report in sorted(rows, key=lambda r: (r[0], r[1])):
        lines.append(
            f"{experiment},{detector},{report.mean_delay:.4f},{report.fp_per_run:.4f},"
            f"{report.precision:.6f},{report.recall:.6f},{report.f1:.6f}"
        )
    _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))


def write_detection_trace(
    path: str | os.PathLike[str],
    drifts: Sequence[int],
    warnings: Sequence[int] = (),
) -> None:
    """Write a per-run `step,verdict` CSV for debugging a single stream."""
    events = [(step, "warning") for step in warnings]
    events += [(step, "drift") for step in drifts]
    events.sort()
    lines = ["step,verdict"]
    lines += [f"{step},{verdict}" for step, verdict in events]
    _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))
