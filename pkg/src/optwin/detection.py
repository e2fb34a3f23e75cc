"""Shared verdict types for every drift detector in the package."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Verdict(str, Enum):
    """Per-element outcome of a detector update."""

    NO_CHANGE = "no-change"
    WARNING = "warning"
    DRIFT = "drift"


@dataclass(frozen=True, slots=True)
class DriftDetail:
    """Diagnostics attached to a drift flag by the split-window detector.

    t_value and f_ratio are the test statistics at the moment of the
    flag; nu_split and window_length describe the split that produced
    them.
    """

    t_value: float
    f_ratio: float
    nu_split: int
    window_length: int


@dataclass(frozen=True, slots=True)
class Detection:
    """Verdict plus optional diagnostics.

    Detectors return shared singletons for the three plain verdicts to
    keep per-element allocation off the hot path; only drift flags that
    carry diagnostics allocate.
    """

    verdict: Verdict
    detail: DriftDetail | None = None


NO_CHANGE = Detection(Verdict.NO_CHANGE)
WARNING = Detection(Verdict.WARNING)
DRIFT = Detection(Verdict.DRIFT)
