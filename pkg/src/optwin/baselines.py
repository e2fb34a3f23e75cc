"""Classic drift detectors used as comparison baselines.

All five consume one value per step through add_element and answer with
the shared Detection verdicts. ADWIN accepts any real in [0, 1] and has
no warning state; DDM accepts rates in [0, 1]; EDDM, STEPD and ECDD are
strictly binary (0.0 or 1.0 per step) and expose the usual two-level
warning/drift behaviour.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from importlib import resources

import numpy as np

from .detection import DRIFT, NO_CHANGE, WARNING, Detection
from .stats import normal_cdf

__all__ = [
    "AdwinDetector",
    "DdmDetector",
    "EddmDetector",
    "StepdDetector",
    "EcddDetector",
    "calibrate_ecdd_limit",
]


def _require_unit_interval(error: float) -> float:
    error = float(error)
    if not 0.0 <= error <= 1.0:
        raise ValueError(f"error value must lie in [0, 1], got {error!r}")
    return error


def _require_binary(error: float) -> float:
    error = float(error)
    if error != 0.0 and error != 1.0:
        raise ValueError(f"error value must be 0 or 1, got {error!r}")
    return error


class AdwinDetector:
    """Adaptive-window detector with an exponential-histogram backing store.

    The window is kept as rows of buckets: row j holds buckets covering
    2**j elements each (only their sum and sum of squares are stored),
    and a row never exceeds ``max_buckets`` buckets before its two
    oldest merge into the next row, so memory is logarithmic in the
    window length. Every update scans the bucket boundaries from oldest
    to newest and compares the two side means against

        eps_cut = sqrt((2 / m) * var * ln(2 / dp)) + (2 / (3 m)) * ln(2 / dp)

    where m is the harmonic mean of the side lengths, var the whole
    window's population variance, and dp = delta / |W|. While any
    boundary violates the bound the oldest bucket is dropped and the
    scan repeats; any drop at all makes the step report DRIFT. Sides
    shorter than ``min_side`` elements (or windows under twice that)
    are not tested.

    There is no warning state. ``last_cut_checks`` exposes how many
    boundary evaluations the most recent add_element performed, which
    is how the logarithmic per-step cost can be observed from outside.
    """

    __slots__ = (
        "delta",
        "max_buckets",
        "min_side",
        "_rows",
        "_n",
        "_sum",
        "_sumsq",
        "last_cut_checks",
    )

    def __init__(self, delta: float = 0.002, max_buckets: int = 5, min_side: int = 5):
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
        if max_buckets < 2:
            raise ValueError(f"max_buckets must be at least 2, got {max_buckets!r}")
        if min_side < 1:
            raise ValueError(f"min_side must be at least 1, got {min_side!r}")
        self.delta = delta
        self.max_buckets = max_buckets
        self.min_side = min_side
        self.last_cut_checks = 0
        self.reset()

    def reset(self) -> None:
        # rows[j] holds (sum, sumsq) buckets of 2**j elements, oldest first
        self._rows: list[deque[tuple[float, float]]] = [deque()]
        self._n = 0
        self._sum = 0.0
        self._sumsq = 0.0

    @property
    def window_length(self) -> int:
        return self._n

    @property
    def mean(self) -> float:
        return self._sum / self._n if self._n else 0.0

    def _insert(self, x: float) -> None:
        rows = self._rows
        rows[0].append((x, x * x))
        self._n += 1
        self._sum += x
        self._sumsq += x * x
        j = 0
        while len(rows[j]) > self.max_buckets:
            if j + 1 == len(rows):
                rows.append(deque())
            s1, q1 = rows[j].popleft()
            s2, q2 = rows[j].popleft()
            rows[j + 1].append((s1 + s2, q1 + q2))
            j += 1

    def _drop_oldest_bucket(self) -> None:
        rows = self._rows
        level = len(rows) - 1
        while not rows[level]:
            level -= 1
        s, q = rows[level].popleft()
        self._n -= 1 << level
        self._sum -= s
        self._sumsq -= q
        while len(rows) > 1 and not rows[-1]:
            rows.pop()

    def _find_cut(self) -> bool:
        """True when some oldest-to-newest boundary violates the bound."""
        n = self._n
        if n < 2 * self.min_side or n < 10:
            return False
        mean = self._sum / n
        var = self._sumsq / n - mean * mean
        if var < 0.0:
            var = 0.0
        ln_term = math.log(2.0 * n / self.delta)
        min_side = self.min_side
        n0 = 0
        sum0 = 0.0
        rows = self._rows
        for level in range(len(rows) - 1, -1, -1):
            size = 1 << level
            for s, _ in rows[level]:
                n0 += size
                sum0 += s
                n1 = n - n0
                if n1 < min_side:
                    return False  # later boundaries only shrink the new side
                if n0 < min_side:
                    continue
                self.last_cut_checks += 1
                inv_m = 1.0 / n0 + 1.0 / n1
                eps = math.sqrt(2.0 * inv_m * var * ln_term) + (
                    2.0 / 3.0
                ) * inv_m * ln_term
                if abs(sum0 / n0 - (self._sum - sum0) / n1) > eps:
                    return True
        return False

    def add_element(self, x: float) -> Detection:
        x = _require_unit_interval(x)
        self.last_cut_checks = 0
        self._insert(x)
        shrunk = False
        while self._find_cut():
            self._drop_oldest_bucket()
            shrunk = True
        return DRIFT if shrunk else NO_CHANGE


class DdmDetector:
    """Drift detection from the running error rate and its binomial spread.

    Tracks p (mean error) and s = sqrt(p (1 - p) / n); remembers the
    minimum of p + s and warns or flags when the current value exceeds
    that minimum by the configured number of minimum spreads. Silent
    for the first ``min_samples`` steps and fully reset on drift.
    """

    __slots__ = ("warning_factor", "drift_factor", "min_samples", "_n", "_p", "_p_min", "_s_min")

    def __init__(
        self,
        warning_factor: float = 2.0,
        drift_factor: float = 3.0,
        min_samples: int = 30,
    ):
        if not 0.0 < warning_factor <= drift_factor:
            raise ValueError(
                f"need 0 < warning_factor <= drift_factor, got {warning_factor!r}, {drift_factor!r}"
            )
        if min_samples < 1:
            raise ValueError(f"min_samples must be positive, got {min_samples!r}")
        self.warning_factor = warning_factor
        self.drift_factor = drift_factor
        self.min_samples = min_samples
        self.reset()

    def reset(self) -> None:
        self._n = 0
        self._p = 0.0
        self._p_min = math.inf
        self._s_min = math.inf

    def add_element(self, error: float) -> Detection:
        error = _require_unit_interval(error)
        self._n += 1
        self._p += (error - self._p) / self._n
        if self._n < self.min_samples:
            return NO_CHANGE
        s = math.sqrt(self._p * (1.0 - self._p) / self._n)
        level = self._p + s
        if level < self._p_min + self._s_min:
            self._p_min = self._p
            self._s_min = s
        if level > self._p_min + self.drift_factor * self._s_min:
            self.reset()
            return DRIFT
        if level > self._p_min + self.warning_factor * self._s_min:
            return WARNING
        return NO_CHANGE


class EddmDetector:
    """Drift detection from the spacing between classification errors.

    Watches the mean and sample deviation of the distance (in steps)
    between consecutive errors and compares mean + 2 std against its
    running maximum: gradual drifts stretch out the error spacing long
    before the raw error rate moves. Evaluation starts after
    ``min_errors`` errors; the input must be binary.
    """

    __slots__ = (
        "warning_level",
        "drift_level",
        "min_errors",
        "_step",
        "_last_error_step",
        "_n_err",
        "_dist_mean",
        "_dist_m2",
        "_level_max",
    )

    def __init__(
        self,
        warning_level: float = 0.95,
        drift_level: float = 0.90,
        min_errors: int = 30,
    ):
        if not 0.0 < drift_level <= warning_level <= 1.0:
            raise ValueError(
                f"need 0 < drift_level <= warning_level <= 1, got {drift_level!r}, {warning_level!r}"
            )
        if min_errors < 2:
            raise ValueError(f"min_errors must be at least 2, got {min_errors!r}")
        self.warning_level = warning_level
        self.drift_level = drift_level
        self.min_errors = min_errors
        self.reset()

    def reset(self) -> None:
        self._step = 0
        self._last_error_step = 0
        self._n_err = 0
        self._dist_mean = 0.0
        self._dist_m2 = 0.0
        self._level_max = 0.0

    def add_element(self, error: float) -> Detection:
        error = _require_binary(error)
        self._step += 1
        if error != 1.0:
            return NO_CHANGE
        distance = float(self._step - self._last_error_step)
        self._last_error_step = self._step
        self._n_err += 1
        delta = distance - self._dist_mean
        self._dist_mean += delta / self._n_err
        self._dist_m2 += delta * (distance - self._dist_mean)
        if self._n_err < 2:
            return NO_CHANGE
        std = math.sqrt(self._dist_m2 / (self._n_err - 1))
        level = self._dist_mean + 2.0 * std
        if level > self._level_max:
            self._level_max = level
        if self._n_err < self.min_errors:
            return NO_CHANGE
        ratio = level / self._level_max
        if ratio < self.drift_level:
            self.reset()
            return DRIFT
        if ratio < self.warning_level:
            return WARNING
        return NO_CHANGE


class StepdDetector:
    """Two-proportion test between a recent window and the older past.

    Compares the error rate over the last ``window`` steps with the
    rate over everything before it (since the last reset) using the
    continuity-corrected two-proportion z statistic, and converts it to
    a two-sided p-value. Testing starts once both sides have at least
    ``window`` elements. Binary input only.
    """

    __slots__ = (
        "window",
        "alpha_warning",
        "alpha_drift",
        "_recent",
        "_recent_errors",
        "_total_n",
        "_total_errors",
    )

    def __init__(
        self,
        window: int = 30,
        alpha_warning: float = 0.05,
        alpha_drift: float = 0.003,
    ):
        if window < 2:
            raise ValueError(f"window must be at least 2, got {window!r}")
        if not 0.0 < alpha_drift <= alpha_warning < 1.0:
            raise ValueError(
                f"need 0 < alpha_drift <= alpha_warning < 1, got {alpha_drift!r}, {alpha_warning!r}"
            )
        self.window = window
        self.alpha_warning = alpha_warning
        self.alpha_drift = alpha_drift
        self.reset()

    def reset(self) -> None:
        self._recent: deque[float] = deque()
        self._recent_errors = 0.0
        self._total_n = 0
        self._total_errors = 0.0

    def add_element(self, error: float) -> Detection:
        error = _require_binary(error)
        self._total_n += 1
        self._total_errors += error
        self._recent.append(error)
        self._recent_errors += error
        if len(self._recent) > self.window:
            self._recent_errors -= self._recent.popleft()
        if self._total_n < 2 * self.window:
            return NO_CHANGE
        n_r = len(self._recent)
        n_o = self._total_n - n_r
        p_r = self._recent_errors / n_r
        p_o = (self._total_errors - self._recent_errors) / n_o
        inv = 1.0 / n_o + 1.0 / n_r
        numerator = abs(p_o - p_r) - 0.5 * inv
        if numerator <= 0.0:
            return NO_CHANGE
        p_hat = self._total_errors / self._total_n
        denominator = math.sqrt(p_hat * (1.0 - p_hat) * inv)
        if denominator == 0.0:
            return NO_CHANGE
        p_value = 2.0 * (1.0 - normal_cdf(numerator / denominator))
        if p_value < self.alpha_drift:
            self.reset()
            return DRIFT
        if p_value < self.alpha_warning:
            return WARNING
        return NO_CHANGE


# Monte-Carlo control limits shipped with the package, keyed by
# (lambda, arl0) with rows over a grid of error rates. See
# calibrate_ecdd_limit for how the file is produced.
_LIMIT_RESOURCE = "data/ecdd_limits.csv"
_limit_table_cache: dict[tuple[float, float], tuple[list[float], list[float]]] | None = None


def _load_limit_table() -> dict[tuple[float, float], tuple[list[float], list[float]]]:
    global _limit_table_cache
    if _limit_table_cache is None:
        table: dict[tuple[float, float], tuple[list[float], list[float]]] = {}
        text = resources.files(__package__).joinpath(_LIMIT_RESOURCE).read_text("ascii")
        for row in csv.DictReader(text.splitlines()):
            key = (float(row["lambda"]), float(row["arl0"]))
            p_values, l_values = table.setdefault(key, ([], []))
            p_values.append(float(row["p_hat"]))
            l_values.append(float(row["L"]))
        _limit_table_cache = table
    return _limit_table_cache


def _control_limit_for(p_hat: float, lambda_: float, arl0: float) -> float:
    """Interpolate the shipped limit grid at the current error estimate."""
    table = _load_limit_table()
    entry = table.get((lambda_, float(arl0)))
    if entry is None:
        known = sorted(table)
        raise ValueError(
            f"no calibrated control limits for lambda={lambda_!r}, arl0={arl0!r}; "
            f"available (lambda, arl0) pairs: {known}; pass control_limit explicitly"
        )
    p_values, l_values = entry
    if p_hat <= p_values[0]:
        return l_values[0]
    if p_hat >= p_values[-1]:
        return l_values[-1]
    for i in range(1, len(p_values)):
        if p_hat <= p_values[i]:
            span = p_values[i] - p_values[i - 1]
            w = (p_hat - p_values[i - 1]) / span
            return l_values[i - 1] + w * (l_values[i] - l_values[i - 1])
    return l_values[-1]


class EcddDetector:
    """EWMA chart over the error stream with drift-rate-aware limits.

    Keeps z = (1 - lambda) z + lambda x together with the running error
    rate p, and flags when z rises more than L standard deviations of
    the EWMA above p. L comes from Monte-Carlo calibration so that a
    stationary stream at the current error rate produces one false
    alarm per ``arl0`` steps on average; pass ``control_limit`` to
    override the shipped grid (required for lambda values the grid does
    not cover). Warnings fire at half the drift allowance. Binary
    input, alarms gated until ``min_samples`` steps.
    """

    __slots__ = (
        "lambda_",
        "arl0",
        "min_samples",
        "_explicit_limit",
        "_n",
        "_p",
        "_z",
    )

    def __init__(
        self,
        lambda_: float = 0.2,
        arl0: float = 400,
        min_samples: int = 30,
        control_limit: float | None = None,
    ):
        if not 0.0 < lambda_ <= 1.0:
            raise ValueError(f"lambda_ must lie in (0, 1], got {lambda_!r}")
        if arl0 <= 0:
            raise ValueError(f"arl0 must be positive, got {arl0!r}")
        if min_samples < 1:
            raise ValueError(f"min_samples must be positive, got {min_samples!r}")
        if control_limit is None:
            _control_limit_for(0.2, lambda_, arl0)  # fail early when uncovered
        self.lambda_ = lambda_
        self.arl0 = arl0
        self.min_samples = min_samples
        self._explicit_limit = control_limit
        self.reset()

    def reset(self) -> None:
        self._n = 0
        self._p = 0.0
        self._z = 0.0

    def add_element(self, error: float) -> Detection:
        error = _require_binary(error)
        self._n += 1
        self._p += (error - self._p) / self._n
        lam = self.lambda_
        self._z = (1.0 - lam) * self._z + lam * error
        if self._n < self.min_samples:
            return NO_CHANGE
        p = self._p
        spread = p * (1.0 - p) * lam / (2.0 - lam)
        sigma_z = math.sqrt(spread * (1.0 - (1.0 - lam) ** (2 * self._n)))
        if self._explicit_limit is not None:
            limit = self._explicit_limit
        else:
            limit = _control_limit_for(p, lam, self.arl0)
        allowance = limit * sigma_z
        if self._z > p + allowance:
            self.reset()
            return DRIFT
        if self._z > p + 0.5 * allowance:
            return WARNING
        return NO_CHANGE


def _simulated_arl0(
    p: float,
    lambda_: float,
    limit: float,
    n_replicas: int,
    horizon: int,
    seed: int,
    min_samples: int,
) -> float:
    """Mean steps to first (false) alarm for a stationary Bernoulli stream.

    Vectorized over replicas; replicas that never alarm are counted at
    the horizon, which biases the estimate low, so the horizon should
    be a large multiple of the target ARL.
    """
    rng = np.random.default_rng(seed)
    z = np.zeros(n_replicas)
    first = np.full(n_replicas, float(horizon))
    alive = np.ones(n_replicas, dtype=bool)
    lam = lambda_
    spread = p * (1.0 - p) * lam / (2.0 - lam)
    decay = (1.0 - lam) ** 2
    decay_t = 1.0
    for t in range(1, horizon + 1):
        x = (rng.random(n_replicas) < p).astype(float)
        z += lam * (x - z)
        decay_t *= decay
        if t < min_samples:
            continue
        sigma_z = math.sqrt(spread * (1.0 - decay_t))
        hits = alive & (z > p + limit * sigma_z)
        if hits.any():
            first[hits] = t
            alive &= ~hits
            if not alive.any():
                break
    return float(first.mean())


def calibrate_ecdd_limit(
    p_hat: float,
    lambda_: float,
    arl0: float,
    *,
    n_replicas: int = 2000,
    horizon: int | None = None,
    tolerance: float = 0.05,
    seed: int = 0,
) -> float:
    """Control limit L whose simulated false-alarm rate matches arl0.

    Runs ``n_replicas`` stationary Bernoulli(p_hat) streams through the
    EWMA chart and bisects on L until the mean time to first alarm is
    within ``tolerance`` (relative) of arl0. The same random draws are
    reused for every candidate L so the simulated ARL is monotone in L
    and the bisection is clean. This is how the shipped limit grid was
    produced; it is deterministic for a fixed seed.
    """
    if not 0.0 < p_hat < 1.0:
        raise ValueError(f"p_hat must lie in (0, 1), got {p_hat!r}")
    if not 0.0 < lambda_ <= 1.0:
        raise ValueError(f"lambda_ must lie in (0, 1], got {lambda_!r}")
    if arl0 <= 0:
        raise ValueError(f"arl0 must be positive, got {arl0!r}")
    if horizon is None:
        horizon = int(20 * arl0)
    lo, hi = 0.5, 8.0
    best = hi
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        arl = _simulated_arl0(p_hat, lambda_, mid, n_replicas, horizon, seed, 30)
        if abs(arl - arl0) <= tolerance * arl0:
            return mid
        if arl < arl0:
            lo = mid
        else:
            hi = mid
        best = mid
    return best
