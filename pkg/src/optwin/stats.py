"""Numerical foundations: t/F quantiles and incremental windowed moments.

Everything the detectors need and nothing more. Two halves:

* Special functions: ``ln_gamma``, the regularized incomplete beta
  ``reg_incomplete_beta``, Student-t and Fisher F CDFs, and their
  inverses ``t_ppf`` / ``f_ppf``. The quantile functions are computed by
  inverting the incomplete beta with bracketed Newton iteration on the
  analytically known density, so they carry no dependency beyond
  ``math`` and converge to |CDF(result) - confidence| well below 1e-9.

* ``RollingWindow``: a fixed-capacity circular buffer over reals that
  maintains mean and sample standard deviation for the whole window and
  for a two-way split of it, each in O(1) per update, using compensated
  (Kahan) running sums.

Conventions: standard deviations are sample deviations (n - 1 divisor),
a single element has deviation 0, and domain violations raise
``ValueError``.
"""

from __future__ import annotations

import math
from typing import Iterator, NamedTuple

__all__ = [
    "ln_gamma",
    "reg_incomplete_beta",
    "t_cdf",
    "t_ppf",
    "f_cdf",
    "f_ppf",
    "normal_cdf",
    "SubWindowMoments",
    "RollingWindow",
]

_SQRT2 = math.sqrt(2.0)

# Convergence knobs for the incomplete beta machinery. _CF_EPS is
# relative accuracy of the continued fraction; _FPMIN guards against
# zero divisors inside modified Lentz.
_CF_EPS = 1e-16
_FPMIN = 1e-300
_CF_MAX_ITER = 500
_INV_MAX_ITER = 120


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0.

    Thin domain-checked wrapper over the C library implementation
    (math.lgamma accepts negative non-integers as ln|Gamma|, which the
    distribution code must never ask for).
    """
    if not x > 0.0:
        raise ValueError(f"ln_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def normal_cdf(z: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-z / _SQRT2)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz).

    Converges quickly for x < (a + 1) / (a + b + 2); the caller applies
    the symmetry transform when x lies on the other side.
    """
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(
        f"incomplete beta continued fraction failed to converge (a={a}, b={b}, x={x})"
    )


def reg_incomplete_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"shape parameters must be positive, got a={a!r}, b={b!r}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x!r}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        ln_gamma(a + b)
        - ln_gamma(a)
        - ln_gamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _betainc_inv(a: float, b: float, p: float) -> float:
    """Inverse of reg_incomplete_beta in its first argument x.

    Bracketed Newton iteration on I_x(a, b) - p with the exact beta
    density as derivative; falls back to bisection whenever a Newton
    step leaves the current bracket. The starting point follows the
    usual normal-approximation seed for a, b >= 1 and the power-law
    seed otherwise.
    """
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    if p > 0.5:
        # invert the complement for conditioning near x -> 1
        return 1.0 - _betainc_inv(b, a, 1.0 - p)

    if a >= 1.0 and b >= 1.0:
        # normal quantile of p via a rational approximation, then the
        # Wilson-Hilferty style correction toward the beta shape
        t = math.sqrt(-2.0 * math.log(p))
        z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t
        al = (z * z - 3.0) / 6.0
        h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0))
        w = z * math.sqrt(al + h) / h - (
            1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)
        ) * (al + 5.0 / 6.0 - 2.0 / (3.0 * h))
        x = a / (a + b * math.exp(2.0 * w))
    else:
        lna = math.log(a / (a + b))
        lnb = math.log(b / (a + b))
        t = math.exp(a * lna) / a
        u = math.exp(b * lnb) / b
        w = t + u
        if p < t / w:
            x = (a * w * p) ** (1.0 / a)
        else:
            x = 1.0 - (b * w * (1.0 - p)) ** (1.0 / b)
    x = min(max(x, 1e-300), 1.0 - 1e-16)

    ln_beta = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
    lo, hi = 0.0, 1.0
    for _ in range(_INV_MAX_ITER):
        f = reg_incomplete_beta(a, b, x) - p
        if f == 0.0:
            return x
        if f > 0.0:
            hi = x
        else:
            lo = x
        ln_dens = (a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - ln_beta
        step = f * math.exp(-ln_dens) if ln_dens > -700.0 else 0.0
        x_new = x - step
        if step == 0.0 or not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-15 * max(x, 1e-30):
            return x_new
        x = x_new
    return x


def t_cdf(q: float, df: float) -> float:
    """Student-t CDF with df > 0 degrees of freedom."""
    if not df > 0.0:
        raise ValueError(f"degrees of freedom must be positive, got {df!r}")
    if q == 0.0:
        return 0.5
    x = df / (df + q * q)
    tail = 0.5 * reg_incomplete_beta(0.5 * df, 0.5, x)
    return tail if q < 0.0 else 1.0 - tail


def t_ppf(confidence: float, df: float) -> float:
    """Student-t quantile: the q with t_cdf(q, df) == confidence."""
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence!r}")
    if not df > 0.0:
        raise ValueError(f"degrees of freedom must be positive, got {df!r}")
    if confidence == 0.5:
        return 0.0
    if confidence < 0.5:
        return -t_ppf(1.0 - confidence, df)
    # P(|T| > q) = I_{df/(df+q^2)}(df/2, 1/2)
    p_two_tailed = 2.0 * (1.0 - confidence)
    if p_two_tailed <= 0.5:
        x = _betainc_inv(0.5 * df, 0.5, p_two_tailed)
        return math.sqrt(df * (1.0 - x) / x)
    z = _betainc_inv(0.5, 0.5 * df, 1.0 - p_two_tailed)  # z = 1 - x
    return math.sqrt(df * z / (1.0 - z))


def f_cdf(q: float, df1: float, df2: float) -> float:
    """Fisher F CDF with df1, df2 > 0 degrees of freedom."""
    if not (df1 > 0.0 and df2 > 0.0):
        raise ValueError(f"degrees of freedom must be positive, got ({df1!r}, {df2!r})")
    if q <= 0.0:
        return 0.0
    x = df1 * q / (df1 * q + df2)
    return reg_incomplete_beta(0.5 * df1, 0.5 * df2, x)


def f_ppf(confidence: float, df1: float, df2: float) -> float:
    """Fisher F quantile: the q with f_cdf(q, df1, df2) == confidence."""
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence!r}")
    if not (df1 > 0.0 and df2 > 0.0):
        raise ValueError(f"degrees of freedom must be positive, got ({df1!r}, {df2!r})")
    if confidence <= 0.5:
        y = _betainc_inv(0.5 * df1, 0.5 * df2, confidence)
        return df2 * y / (df1 * (1.0 - y))
    # invert the complement so 1 - y never cancels near 1
    z = _betainc_inv(0.5 * df2, 0.5 * df1, 1.0 - confidence)
    return df2 * (1.0 - z) / (df1 * z)


class SubWindowMoments(NamedTuple):
    """Count, mean, and sample standard deviation of a window slice."""

    count: int
    mean: float
    std: float


_EMPTY_MOMENTS = SubWindowMoments(0, 0.0, 0.0)


def _moments(count: int, total: float, total_sq: float) -> SubWindowMoments:
    if count == 0:
        return _EMPTY_MOMENTS
    mean = total / count
    if count < 2:
        return SubWindowMoments(count, mean, 0.0)
    var = (total_sq - total * mean) / (count - 1)
    if var < 0.0:  # rounding can push a constant slice fractionally negative
        var = 0.0
    return SubWindowMoments(count, mean, math.sqrt(var))


class RollingWindow:
    """Circular buffer with O(1) whole-window and split moments.

    The window is logically an ordered sequence, oldest first. A split
    index partitions it into an older part ``[0, split)`` and a newer
    part ``[split, len)``; both parts keep compensated running sums of
    values and squares so their moments never require a rescan. Moving
    the split transfers one element at a time between the two
    accumulator pairs, so a split that drifts by a bounded amount per
    update stays O(1) amortized.
    """

    __slots__ = (
        "_buf",
        "_cap",
        "_head",
        "_n",
        "_split",
        "_os",
        "_osc",
        "_oq",
        "_oqc",
        "_ns",
        "_nsc",
        "_nq",
        "_nqc",
    )

    def __init__(self, capacity: int) -> None:
        if capacity < 1:
            raise ValueError(f"capacity must be at least 1, got {capacity!r}")
        self._buf = [0.0] * capacity
        self._cap = capacity
        self._head = 0
        self._n = 0
        self._split = 0
        # older-part and newer-part accumulators: sum, carry, sum of
        # squares, carry (Kahan compensation terms)
        self._os = 0.0
        self._osc = 0.0
        self._oq = 0.0
        self._oqc = 0.0
        self._ns = 0.0
        self._nsc = 0.0
        self._nq = 0.0
        self._nqc = 0.0

    def __len__(self) -> int:
        return self._n

    def __iter__(self) -> Iterator[float]:
        buf, cap, head = self._buf, self._cap, self._head
        for i in range(self._n):
            yield buf[(head + i) % cap]

    @property
    def capacity(self) -> int:
        return self._cap

    @property
    def split(self) -> int:
        return self._split

    @property
    def full(self) -> bool:
        return self._n == self._cap

    def values(self) -> list[float]:
        """Window contents in logical order, oldest first."""
        return list(self)

    def push(self, x: float) -> None:
        """Append x as the newest element. The window must not be full."""
        if self._n == self._cap:
            raise ValueError("window is full; evict before pushing")
        self._buf[(self._head + self._n) % self._cap] = x
        self._n += 1
        y = x - self._nsc
        t = self._ns + y
        self._nsc = (t - self._ns) - y
        self._ns = t
        xx = x * x
        y = xx - self._nqc
        t = self._nq + y
        self._nqc = (t - self._nq) - y
        self._nq = t

    def evict_oldest(self) -> float:
        """Remove and return the oldest element."""
        if self._n == 0:
            raise ValueError("window is empty")
        x = self._buf[self._head]
        self._head = (self._head + 1) % self._cap
        self._n -= 1
        if self._split > 0:
            self._split -= 1
            y = -x - self._osc
            t = self._os + y
            self._osc = (t - self._os) - y
            self._os = t
            y = -(x * x) - self._oqc
            t = self._oq + y
            self._oqc = (t - self._oq) - y
            self._oq = t
        else:
            y = -x - self._nsc
            t = self._ns + y
            self._nsc = (t - self._ns) - y
            self._ns = t
            y = -(x * x) - self._nqc
            t = self._nq + y
            self._nqc = (t - self._nq) - y
            self._nq = t
        return x

    def set_split(self, index: int) -> None:
        """Move the split so the older part holds exactly ``index`` elements."""
        if not 0 <= index <= self._n:
            raise ValueError(f"split {index!r} outside [0, {self._n}]")
        buf, cap, head = self._buf, self._cap, self._head
        while self._split < index:
            # oldest element of the newer part joins the older part
            x = buf[(head + self._split) % cap]
            self._split += 1
            xx = x * x
            y = x - self._osc
            t = self._os + y
            self._osc = (t - self._os) - y
            self._os = t
            y = xx - self._oqc
            t = self._oq + y
            self._oqc = (t - self._oq) - y
            self._oq = t
            y = -x - self._nsc
            t = self._ns + y
            self._nsc = (t - self._ns) - y
            self._ns = t
            y = -xx - self._nqc
            t = self._nq + y
            self._nqc = (t - self._nq) - y
            self._nq = t
        while self._split > index:
            self._split -= 1
            x = buf[(head + self._split) % cap]
            xx = x * x
            y = x - self._nsc
            t = self._ns + y
            self._nsc = (t - self._ns) - y
            self._ns = t
            y = xx - self._nqc
            t = self._nq + y
            self._nqc = (t - self._nq) - y
            self._nq = t
            y = -x - self._osc
            t = self._os + y
            self._osc = (t - self._os) - y
            self._os = t
            y = -xx - self._oqc
            t = self._oq + y
            self._oqc = (t - self._oq) - y
            self._oq = t

    def older_moments(self) -> SubWindowMoments:
        """Moments of [0, split) in O(1)."""
        return _moments(self._split, self._os, self._oq)

    def newer_moments(self) -> SubWindowMoments:
        """Moments of [split, len) in O(1)."""
        return _moments(self._n - self._split, self._ns, self._nq)

    def total_moments(self) -> SubWindowMoments:
        """Whole-window moments in O(1)."""
        return _moments(self._n, self._os + self._ns, self._oq + self._nq)

    def moments(self, start: int, stop: int) -> SubWindowMoments:
        """Moments of the logical slice [start, stop).

        O(1) when the slice is the whole window or one side of the
        current split; otherwise recomputed with a compensated scan.
        """
        if not 0 <= start < stop <= self._n:
            raise ValueError(
                f"range [{start!r}, {stop!r}) invalid for window of length {self._n}"
            )
        if start == 0 and stop == self._n:
            return self.total_moments()
        if start == 0 and stop == self._split:
            return self.older_moments()
        if start == self._split and stop == self._n:
            return self.newer_moments()
        buf, cap, head = self._buf, self._cap, self._head
        s = sc = q = qc = 0.0
        for i in range(start, stop):
            x = buf[(head + i) % cap]
            y = x - sc
            t = s + y
            sc = (t - s) - y
            s = t
            y = x * x - qc
            t = q + y
            qc = (t - q) - y
            q = t
        return _moments(stop - start, s, q)

    def clear(self) -> None:
        """Drop all elements and zero every accumulator."""
        self._head = 0
        self._n = 0
        self._split = 0
        self._os = self._osc = self._oq = self._oqc = 0.0
        self._ns = self._nsc = self._nq = self._nqc = 0.0
