"""Distribution functions and the rolling split window."""

import math

import pytest

from optwin.rng import SplitMix64
from optwin.stats import (
    RollingWindow,
    f_cdf,
    f_ppf,
    ln_gamma,
    normal_cdf,
    reg_incomplete_beta,
    t_cdf,
    t_ppf,
)

from oracles import f_cdf_quadrature, t_cdf_quadrature


def test_ln_gamma_matches_libm():
    for x in (0.5, 1.0, 1.5, 2.0, 7.0, 123.456, 10000.0):
        assert ln_gamma(x) == math.lgamma(x)


def test_ln_gamma_rejects_nonpositive():
    for x in (0.0, -1.0, -0.5):
        with pytest.raises(ValueError):
            ln_gamma(x)


def test_incomplete_beta_closed_forms():
    # I_x(1, 1) = x, I_x(a, 1) = x^a, I_x(1, b) = 1 - (1-x)^b
    rng = SplitMix64(11)
    for _ in range(200):
        x = rng.uniform()
        a = 0.5 + 9.5 * rng.uniform()
        b = 0.5 + 9.5 * rng.uniform()
        assert math.isclose(reg_incomplete_beta(1.0, 1.0, x), x, abs_tol=1e-14)
        assert math.isclose(reg_incomplete_beta(a, 1.0, x), x**a, abs_tol=1e-13)
        assert math.isclose(
            reg_incomplete_beta(1.0, b, x), 1.0 - (1.0 - x) ** b, abs_tol=1e-13
        )


def test_incomplete_beta_symmetry():
    rng = SplitMix64(12)
    for _ in range(300):
        x = rng.uniform()
        a = 0.5 + 49.5 * rng.uniform()
        b = 0.5 + 49.5 * rng.uniform()
        lhs = reg_incomplete_beta(a, b, x)
        rhs = 1.0 - reg_incomplete_beta(b, a, 1.0 - x)
        assert math.isclose(lhs, rhs, abs_tol=1e-12)


def test_incomplete_beta_domain():
    with pytest.raises(ValueError):
        reg_incomplete_beta(0.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        reg_incomplete_beta(1.0, 1.0, 1.5)


def test_t_cdf_closed_forms():
    # df=1 is Cauchy, df=2 has an elementary CDF
    for x in (-5.0, -0.7, 0.0, 0.3, 2.0, 40.0):
        cauchy = 0.5 + math.atan(x) / math.pi
        assert math.isclose(t_cdf(x, 1.0), cauchy, abs_tol=1e-13)
        two = 0.5 + x / (2.0 * math.sqrt(2.0 + x * x))
        assert math.isclose(t_cdf(x, 2.0), two, abs_tol=1e-13)


def test_f_cdf_closed_form():
    # F(2, 2) has CDF x / (1 + x)
    for x in (0.01, 0.5, 1.0, 9.0, 400.0):
        assert math.isclose(f_cdf(x, 2.0, 2.0), x / (1.0 + x), abs_tol=1e-13)


def test_spot_quantiles():
    assert math.isclose(t_ppf(0.975, 10.0), 2.2281388519862744, abs_tol=1e-9)
    assert math.isclose(f_ppf(0.95, 10.0, 10.0), 2.978237016082319, abs_tol=1e-9)


def test_quantiles_match_quadrature_cdfs():
    for conf in (0.6, 0.9, 0.99, 0.9995):
        for df in (1.0, 3.0, 29.0, 614.5):
            assert math.isclose(
                t_cdf_quadrature(t_ppf(conf, df), df), conf, abs_tol=1e-9
            )
        for d1, d2 in ((1.0, 4.0), (14.0, 14.0), (2000.0, 60.0)):
            assert math.isclose(
                f_cdf_quadrature(f_ppf(conf, d1, d2), d1, d2), conf, abs_tol=1e-9
            )


def test_ppf_round_trips_through_own_cdf():
    rng = SplitMix64(13)
    for _ in range(200):
        conf = 0.5 + 0.4995 * rng.uniform()
        df = 1.0 + 2000.0 * rng.uniform()
        assert math.isclose(t_cdf(t_ppf(conf, df), df), conf, abs_tol=1e-10)
        d1 = 1.0 + 500.0 * rng.uniform()
        d2 = 1.0 + 500.0 * rng.uniform()
        assert math.isclose(f_cdf(f_ppf(conf, d1, d2), d1, d2), conf, abs_tol=1e-10)


def test_t_ppf_monotone_in_confidence():
    df = 7.0
    prev = -math.inf
    for i in range(1, 40):
        q = t_ppf(0.5 + i * 0.0124, df)
        assert q > prev
        prev = q


def test_quantile_domain_errors():
    with pytest.raises(ValueError):
        t_ppf(0.0, 5.0)
    with pytest.raises(ValueError):
        t_ppf(1.0, 5.0)
    with pytest.raises(ValueError):
        t_ppf(0.9, 0.0)
    with pytest.raises(ValueError):
        f_ppf(0.9, -1.0, 5.0)
    with pytest.raises(ValueError):
        f_cdf(1.0, 5.0, 0.0)


def test_normal_cdf_against_erf():
    for x in (-6.0, -1.0, 0.0, 0.5, 1.959963984540054, 4.2):
        expected = 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))
        assert math.isclose(normal_cdf(x), expected, abs_tol=1e-14)
    assert math.isclose(normal_cdf(1.959963984540054), 0.975, abs_tol=1e-12)


def _naive_moments(values):
    n = len(values)
    if n == 0:
        return (0, 0.0, 0.0)
    mean = math.fsum(values) / n
    if n < 2:
        return (n, mean, 0.0)
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return (n, mean, math.sqrt(var))


def _assert_moments_close(actual, expected):
    assert actual.count == expected[0]
    assert math.isclose(actual.mean, expected[1], abs_tol=1e-10)
    assert math.isclose(actual.std, expected[2], abs_tol=1e-9)


def test_rolling_window_tracks_naive_recompute():
    """Random pushes, evictions, and split moves against fsum truth."""
    rng = SplitMix64(21)
    window = RollingWindow(48)
    shadow: list[float] = []
    for _ in range(3000):
        roll = rng.uniform()
        if window.full or (shadow and roll < 0.3):
            assert window.evict_oldest() == shadow.pop(0)
        else:
            x = rng.gauss(0.0, 3.0)
            window.push(x)
            shadow.append(x)
        split = int(rng.uniform() * (len(shadow) + 1))
        window.set_split(split)
        assert len(window) == len(shadow)
        assert window.values() == shadow
        assert window.split == split
        _assert_moments_close(window.older_moments(), _naive_moments(shadow[:split]))
        _assert_moments_close(window.newer_moments(), _naive_moments(shadow[split:]))
        _assert_moments_close(window.total_moments(), _naive_moments(shadow))
    assert list(window) == shadow


def test_rolling_window_magnitude_churn():
    """Large values passing through must not poison later small slices.

    Sum-of-squares variance keeps absolute error proportional to the
    squared magnitudes it has accumulated, so after values around 1e3
    have been pushed and evicted a small slice's variance is only good
    to roughly that error floor. The check uses a tolerance scaled to
    the worst magnitude instead of pretending the error is zero.
    """
    rng = SplitMix64(23)
    window = RollingWindow(40)
    shadow: list[float] = []
    peak = 1.0
    for step in range(1500):
        if window.full or (shadow and rng.uniform() < 0.3):
            window.evict_oldest()
            shadow.pop(0)
        else:
            x = float(step) if rng.uniform() < 0.1 else rng.gauss(0.0, 0.05)
            peak = max(peak, abs(x))
            window.push(x)
            shadow.append(x)
        split = int(rng.uniform() * (len(shadow) + 1))
        window.set_split(split)
        var_tol = 1e-11 * peak * peak
        for actual, values in (
            (window.older_moments(), shadow[:split]),
            (window.newer_moments(), shadow[split:]),
        ):
            expected = _naive_moments(values)
            assert actual.count == expected[0]
            assert math.isclose(actual.mean, expected[1], abs_tol=1e-12 * peak)
            assert math.isclose(
                actual.std**2, expected[2] ** 2, rel_tol=1e-6, abs_tol=var_tol
            )


def test_rolling_window_slice_moments():
    rng = SplitMix64(22)
    window = RollingWindow(32)
    shadow: list[float] = []
    for _ in range(40):
        if window.full:
            window.evict_oldest()
            shadow.pop(0)
        x = rng.uniform() * 10.0 - 5.0
        window.push(x)
        shadow.append(x)
    n = len(shadow)
    for start in range(0, n - 1, 3):
        for stop in range(start + 1, n + 1, 4):
            _assert_moments_close(
                window.moments(start, stop), _naive_moments(shadow[start:stop])
            )


def test_rolling_window_errors():
    window = RollingWindow(4)
    with pytest.raises(ValueError):
        window.evict_oldest()
    for x in (1.0, 2.0, 3.0, 4.0):
        window.push(x)
    assert window.full
    with pytest.raises(ValueError):
        window.push(5.0)
    with pytest.raises(ValueError):
        window.set_split(5)
    with pytest.raises(ValueError):
        window.set_split(-1)
    with pytest.raises(ValueError):
        window.moments(2, 2)
    with pytest.raises(ValueError):
        window.moments(0, 9)
    with pytest.raises(ValueError):
        RollingWindow(0)


def test_rolling_window_clear():
    window = RollingWindow(8)
    for x in range(6):
        window.push(float(x))
    window.set_split(3)
    window.clear()
    assert len(window) == 0
    assert window.split == 0
    assert window.total_moments().count == 0
    window.push(2.5)
    assert window.total_moments().mean == 2.5


def test_single_element_has_zero_std():
    window = RollingWindow(4)
    window.push(7.0)
    m = window.total_moments()
    assert m.count == 1 and m.mean == 7.0 and m.std == 0.0


def test_constant_slices_never_go_negative():
    # rounding in the compensated sums must not produce NaN stds
    window = RollingWindow(64)
    for _ in range(64):
        if window.full:
            window.evict_oldest()
        window.push(0.1)
    for split in (0, 7, 32, 64):
        window.set_split(split)
        assert window.older_moments().std == 0.0
        assert window.newer_moments().std == 0.0
