"""Reference detectors: gates, firing behavior, and calibration."""

import math

import pytest

from optwin.baselines import (
    AdwinDetector,
    DdmDetector,
    EcddDetector,
    EddmDetector,
    StepdDetector,
    calibrate_ecdd_limit,
)
from optwin.detection import Verdict
from optwin.rng import SplitMix64


def _verdicts(detector, values):
    return [detector.add_element(v).verdict for v in values]


def _error_stream(p0, p1, change, total, seed):
    rng = SplitMix64(seed)
    return [
        rng.bernoulli(p0 if i < change else p1) for i in range(total)
    ]


# ---------------------------------------------------------------- DDM


def test_ddm_rejects_out_of_range():
    detector = DdmDetector()
    for bad in (-0.1, 1.5, math.nan):
        with pytest.raises(ValueError):
            detector.add_element(bad)
    detector.add_element(0.25)  # fractional error rates are accepted


def test_ddm_constructor_validation():
    with pytest.raises(ValueError):
        DdmDetector(warning_factor=0.0)
    with pytest.raises(ValueError):
        DdmDetector(warning_factor=3.0, drift_factor=2.0)
    with pytest.raises(ValueError):
        DdmDetector(min_samples=0)


def test_ddm_never_fires_inside_min_samples():
    for seed in range(10):
        detector = DdmDetector()
        rng = SplitMix64(seed)
        for _ in range(detector.min_samples - 1):
            assert detector.add_element(rng.bernoulli(0.5)).verdict is Verdict.NO_CHANGE


def test_ddm_warning_precedes_drift():
    values = _error_stream(0.1, 0.6, 2000, 4000, seed=40)
    verdicts = _verdicts(DdmDetector(), values)
    assert Verdict.DRIFT in verdicts
    first_drift = verdicts.index(Verdict.DRIFT)
    assert first_drift >= 2000
    assert Verdict.WARNING in verdicts[:first_drift]


def test_ddm_stays_quiet_on_stationary_noise():
    values = _error_stream(0.2, 0.2, 0, 5000, seed=41)
    verdicts = _verdicts(DdmDetector(), values)
    assert Verdict.DRIFT not in verdicts


# --------------------------------------------------------------- EDDM


def test_eddm_requires_binary_input():
    detector = EddmDetector()
    with pytest.raises(ValueError):
        detector.add_element(0.5)


def test_eddm_never_fires_before_enough_errors():
    # adversarial spacing collapse right from the start
    detector = EddmDetector()
    errors_seen = 0
    gap = 60
    step_since_error = 0
    for _ in range(3000):
        x = 1.0 if step_since_error >= gap else 0.0
        if x == 1.0:
            step_since_error = 0
            errors_seen += 1
            gap = max(1, gap - 4)  # spacings shrink fast
        else:
            step_since_error += 1
        verdict = detector.add_element(x).verdict
        if verdict is Verdict.DRIFT:
            assert errors_seen >= detector.min_errors
            return
    raise AssertionError("collapsing spacings never flagged")


def test_eddm_detects_error_rate_increase():
    # EDDM trades false alarms for gradual-drift sensitivity, so the
    # claim is prompt detection, not pre-change silence
    values = _error_stream(0.02, 0.5, 4000, 6000, seed=42)
    verdicts = _verdicts(EddmDetector(), values)
    drifts = [i for i, v in enumerate(verdicts) if v is Verdict.DRIFT]
    assert any(4000 <= d <= 4400 for d in drifts)


# -------------------------------------------------------------- STEPD


def test_stepd_requires_binary_input():
    with pytest.raises(ValueError):
        StepdDetector().add_element(0.3)


def test_stepd_constructor_validation():
    with pytest.raises(ValueError):
        StepdDetector(window=1)
    with pytest.raises(ValueError):
        StepdDetector(alpha_warning=0.05, alpha_drift=0.1)


def test_stepd_statistic_is_zero_on_equal_proportions():
    """Alternating input keeps both proportions identical.

    With near-1 alpha thresholds even a tiny nonzero statistic would
    warn, so sustained silence pins the statistic at zero.
    """
    detector = StepdDetector(window=30, alpha_warning=0.999, alpha_drift=0.99)
    for i in range(2000):
        verdict = detector.add_element(float(i % 2)).verdict
        assert verdict is Verdict.NO_CHANGE


def test_stepd_silent_before_two_windows():
    detector = StepdDetector(window=30)
    for _ in range(2 * detector.window - 1):
        assert detector.add_element(1.0).verdict is Verdict.NO_CHANGE


def test_stepd_detects_proportion_jump():
    values = _error_stream(0.1, 0.7, 1000, 1600, seed=43)
    verdicts = _verdicts(StepdDetector(), values)
    drifts = [i for i, v in enumerate(verdicts) if v is Verdict.DRIFT]
    assert drifts and 1000 <= drifts[0] <= 1100


# -------------------------------------------------------------- ADWIN


def test_adwin_validates_unit_interval():
    detector = AdwinDetector()
    detector.add_element(0.0)
    detector.add_element(1.0)
    detector.add_element(0.37)  # fractional values are fine
    for bad in (-0.1, 1.5, math.inf):
        with pytest.raises(ValueError):
            detector.add_element(bad)


def test_adwin_detects_level_change():
    values = _error_stream(0.2, 0.8, 3000, 6000, seed=44)
    detector = AdwinDetector()
    drifts = [i for i, v in enumerate(values) if detector.add_element(v).verdict is Verdict.DRIFT]
    assert drifts and drifts[0] >= 3000
    assert all(d >= 3000 for d in drifts)


def test_adwin_cut_checks_stay_logarithmic():
    """The candidate-cut scan touches bucket boundaries, not elements.

    On a stationary stream nothing is dropped, so the window length is
    exactly the number of elements fed and the boundary count per step
    must stay within a constant multiple of its logarithm.
    """
    detector = AdwinDetector()
    rng = SplitMix64(45)
    worst = 0.0
    for n in range(1, 20001):
        verdict = detector.add_element(rng.bernoulli(0.5)).verdict
        assert verdict is not Verdict.DRIFT
        if n >= 32:
            worst = max(worst, detector.last_cut_checks / math.log2(n))
    assert worst <= detector.max_buckets + 1


def test_adwin_rearms_after_drift():
    detector = AdwinDetector()
    rng = SplitMix64(46)
    flagged_up = flagged_down = False
    for _ in range(3000):
        detector.add_element(rng.bernoulli(0.1))
    for _ in range(3000):
        if detector.add_element(rng.bernoulli(0.9)).verdict is Verdict.DRIFT:
            flagged_up = True
    for _ in range(3000):
        if detector.add_element(rng.bernoulli(0.1)).verdict is Verdict.DRIFT:
            flagged_down = True
    assert flagged_up and flagged_down


# --------------------------------------------------------------- ECDD


def test_ecdd_requires_binary_input():
    with pytest.raises(ValueError):
        EcddDetector().add_element(0.4)


def test_ecdd_gate_blocks_early_alarms():
    detector = EcddDetector()
    for _ in range(detector.min_samples - 1):
        assert detector.add_element(1.0).verdict is Verdict.NO_CHANGE


def test_ecdd_uncalibrated_pair_fails_fast():
    with pytest.raises(ValueError, match="control limits"):
        EcddDetector(lambda_=0.7)
    # an explicit limit bypasses the shipped grid entirely
    EcddDetector(lambda_=0.7, control_limit=2.5)


def test_ecdd_alarm_rate_and_detection_speed():
    """Pre-change alarms near the designed ARL0, prompt catch after.

    A control chart tuned to ARL0=400 is supposed to false-alarm about
    every 400 stationary steps; silence would mean the limit is wrong
    in the conservative direction.
    """
    values = _error_stream(0.2, 0.6, 3000, 5000, seed=47)
    verdicts = _verdicts(EcddDetector(), values)
    drifts = [i for i, v in enumerate(verdicts) if v is Verdict.DRIFT]
    pre = [d for d in drifts if d < 3000]
    post = [d for d in drifts if d >= 3000]
    assert 2 <= len(pre) <= 15
    assert post and post[0] - 3000 <= 150
    assert Verdict.WARNING in verdicts


def test_calibrate_ecdd_limit_is_deterministic():
    a = calibrate_ecdd_limit(0.3, 0.2, 100.0, n_replicas=60, seed=5)
    b = calibrate_ecdd_limit(0.3, 0.2, 100.0, n_replicas=60, seed=5)
    assert a == b
    assert 0.5 <= a <= 8.0


def test_calibrate_ecdd_limit_validates_inputs():
    with pytest.raises(ValueError):
        calibrate_ecdd_limit(0.0, 0.2, 100.0)
    with pytest.raises(ValueError):
        calibrate_ecdd_limit(0.2, 1.5, 100.0)
