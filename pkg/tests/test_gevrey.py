import math

import numpy as np
import pytest
from hypothesis import given, settings, example
import hypothesis.strategies as st
from scipy.special import gammaln

from errors import ScanCapError
from gevrey import (
    GevreySequence,
    assoc_fn,
    assoc_m,
    assoc_values,
    check_assoc_inequalities,
    check_m2star,
    check_sequence_conditions,
    seq_log_value,
)


def brute_force(sigma, rho, p_max=600):
    p = np.arange(p_max + 1, dtype=float)
    return float(np.max(p * math.log(rho) - sigma * gammaln(p + 1.0))) if rho > 0 else 0.0


def test_seq_log_value():
    assert seq_log_value(GevreySequence(sigma=1.0), 0) == 0.0
    assert seq_log_value(GevreySequence(sigma=1.0), 1) == 0.0
    assert seq_log_value(GevreySequence(sigma=1.0), 3) == pytest.approx(math.log(6), rel=1e-14)
    assert seq_log_value(GevreySequence(sigma=2.0), 3) == pytest.approx(2 * math.log(6), rel=1e-14)


def test_seq_log_value_negative_p():
    with pytest.raises(ValueError):
        seq_log_value(GevreySequence(), -1)


def test_sigma_below_one_rejected():
    with pytest.raises(ValueError):
        GevreySequence(sigma=0.5)


def test_default_h_is_power_of_two():
    assert GevreySequence(sigma=2.0).H == 4.0


def test_assoc_fn_examples():
    one = GevreySequence(sigma=1.0)
    assert assoc_fn(one, 1.0).value == 0.0
    assert assoc_fn(one, 1.0).argmax_p == 0
    assert assoc_fn(one, 0.0).argmax_p == 0

    v = assoc_fn(one, math.e)
    assert v.argmax_p == 2
    assert v.value == pytest.approx(2.0 - math.log(2.0), abs=1e-12)
    assert v.value == pytest.approx(1.306853, abs=1e-6)


def test_assoc_fn_tie_prefers_smaller_p():
    v = assoc_fn(GevreySequence(sigma=2.0), 4.0)
    assert v.argmax_p == 1
    assert v.value == pytest.approx(math.log(4.0), abs=1e-12)


def test_scan_cap():
    with pytest.raises(ScanCapError, match="scan cap exceeded"):
        assoc_fn(GevreySequence(pmax=10), 100.0)


def test_table_sequence_scan_cap():
    seq = GevreySequence.from_table([0.0, 0.0, math.log(2.0)])
    with pytest.raises(ScanCapError):
        assoc_fn(seq, 50.0)


def test_negative_rho():
    with pytest.raises(ValueError):
        assoc_values(GevreySequence(), [-1.0])


@given(st.sampled_from([1.0, 1.5, 2.0]), st.floats(0.0, 200.0))
@settings(max_examples=200, deadline=None)
@example(1.0, math.e)
@example(2.0, 4.0)
def test_assoc_matches_brute_force(sigma, rho):
    value = assoc_fn(GevreySequence(sigma=sigma), rho).value
    assert value == pytest.approx(brute_force(sigma, rho), rel=1e-12, abs=1e-12)


@given(st.floats(0.0, 500.0), st.floats(0.0, 500.0))
@settings(max_examples=100, deadline=None)
def test_assoc_monotone(r1, r2):
    lo, hi = sorted((r1, r2))
    values = assoc_m(GevreySequence(), np.array([lo, hi]))
    assert values[0] <= values[1] + 1e-12


def test_vectorized_matches_scalar():
    seq = GevreySequence(sigma=1.5)
    rho = np.array([0.5, 1.0, 2.0, 7.5, 33.0])
    values, argmax = assoc_values(seq, rho)
    for r, v, p in zip(rho, values, argmax):
        scalar = assoc_fn(seq, r)
        assert v == scalar.value
        assert p == scalar.argmax_p


def test_m2star():
    assert check_m2star(GevreySequence(sigma=1.0)).N == 3
    assert check_m2star(GevreySequence(sigma=2.0)).N == 2
    forced = check_m2star(GevreySequence(sigma=1.0), forced_n=2)
    assert not forced.ok


def test_m2star_range_validation():
    with pytest.raises(ValueError):
        check_m2star(GevreySequence(pmax=100), p_lo=1, p_hi=200)


@pytest.mark.parametrize("sigma", [1.0, 1.5, 2.0])
def test_sequence_conditions(sigma):
    report = check_sequence_conditions(GevreySequence(sigma=sigma))
    assert report.ok
    assert report.normalised


def test_sequence_conditions_detect_bad_h():
    report = check_sequence_conditions(GevreySequence(sigma=1.0, H=1.0))
    assert report.m2_slack < 0
    assert not report.ok


@pytest.mark.parametrize("sigma", [1.0, 2.0])
def test_assoc_inequalities(sigma):
    grid = np.logspace(-2, 3, 15)
    samples = [(r, l) for r in grid for l in grid]
    report = check_assoc_inequalities(GevreySequence(sigma=sigma), samples)
    assert report.ok
    assert report.min_slack >= -1e-12


def test_a_sequence():
    seq = GevreySequence(sigma=1.0, sigma_a=2.0)
    assert seq.a_sequence().sigma == 2.0
    assert seq.H == 4.0
    plain = GevreySequence(sigma=1.5)
    assert plain.a_sequence() is plain
