import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from gevrey import GevreySequence
from weights import (
    CANONICAL_AXIS,
    AssocExpWeight,
    ConstantWeight,
    InterpolatedWeight,
    PolynomialWeight,
    SubExponentialWeight,
    canonical_pairs,
    certify,
    check_moderate,
    fmt_number,
)

WEIGHTS = [
    ConstantWeight(),
    PolynomialWeight(1.0),
    PolynomialWeight(-2.0),
    SubExponentialWeight(0.5, 1.0),
    SubExponentialWeight(1.0, 2.0),
    AssocExpWeight(1.0, 0.5),
    InterpolatedWeight(ConstantWeight(), PolynomialWeight(2.0), 0.25),
]


def test_fmt_number():
    assert fmt_number(2.0) == "2"
    assert fmt_number(0.25) == "0.25"
    assert fmt_number(-1.0) == "-1"


def test_literals():
    assert ConstantWeight().literal() == "const"
    assert PolynomialWeight(1.0).literal() == "poly:1"
    assert SubExponentialWeight(1.0, 2.0).literal() == "subexp:k=1,sigma=2"
    assert AssocExpWeight(1.0, 0.5).literal() == "assoc:s=1,tau=0.5"
    assert AssocExpWeight(1.0, 0.5, GevreySequence(sigma=2.0)).literal() == "assoc:s=1,tau=0.5,sigma=2"
    assert InterpolatedWeight(ConstantWeight(), PolynomialWeight(1.0), 0.5).literal() == "interp:theta=0.5,[const],[poly:1]"


def test_canonical_pairs():
    xs, ys = canonical_pairs()
    assert len(CANONICAL_AXIS) == 129
    assert xs.shape == ys.shape == (129 * 129,)


@pytest.mark.parametrize("w", WEIGHTS, ids=lambda w: w.literal())
def test_inverse(w):
    x = np.linspace(-20, 20, 41)
    assert np.allclose(w.eval(x) * w.inverse().eval(x), 1.0, rtol=1e-12)


@pytest.mark.parametrize("w", WEIGHTS, ids=lambda w: w.literal())
def test_certificate_is_moderate(w):
    C, tau = w.certificate
    assert C >= 1.0
    report = check_moderate(w, GevreySequence(), C, tau)
    assert report.ok
    assert report.witness is None


def test_constant_certificate_is_one():
    assert ConstantWeight().certificate == (1.0, 1.0)


@pytest.mark.parametrize(
    "w, expected",
    [
        (PolynomialWeight(0.0), (1.0, 1.0)),
        (PolynomialWeight(1.0), (2.0, 1.0)),
        (PolynomialWeight(-2.0), (5.0, 1.0)),
        (PolynomialWeight(2.5), (16.0, 1.0)),
        (SubExponentialWeight(0.5, 1.0), (2.0, 1.0)),
        (SubExponentialWeight(1.0, 2.0), (2.0 * math.e, 2.0)),
        (SubExponentialWeight(0.0, 3.0), (1.0, 1.0)),
    ],
    ids=lambda v: v.literal() if hasattr(v, "literal") else None,
)
def test_closed_certificates(w, expected):
    assert w.closed_certificate() == pytest.approx(expected, rel=1e-15)
    assert w.certificate == w.closed_certificate()


@pytest.mark.parametrize("w", WEIGHTS, ids=lambda w: w.literal())
def test_fitted_constant_never_exceeds_closed_form(w):
    closed = w.closed_certificate()
    if closed is None:
        pytest.skip("no closed form for this class")
    C, tau = closed
    assert certify(w, GevreySequence(), tau) <= C * (1 + 1e-12)


def test_certificate_falls_back_to_fit():
    w = AssocExpWeight(1.0, 0.5)
    assert w.closed_certificate() is None
    assert SubExponentialWeight(1.0, 0.5).closed_certificate() is None
    assert InterpolatedWeight(ConstantWeight(), w, 0.5).closed_certificate() is None
    assert w.certificate == (certify(w, GevreySequence(), w.default_tau()), w.default_tau())


def test_interpolated_certificate():
    eta = InterpolatedWeight(PolynomialWeight(1.0), SubExponentialWeight(0.5, 1.0), 0.5)
    C, tau = eta.certificate
    assert C == pytest.approx(2.0)
    assert tau == 1.0
    assert check_moderate(eta, GevreySequence(), C, tau).ok


def test_polynomial_needs_constant():
    report = check_moderate(PolynomialWeight(1.0), GevreySequence(), 1.0, 1.0)
    assert not report.ok
    assert report.worst_slack == pytest.approx(-math.log(2.0), abs=1e-12)
    assert report.witness is not None


def test_certify_polynomial():
    # (1 + |x + y|) / (1 + |x|) peaks at 2 for |y| = 1 where A(1) = 0
    assert certify(PolynomialWeight(1.0), GevreySequence(), 1.0) == pytest.approx(2.0, rel=1e-12)


def test_interpolated_weight():
    x = np.linspace(-10, 10, 21)
    eta = InterpolatedWeight(ConstantWeight(), PolynomialWeight(2.0), 0.5)
    assert np.allclose(eta.eval(x), PolynomialWeight(1.0).eval(x), rtol=1e-12)
    assert not eta.is_constant
    assert InterpolatedWeight(ConstantWeight(), ConstantWeight(), 0.3).is_constant


def test_moderation_weight_dominates():
    eta = PolynomialWeight(-1.5)
    omega = eta.moderation_weight()
    a = np.linspace(-8, 8, 33)
    b = np.linspace(-8, 8, 33)
    aa, bb = np.meshgrid(a, b)
    ratio = eta.eval(aa + bb) / eta.eval(bb)
    assert np.all(ratio <= omega.eval(aa) * (1 + 1e-12))


@given(st.floats(-30, 30), st.floats(-30, 30), st.floats(-3, 3))
@settings(max_examples=200, deadline=None)
def test_peetre_inequality(x, y, s):
    eta = PolynomialWeight(s)
    lhs = eta.log_eval(x + y)
    rhs = eta.log_eval(x) + eta.moderation_weight().log_eval(y)
    assert lhs <= rhs + 1e-12


def test_weights_are_hashable():
    assert len({PolynomialWeight(1.0), PolynomialWeight(1.0), ConstantWeight()}) == 2
