import math

import numpy as np
import pytest
from hypothesis import given, settings, example
import hypothesis.strategies as st

from duality_interp import (
    conjugate_exponent,
    duality_bound_check,
    interpolated_exponent,
    interpolation_convexity,
    modulation_vs_amalgam,
    pairing,
    stft,
    stft_energy,
)
from errors import DualityError, WindowError
from field import Grid, SampledField, gaussian
from spaces import WeightedLp
from weights import ConstantWeight, PolynomialWeight

EXPONENTS = [1.0, 1.5, 2.0, 3.0, 4.0, math.inf]


def test_conjugate_exponent():
    assert conjugate_exponent(1.0) == math.inf
    assert conjugate_exponent(2.0) == 2.0
    assert conjugate_exponent(math.inf) == 1.0
    assert conjugate_exponent(4.0) == pytest.approx(4.0 / 3.0)


def test_interpolated_exponent():
    assert interpolated_exponent(1.0, math.inf, 0.5) == 2.0
    assert interpolated_exponent(math.inf, math.inf, 0.3) == math.inf
    assert interpolated_exponent(2.0, 2.0, 0.7) == pytest.approx(2.0)


def test_pairing_is_bilinear(g, grid):
    assert pairing(g, g) == pytest.approx(2 ** -0.5, abs=1e-12)
    f = gaussian(grid, 0.0, 2.0)
    # <f, f> keeps the modulation, <f, conj f> does not
    assert abs(pairing(f, f)) < 1e-9
    assert pairing(f, SampledField(grid=grid, values=np.conj(f.values))) == pytest.approx(2 ** -0.5, abs=1e-12)


def test_duality_requires_dual_pair(g):
    E = WeightedLp(2.0)
    with pytest.raises(DualityError, match="Hölder dual"):
        duality_bound_check(g, g, g, E, WeightedLp(3.0), 2.0)


def test_duality_zero_window(g, grid):
    E = WeightedLp(2.0)
    with pytest.raises(WindowError):
        duality_bound_check(g, g, SampledField.zeros(grid), E, E.holder_dual(), 2.0)


def test_duality_sharp_case(g):
    E = WeightedLp(2.0)
    report = duality_bound_check(g, g, g, E, E.holder_dual(), 2.0)
    assert report.lhs == pytest.approx(2 ** -0.5, abs=1e-12)
    assert abs(report.slack) <= 1e-7


@given(
    st.sampled_from([1.0, 2.0, 4.0]),
    st.floats(-2, 2), st.floats(-2, 2), st.floats(0.5, 2),
    st.floats(-2, 2), st.floats(-2, 2), st.floats(0.5, 2),
)
@settings(max_examples=15, deadline=None)
def test_duality_bound(p, x0, xi0, a0, x1, xi1, a1):
    grid = Grid()
    f, phi = gaussian(grid, x0, xi0, a0), gaussian(grid, x1, xi1, a1)
    E = WeightedLp(p)
    report = duality_bound_check(f, phi, gaussian(grid), E, E.holder_dual(), p)
    assert report.slack >= -1e-7


def test_weighted_duality_bound(grid):
    E = WeightedLp(2.0, PolynomialWeight(1.0))
    report = duality_bound_check(
        gaussian(grid, 1.0, 0.5), gaussian(grid, -1.0), gaussian(grid), E, E.holder_dual(), 2.0, PolynomialWeight(1.0)
    )
    assert report.slack >= -1e-7


@given(
    st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=1, max_size=8),
    st.sampled_from(EXPONENTS),
    st.sampled_from(EXPONENTS),
    st.floats(0.05, 0.95),
)
@settings(max_examples=300, deadline=None)
@example([(1.0, 0.0), (1.0, 0.0)], 1.0, math.inf, 0.5)
def test_interpolation_convexity(coeffs, p0, p1, theta):
    c = [complex(re, im) for re, im in coeffs]
    points = np.arange(len(c), dtype=float) - 3.0
    report = interpolation_convexity(c, points, p0, p1, ConstantWeight(), PolynomialWeight(1.0), theta)
    assert report.slack >= -1e-12 * max(1.0, report.rhs)


def test_interpolation_equality_cases():
    pair = interpolation_convexity([1.0, 1.0], [0.0, 1.0], 1.0, math.inf, ConstantWeight(), ConstantWeight(), 0.5)
    assert pair.p_theta == 2.0
    assert abs(pair.slack) <= 1e-12
    single = interpolation_convexity([3.0], [2.0], 1.0, 4.0, ConstantWeight(), PolynomialWeight(1.0), 0.3)
    assert abs(single.slack) <= 1e-12


def test_interpolation_validation():
    with pytest.raises(ValueError):
        interpolation_convexity([1.0], [0.0], 1.0, 2.0, ConstantWeight(), ConstantWeight(), 1.0)
    with pytest.raises(ValueError):
        interpolation_convexity([1.0], [0.0], 0.5, 2.0, ConstantWeight(), ConstantWeight(), 0.5)


def test_stft_shape_and_energy(g):
    V = stft(g, g)
    assert V.values.shape == (385, 512)
    assert V.x_step == pytest.approx(1.0 / 16.0)
    # ||V_g g||_{L^2} = ||g||_2^2
    assert stft_energy(V) == pytest.approx(2 ** -0.5, abs=1e-8)


def test_stft_of_gaussian_at_origin(g):
    V = stft(g, g, xs=np.array([0.0]))
    xi = V.grid_xi.points
    # F(g^2)(xi) = 2^{-1/2} exp(-pi xi^2 / 2)
    assert np.allclose(V.values[0], 2 ** -0.5 * np.exp(-math.pi * xi ** 2 / 2), atol=1e-12)


def test_stft_zero_window(g, grid):
    with pytest.raises(WindowError):
        stft(g, SampledField.zeros(grid))


@pytest.mark.parametrize("p", [1.0, 2.0])
@pytest.mark.parametrize("q", [1.0, 2.0])
def test_modulation_matches_amalgam(p, q, g):
    report = modulation_vs_amalgam(g, g, p, q)
    assert report.ratio == pytest.approx(1.0, abs=1e-6)


def test_weighted_modulation_matches_amalgam(g):
    report = modulation_vs_amalgam(gaussian(g.grid, 1.0, 0.5), g, 2.0, 1.0, PolynomialWeight(1.0))
    assert report.ratio == pytest.approx(1.0, abs=1e-6)
