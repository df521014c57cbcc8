import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from field import Grid, SampledField, gaussian, hat_gauss_window
from local_norms import (
    eloc_membership,
    empirical_modulation_growth,
    empirical_translation_growth,
    integral_representation_check,
    local_norm,
    modulation_certificate_check,
    multiplier_bound_check,
    translation_certificate_check,
)
from spaces import FourierLebesgue, WeightedC0, WeightedLp
from weights import PolynomialWeight

SPACES = [
    WeightedLp(2.0),
    WeightedLp(1.0, PolynomialWeight(1.0)),
    WeightedC0(),
    FourierLebesgue(),
    FourierLebesgue(1.0, PolynomialWeight(1.0)),
]


def test_local_norm(g):
    assert local_norm(g, WeightedLp(1.0)) == pytest.approx(1.0, abs=1e-12)


def test_unweighted_translation_growth_is_one(g):
    growth = empirical_translation_growth(WeightedLp(2.0), [-3.0, 0.0, 2.5], [g])
    assert [x for x, _ in growth] == [-3.0, 0.0, 2.5]
    assert np.allclose([r for _, r in growth], 1.0, rtol=1e-12)


def test_translation_growth_needs_nonzero_family(grid):
    with pytest.raises(ValueError):
        empirical_translation_growth(WeightedLp(2.0), [1.0], [SampledField.zeros(grid)])


@pytest.mark.parametrize("E", SPACES, ids=lambda E: E.literal())
def test_translation_certificate(E, grid):
    family = [gaussian(grid), gaussian(grid, 1.0, 0.5, 2.0)]
    report = translation_certificate_check(E, np.linspace(-6, 6, 13), family)
    assert report.ok
    assert len(report.rows) == 13


@pytest.mark.parametrize("E", SPACES, ids=lambda E: E.literal())
def test_multiplier_bounds(E, grid):
    g = gaussian(grid, 1.0, 0.5)
    e = gaussian(grid, -0.5, 0.0, 2.0)
    report = multiplier_bound_check(g, e, E)
    assert report.product.ok
    assert report.convolution.ok


@pytest.mark.parametrize("E", SPACES, ids=lambda E: E.literal())
def test_multiplier_bounds_random_pairs(E, grid):
    rng = np.random.Generator(np.random.PCG64(2024))
    for _ in range(100):
        x0, xi0, x1, xi1 = rng.uniform(-2.0, 2.0, size=4)
        a0, a1 = rng.uniform(0.5, 2.0, size=2)
        report = multiplier_bound_check(gaussian(grid, x0, xi0, a0), gaussian(grid, x1, xi1, a1), E)
        assert report.product.ok, (x0, xi0, a0, x1, xi1, a1)
        assert report.convolution.ok, (x0, xi0, a0, x1, xi1, a1)


def test_product_bound_is_sharp_for_gaussian(grid):
    # sup |g| = ||g||_{FL^1} for a positive Gaussian
    g = gaussian(grid)
    report = multiplier_bound_check(g, g, WeightedC0())
    assert report.product.slack == pytest.approx(0.0, abs=1e-10)


def test_integral_representation(grid):
    f = gaussian(grid, 1.0, 0.25)
    e = hat_gauss_window(1.0, 0.5, grid)
    report = integral_representation_check(f, e)
    assert report.rel_error <= 1e-10


def test_eloc_membership(g, grid):
    windows = [gaussian(grid), hat_gauss_window(1.0, 1.0, grid)]
    report = eloc_membership(g, WeightedC0(), windows)
    assert report.finite
    assert len(report.values) == 2
    assert all(t is not None and t < 1e-8 for t in report.tails)
    assert eloc_membership(g, WeightedLp(2.0), windows).tails == [None, None]


def test_modulation_is_isometric_on_weighted_lp(g, grid):
    family = [g, gaussian(grid, 1.0, 0.0, 2.0)]
    growth = empirical_modulation_growth(WeightedLp(2.0, PolynomialWeight(1.0)), [-2.5, 0.0, 1.5, 3.0], family)
    assert [xi for xi, _ in growth] == [-2.5, 0.0, 1.5, 3.0]
    assert np.allclose([r for _, r in growth], 1.0, rtol=1e-12)


def test_modulation_growth_needs_nonzero_family(grid):
    with pytest.raises(ValueError):
        empirical_modulation_growth(FourierLebesgue(), [1.0], [])


def test_modulation_growth_on_weighted_fourier_lebesgue(g):
    E = FourierLebesgue(1.0, PolynomialWeight(1.0))
    xis = np.arange(-4.0, 4.25, 0.5)
    growth = dict(empirical_modulation_growth(E, xis, [g]))
    assert growth[0.0] == pytest.approx(1.0, rel=1e-12)
    # the Fourier weight 1 + |xi| grows the norm, by at most the Peetre factor
    assert growth[4.0] > growth[1.0] > 1.0
    assert all(growth[xi] <= 1.0 + abs(xi) + 1e-12 for xi in xis)
    report = modulation_certificate_check(E, xis, [g])
    assert report.ok
    assert report.min_slack >= 0.0
    assert E.nu_cert == (2.0, 1.0)


@pytest.mark.parametrize("E", SPACES, ids=lambda E: E.literal())
def test_modulation_certificate(E, grid):
    family = [gaussian(grid), gaussian(grid, 1.0, 0.5, 2.0)]
    report = modulation_certificate_check(E, np.linspace(-4, 4, 17), family)
    assert report.ok
    assert len(report.rows) == 17


@given(st.sampled_from(SPACES), st.floats(-8, 8), st.floats(-4, 4))
@settings(max_examples=60, deadline=None)
def test_growth_certificates_random_points(E, x, xi):
    grid = Grid()
    family = [gaussian(grid), gaussian(grid, -0.5, 1.0, 0.5)]
    assert translation_certificate_check(E, [x], family).ok
    assert modulation_certificate_check(E, [xi], family).ok
