import math

import numpy as np
import pytest

from field import Grid, fl1_norm, gaussian, multiply, scale
from ucpu import (
    DEFAULT_H_GRID,
    PARTITION_TOL,
    PointSet,
    build_lattice_ucpu,
    check_condition1,
    check_condition1_poly,
    check_condition2,
    check_condition3,
    check_condition4,
    lemma33_sum,
    lemma36_decay_fit,
    lemma37_product_decay,
    lemma39_tail_radius,
    tail_sums,
)
from weights import ConstantWeight, PolynomialWeight


def test_point_set():
    pts = PointSet.lattice(1.0, 3.0)
    assert len(pts) == 7
    assert list(pts.coords) == [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]
    assert pts.diameter() == 6.0
    assert len(PointSet.lattice(0.5, 1.0, dim=2)) == 25


@pytest.mark.parametrize("points", [[], [0.0, 1.0, 0.0]])
def test_point_set_rejected(points):
    with pytest.raises(ValueError):
        PointSet(np.array(points))


def test_lattice_step_must_divide():
    with pytest.raises(ValueError):
        PointSet.lattice(0.7, 2.0)


def test_build_rejects_bad_parameters():
    with pytest.raises(ValueError):
        build_lattice_ucpu(0.0, 1.0, 12.0)
    with pytest.raises(ValueError):
        build_lattice_ucpu(1.0, -1.0, 12.0)


def test_partition_of_unity(stock_ucpu):
    report = check_condition4(stock_ucpu)
    assert report.core == 6.0
    assert report.max_deviation <= PARTITION_TOL
    assert report.ok
    assert stock_ucpu.certificates["condition4"].max_deviation == report.max_deviation


def test_certificates_are_filed_on_a_copy(stock_ucpu, seq):
    report = check_condition1(stock_ucpu, seq, 0.25)
    filed = stock_ucpu.with_certificate("condition1@h=0.25", report)
    assert filed is not stock_ucpu
    assert filed.certificates["condition1@h=0.25"] is report
    assert "condition1@h=0.25" not in stock_ucpu.certificates
    assert filed.window is stock_ucpu.window


def test_partition_of_unity_on_refined_lattice():
    u = build_lattice_ucpu(0.5, 1.0, 12.0, Grid())
    assert check_condition4(u).ok


def test_interior(stock_ucpu):
    mask = stock_ucpu.interior()
    assert mask.sum() == 13
    assert stock_ucpu.edge_band == 6.0


def test_condition1_at_zero_h_is_sup(stock_ucpu, seq):
    report = check_condition1(stock_ucpu, seq, 0.0)
    assert report.value == pytest.approx(float(np.max(stock_ucpu.window.values.real)), rel=1e-12)
    assert report.ok


def test_condition1_grows_with_h(stock_ucpu, seq):
    low = check_condition1(stock_ucpu, seq, 0.25, K_order=8)
    high = check_condition1(stock_ucpu, seq, 0.5, K_order=8)
    assert low.ok and high.ok
    assert np.isfinite(high.value)
    assert high.value >= low.value
    assert not any(key.startswith("condition1") for key in stock_ucpu.certificates)


def test_condition1_order_cap(stock_ucpu, seq):
    with pytest.raises(ValueError):
        check_condition1(stock_ucpu, seq, 0.25, K_order=17)


def test_condition1_poly(stock_ucpu):
    report = check_condition1_poly(stock_ucpu, 4)
    assert report.ok
    assert np.isfinite(report.value)


def test_condition2():
    pts = PointSet.lattice(1.0, 12.0)
    assert check_condition2(pts, 0.5) == 2
    assert check_condition2(pts, 0.25) == 1
    assert check_condition2(pts, 1.0) == 3


def test_condition3():
    pts = PointSet.lattice(1.0, 12.0)
    assert check_condition3(pts, 0.6).covered
    report = check_condition3(pts, 0.4)
    assert not report.covered
    assert report.max_gap == 0.5
    assert report.witness == 0.5


def test_lemma33_sum():
    pts = PointSet.lattice(1.0, 200.0)
    report = lemma33_sum(pts, 1.0)
    # sum over all of Z of (1 + |k|)^-2 is pi^2/3 - 1
    assert 2.27 < report.value < math.pi ** 2 / 3 - 1
    assert report.value <= report.constructive_bound
    assert pts.coords[report.argmax_mu] == 0.0


def test_lemma33_monotone_under_inclusion():
    small = lemma33_sum(PointSet.lattice(1.0, 20.0), 0.5).value
    large = lemma33_sum(PointSet.lattice(1.0, 40.0), 0.5).value
    assert small <= large


@pytest.mark.parametrize("eps, expected", [(0.1, 5.0), (0.01, 7.0)])
def test_lemma39_tail_radius(eps, expected, seq):
    pts = PointSet.lattice(1.0, 50.0)
    report = lemma39_tail_radius(pts, seq, 1.0, eps)
    assert report.R == expected
    assert report.ok
    direct = np.max(tail_sums(pts, seq, 1.0, report.R))
    assert direct == pytest.approx(report.tail, rel=1e-12)
    assert direct <= eps
    assert np.max(tail_sums(pts, seq, 1.0, report.R - 1.0)) > eps


def test_lemma39_trivial_cases(seq):
    pts = PointSet.lattice(1.0, 5.0)
    assert lemma39_tail_radius(pts, seq, 1.0, 100.0).R == 0.0
    assert np.all(tail_sums(pts, seq, 1.0, pts.diameter()) == 0.0)


def test_lemma36_decay_fit(stock_ucpu, seq):
    chi = gaussian(stock_ucpu.grid)
    fit = lemma36_decay_fit(stock_ucpu, chi, None, 0.5, seq)
    assert fit.ok
    assert fit.slack >= -1e-12 * fit.C
    assert fit.lhs.shape == fit.separations.shape


def test_lemma37_product_decay(stock_ucpu, seq):
    fit = lemma37_product_decay(stock_ucpu, None, seq)
    assert fit.ok
    assert fit.slack >= -1e-12 * fit.C
    assert fit.lhs[-1] < 1e-6 * fit.lhs[0]


def test_lemma36_is_homogeneous_in_chi(stock_ucpu, seq):
    chi = gaussian(stock_ucpu.grid)
    base = lemma36_decay_fit(stock_ucpu, chi, None, 0.5, seq)
    doubled = lemma36_decay_fit(stock_ucpu, scale(chi, 2.0), None, 0.5, seq)
    assert doubled.h == base.h
    assert doubled.C == pytest.approx(2.0 * base.C, rel=1e-12)
    assert np.allclose(doubled.lhs, 2.0 * base.lhs, rtol=1e-12, atol=0.0)


def test_lemma36_diagonal_stays_under_algebra_ceiling(stock_ucpu, seq):
    chi = gaussian(stock_ucpu.grid)
    fit = lemma36_decay_fit(stock_ucpu, chi, None, 0.5, seq)
    ceiling = fl1_norm(stock_ucpu.window) * fl1_norm(chi)
    diagonal = fit.lhs[fit.separations == 0.0]
    assert diagonal.size == 1
    assert diagonal[0] <= ceiling * (1.0 + 1e-9)


def test_lemma37_diagonal_and_far_field(stock_ucpu, seq):
    fit = lemma37_product_decay(stock_ucpu, None, seq)
    window = stock_ucpu.window
    assert fit.separations[0] == 0.0
    assert fit.lhs[0] == pytest.approx(fl1_norm(multiply(window, window)), rel=1e-12)
    far = fit.separations > 12.0
    assert np.any(far)
    assert np.all(fit.lhs[far] < 1e-12)


def test_lemma37_weighted_against_unweighted(stock_ucpu, seq):
    plain = lemma37_product_decay(stock_ucpu, ConstantWeight(), seq)
    weighted = lemma37_product_decay(stock_ucpu, PolynomialWeight(1.0), seq)
    assert plain.ok and weighted.ok
    assert np.all(weighted.lhs >= plain.lhs)
    assert weighted.lhs[0] > plain.lhs[0]
    grid_h = sorted(DEFAULT_H_GRID)
    assert abs(grid_h.index(weighted.h) - grid_h.index(plain.h)) <= 1


def test_condition1_is_stable_under_refinement(seq):
    coarse = build_lattice_ucpu(1.0, 1.0, 12.0, Grid())
    fine = build_lattice_ucpu(1.0, 1.0, 12.0, Grid().refined())
    a = check_condition1(coarse, seq, 0.25, K_order=8)
    b = check_condition1(fine, seq, 0.25, K_order=8)
    assert a.ok and b.ok
    assert abs(a.value - b.value) <= 1e-8 * a.value
