"""Duality pairing bound, weighted-sequence interpolation convexity and the STFT identity."""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from amalgam import AmalgamSpec, DEFAULT_OUTER_MARGIN, continuous_norm, weighted_lp
from errors import DualityError, GridError, WindowError
from field import Grid, SampledField, conjugate, dft_values, lp_norm, translate_rows
from spaces import BaseSpace, FourierLebesgue
from weights import ConstantWeight, InterpolatedWeight, Weight

logger = logging.getLogger("Duality")


@dataclass
class PairingReport:
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def pairing(f: SampledField, phi: SampledField) -> complex:
    """<f, phi> = int f phi, bilinear."""
    if f.grid != phi.grid:
        raise GridError(f"grid mismatch: {f.grid} vs {phi.grid}")
    return complex(np.sum(f.values * phi.values) * f.grid.delta)


def conjugate_exponent(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def duality_bound_check(
    f: SampledField,
    phi: SampledField,
    chi0: SampledField,
    E: BaseSpace,
    E_dual: BaseSpace,
    p: float,
    eta: Optional[Weight] = None,
    outer_margin: float = DEFAULT_OUTER_MARGIN,
) -> PairingReport:
    """
    |<f, phi>| <= ||chi0||_2^{-2} ||f||_{W(E', L^q_{1/eta}), chi0} ||phi||_{W(E, L^p_eta), conj chi0}.
    """
    if E_dual != E.holder_dual():
        raise DualityError("E′ must be the Hölder dual of E")
    if chi0.is_zero():
        raise WindowError("window chi0 must not be identically zero")
    eta = eta or ConstantWeight()
    q = conjugate_exponent(p)
    f_spec = AmalgamSpec(E=E_dual, p=q, eta=eta.inverse(), chi=chi0, outer_margin=outer_margin)
    phi_spec = AmalgamSpec(E=E, p=p, eta=eta, chi=conjugate(chi0), outer_margin=outer_margin)
    rhs = continuous_norm(f, f_spec).value * continuous_norm(phi, phi_spec).value / lp_norm(chi0, 2.0) ** 2
    return PairingReport(lhs=abs(pairing(f, phi)), rhs=rhs)


@dataclass
class ConvexityReport:
    lhs: float
    rhs: float
    p_theta: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def interpolated_exponent(p0: float, p1: float, theta: float) -> float:
    """1/p_theta = (1 - theta)/p0 + theta/p1."""
    inv = (1.0 - theta) / p0 + theta / p1
    return math.inf if inv == 0 else 1.0 / inv


def interpolation_convexity(
    c: Sequence[complex],
    points: Sequence[float],
    p0: float,
    p1: float,
    eta0: Weight,
    eta1: Weight,
    theta: float,
) -> ConvexityReport:
    """||c||_{l^{p_theta}_{eta_theta}} <= ||c||_{l^{p0}_{eta0}}^{1-theta} ||c||_{l^{p1}_{eta1}}^theta."""
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    if not (p0 >= 1 and p1 >= 1):
        raise ValueError(f"p0, p1 must be >= 1, got {p0}, {p1}")
    c = np.asarray(c, dtype=complex)
    y = np.asarray(points, dtype=float)
    p_theta = interpolated_exponent(p0, p1, theta)
    eta_theta = InterpolatedWeight(eta0, eta1, theta)
    lhs = weighted_lp(c, eta_theta.eval(y), p_theta)
    n0 = weighted_lp(c, eta0.eval(y), p0)
    n1 = weighted_lp(c, eta1.eval(y), p1)
    rhs = n0 ** (1.0 - theta) * n1 ** theta
    return ConvexityReport(lhs=lhs, rhs=rhs, p_theta=p_theta)


@dataclass(eq=False)
class StftField:
    """V_phi f(x, xi) on the outer x-points (rows) and the frequency grid (columns)."""
    x_points: np.ndarray
    x_step: float
    grid_xi: Grid
    values: np.ndarray


def stft(
    f: SampledField,
    phi: SampledField,
    xs: Optional[np.ndarray] = None,
    outer_margin: float = DEFAULT_OUTER_MARGIN,
) -> StftField:
    """V_phi f(x, .) = F(f conj(T_x phi)) for every x on the outer grid."""
    if phi.is_zero():
        raise WindowError("STFT window must not be identically zero")
    if f.grid != phi.grid:
        raise GridError(f"grid mismatch: {f.grid} vs {phi.grid}")
    if xs is None:
        xs = AmalgamSpec(E=FourierLebesgue(), outer_margin=outer_margin).outer_points(f)
    rows = f.values[None, :] * np.conj(translate_rows(phi, xs))
    values, dual = dft_values(rows, f.grid, -1)
    step = float(xs[1] - xs[0]) if len(xs) > 1 else f.grid.delta
    return StftField(x_points=np.asarray(xs, dtype=float), x_step=step, grid_xi=dual, values=values)


def stft_energy(V: StftField) -> float:
    """||V||_{L^2(x, xi)}."""
    return math.sqrt(float(np.sum(np.abs(V.values) ** 2)) * V.x_step * V.grid_xi.delta)


@dataclass
class ModulationReport:
    mixed: float
    amalgam: float

    @property
    def ratio(self) -> float:
        if self.amalgam == 0:
            return 1.0 if self.mixed == 0 else math.inf
        return self.mixed / self.amalgam


def modulation_vs_amalgam(
    f: SampledField,
    phi: SampledField,
    p: float,
    q_inner: float,
    eta: Optional[Weight] = None,
    outer_margin: float = DEFAULT_OUTER_MARGIN,
) -> ModulationReport:
    """
    Mixed norm || ||V_phi f(x, .)||_{L^q} ||_{L^p_eta(dx)} against the continuous
    norm of f in W(FL^q, L^p_eta) with window conj(phi).
    """
    eta = eta or ConstantWeight()
    spec = AmalgamSpec(E=FourierLebesgue(q_inner), p=p, eta=eta, chi=conjugate(phi), outer_margin=outer_margin)
    V = stft(f, phi, spec.outer_points(f))
    inner = np.array([weighted_lp(row, np.ones(row.shape), q_inner, V.grid_xi.delta) for row in V.values])
    mixed = weighted_lp(inner, eta.eval(V.x_points), p, V.x_step)
    return ModulationReport(mixed=mixed, amalgam=continuous_norm(f, spec).value)
