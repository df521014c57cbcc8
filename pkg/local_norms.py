"""Local norms ||.||_E, translation and modulation growth certificates and module-structure bounds."""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from field import SampledField, convolve, fl1_norm, lp_norm, modulate, multiply, translate_rows
from gevrey import GevreySequence, assoc_a, assoc_m
from spaces import BaseSpace

logger = logging.getLogger("LocalNorms")

# additive slack allowed by the multiplier/convolution bounds
BOUND_TOL = 1e-9


def local_norm(f: SampledField, E: BaseSpace) -> float:
    """||f||_E."""
    return E.norm(f)


def _growth(
    E: BaseSpace,
    points: Sequence[float],
    family: Sequence[SampledField],
    moved_norm: Callable[[SampledField, float], float],
    kind: str,
) -> List[Tuple[float, float]]:
    norms = [local_norm(e, E) for e in family]
    if not family or any(n == 0 for n in norms):
        raise ValueError(f"{kind} family members must be nonzero")
    out = []
    for z in points:
        ratio = max(moved_norm(e, float(z)) / base for e, base in zip(family, norms))
        out.append((float(z), ratio))
    return out


def empirical_translation_growth(
    E: BaseSpace,
    xs: Sequence[float],
    family: Sequence[SampledField],
) -> List[Tuple[float, float]]:
    """
    (x, max_e ||T_x e||_E / ||e||_E) for every x; a lower bound for omega_E(x).
    """
    return _growth(
        E, xs, family, lambda e, x: float(E.norm_values(translate_rows(e, [x]), e.grid)[0]), "translation"
    )


def empirical_modulation_growth(
    E: BaseSpace,
    xis: Sequence[float],
    family: Sequence[SampledField],
) -> List[Tuple[float, float]]:
    """(xi, max_e ||M_xi e||_E / ||e||_E) for every xi; a lower bound for nu_E(xi)."""
    return _growth(E, xis, family, lambda e, xi: local_norm(modulate(e, xi), E), "modulation")


@dataclass
class GrowthReport:
    """Empirical omega_E(x) or nu_E(xi) against its certificate."""
    rows: List[Tuple[float, float, float]]  # (point, empirical, certified)
    min_slack: float
    ok: bool


def _against_certificate(
    E: BaseSpace,
    growth: List[Tuple[float, float]],
    bound: np.ndarray,
    rel_tol: float,
    label: str,
) -> GrowthReport:
    rows = [(z, r, float(b)) for (z, r), b in zip(growth, bound)]
    slack = np.array([b - r for _, r, b in rows])
    min_slack = float(np.min(slack)) if slack.size else 0.0
    ok = bool(np.all(slack >= -rel_tol * np.maximum(bound, 1.0)))
    if not ok:
        logger.warning(f"{E!r}: {label} growth exceeds its certificate by {-min_slack:.3e}")
    return GrowthReport(rows=rows, min_slack=min_slack, ok=ok)


def translation_certificate_check(
    E: BaseSpace,
    xs: Sequence[float],
    family: Sequence[SampledField],
    seq: Optional[GevreySequence] = None,
    rel_tol: float = 1e-10,
) -> GrowthReport:
    """Checks empirical growth <= C e^{A(tau|x|)} at every x, with (C, tau) = omega_cert."""
    seq = seq or GevreySequence()
    c, tau = E.omega_cert
    growth = empirical_translation_growth(E, xs, family)
    bound = c * np.exp(assoc_a(seq, tau * np.abs([x for x, _ in growth])))
    return _against_certificate(E, growth, bound, rel_tol, "translation")


def modulation_certificate_check(
    E: BaseSpace,
    xis: Sequence[float],
    family: Sequence[SampledField],
    seq: Optional[GevreySequence] = None,
    rel_tol: float = 1e-10,
) -> GrowthReport:
    """Checks empirical growth <= C e^{M(tau|xi|)} at every xi, with (C, tau) = nu_cert."""
    seq = seq or GevreySequence()
    c, tau = E.nu_cert
    growth = empirical_modulation_growth(E, xis, family)
    bound = c * np.exp(assoc_m(seq, tau * np.abs([xi for xi, _ in growth])))
    return _against_certificate(E, growth, bound, rel_tol, "modulation")


@dataclass
class BoundReport:
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def ok(self) -> bool:
        return self.slack >= -BOUND_TOL


@dataclass
class MultiplierReport:
    """||g e||_E <= ||g||_{FL^1_{nu_E}} ||e||_E and ||g * e||_E <= ||g||_{L^1_{omega_E}} ||e||_E."""
    product: BoundReport
    convolution: BoundReport

    @property
    def slack(self) -> float:
        return min(self.product.slack, self.convolution.slack)

    @property
    def ok(self) -> bool:
        return self.product.ok and self.convolution.ok


def multiplier_bound_check(g: SampledField, e: SampledField, E: BaseSpace) -> MultiplierReport:
    e_norm = local_norm(e, E)
    product = BoundReport(
        lhs=local_norm(multiply(g, e), E),
        rhs=fl1_norm(g, E.nu_weight()) * e_norm,
    )
    conv = BoundReport(
        lhs=local_norm(convolve(g, e), E),
        rhs=lp_norm(g, 1.0, E.omega_weight()) * e_norm,
    )
    return MultiplierReport(product=product, convolution=conv)


@dataclass
class IntegralRepresentationReport:
    """f * e against the Riemann sum of f(x) T_x e over grid points x."""
    max_abs_error: float
    scale: float

    @property
    def rel_error(self) -> float:
        return self.max_abs_error / self.scale if self.scale else 0.0


def integral_representation_check(f: SampledField, e: SampledField) -> IntegralRepresentationReport:
    direct = convolve(f, e).values
    xs = f.grid.points
    keep = np.abs(f.values) > 0
    rows = translate_rows(e, xs[keep])
    summed = f.grid.delta * (f.values[keep] @ rows) if np.any(keep) else np.zeros_like(direct)
    err = float(np.max(np.abs(summed - direct)))
    return IntegralRepresentationReport(max_abs_error=err, scale=float(np.max(np.abs(direct))))


@dataclass
class ElocReport:
    """E_loc membership over a finite window family."""
    values: List[float]
    tails: List[Optional[float]] = field(default_factory=list)

    @property
    def finite(self) -> bool:
        return all(np.isfinite(v) for v in self.values)


def eloc_membership(f: SampledField, E: BaseSpace, windows: Sequence[SampledField]) -> ElocReport:
    """||f chi||_E for every window chi (translates by 0); all finite means f in E_loc on this family."""
    values, tails = [], []
    for chi in windows:
        piece = multiply(f, chi)
        values.append(local_norm(piece, E))
        tails.append(E.tail_mass(piece))
    return ElocReport(values=values, tails=tails)

