"""Continuous, family and discrete amalgam norms with the equivalence and retraction harnesses."""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from errors import GridError, WindowError
from field import SampledField, sqrt_field, translate_rows
from spaces import BaseSpace
from ucpu import Ucpu, check_condition4
from weights import ConstantWeight, Weight

logger = logging.getLogger("Amalgam")

# outer-integrand mass at the edge of the x-grid above this share flags the report
TAIL_REL = 1e-8
DEFAULT_OUTER_MARGIN = 4.0


@dataclass
class AmalgamSpec:
    """
    W(E, L^p_eta) or, with c0 = True, W(E, C_{eta,0}).
    chi is the window of the continuous norm, ucpu the partition of the discrete one.
    """
    E: BaseSpace
    p: float = 2.0
    eta: Weight = field(default_factory=ConstantWeight)
    chi: Optional[SampledField] = None
    ucpu: Optional[Ucpu] = None
    c0: bool = False
    outer_margin: float = DEFAULT_OUTER_MARGIN
    outer_step: Optional[float] = None

    def __post_init__(self):
        if not self.c0 and not (self.p >= 1):
            raise ValueError(f"p must be >= 1, got {self.p}")

    @property
    def global_p(self) -> float:
        return math.inf if self.c0 else self.p

    def outer_points(self, f: SampledField) -> np.ndarray:
        """x-grid of the outer integral: the field grid restricted to |x| <= L - margin."""
        half = f.grid.L - self.outer_margin
        if half <= 0:
            raise GridError(f"outer margin {self.outer_margin} leaves no x-grid inside L = {f.grid.L}")
        step = self.outer_step or f.grid.delta
        k = int(math.floor(half / step + 1e-9))
        return step * np.arange(-k, k + 1)

    def describe(self) -> Dict[str, object]:
        return {
            "E": self.E.literal(),
            "global": "c0" if self.c0 else self.p,
            "weight": self.eta.literal(),
            "outer_margin": self.outer_margin,
        }


@dataclass
class NormReport:
    value: float
    tail_flag: bool
    params: Dict[str, object] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)


def weighted_lp(values: np.ndarray, weights: np.ndarray, p: float, step: float = 1.0) -> float:
    """(sum |v w|^p step)^{1/p}, sup for p = inf; scaled to avoid overflow."""
    mag = np.abs(values) * weights
    if mag.size == 0:
        return 0.0
    top = float(np.max(mag))
    if top == 0 or math.isinf(p):
        return top
    return top * float(np.sum((mag / top) ** p) * step) ** (1.0 / p)


def _edge_share(profile: np.ndarray, xs: np.ndarray) -> float:
    """Largest outer integrand in the outer half of the x-grid, relative to the maximum."""
    top = float(np.max(profile)) if profile.size else 0.0
    if top == 0:
        return 0.0
    outer = np.abs(xs) > np.max(np.abs(xs)) / 2.0
    return float(np.max(profile[outer])) / top if np.any(outer) else 0.0


def local_profile(f: SampledField, window: SampledField, E: BaseSpace, xs: np.ndarray) -> np.ndarray:
    """x -> ||f T_x window||_E on the outer points."""
    if f.grid != window.grid:
        raise GridError(f"grid mismatch: {f.grid} vs {window.grid}")
    rows = translate_rows(window, xs) * f.values[None, :]
    return E.norm_values(rows, f.grid)


def _profile_report(profile: np.ndarray, xs: np.ndarray, spec: AmalgamSpec, step: float, kind: str) -> NormReport:
    weighted = profile * spec.eta.eval(xs)
    value = weighted_lp(profile, spec.eta.eval(xs), spec.global_p, step)
    if spec.c0:
        share = _edge_share(weighted, xs)
    else:
        edge = max(weighted[0], weighted[-1]) if weighted.size else 0.0
        top = float(np.max(weighted)) if weighted.size else 0.0
        share = edge / top if top else 0.0
    report = NormReport(value=value, tail_flag=share > TAIL_REL, params={**spec.describe(), "kind": kind, "x_step": step})
    if report.tail_flag:
        msg = f"outer integrand still {share:.2e} of its max at the x-grid edge"
        report.warnings.append(msg)
        logger.debug(msg)
    return report


def continuous_norm(f: SampledField, spec: AmalgamSpec) -> NormReport:
    """(int ||f T_x chi||_E^p eta(x)^p dx)^{1/p} by a Riemann sum over the outer x-grid."""
    if spec.chi is None or spec.chi.is_zero():
        raise WindowError("window chi must not be identically zero")
    xs = spec.outer_points(f)
    step = spec.outer_step or f.grid.delta
    profile = local_profile(f, spec.chi, spec.E, xs)
    return _profile_report(profile, xs, spec, step, "continuous")


def family_norm(f: SampledField, windows: Sequence[SampledField], spec: AmalgamSpec) -> NormReport:
    """Continuous norm with sup over the window family B inside the outer integral."""
    live = [w for w in windows if not w.is_zero()]
    if not live:
        raise WindowError("window family has no nonzero member")
    xs = spec.outer_points(f)
    step = spec.outer_step or f.grid.delta
    profile = np.max(np.stack([local_profile(f, w, spec.E, xs) for w in live]), axis=0)
    return _profile_report(profile, xs, spec, step, "family")


def piece_norms(f: SampledField, u: Ucpu, E: BaseSpace, psi: Optional[SampledField] = None) -> np.ndarray:
    """||f T_{y_lambda} psi||_E for every lambda; psi defaults to the partition window."""
    window = u.window if psi is None else psi
    return local_profile(f, window, E, u.pts.coords)


def sequence_norm(local: np.ndarray, points: np.ndarray, p: float, eta: Weight) -> float:
    """(sum_lambda local_lambda^p eta(y_lambda)^p)^{1/p}."""
    return weighted_lp(np.asarray(local), eta.eval(points), p)


def _certified(u: Ucpu) -> Optional[str]:
    report = u.certificates.get("condition4") or check_condition4(u)
    if report.ok:
        return None
    return f"partition deviates from 1 by {report.max_deviation:.2e} on |x| <= {report.core}"


def discrete_norm(
    f: SampledField,
    u: Ucpu,
    E: BaseSpace,
    p: float = 2.0,
    eta: Optional[Weight] = None,
    c0: bool = False,
) -> NormReport:
    """(sum_lambda ||f psi_lambda||_E^p eta(y_lambda)^p)^{1/p}; c0 adds the boundary-band tail."""
    if not c0 and not (p >= 1):
        raise ValueError(f"p must be >= 1, got {p}")
    eta = eta or ConstantWeight()
    y = u.pts.coords
    local = piece_norms(f, u, E)
    value = sequence_norm(local, y, math.inf if c0 else p, eta)
    params = {"E": E.literal(), "global": "c0" if c0 else p, "weight": eta.literal(), "kind": "discrete", "a": u.a}
    report = NormReport(value=value, tail_flag=False, params=params)

    if c0:
        band = ~u.interior()
        tail = float(np.max(local[band] * eta.eval(y[band]))) if np.any(band) else 0.0
        report.params["boundary_tail"] = tail
        report.tail_flag = value > 0 and tail > TAIL_REL * value
    warning = _certified(u)
    if warning:
        report.warnings.append(warning)
        logger.warning(f"Uncertified partition: {warning}")
    return report


@dataclass
class RatioTable:
    ratios: List[float]

    @property
    def min(self) -> float:
        return float(np.min(self.ratios))

    @property
    def max(self) -> float:
        return float(np.max(self.ratios))

    @property
    def spread(self) -> float:
        return self.max / self.min if self.min > 0 else math.inf


def equivalence_report(f_family: Sequence[SampledField], spec_cont: AmalgamSpec, u: Ucpu) -> RatioTable:
    """r(f) = continuous_norm / discrete_norm over the family."""
    ratios = []
    for f in f_family:
        if f.is_zero():
            raise ValueError("equivalence family members must be nonzero")
        cont = continuous_norm(f, spec_cont).value
        disc = discrete_norm(f, u, spec_cont.E, spec_cont.p, spec_cont.eta, spec_cont.c0).value
        ratios.append(cont / disc)
    return RatioTable(ratios=ratios)


def window_independence(
    f_family: Sequence[SampledField],
    chi1: SampledField,
    chi2: SampledField,
    spec: AmalgamSpec,
) -> RatioTable:
    """Per-f ratio of the continuous norms with windows chi1 and chi2."""
    first = replace(spec, chi=chi1)
    second = replace(spec, chi=chi2)
    return RatioTable(ratios=[continuous_norm(f, first).value / continuous_norm(f, second).value for f in f_family])


def default_factor(u: Ucpu) -> SampledField:
    """psi1 = psi2 = sqrt(psi); the window is strictly positive."""
    return sqrt_field(u.window)


def analysis_map(f: SampledField, u: Ucpu, psi1: Optional[SampledField] = None) -> List[SampledField]:
    """{f T_{y_lambda} psi1}_lambda."""
    psi1 = default_factor(u) if psi1 is None else psi1
    if f.grid != psi1.grid:
        raise GridError(f"grid mismatch: {f.grid} vs {psi1.grid}")
    rows = translate_rows(psi1, u.pts.coords) * f.values[None, :]
    return [SampledField(grid=f.grid, values=row) for row in rows]


def synthesis_map(pieces: Sequence[SampledField], u: Ucpu, psi2: Optional[SampledField] = None) -> SampledField:
    """sum_lambda pieces_lambda T_{y_lambda} psi2."""
    psi2 = default_factor(u) if psi2 is None else psi2
    if len(pieces) != len(u.pts):
        raise ValueError(f"expected {len(u.pts)} pieces, got {len(pieces)}")
    for piece in pieces:
        if piece.grid != psi2.grid:
            raise GridError(f"grid mismatch: {piece.grid} vs {psi2.grid}")
    stacked = np.stack([piece.values for piece in pieces])
    total = np.sum(stacked * translate_rows(psi2, u.pts.coords), axis=0)
    return SampledField(grid=psi2.grid, values=total)


@dataclass
class RetractionReport:
    rel_error: float
    core: float

    @property
    def ok(self) -> bool:
        return self.rel_error <= 1e-8


def retraction_check(f: SampledField, u: Ucpu, core: Optional[float] = None) -> RetractionReport:
    """||P(I(f)) - f||_{L^2} / ||f||_{L^2} on |x| <= core."""
    if core is None:
        core = max(u.L_pts - u.edge_band, 0.0)
    back = synthesis_map(analysis_map(f, u), u)
    sel = np.abs(f.grid.points) <= core
    base = float(np.sqrt(np.sum(np.abs(f.values[sel]) ** 2)))
    err = float(np.sqrt(np.sum(np.abs(back.values[sel] - f.values[sel]) ** 2)))
    return RetractionReport(rel_error=err / base if base else err, core=core)


@dataclass
class InclusionReport:
    """Discrete norms along increasing p, and the C0 value against p = inf."""
    ps: List[float]
    values: List[float]
    c0_value: float

    @property
    def monotone(self) -> bool:
        return all(b <= a * (1 + 1e-12) for a, b in zip(self.values, self.values[1:]))

    @property
    def c0_matches_sup(self) -> bool:
        return self.c0_value == self.values[-1] if math.isinf(self.ps[-1]) else True

    @property
    def ok(self) -> bool:
        return self.monotone and self.c0_matches_sup


def inclusion_chain(
    f: SampledField,
    u: Ucpu,
    E: BaseSpace,
    eta: Optional[Weight] = None,
    ps: Sequence[float] = (1.0, 2.0, 4.0, math.inf),
) -> InclusionReport:
    ps = sorted(ps)
    values = [discrete_norm(f, u, E, p, eta).value for p in ps]
    c0_value = discrete_norm(f, u, E, math.inf, eta, c0=True).value
    return InclusionReport(ps=list(ps), values=values, c0_value=c0_value)
