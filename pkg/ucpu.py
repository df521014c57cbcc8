"""Uniformly concentrated partitions of unity on lattices and the point-set sums and tail radii."""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.special import beta as beta_fn
from scipy.special import gammaln

from field import (
    MAX_DERIVATIVE_ORDER,
    Grid,
    SampledField,
    dft_values,
    hat_gauss_window,
    lp_norm_values,
    translate_rows,
)
from gevrey import GevreySequence, assoc_a
from weights import ConstantWeight, Weight

logger = logging.getLogger("Ucpu")

PARTITION_TOL = 1e-10
RECENTER_TOL = 1e-9
DEFAULT_H_GRID = (1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2, 1.0)
# largest admissible envelope constant, relative to the largest left side
DEFAULT_FIT_CAP = 1e4


@dataclass(frozen=True, eq=False)
class PointSet:
    """Finite family of points y_lambda; points has shape (m, dim)."""
    points: np.ndarray
    dim: int = 1

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, self.dim)
        if pts.shape[0] == 0:
            raise ValueError("point set is empty")
        if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
            raise ValueError("points must be pairwise distinct")
        object.__setattr__(self, "points", pts)

    @classmethod
    def lattice(cls, a: float, L_pts: float, dim: int = 1) -> "PointSet":
        """a Z^dim intersected with [-L_pts, L_pts]^dim."""
        if a <= 0:
            raise ValueError(f"lattice step a must be > 0, got {a}")
        steps = L_pts / a
        k = int(round(steps))
        if L_pts < 0 or abs(steps - k) > 1e-9:
            raise ValueError(f"a = {a} must divide L_pts = {L_pts}")
        axis = a * np.arange(-k, k + 1)
        mesh = np.meshgrid(*([axis] * dim), indexing="ij")
        return cls(points=np.stack([m.ravel() for m in mesh], axis=1), dim=dim)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def coords(self) -> np.ndarray:
        """First coordinate of every point (the lattice in dim 1)."""
        return self.points[:, 0]

    def distances(self) -> np.ndarray:
        """Euclidean distance matrix |y_lambda - y_mu|."""
        diff = self.points[:, None, :] - self.points[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=-1))

    def diameter(self) -> float:
        return float(np.max(self.distances()))


@dataclass(frozen=True, eq=False)
class Ucpu:
    """Lattice family psi_lambda = T_{y_lambda} psi with cached condition reports."""
    pts: PointSet
    window: SampledField
    a: float
    s: float
    L_pts: float
    certificates: Dict[str, object] = field(default_factory=dict)

    @property
    def grid(self) -> Grid:
        return self.window.grid

    @property
    def edge_band(self) -> float:
        """Distance from the point-set edge inside which lambda counts as boundary."""
        return 6.0 * max(self.a, self.s)

    def interior(self) -> np.ndarray:
        """Mask of lambda further than edge_band from the point-set edge, never empty."""
        y = self.pts.coords
        mask = np.abs(y) <= self.L_pts - self.edge_band
        if not np.any(mask):
            mask = np.abs(y) == np.min(np.abs(y))
        return mask

    def pieces(self, xs: Optional[np.ndarray] = None) -> np.ndarray:
        """Samples of psi_lambda, one row per lambda."""
        return translate_rows(self.window, self.pts.coords if xs is None else xs)

    def with_certificate(self, key: str, report: object) -> "Ucpu":
        """Copy of this family with report filed under key; the original is left untouched."""
        return replace(self, certificates={**self.certificates, key: report})


def build_lattice_ucpu(a: float, s: float, L_pts: float, grid: Optional[Grid] = None) -> Ucpu:
    """psi = hat_a * g_s on a Z cap [-L_pts, L_pts]; the a-translates of psi sum to 1 on R."""
    if a <= 0:
        raise ValueError(f"lattice step a must be > 0, got {a}")
    if s <= 0:
        raise ValueError(f"smoothing width s must be > 0, got {s}")
    pts = PointSet.lattice(a, L_pts)
    window = hat_gauss_window(a, s, grid or Grid())
    logger.debug(f"Lattice UCPU a={a}, s={s}, {len(pts)} points")
    u = Ucpu(pts=pts, window=window, a=a, s=s, L_pts=L_pts)
    return u.with_certificate("condition4", check_condition4(u))


@dataclass
class PartitionReport:
    max_deviation: float
    core: float
    witness: float

    @property
    def ok(self) -> bool:
        return self.max_deviation <= PARTITION_TOL


def check_condition4(u: Ucpu, core: Optional[float] = None) -> PartitionReport:
    """max |sum_lambda psi_lambda(x) - 1| over grid x with |x| <= core."""
    if core is None:
        core = max(u.L_pts - u.edge_band, 0.0)
    t = u.grid.points
    sel = np.abs(t) <= core
    x = t[sel]
    total = np.real(u.window.closed_form.evaluate(x[None, :] - u.pts.coords[:, None])).sum(axis=0)
    dev = np.abs(total - 1.0)
    idx = int(np.argmax(dev))
    report = PartitionReport(max_deviation=float(dev[idx]), core=core, witness=float(x[idx]))
    if not report.ok:
        logger.warning(f"Partition of unity deviates by {report.max_deviation:.3e} at x={report.witness}")
    return report


@dataclass
class Condition1Report:
    """sup h^alpha |psi_lambda^(alpha)(x)| e^{A(h|x - y_lambda|)} / M_alpha over alpha <= order."""
    value: float
    h: float
    order: int
    recenter_spread: float

    @property
    def ok(self) -> bool:
        return np.isfinite(self.value) and self.recenter_spread <= RECENTER_TOL * max(1.0, self.value)


def _concentration(u: Ucpu, y: float, log_weight, order: int, include) -> float:
    """
    Sup near y over x and alpha <= order of exp(log_weight(alpha, x - y)) |psi^(alpha)(x - y)|.

    The grid maximum is polished by a bounded scalar search over the two
    neighbouring cells, so the value does not depend on the sampling step.
    """
    t = u.grid.points
    reach = u.grid.L - 1.0
    rel = t[np.abs(t - y) <= reach] - y
    step = u.grid.delta
    best = -math.inf
    with np.errstate(divide="ignore"):
        for alpha in range(order + 1):
            if not include(alpha):
                continue

            def log_term(x, alpha=alpha):
                x = np.atleast_1d(np.asarray(x, dtype=float))
                return np.log(np.abs(u.window.closed_form.derivative(x, alpha))) + log_weight(alpha, x)

            sampled = log_term(rel)
            idx = int(np.argmax(sampled))
            found = float(sampled[idx])
            if np.isfinite(found):
                centre = float(rel[idx])
                res = minimize_scalar(
                    lambda x: -float(log_term(x)[0]),
                    bounds=(centre - step, centre + step),
                    method="bounded",
                    options={"xatol": 1e-13},
                )
                if res.success and np.isfinite(res.fun):
                    found = max(found, -float(res.fun))
            best = max(best, found)
    return math.exp(best)


def _recentered_sup(u: Ucpu, log_weight, order: int, include=lambda alpha: True) -> Tuple[float, float]:
    y = u.pts.coords[u.interior()]
    # one central point and its two neighbours suffice: the family is translation generated
    picks = y[np.argsort(np.abs(y))[:3]]
    values = [_concentration(u, float(yy), log_weight, order, include) for yy in picks]
    return max(values), max(values) - min(values)


def check_condition1(u: Ucpu, seq: GevreySequence, h: float, K_order: int = 8) -> Condition1Report:
    if K_order > MAX_DERIVATIVE_ORDER:
        raise ValueError(f"K_order is capped at {MAX_DERIVATIVE_ORDER}, got {K_order}")
    if h < 0:
        raise ValueError(f"h must be >= 0, got {h}")
    log_m = seq.log_values(np.arange(K_order + 1))

    def log_weight(alpha, rel):
        base = assoc_a(seq, h * np.abs(rel))
        if alpha == 0:
            return base
        return base + alpha * math.log(h) - log_m[alpha]

    # at h = 0 only alpha = 0 survives
    include = (lambda alpha: alpha == 0) if h == 0 else (lambda alpha: True)
    value, spread = _recentered_sup(u, log_weight, K_order, include)
    report = Condition1Report(value=value, h=h, order=K_order, recenter_spread=spread)
    return report


def check_condition1_poly(u: Ucpu, N: int) -> Condition1Report:
    """sup_{alpha <= N} |psi_lambda^(alpha)(x)| (1 + |x - y_lambda|)^N, the distributional variant."""
    if N > MAX_DERIVATIVE_ORDER:
        raise ValueError(f"N is capped at {MAX_DERIVATIVE_ORDER}, got {N}")

    def log_weight(alpha, rel):
        return N * np.log1p(np.abs(rel))

    value, spread = _recentered_sup(u, log_weight, N)
    report = Condition1Report(value=value, h=0.0, order=N, recenter_spread=spread)
    return report


def check_condition2(pts: PointSet, K_halfwidth: float, tol: float = 1e-12) -> int:
    """C_K = sup_x #{lambda : x in y_lambda + [-r, r]^dim}; the sup sits on an endpoint y_lambda +- r."""
    if K_halfwidth < 0:
        raise ValueError(f"K half-width must be >= 0, got {K_halfwidth}")
    r = K_halfwidth
    axes = [np.unique(np.concatenate([pts.points[:, d] - r, pts.points[:, d] + r])) for d in range(pts.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    candidates = np.stack([m.ravel() for m in mesh], axis=1)
    best = 0
    for chunk in np.array_split(candidates, max(1, len(candidates) // 2048)):
        gap = np.max(np.abs(chunk[:, None, :] - pts.points[None, :, :]), axis=-1)
        best = max(best, int(np.max(np.sum(gap <= r + tol, axis=1))))
    return best


@dataclass
class CoverReport:
    covered: bool
    max_gap: float
    witness: Optional[float]
    U_halfwidth: float


def check_condition3(
    pts: PointSet,
    U_halfwidth: float,
    core: Tuple[float, float] = (-8.0, 8.0),
    step: float = 1.0 / 16,
) -> CoverReport:
    """Every grid point of the core lies in some y_lambda + (-U, U); reports the worst gap (dim 1)."""
    lo, hi = core
    x = np.linspace(lo, hi, int(round((hi - lo) / step)) + 1)
    gap = np.min(np.abs(x[:, None] - pts.coords[None, :]), axis=1)
    worst = float(np.max(gap))
    covered = worst < U_halfwidth
    witness = None
    if not covered:
        # among the worst points prefer the one nearest the origin, then the right one
        cand = x[gap == worst]
        witness = float(sorted(cand, key=lambda v: (abs(v), -v))[0])
    return CoverReport(covered=covered, max_gap=worst, witness=witness, U_halfwidth=U_halfwidth)


@dataclass
class Lemma33Report:
    value: float
    argmax_mu: int
    constructive_bound: float
    eps: float


def lemma33_sum(pts: PointSet, eps: float) -> Lemma33Report:
    """sup_mu sum_lambda (1 + |y_lambda - y_mu|)^(-n - eps) by the exact double sum."""
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    n = pts.dim
    sums = np.sum((1.0 + pts.distances()) ** (-n - eps), axis=1)
    mu = int(np.argmax(sums))
    # average over the unit ball around each point, overlap counted by C_K
    c_k = check_condition2(pts, 1.0)
    sphere = 2.0 * math.pi ** (n / 2.0) / math.exp(gammaln(n / 2.0))
    ball = math.pi ** (n / 2.0) / math.exp(gammaln(n / 2.0 + 1.0))
    l1 = sphere * beta_fn(n, eps)
    bound = 2.0 ** (n + eps) * c_k * l1 / ball
    return Lemma33Report(value=float(sums[mu]), argmax_mu=mu, constructive_bound=bound, eps=eps)


@dataclass
class DecayFit:
    """Envelope LHS(d) <= C e^{-A(h d)} over sampled separations d."""
    C: Optional[float]
    h: Optional[float]
    slack: Optional[float]
    separations: np.ndarray
    lhs: np.ndarray
    n_pairs: int

    @property
    def ok(self) -> bool:
        return self.h is not None


def _fit_envelope(d: np.ndarray, lhs: np.ndarray, seq: GevreySequence, h_grid: Sequence[float], cap: float, n_pairs: int) -> DecayFit:
    top = float(np.max(lhs))
    chosen = None
    for h in sorted(h_grid):
        a_vals = assoc_a(seq, h * np.abs(d))
        c_fit = float(np.max(lhs * np.exp(a_vals)))
        if top == 0 or c_fit <= cap * top:
            slack = float(np.min(c_fit * np.exp(-a_vals) - lhs))
            chosen = (c_fit, h, slack)
    if chosen is None:
        logger.warning("No h in the grid gives an admissible decay envelope")
        return DecayFit(C=None, h=None, slack=None, separations=d, lhs=lhs, n_pairs=n_pairs)
    c_fit, h, slack = chosen
    return DecayFit(C=c_fit, h=h, slack=slack, separations=d, lhs=lhs, n_pairs=n_pairs)


def _pair_count(u: Ucpu, max_sep: float) -> int:
    return int(np.sum(u.pts.distances() <= max_sep + 1e-9))


def product_norms(u: Ucpu, chi: SampledField, eta: Weight, shifts: np.ndarray) -> np.ndarray:
    """||psi T_shift chi||_{FL^1_eta} for every shift."""
    rows = translate_rows(chi, shifts) * u.window.values[None, :]
    spectrum, dual = dft_values(rows, u.grid, +1)
    return lp_norm_values(spectrum, dual, 1.0, eta)


def lemma36_decay_fit(
    u: Ucpu,
    chi: SampledField,
    eta_nu: Optional[Weight],
    K_halfwidth: float,
    seq: GevreySequence,
    h_grid: Sequence[float] = DEFAULT_H_GRID,
    max_sep: float = 20.0,
    n_sub: int = 5,
    cap: float = DEFAULT_FIT_CAP,
) -> DecayFit:
    """
    Fits sup_{x in y_mu + K} ||psi_lambda T_x chi||_{FL^1_eta} <= C e^{-A(h |y_lambda - y_mu|)}.

    The FL^1_eta norm ignores translations, so the left side depends on the
    signed separation y_mu - y_lambda only.
    """
    eta_nu = eta_nu or ConstantWeight()
    k = int(round(max_sep / u.a))
    d = u.a * np.arange(-k, k + 1)
    sub = np.linspace(-K_halfwidth, K_halfwidth, n_sub)
    norms = product_norms(u, chi, eta_nu, (d[:, None] + sub[None, :]).ravel())
    lhs = norms.reshape(d.size, sub.size).max(axis=1)
    return _fit_envelope(d, lhs, seq, h_grid, cap, _pair_count(u, max_sep))


def lemma37_product_decay(
    u: Ucpu,
    eta: Optional[Weight],
    seq: GevreySequence,
    h_grid: Sequence[float] = DEFAULT_H_GRID,
    max_sep: float = 20.0,
    cap: float = DEFAULT_FIT_CAP,
) -> DecayFit:
    """Fits ||psi_lambda psi_mu||_{FL^1_eta} <= C e^{-A(h |y_lambda - y_mu|)}; depends on the separation only."""
    eta = eta or ConstantWeight()
    k = int(round(max_sep / u.a))
    d = u.a * np.arange(0, k + 1)
    lhs = product_norms(u, u.window, eta, d)
    return _fit_envelope(d, lhs, seq, h_grid, cap, _pair_count(u, max_sep))


@dataclass
class TailRadiusReport:
    R: float
    tail: float
    R_constructive: float
    diameter: float
    eps: float
    h: float

    @property
    def ok(self) -> bool:
        return self.tail <= self.eps and self.R <= self.R_constructive


def tail_sums(pts: PointSet, seq: GevreySequence, h: float, R: float) -> np.ndarray:
    """sum over |y_lambda - y_mu| > R of e^{-A(h |y_lambda - y_mu|)}, for every mu."""
    dist = pts.distances()
    terms = np.exp(-assoc_a(seq, h * dist))
    return np.sum(np.where(dist > R, terms, 0.0), axis=1)


def _constructive_radius(pts: PointSet, seq: GevreySequence, h: float, eps: float, step: float) -> float:
    """
    Radius from the integral comparison in dim 1. With K = [-k, k], k = step/2,
    e^{-A(h d)} <= 2 e^{A(h k)} e^{-A(h |x - y_mu| / 2)} for x in y_lambda + K, so
    tail <= 2 e^{A(h k)} C_K / |K| * 2 int_{R-k}^inf e^{-A(h t / 2)} dt.
    """
    k = step / 2.0
    c_k = check_condition2(pts, k)
    c = float(np.exp(assoc_a(seq, np.array([h * k]))[0]))
    target = eps * (2.0 * k) / (2.0 * c * c_k)
    diameter = pts.diameter()

    def integrand(t):
        return float(np.exp(-assoc_a(seq, np.array([h * t / 2.0]))[0]))

    R = 0.0
    while R <= diameter:
        lo = max(R - k, 0.0)
        tail, _ = quad(integrand, lo, np.inf, limit=200)
        if 2.0 * tail <= target:
            return R
        R += step
    return diameter


def lemma39_tail_radius(pts: PointSet, seq: GevreySequence, h: float, eps: float, step: Optional[float] = None) -> TailRadiusReport:
    """Smallest lattice-aligned R whose exact tail sum is <= eps for every mu."""
    if h <= 0 or eps <= 0:
        raise ValueError(f"h and eps must be > 0, got h={h}, eps={eps}")
    dist = pts.distances()
    diameter = float(np.max(dist))
    terms = np.exp(-assoc_a(seq, h * dist))
    candidates = np.concatenate([[0.0], np.unique(dist[dist > 0])])

    R, tail = diameter, 0.0
    for cand in candidates:
        value = float(np.max(np.sum(np.where(dist > cand, terms, 0.0), axis=1)))
        if value <= eps:
            R, tail = float(cand), value
            break

    if step is None:
        positive = dist[dist > 0]
        step = float(np.min(positive)) if positive.size else 1.0
    R_con = _constructive_radius(pts, seq, h, eps, step)
    report = TailRadiusReport(R=R, tail=tail, R_constructive=R_con, diameter=diameter, eps=eps, h=h)
    logger.debug(f"Tail radius h={h}, eps={eps}: R={R}, constructive {R_con}")
    return report
