"""Sampled fields on uniform grids: closed forms, Fourier transform, quadrature."""
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import comb, erfcx, ndtr

from errors import GridError
from gevrey import GevreySequence, assoc_m
from weights import Weight

logger = logging.getLogger("Field")

MAX_DERIVATIVE_ORDER = 16
TAIL_WARN_REL = 1e-10


@dataclass(frozen=True)
class Grid:
    """Uniform grid x_j = -L + j*delta on [-L, L); 2L/delta must be a power of two."""
    L: float = 16.0
    delta: float = 1.0 / 16.0
    dim: int = 1

    def __post_init__(self):
        if self.dim != 1:
            raise GridError(f"only dim = 1 grids are supported, got dim = {self.dim}")
        if self.L <= 0 or self.delta <= 0:
            raise GridError(f"grid needs L > 0 and delta > 0, got L={self.L}, delta={self.delta}")
        count = 2.0 * self.L / self.delta
        n = int(round(count))
        if abs(count - n) > 1e-9 * max(1.0, count) or n < 4 or n & (n - 1):
            raise GridError(f"grid point count 2L/delta = {count:g} must be a power of two")

    @property
    def n(self) -> int:
        return int(round(2.0 * self.L / self.delta))

    @property
    def points(self) -> np.ndarray:
        return -self.L + self.delta * np.arange(self.n)

    def dual(self) -> "Grid":
        """The frequency grid of the discrete transform: [-1/(2 delta), 1/(2 delta)), step 1/(2L)."""
        return Grid(L=0.5 / self.delta, delta=0.5 / self.L)

    def refined(self) -> "Grid":
        """Same box, half the spacing."""
        return Grid(L=self.L, delta=self.delta / 2.0)


def _hermite(k: int, u: np.ndarray) -> np.ndarray:
    """Physicists' Hermite polynomial H_k(u) by the three-term recursion."""
    h_prev = np.ones_like(u)
    if k == 0:
        return h_prev
    h = 2.0 * u
    for j in range(1, k):
        h_prev, h = h, 2.0 * u * h - 2.0 * j * h_prev
    return h


def _gauss_derivative(u: np.ndarray, k: int, a: float) -> np.ndarray:
    """k-th derivative of exp(-pi a u^2)."""
    c = math.sqrt(math.pi * a)
    v = c * u
    return (-c) ** k * _hermite(k, v) * np.exp(-v * v)


@dataclass(frozen=True)
class ClosedForm:
    """
    amp * exp(2 pi i mod t) * profile(t - shift).

    Subclasses implement profile(u, k), the k-th derivative of the
    unshifted, unmodulated profile.
    """
    shift: float = 0.0
    mod: float = 0.0
    amp: complex = 1.0

    def profile(self, u: np.ndarray, k: int = 0) -> np.ndarray:
        raise NotImplementedError("profile must be implemented by child class")

    def derivative(self, t, k: int = 0) -> np.ndarray:
        if k < 0 or k > MAX_DERIVATIVE_ORDER:
            raise ValueError(f"derivative order must be in [0, {MAX_DERIVATIVE_ORDER}], got {k}")
        t = np.asarray(t, dtype=float)
        u = t - self.shift
        if self.mod == 0:
            out = np.asarray(self.profile(u, k), dtype=complex)
        else:
            w = 2j * math.pi * self.mod
            out = np.zeros(u.shape, dtype=complex)
            for j in range(k + 1):
                out += comb(k, j, exact=True) * w ** (k - j) * self.profile(u, j)
            out *= np.exp(w * t)
        return complex(self.amp) * out

    def evaluate(self, t) -> np.ndarray:
        return self.derivative(t, 0)

    def translated(self, x: float) -> "ClosedForm":
        return replace(self, shift=self.shift + x, amp=complex(self.amp) * np.exp(-2j * math.pi * self.mod * x))

    def modulated(self, xi: float) -> "ClosedForm":
        return replace(self, mod=self.mod + xi)

    def scaled(self, c: complex) -> "ClosedForm":
        return replace(self, amp=complex(self.amp) * c)

    def conjugated(self) -> "ClosedForm":
        return replace(self, mod=-self.mod, amp=complex(np.conj(self.amp)))


@dataclass(frozen=True)
class GaussianForm(ClosedForm):
    """Profile exp(-pi a u^2)."""
    a: float = 1.0

    def profile(self, u: np.ndarray, k: int = 0) -> np.ndarray:
        return _gauss_derivative(u, k, self.a)


@dataclass(frozen=True)
class HatGaussForm(ClosedForm):
    """
    Profile hat_a * g_s: the triangular bump max(0, 1 - |u|/a) smoothed by the
    unit-mass Gaussian g_s(u) = exp(-pi u^2 / s^2) / s.

    Evaluated at -|u| (the profile is even) so tails never cancel.
    """
    a: float = 1.0
    s: float = 1.0

    @property
    def _sd(self) -> float:
        return self.s / math.sqrt(2.0 * math.pi)

    def _ramp(self, t: np.ndarray) -> np.ndarray:
        """(max(., 0) * g_s)(t), stable in the left tail."""
        sd = self._sd
        z = -np.abs(t) / sd
        left = sd * np.exp(-0.5 * z * z) * (1.0 / math.sqrt(2.0 * math.pi) + 0.5 * z * erfcx(-z / math.sqrt(2.0)))
        return np.maximum(t, 0.0) + left

    def _smoothed(self, t: np.ndarray, k: int) -> np.ndarray:
        """k-th derivative of the smoothed ramp."""
        if k == 0:
            return self._ramp(t)
        if k == 1:
            return ndtr(t / self._sd)
        return _gauss_derivative(t, k - 2, 1.0 / self.s ** 2) / self.s

    def profile(self, u: np.ndarray, k: int = 0) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        v = -np.abs(u)
        a = self.a
        out = (self._smoothed(v + a, k) - 2.0 * self._smoothed(v, k) + self._smoothed(v - a, k)) / a
        if k % 2:
            out = np.where(u > 0, -out, out)
        return out


@dataclass(frozen=True)
class SqrtForm(ClosedForm):
    """Pointwise square root of a positive closed form; no derivatives."""
    inner: Optional[ClosedForm] = None

    def profile(self, u: np.ndarray, k: int = 0) -> np.ndarray:
        if k:
            raise ValueError("derivatives of a pointwise square root are not available")
        return np.sqrt(np.maximum(np.real(self.inner.evaluate(u)), 0.0))


@dataclass(frozen=True)
class SumForm(ClosedForm):
    """Sum of closed forms."""
    terms: Tuple[ClosedForm, ...] = ()

    def profile(self, u: np.ndarray, k: int = 0) -> np.ndarray:
        out = np.zeros(np.shape(u), dtype=complex)
        for term in self.terms:
            out += term.derivative(u, k)
        return out

    def conjugated(self) -> "ClosedForm":
        return replace(
            self,
            mod=-self.mod,
            amp=complex(np.conj(self.amp)),
            terms=tuple(t.conjugated() for t in self.terms),
        )


@dataclass(frozen=True, eq=False)
class SampledField:
    """Complex samples on a grid, optionally backed by a closed form."""
    grid: Grid
    values: np.ndarray
    closed_form: Optional[ClosedForm] = None

    @classmethod
    def from_form(cls, grid: Grid, form: ClosedForm) -> "SampledField":
        return cls(grid=grid, values=form.evaluate(grid.points).astype(complex), closed_form=form)

    @classmethod
    def zeros(cls, grid: Grid) -> "SampledField":
        return cls(grid=grid, values=np.zeros(grid.n, dtype=complex))

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def __mul__(self, other: "SampledField") -> "SampledField":
        return multiply(self, other)


def gaussian(grid: Optional[Grid] = None, x0: float = 0.0, xi0: float = 0.0, a: float = 1.0) -> SampledField:
    """exp(2 pi i xi0 t) exp(-pi a (t - x0)^2)."""
    if a <= 0:
        raise ValueError(f"Gaussian width a must be > 0, got {a}")
    return SampledField.from_form(grid or Grid(), GaussianForm(shift=x0, mod=xi0, a=a))


def hat_gauss_window(a: float, s: float, grid: Optional[Grid] = None) -> SampledField:
    """psi = hat_a * g_s; its a-translates sum to 1 and its mass is a."""
    if a <= 0 or s <= 0:
        raise ValueError(f"hat_gauss_window needs a > 0 and s > 0, got a={a}, s={s}")
    return SampledField.from_form(grid or Grid(), HatGaussForm(a=a, s=s))


def sqrt_field(f: SampledField) -> SampledField:
    """Pointwise positive square root, closed-form backed when f is."""
    if f.closed_form is not None:
        return SampledField.from_form(f.grid, SqrtForm(inner=f.closed_form))
    return SampledField(grid=f.grid, values=np.sqrt(np.maximum(f.values.real, 0.0)).astype(complex))


def _check_same_grid(f: SampledField, g: SampledField):
    if f.grid != g.grid:
        raise GridError(f"grid mismatch: {f.grid} vs {g.grid}")


def translate(f: SampledField, x: float) -> SampledField:
    """T_x f = f(. - x)."""
    if f.closed_form is not None:
        return SampledField.from_form(f.grid, f.closed_form.translated(x))
    steps = x / f.grid.delta
    m = int(round(steps))
    if abs(steps - m) > 1e-9:
        raise GridError("off-grid translate requires closed form")
    n = f.grid.n
    out = np.zeros_like(f.values)
    if abs(m) >= n:
        pass
    elif m >= 0:
        out[m:] = f.values[: n - m]
    else:
        out[: n + m] = f.values[-m:]
    return SampledField(grid=f.grid, values=out)


def translate_rows(f: SampledField, xs) -> np.ndarray:
    """Row i holds the samples of T_{xs[i]} f; shape (len(xs), N)."""
    xs = np.asarray(xs, dtype=float).reshape(-1)
    t = f.grid.points
    if f.closed_form is not None:
        return f.closed_form.evaluate(t[None, :] - xs[:, None])
    return np.stack([translate(f, x).values for x in xs]) if xs.size else np.zeros((0, f.grid.n), dtype=complex)


def modulate(f: SampledField, xi: float) -> SampledField:
    """M_xi f = exp(2 pi i xi .) f."""
    if f.closed_form is not None:
        return SampledField.from_form(f.grid, f.closed_form.modulated(xi))
    return SampledField(grid=f.grid, values=f.values * np.exp(2j * math.pi * xi * f.grid.points))


def scale(f: SampledField, c: complex) -> SampledField:
    if f.closed_form is not None:
        return SampledField.from_form(f.grid, f.closed_form.scaled(c))
    return SampledField(grid=f.grid, values=f.values * c)


def conjugate(f: SampledField) -> SampledField:
    if f.closed_form is not None:
        return SampledField.from_form(f.grid, f.closed_form.conjugated())
    return SampledField(grid=f.grid, values=np.conj(f.values))


def add(f: SampledField, g: SampledField) -> SampledField:
    _check_same_grid(f, g)
    if f.closed_form is not None and g.closed_form is not None:
        return SampledField.from_form(f.grid, SumForm(terms=(f.closed_form, g.closed_form)))
    return SampledField(grid=f.grid, values=f.values + g.values)


def multiply(f: SampledField, g: SampledField) -> SampledField:
    _check_same_grid(f, g)
    return SampledField(grid=f.grid, values=f.values * g.values)


def _alternating(n: int) -> np.ndarray:
    return np.where(np.arange(n) % 2, -1.0, 1.0)


def dft_values(values: np.ndarray, grid: Grid, sign: int) -> Tuple[np.ndarray, Grid]:
    """
    delta * sum_j v_j exp(sign * 2 pi i x_j xi_k) on the dual grid, along the last axis.
    sign = -1 is the forward transform, +1 the inverse one.
    """
    n = grid.n
    dual = grid.dual()
    xi = dual.points
    alt = _alternating(n)
    if sign < 0:
        core = np.fft.fft(values * alt, axis=-1)
        phase = np.exp(2j * math.pi * grid.L * xi)
    else:
        core = n * np.fft.ifft(values * alt, axis=-1)
        phase = np.exp(-2j * math.pi * grid.L * xi)
    return grid.delta * phase * core, dual


def fourier(f: SampledField) -> SampledField:
    """F f(xi) = int exp(-2 pi i x xi) f(x) dx."""
    values, dual = dft_values(f.values, f.grid, -1)
    return SampledField(grid=dual, values=values)


def fourier_inv(g: SampledField) -> SampledField:
    """F^-1 g(x) = int exp(2 pi i x xi) g(xi) dxi."""
    values, dual = dft_values(g.values, g.grid, +1)
    return SampledField(grid=dual, values=values)


def lp_norm_values(
    values: np.ndarray,
    grid: Grid,
    p: float,
    eta: Optional[Weight] = None,
) -> np.ndarray:
    """Riemann-sum weighted L^p norm along the last axis."""
    mag = np.abs(values)
    if eta is not None and not eta.is_constant:
        mag = mag * eta.eval(grid.points)
    top = np.max(mag, axis=-1)
    if math.isinf(p):
        return top
    safe = np.where(top > 0, top, 1.0)
    scaled = mag / safe[..., None] if mag.ndim > 1 else mag / safe
    total = np.sum(scaled ** p, axis=-1) * grid.delta
    return np.where(top > 0, safe * total ** (1.0 / p), 0.0)


def lp_norm(f: SampledField, p: float, eta: Optional[Weight] = None) -> float:
    """||eta f||_{L^p}; warns when the box edge still carries mass."""
    if not (p >= 1):
        raise ValueError(f"p must be >= 1, got {p}")
    norm = float(lp_norm_values(f.values, f.grid, p, eta))
    mag = np.abs(f.values)
    if eta is not None and not eta.is_constant:
        mag = mag * eta.eval(f.grid.points)
    edge = max(mag[0], mag[-1])
    if norm > 0 and edge > TAIL_WARN_REL * float(np.max(mag)):
        logger.warning(f"lp_norm: |eta f| at box edge is {edge:.3e} (max {np.max(mag):.3e}); enlarge L")
    return norm


def flq_norm(f: SampledField, q: float, nu: Optional[Weight] = None) -> float:
    """||nu F^-1 f||_{L^q}: the FL^q_nu norm."""
    values, dual = dft_values(f.values, f.grid, +1)
    return float(lp_norm_values(values, dual, q, nu))


def fl1_norm(f: SampledField, nu: Optional[Weight] = None) -> float:
    return flq_norm(f, 1.0, nu)


def convolve(f: SampledField, g: SampledField) -> SampledField:
    """(f * g)(x) = int f(y) g(x - y) dy on the common grid."""
    _check_same_grid(f, g)
    n = f.grid.n
    full = fftconvolve(f.values, g.values)
    return SampledField(grid=f.grid, values=f.grid.delta * full[n // 2: n // 2 + n])


def derivative(f: SampledField, k: int) -> SampledField:
    """k-th derivative from the closed form; finite differences are never used."""
    if f.closed_form is None:
        raise ValueError("derivatives need a closed-form field")
    return SampledField(grid=f.grid, values=f.closed_form.derivative(f.grid.points, k))


def l1_seminorm(f: SampledField, seq: GevreySequence, h: float, order: int = MAX_DERIVATIVE_ORDER) -> float:
    """max_{k <= order} h^k ||f^(k)||_{L^1} / M_k."""
    if f.is_zero():
        return 0.0
    top = 0 if h == 0 else order
    best = 0.0
    for k in range(top + 1):
        norm = float(lp_norm_values(derivative(f, k).values, f.grid, 1.0))
        if norm == 0:
            continue
        log_term = k * math.log(h) if k else 0.0
        best = max(best, math.exp(log_term + math.log(norm) - float(seq.log_values(k))))
    return best


@dataclass
class DecayReport:
    """Frequency decay bound |F^-1 f| <= seminorm * exp(-M(h|xi|))."""
    seminorm: float
    order: int
    min_slack: float
    violations: int
    n_points: int

    @property
    def ok(self) -> bool:
        return self.violations == 0


def lemma22_decay_check(
    f: SampledField,
    seq: GevreySequence,
    h: float,
    eta: Optional[Weight] = None,
    order: int = MAX_DERIVATIVE_ORDER,
    xi_max: Optional[float] = None,
    rel_tol: float = 1e-12,
) -> DecayReport:
    """Checks eta(xi)|F^-1 f(xi)| <= ||f||_{D^{M_p,h}_{L^1}} eta(xi) e^{-M(h|xi|)} on the frequency grid."""
    if order > MAX_DERIVATIVE_ORDER:
        raise ValueError(f"derivative order is capped at {MAX_DERIVATIVE_ORDER}")
    seminorm = l1_seminorm(f, seq, h, order)
    values, dual = dft_values(f.values, f.grid, +1)
    xi = dual.points
    keep = np.ones(xi.shape, dtype=bool) if xi_max is None else np.abs(xi) <= xi_max
    xi, values = xi[keep], values[keep]

    w = np.ones(xi.shape) if eta is None else eta.eval(xi)
    lhs = w * np.abs(values)
    rhs = seminorm * w * np.exp(-assoc_m(seq, h * np.abs(xi)))
    slack = rhs - lhs
    violations = int(np.sum(slack < -rel_tol * np.maximum(rhs, 1e-300)))
    return DecayReport(
        seminorm=seminorm,
        order=order,
        min_slack=float(np.min(slack)) if slack.size else 0.0,
        violations=violations,
        n_points=int(xi.size),
    )
