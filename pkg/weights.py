"""Weight functions of class dagger / * with moderation certificates."""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Tuple

import numpy as np

from gevrey import GevreySequence, assoc_a

logger = logging.getLogger("Weights")

# canonical sample axis for moderation checks: [-32, 32], step 1/2
CANONICAL_AXIS = np.arange(-32.0, 32.0 + 0.25, 0.5)


def canonical_pairs() -> Tuple[np.ndarray, np.ndarray]:
    """All (x, y) pairs of the canonical grid as two flat arrays."""
    xx, yy = np.meshgrid(CANONICAL_AXIS, CANONICAL_AXIS, indexing="ij")
    return xx.ravel(), yy.ravel()


def fmt_number(x: float) -> str:
    """Shortest text that parses back to the same float; integers lose the '.0'."""
    text = repr(float(x))
    return text[:-2] if text.endswith(".0") else text


@dataclass(frozen=True)
class Weight:
    """
    Positive radial weight on R. Subclasses provide log_eval; evaluation
    always goes through the log-domain.
    """

    def log_eval(self, x) -> np.ndarray:
        raise NotImplementedError("log_eval must be implemented by child class")

    def eval(self, x) -> np.ndarray:
        return np.exp(self.log_eval(x))

    def inverse(self) -> "Weight":
        """The reciprocal weight 1/eta."""
        raise NotImplementedError("inverse must be implemented by child class")

    def moderation_weight(self) -> "Weight":
        """A weight dominating sup_b eta(a+b)/eta(b) as a function of a."""
        raise NotImplementedError("moderation_weight must be implemented by child class")

    def default_tau(self) -> float:
        return 1.0

    def literal(self) -> str:
        """Text form in the experiment-file grammar."""
        raise NotImplementedError("literal must be implemented by child class")

    def closed_certificate(self) -> Optional[Tuple[float, float]]:
        """(C, tau) derived analytically for the default sequence, None when the class has none."""
        return None

    @cached_property
    def certificate(self) -> Tuple[float, float]:
        """
        (C, tau) with eta(x+y) <= C eta(x) e^{A(tau|y|)}.

        The closed form is used when the class declares one; otherwise C is
        fitted by certify on the canonical grid.
        """
        closed = self.closed_certificate()
        if closed is not None:
            return closed
        tau = self.default_tau()
        return certify(self, GevreySequence(), tau), tau

    @property
    def is_constant(self) -> bool:
        return False


@dataclass(frozen=True)
class ConstantWeight(Weight):
    """eta = 1."""

    def log_eval(self, x) -> np.ndarray:
        return np.zeros(np.shape(x))

    def inverse(self) -> "Weight":
        return self

    def moderation_weight(self) -> "Weight":
        return self

    def closed_certificate(self) -> Optional[Tuple[float, float]]:
        return 1.0, 1.0

    def literal(self) -> str:
        return "const"

    @property
    def is_constant(self) -> bool:
        return True


@dataclass(frozen=True)
class PolynomialWeight(Weight):
    """eta(x) = (1 + |x|)^s."""
    s: float = 0.0

    def log_eval(self, x) -> np.ndarray:
        return self.s * np.log1p(np.abs(np.asarray(x, dtype=float)))

    def inverse(self) -> "Weight":
        return PolynomialWeight(-self.s)

    def moderation_weight(self) -> "Weight":
        # Peetre: (1+|a+b|)^s <= (1+|a|)^|s| (1+|b|)^s
        return PolynomialWeight(abs(self.s))

    def closed_certificate(self) -> Optional[Tuple[float, float]]:
        # (1+r)^|s| <= (1+r)^n = sum_k n!/(n-k)! r^k/k! <= C e^{A(r)}, n = ceil|s|
        n = math.ceil(abs(self.s))
        return float(sum(math.perm(n, k) for k in range(n + 1))), 1.0

    def literal(self) -> str:
        return f"poly:{fmt_number(self.s)}"


@dataclass(frozen=True)
class SubExponentialWeight(Weight):
    """eta(x) = exp(k |x|^(1/sigma))."""
    k: float = 0.0
    sigma: float = 1.0

    def log_eval(self, x) -> np.ndarray:
        return self.k * np.abs(np.asarray(x, dtype=float)) ** (1.0 / self.sigma)

    def inverse(self) -> "Weight":
        return SubExponentialWeight(-self.k, self.sigma)

    def moderation_weight(self) -> "Weight":
        # |a+b|^(1/sigma) <= |a|^(1/sigma) + |b|^(1/sigma)
        return SubExponentialWeight(abs(self.k), self.sigma)

    def default_tau(self) -> float:
        return 2.0 * abs(self.k) if self.k else 1.0

    def closed_certificate(self) -> Optional[Tuple[float, float]]:
        if self.k == 0:
            return 1.0, 1.0
        if self.sigma < 1.0:
            return None
        # e^{r/2} <= 2 e^{A(r)}; for sigma > 1 also r^(1/sigma) <= 1 + r
        c = 2.0 if self.sigma == 1.0 else 2.0 * math.exp(abs(self.k))
        return c, self.default_tau()

    def literal(self) -> str:
        return f"subexp:k={fmt_number(self.k)},sigma={fmt_number(self.sigma)}"


@dataclass(frozen=True)
class AssocExpWeight(Weight):
    """eta(x) = scale * exp(s A(tau |x|)), A the associated function of seq."""
    s: float = 0.0
    tau: float = 1.0
    seq: GevreySequence = field(default_factory=GevreySequence)
    scale: float = 1.0

    def log_eval(self, x) -> np.ndarray:
        r = self.tau * np.abs(np.asarray(x, dtype=float))
        return math.log(self.scale) + self.s * assoc_a(self.seq, r)

    def inverse(self) -> "Weight":
        return AssocExpWeight(-self.s, self.tau, self.seq, 1.0 / self.scale)

    def moderation_weight(self) -> "Weight":
        c, tau = self.certificate
        return AssocExpWeight(1.0, tau, GevreySequence(), c)

    def default_tau(self) -> float:
        return 2.0 * abs(self.s) * self.tau if self.s else 1.0

    def literal(self) -> str:
        text = f"assoc:s={fmt_number(self.s)},tau={fmt_number(self.tau)}"
        if self.seq.sigma != 1.0 or self.seq.sigma_a is not None:
            text += f",sigma={fmt_number(self.seq.a_sequence().sigma)}"
        if self.scale != 1.0:
            text += f",scale={fmt_number(self.scale)}"
        return text


@dataclass(frozen=True)
class InterpolatedWeight(Weight):
    """eta_theta = eta0^(1-theta) eta1^theta."""
    w0: Weight = field(default_factory=ConstantWeight)
    w1: Weight = field(default_factory=ConstantWeight)
    theta: float = 0.5

    def log_eval(self, x) -> np.ndarray:
        return (1.0 - self.theta) * self.w0.log_eval(x) + self.theta * self.w1.log_eval(x)

    def inverse(self) -> "Weight":
        return InterpolatedWeight(self.w0.inverse(), self.w1.inverse(), self.theta)

    def moderation_weight(self) -> "Weight":
        return InterpolatedWeight(self.w0.moderation_weight(), self.w1.moderation_weight(), self.theta)

    def default_tau(self) -> float:
        return max(self.w0.default_tau(), self.w1.default_tau())

    def closed_certificate(self) -> Optional[Tuple[float, float]]:
        parts = self.w0.closed_certificate(), self.w1.closed_certificate()
        if None in parts:
            return None
        (c0, tau0), (c1, tau1) = parts
        return c0 ** (1.0 - self.theta) * c1 ** self.theta, max(tau0, tau1)

    def literal(self) -> str:
        return f"interp:theta={fmt_number(self.theta)},[{self.w0.literal()}],[{self.w1.literal()}]"

    @property
    def is_constant(self) -> bool:
        return self.w0.is_constant and self.w1.is_constant


def _moderation_excess(w: Weight, seq: GevreySequence, tau: float, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """ln eta(x+y) - ln eta(x) - A(tau |y|) at every pair."""
    return w.log_eval(xs + ys) - w.log_eval(xs) - assoc_a(seq, tau * np.abs(ys))


def certify(
    w: Weight,
    seq: GevreySequence,
    tau: float,
    pairs: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> float:
    """Smallest C >= 1 with eta(x+y) <= C eta(x) e^{A(tau|y|)} on the sample pairs."""
    xs, ys = pairs if pairs is not None else canonical_pairs()
    worst = float(np.max(_moderation_excess(w, seq, tau, np.asarray(xs, float), np.asarray(ys, float))))
    return max(1.0, math.exp(worst))


@dataclass
class ModerationReport:
    """Worst slack ln C + A(tau|y|) + ln eta(x) - ln eta(x+y); >= 0 means moderate."""
    worst_slack: float
    witness: Optional[Tuple[float, float]]
    ok: bool


def check_moderate(
    w: Weight,
    seq: GevreySequence,
    C: float,
    tau: float,
    sample_grid: Optional[Iterable[Tuple[float, float]]] = None,
    tol: float = 1e-12,
) -> ModerationReport:
    """Log-domain check of eta(x+y) <= C eta(x) e^{A(tau|y|)} at every pair."""
    if sample_grid is None:
        xs, ys = canonical_pairs()
    else:
        pts = np.asarray(list(sample_grid), dtype=float).reshape(-1, 2)
        xs, ys = pts[:, 0], pts[:, 1]
    slack = math.log(C) - _moderation_excess(w, seq, tau, xs, ys)
    idx = int(np.argmin(slack))
    worst = float(slack[idx])
    ok = worst >= -tol
    witness = None if ok else (float(xs[idx]), float(ys[idx]))
    if not ok:
        logger.info(f"{w} not moderate with C={C}, tau={tau}: slack {worst:.3e} at {witness}")
    return ModerationReport(worst_slack=worst, witness=witness, ok=ok)
