"""Gevrey sequences, associated functions and sequence-condition checks."""
import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from errors import ScanCapError

logger = logging.getLogger("Gevrey")

# ln m_p within this (relative) distance of ln rho counts as a tie
TIE_TOL = 1e-13


@dataclass(frozen=True)
class GevreySequence:
    """
    The sequence pair M_p = (p!)^sigma, A_p = (p!)^sigma_a.

    All values live in log-domain. A user table of ln M_p (p = 0, 1, ...)
    replaces the Gevrey formula when given.
    """
    sigma: float = 1.0
    c0: float = 1.0
    H: Optional[float] = None
    L0: float = 1.0
    c0m6: float = 1.0
    pmax: int = 100_000
    sigma_a: Optional[float] = None
    log_table: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.log_table is None and self.sigma < 1:
            raise ValueError(f"sigma must be >= 1, got {self.sigma}")
        if self.sigma_a is not None and self.sigma_a < 1:
            raise ValueError(f"sigma_a must be >= 1, got {self.sigma_a}")
        if self.H is None:
            # (p+q)! <= 2^(p+q) p! q!
            top = max(self.sigma, self.sigma_a or self.sigma)
            object.__setattr__(self, "H", 2.0 ** top)
        if self.c0 < 1 or self.H < 1 or self.L0 < 1 or self.c0m6 < 1:
            raise ValueError("constants c0, H, L0, c0m6 must all be >= 1")
        if self.pmax < 2:
            raise ValueError(f"pmax must be >= 2, got {self.pmax}")

    @classmethod
    def from_table(cls, log_values: Sequence[float], **kwargs) -> "GevreySequence":
        """Sequence given by a table of ln M_p, p = 0 .. len-1."""
        table = tuple(float(v) for v in log_values)
        if len(table) < 3:
            raise ValueError("log table needs at least ln M_0, ln M_1, ln M_2")
        return cls(log_table=table, pmax=min(kwargs.pop("pmax", len(table) - 1), len(table) - 1), **kwargs)

    def a_sequence(self) -> "GevreySequence":
        """The {A_p} family, sharing c0 and H."""
        if self.sigma_a is None or self.sigma_a == self.sigma:
            return self
        return replace(self, sigma=self.sigma_a, sigma_a=None)

    def log_values(self, p) -> np.ndarray:
        """ln M_p, vectorized over integer p >= 0."""
        p = np.asarray(p)
        if np.any(p < 0):
            raise ValueError("p must be >= 0")
        if self.log_table is not None:
            if np.any(p >= len(self.log_table)):
                raise ScanCapError("associated-function scan cap exceeded")
            return np.asarray(self.log_table, dtype=float)[p]
        out = self.sigma * gammaln(p.astype(float) + 1.0)
        return np.where(p <= 1, 0.0, out)


def seq_log_value(seq: GevreySequence, p: int) -> float:
    """ln M_p; exactly 0 for p in {0, 1}."""
    if p < 0:
        raise ValueError(f"p must be >= 0, got {p}")
    if p <= 1 and seq.log_table is None:
        return 0.0
    return float(seq.log_values(p))


@lru_cache(maxsize=64)
def _log_ratio_table(seq: GevreySequence, n: int) -> np.ndarray:
    """ln m_p = ln M_p - ln M_{p-1} for p = 1..n (non-decreasing under (M.1))."""
    if seq.log_table is not None:
        table = np.asarray(seq.log_table[: n + 1], dtype=float)
        return np.diff(table)
    return seq.sigma * np.log(np.arange(1, n + 1, dtype=float))


@dataclass
class AssocFnValue:
    """M(rho) and the smallest maximizing p."""
    value: float
    argmax_p: int


def assoc_values(seq: GevreySequence, rho) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized associated function.

    p -> p ln(rho) - ln M_p is concave, so its maximizer is the number of
    ratios m_p strictly below rho; ties stay at the smaller p.
    Returns (values, argmax) with the shape of rho.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or np.any(np.isnan(rho)):
        raise ValueError("rho must be >= 0")
    values = np.zeros(rho.shape)
    argmax = np.zeros(rho.shape, dtype=np.int64)
    active = rho > 1.0
    if not np.any(active):
        return values, argmax

    log_rho = np.log(rho[active])
    if seq.log_table is not None:
        n = len(seq.log_table) - 1
    else:
        need = int(math.ceil(float(np.max(rho[active])) ** (1.0 / seq.sigma))) + 2
        n = min(need, seq.pmax)
    table = _log_ratio_table(seq, n)
    cut = log_rho - TIE_TOL * np.maximum(1.0, np.abs(log_rho))
    p_star = np.searchsorted(table, cut, side="left")
    if np.any(p_star >= n):
        raise ScanCapError("associated-function scan cap exceeded")

    values[active] = p_star * log_rho - seq.log_values(p_star)
    argmax[active] = p_star
    return values, argmax


def assoc_fn(seq: GevreySequence, rho: float) -> AssocFnValue:
    """M(rho) = sup_p ln(rho^p / M_p)."""
    values, argmax = assoc_values(seq, np.array([rho], dtype=float))
    return AssocFnValue(value=float(values[0]), argmax_p=int(argmax[0]))


def assoc_a(seq: GevreySequence, rho) -> np.ndarray:
    """A(rho), the associated function of the {A_p} family (vectorized)."""
    return assoc_values(seq.a_sequence(), rho)[0]


def assoc_m(seq: GevreySequence, rho) -> np.ndarray:
    """M(rho), vectorized."""
    return assoc_values(seq, rho)[0]


@dataclass
class M2StarReport:
    """Result of the (M.2)* search."""
    p0: int
    N: int
    ok: bool


def check_m2star(
    seq: GevreySequence,
    p_lo: int = 1,
    p_hi: int = 1000,
    forced_n: Optional[int] = None,
    max_n: int = 64,
) -> M2StarReport:
    """
    Smallest N >= 2 with 2 m_p < m_{pN} for every p in [p_lo, p_hi],
    m_j = A_j / A_{j-1}. The inequality is taken strictly (margin 1e-12).
    """
    if p_lo < 1 or p_hi < p_lo or p_hi > seq.pmax:
        raise ValueError(f"p_range [{p_lo}, {p_hi}] must lie within [1, {seq.pmax}]")
    a_seq = seq.a_sequence()
    candidates = [forced_n] if forced_n is not None else list(range(2, max_n + 1))
    top = p_hi * max(candidates)
    if a_seq.log_table is not None:
        top = min(top, len(a_seq.log_table) - 1)
    log_m = _log_ratio_table(a_seq, top)
    p = np.arange(p_lo, p_hi + 1)

    for n in candidates:
        if n < 1 or p_hi * n > top:
            continue
        lhs = math.log(2.0) + log_m[p - 1]
        rhs = log_m[p * n - 1]
        if np.all(rhs - lhs > 1e-12):
            return M2StarReport(p0=p_lo, N=n, ok=True)

    fallback = forced_n if forced_n is not None else max_n
    logger.debug(f"(M.2)* fails for every N up to {fallback} on [{p_lo}, {p_hi}]")
    return M2StarReport(p0=p_lo, N=fallback, ok=False)


@dataclass
class AssocInequalityReport:
    """Worst log-domain slack of the two associated-function inequalities."""
    min_slack_sum: float
    min_slack_square: float
    worst_sample: Tuple[float, float]

    @property
    def min_slack(self) -> float:
        return min(self.min_slack_sum, self.min_slack_square)

    @property
    def ok(self) -> bool:
        return self.min_slack >= -1e-12


def check_assoc_inequalities(
    seq: GevreySequence,
    samples: Iterable[Tuple[float, float]],
    use_a: bool = False,
) -> AssocInequalityReport:
    """
    M(rho+lam) <= ln 2 + M(2 rho) + M(2 lam) and 2 M(rho) <= ln c0 + M(H rho),
    evaluated in log-domain at every sample (for both coordinates in the second).
    """
    pts = np.asarray(list(samples), dtype=float).reshape(-1, 2)
    if np.any(pts < 0):
        raise ValueError("sample coordinates must be >= 0")
    target = seq.a_sequence() if use_a else seq
    rho, lam = pts[:, 0], pts[:, 1]
    M = lambda r: assoc_values(target, r)[0]

    slack_sum = math.log(2.0) + M(2 * rho) + M(2 * lam) - M(rho + lam)
    both = np.concatenate([rho, lam])
    slack_sq = math.log(seq.c0) + M(seq.H * both) - 2 * M(both)
    slack_sq_pairs = np.minimum(slack_sq[: len(rho)], slack_sq[len(rho):])

    worst = int(np.argmin(np.minimum(slack_sum, slack_sq_pairs)))
    report = AssocInequalityReport(
        min_slack_sum=float(np.min(slack_sum)),
        min_slack_square=float(np.min(slack_sq)),
        worst_sample=(float(rho[worst]), float(lam[worst])),
    )
    if not report.ok:
        logger.warning(f"Associated-function inequality violated at {report.worst_sample}: {report.min_slack:.3e}")
    return report


@dataclass
class SequenceConditionReport:
    """Worst log-slack of (M.1), (M.2), (M.6) and the M_0 = M_1 = 1 normalisation."""
    m1_slack: float
    m2_slack: float
    m6_slack: float
    normalised: bool
    p_max: int

    @property
    def ok(self) -> bool:
        tol = -1e-10
        return self.normalised and min(self.m1_slack, self.m2_slack, self.m6_slack) >= tol


def check_sequence_conditions(seq: GevreySequence, p_max: int = 60) -> SequenceConditionReport:
    """Numerical check of the standing sequence assumptions for p, q <= p_max."""
    if seq.log_table is not None:
        p_max = min(p_max, (len(seq.log_table) - 1) // 2)
    p = np.arange(0, 2 * p_max + 1)
    log_M = seq.log_values(p)

    inner = np.arange(1, p_max)
    m1 = log_M[inner - 1] + log_M[inner + 1] - 2 * log_M[inner]

    pp, qq = np.meshgrid(np.arange(p_max + 1), np.arange(p_max + 1), indexing="ij")
    m2 = (math.log(seq.c0) + (pp + qq) * math.log(seq.H)
          + log_M[pp] + log_M[qq] - log_M[pp + qq])

    small = np.arange(p_max + 1)
    m6 = math.log(seq.c0m6) + small * math.log(seq.L0) + log_M[small] - gammaln(small + 1.0)

    return SequenceConditionReport(
        m1_slack=float(np.min(m1)) if m1.size else 0.0,
        m2_slack=float(np.min(m2)),
        m6_slack=float(np.min(m6)),
        normalised=bool(log_M[0] == 0.0 and log_M[1] == 0.0),
        p_max=p_max,
    )
