"""Weighted Lebesgue space L^p_eta."""
import math

import numpy as np

from field import Grid, lp_norm_values
from weights import ConstantWeight, Weight, fmt_number
from .base_space import BaseSpace


class WeightedLp(BaseSpace):
    """E = L^p_eta with ||f|| = ||eta f||_{L^p}."""

    def __init__(self, p: float = 2.0, eta: Weight = None):
        super().__init__("WeightedLp")
        if not (p >= 1):
            raise ValueError(f"p must be >= 1, got {p}")
        self.p = float(p)
        self.eta = eta if eta is not None else ConstantWeight()

    def _key(self) -> tuple:
        return (self.p, self.eta)

    def literal(self) -> str:
        p = "inf" if math.isinf(self.p) else fmt_number(self.p)
        return f"lp:p={p},weight={self.eta.literal()}"

    def norm_values(self, values: np.ndarray, grid: Grid) -> np.ndarray:
        return lp_norm_values(values, grid, self.p, self.eta)

    def omega_weight(self) -> Weight:
        # ||T_x||_{L(L^p_eta)} = sup_t eta(t + x) / eta(t)
        return self.eta.moderation_weight()

    def holder_dual(self) -> "WeightedLp":
        """L^q_{1/eta} with 1/p + 1/q = 1."""
        if self.p == 1:
            q = math.inf
        elif math.isinf(self.p):
            q = 1.0
        else:
            q = self.p / (self.p - 1.0)
        return WeightedLp(q, self.eta.inverse())
