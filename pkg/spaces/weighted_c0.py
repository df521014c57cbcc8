"""Weighted space C_{eta,0} of continuous functions with eta f vanishing at infinity."""
from typing import Optional

import numpy as np

from field import Grid, SampledField
from weights import ConstantWeight, Weight
from .base_space import BaseSpace

# |eta f| beyond |x| > L/2 above this share of the norm flags the field
TAIL_REL = 1e-8


class WeightedC0(BaseSpace):
    """E = C_{eta,0}: sup norm of eta f plus a tail-decay report."""

    def __init__(self, eta: Weight = None):
        super().__init__("WeightedC0")
        self.eta = eta if eta is not None else ConstantWeight()

    def _key(self) -> tuple:
        return (self.eta,)

    def literal(self) -> str:
        return f"c0:weight={self.eta.literal()}"

    def _weighted(self, values: np.ndarray, grid: Grid) -> np.ndarray:
        mag = np.abs(values)
        if not self.eta.is_constant:
            mag = mag * self.eta.eval(grid.points)
        return mag

    def norm_values(self, values: np.ndarray, grid: Grid) -> np.ndarray:
        return np.max(self._weighted(values, grid), axis=-1)

    def omega_weight(self) -> Weight:
        return self.eta.moderation_weight()

    def tail_mass(self, f: SampledField) -> Optional[float]:
        mag = self._weighted(f.values, f.grid)
        top = float(np.max(mag))
        if top == 0:
            return 0.0
        outside = np.abs(f.grid.points) > f.grid.L / 2.0
        tail = float(np.max(mag[outside])) / top
        if tail > TAIL_REL:
            self.logger.debug(f"C0 tail {tail:.3e} beyond |x| > {f.grid.L / 2}")
        return tail

    def is_vanishing(self, f: SampledField) -> bool:
        return self.tail_mass(f) <= TAIL_REL
