"""Fourier-Lebesgue space FL^q_nu."""
import math

import numpy as np

from field import Grid, dft_values, lp_norm_values
from weights import ConstantWeight, Weight, fmt_number
from .base_space import BaseSpace


class FourierLebesgue(BaseSpace):
    """
    E = FL^q_nu with ||g|| = ||nu F^-1 g||_{L^q}.

    Translations only rotate the phase of F^-1 g, so omega_E = 1; a
    modulation shifts F^-1 g and costs nu's moderation weight.
    """

    def __init__(self, q: float = 1.0, nu: Weight = None):
        super().__init__("FourierLebesgue")
        if not (q >= 1):
            raise ValueError(f"q must be >= 1, got {q}")
        self.q = float(q)
        self.nu = nu if nu is not None else ConstantWeight()

    def _key(self) -> tuple:
        return (self.q, self.nu)

    def literal(self) -> str:
        if self.q == 1.0:
            return f"fl1:weight={self.nu.literal()}"
        q = "inf" if math.isinf(self.q) else fmt_number(self.q)
        return f"flq:q={q},weight={self.nu.literal()}"

    def norm_values(self, values: np.ndarray, grid: Grid) -> np.ndarray:
        spectrum, dual = dft_values(values, grid, +1)
        return lp_norm_values(spectrum, dual, self.q, self.nu)

    def nu_weight(self) -> Weight:
        return self.nu.moderation_weight()
