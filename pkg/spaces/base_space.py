"""Base class for all local components E."""
import logging
from typing import Optional, Tuple

import numpy as np

from errors import DualityError
from field import Grid, SampledField
from weights import ConstantWeight, Weight


class BaseSpace:
    """
    Translation-modulation invariant Banach space realized on sampled fields.

    omega_weight() dominates ||T_x||_{L(E)}, nu_weight() dominates ||M_xi||_{L(E)}.
    """

    def __init__(self, name: str):
        self.name = name
        self.logger = logging.getLogger(f"Spaces.{name}")

    def _key(self) -> tuple:
        raise NotImplementedError("_key must be implemented by child class")

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash((type(self).__name__, self._key()))

    def __repr__(self) -> str:
        return f"{self.name}({self.literal()})"

    def norm_values(self, values: np.ndarray, grid: Grid) -> np.ndarray:
        """
        ||.||_E of every row of values (last axis runs over the grid).
        Must be implemented by child classes.
        """
        raise NotImplementedError("norm_values must be implemented by child class")

    def norm(self, f: SampledField) -> float:
        return float(self.norm_values(f.values, f.grid))

    def literal(self) -> str:
        """Text form in the experiment-file grammar, e.g. lp:p=2,weight=const."""
        raise NotImplementedError("literal must be implemented by child class")

    def omega_weight(self) -> Weight:
        return ConstantWeight()

    def nu_weight(self) -> Weight:
        return ConstantWeight()

    @property
    def omega_cert(self) -> Tuple[float, float]:
        """(C, tau) with omega_E(x) <= C e^{A(tau|x|)}."""
        return self.omega_weight().certificate

    @property
    def nu_cert(self) -> Tuple[float, float]:
        """(C, tau) with nu_E(xi) <= C e^{M(tau|xi|)}."""
        return self.nu_weight().certificate

    def tail_mass(self, f: SampledField) -> Optional[float]:
        """Relative sup of the local integrand outside |x| > L/2; None when not tracked."""
        return None

    def holder_dual(self) -> "BaseSpace":
        raise DualityError(f"{self.name} has no Hölder dual in this toolkit")
