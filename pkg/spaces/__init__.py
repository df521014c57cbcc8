"""Concrete local components E of amalgam spaces."""
from .base_space import BaseSpace
from .fourier_lebesgue import FourierLebesgue
from .weighted_c0 import WeightedC0
from .weighted_lp import WeightedLp

__all__ = ["BaseSpace", "FourierLebesgue", "WeightedC0", "WeightedLp"]
