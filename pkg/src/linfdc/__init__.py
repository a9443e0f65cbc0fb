"""Exact length metrics on GL_n over F_p(t) and verifiable decomposition witnesses."""

from .algebra import GroupElement, Poly, RatFunc
from .config import GroupSpec, SpecError, load_spec, parse_spec
from .norms import MetricProfile, NormSpec, length, pseudometric, valuation
from .spaces import FinSpace, GroupAction, MetricFamily, ball_space, word_ball

__version__ = "0.1.0"

__all__ = [
    "GroupElement",
    "Poly",
    "RatFunc",
    "GroupSpec",
    "SpecError",
    "load_spec",
    "parse_spec",
    "MetricProfile",
    "NormSpec",
    "length",
    "pseudometric",
    "valuation",
    "FinSpace",
    "GroupAction",
    "MetricFamily",
    "ball_space",
    "word_ball",
]
