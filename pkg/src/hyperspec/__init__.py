"""Spectral evaluation of the Gauss hypergeometric function F(a, b, c, z).

Chebyshev ultraspherical solves on the real line are matched into a global
representation, which is continued into the complex plane by solving
Laplace's equation on ellipses in a Chebyshev-Fourier basis.
"""

__version__ = "0.1.0"

from .function import Evaluation, HypergeometricFunction, hyp2f1
from .real_line import (
    DegenerateParametersError,
    HypParams,
    MatchingError,
    NearDegenerateWarning,
    SingularPointError,
    build_representation,
    eval_real,
    genericness_check,
)
from .complex_plane import build_complex, eval_complex
from .us_solver import SolverError

__all__ = [
    "__version__",
    "HypergeometricFunction",
    "Evaluation",
    "hyp2f1",
    "HypParams",
    "DegenerateParametersError",
    "NearDegenerateWarning",
    "MatchingError",
    "SingularPointError",
    "SolverError",
    "genericness_check",
    "build_representation",
    "eval_real",
    "build_complex",
    "eval_complex",
]
