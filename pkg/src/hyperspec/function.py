"""High-level evaluation of F(a, b, c, z) anywhere on the Riemann sphere."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .complex_plane import DEFAULT_A, ComplexRepresentation, build_complex
from .real_line import (
    DEFAULT_EPSILON,
    HypRepresentation,
    SingularPointError,
    build_representation,
)

__all__ = ["HypergeometricFunction", "Evaluation", "hyp2f1"]


@dataclass(frozen=True)
class Evaluation:
    z: complex
    value: complex
    domain: str
    branch: str


class HypergeometricFunction:
    """F(a, b, c, .) with the real-line part built eagerly and the fields on demand.

    Parameters
    ----------
    a, b, c : complex
        Generic parameters (see ``real_line.genericness_check``).
    A : float
        Semi-axis of the ellipses around 0 and 1, in (1/2, 1).
    tol : float
        Tail tolerance of the adaptive solves.
    """

    def __init__(self, a, b, c, A: float = DEFAULT_A, tol: float = 1e-15,
                 n_max: int = 512, epsilon: float = DEFAULT_EPSILON):
        self.A, self.tol, self.n_max, self.epsilon = A, tol, n_max, epsilon
        self.real: HypRepresentation = build_representation(
            a, b, c, tol=tol, n_max=n_max, epsilon=epsilon
        )
        self._complex: ComplexRepresentation | None = None
        self._lock = threading.Lock()

    @property
    def params(self):
        return self.real.params

    @property
    def complex(self) -> ComplexRepresentation:
        with self._lock:
            if self._complex is None:
                self._complex = build_complex(
                    self.params.a, self.params.b, self.params.c, A=self.A, tol=self.tol,
                    n_max=self.n_max, epsilon=self.epsilon, real=self.real,
                )
            return self._complex

    def evaluate(self, z) -> Evaluation:
        z = complex(z)
        if z.imag == 0 or math.isinf(abs(z)):
            # the real line carries the lower-side convention on the cut
            x = z.real if not math.isinf(abs(z)) else math.inf
            domain = self.real.domain_of(x) if math.isfinite(x) else "III"
            branch = "lower side of the cut (z - i0)" if x > 1 and math.isfinite(x) else ""
            return Evaluation(z, self.real.evaluate(x), domain, branch)
        return self.evaluate_many([z])[0]

    def evaluate_many(self, zs, singular_nan: bool = False) -> list[Evaluation]:
        """``evaluate`` over a sequence, vectorised per domain for off-axis points.

        With ``singular_nan`` points where F is unbounded yield NaN (domain
        ``"singular"``) instead of raising ``SingularPointError``.
        """
        z = np.asarray(zs, dtype=complex).ravel()
        out: list[Evaluation | None] = [None] * z.size
        axis = (z.imag == 0) | np.isinf(np.abs(z))
        if self.params.kappa.real <= 0:
            axis |= np.abs(1.0 - z) < self.real.guard
        for i in np.nonzero(axis)[0]:
            if z[i].imag == 0 or np.isinf(abs(z[i])):
                try:
                    out[i] = self.evaluate(z[i])
                except SingularPointError:
                    if not singular_nan:
                        raise
                    out[i] = Evaluation(complex(z[i]), complex(np.nan, np.nan), "singular", "")
            elif singular_nan:
                out[i] = Evaluation(complex(z[i]), complex(np.nan, np.nan), "singular", "")
            else:
                raise SingularPointError(f"z = {z[i]} is too close to the singular point 1")
        off = np.nonzero(~axis)[0]
        if off.size:
            rep = self.complex
            labels = rep.domains(z[off])
            for dom in ("I", "II", "III"):
                idx = off[labels == dom]
                if idx.size:
                    vals = np.atleast_1d(rep.evaluate(z[idx], dom))
                    for i, v in zip(idx, vals):
                        out[i] = Evaluation(complex(z[i]), complex(v), dom, "")
        return out

    def __call__(self, z):
        if np.ndim(z) == 0:
            return self.evaluate(z).value
        vals = [e.value for e in self.evaluate_many(z)]
        return np.array(vals, dtype=complex).reshape(np.shape(z))


def hyp2f1(a, b, c, z, **kwargs):
    """One-shot F(a, b, c, z); build a ``HypergeometricFunction`` to reuse the solves."""
    return HypergeometricFunction(a, b, c, **kwargs)(z)
