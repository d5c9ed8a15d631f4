"""Fourier series on [-pi, pi) and the coefficient-space periodic solver.

A series ``y(phi) = sum_k y_k exp(i k phi)`` is stored as a contiguous block of
coefficients starting at index ``kmin``.  Multiplication by a band-limited
function is a Toeplitz matrix and differentiation is diagonal, so a periodic
ODE becomes a banded system in coefficient space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy import sparse

from .cheb_core import BandedOperator
from .us_solver import SingularSystemError, condition_estimate

__all__ = [
    "FourierSeries",
    "toeplitz_mult",
    "fourier_diff",
    "periodic_system",
    "solve_periodic",
    "fourier_transform",
    "fourier_inverse_transform",
    "equispaced_phi",
]


@dataclass(frozen=True)
class FourierSeries:
    """Coefficients ``coeffs[i]`` of ``exp(i (kmin + i) phi)``."""

    coeffs: np.ndarray
    kmin: int = 0

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.ndim != 1:
            raise ValueError("coefficients must be one-dimensional")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "kmin", int(self.kmin))

    @classmethod
    def symmetric(cls, coeffs) -> "FourierSeries":
        """Series on k = -K..K from ``2K+1`` coefficients."""
        c = np.asarray(coeffs)
        if c.size % 2 != 1:
            raise ValueError("a symmetric range needs an odd number of coefficients")
        return cls(c, -(c.size // 2))

    @classmethod
    def unit(cls, k: int) -> "FourierSeries":
        return cls([1.0], k)

    @property
    def kmax(self) -> int:
        return self.kmin + self.coeffs.size - 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.kmin, self.kmax + 1)

    def coeff(self, k: int) -> complex:
        i = k - self.kmin
        return complex(self.coeffs[i]) if 0 <= i < self.coeffs.size else 0j

    def padded(self, kmin: int, kmax: int) -> np.ndarray:
        """Coefficients on ``kmin..kmax`` (zeros outside the stored range)."""
        out = np.zeros(kmax - kmin + 1, dtype=complex)
        lo, hi = max(kmin, self.kmin), min(kmax, self.kmax)
        if lo <= hi:
            out[lo - kmin : hi - kmin + 1] = self.coeffs[lo - self.kmin : hi - self.kmin + 1]
        return out

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        out = np.exp(1j * np.multiply.outer(phi, self.indices)) @ self.coeffs
        return complex(out) if out.ndim == 0 else out

    def trimmed(self, tol: float = np.finfo(float).eps) -> "FourierSeries":
        """Drop leading and trailing coefficients below ``tol * max|y_k|``."""
        mags = np.abs(self.coeffs)
        big = np.nonzero(mags > tol * mags.max())[0] if mags.max() > 0 else np.array([0])
        if big.size == 0:
            big = np.array([0])
        return FourierSeries(self.coeffs[big[0] : big[-1] + 1], self.kmin + big[0])

    def deriv(self, order: int = 1) -> "FourierSeries":
        return FourierSeries((1j * self.indices) ** order * self.coeffs, self.kmin)


def toeplitz_mult(a: FourierSeries, n: int) -> BandedOperator:
    """Multiplication by ``a`` acting on coefficients k = -n..n."""
    size = 2 * n + 1
    diags, offsets = [], []
    for m in range(a.kmin, a.kmax + 1):
        am = a.coeff(m)
        if am == 0 or abs(m) >= size:
            continue
        # (a y)_k gets a_m y_{k-m}: offset -m
        diags.append(np.full(size - abs(m), am))
        offsets.append(-m)
    if not diags:
        return BandedOperator.from_sparse(sparse.csr_array((size, size), dtype=complex))
    mat = sparse.diags(diags, offsets, shape=(size, size), format="csr", dtype=complex)
    return BandedOperator.from_sparse(sparse.csr_array(mat))


def fourier_diff(order: int, n: int) -> BandedOperator:
    """``(i k)^order`` on the diagonal for k = -n..n."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    k = np.arange(-n, n + 1)
    mat = sparse.diags([(1j * k) ** order], [0], format="csr", dtype=complex)
    return BandedOperator.from_sparse(sparse.csr_array(mat))


def periodic_system(a2, a1, a0, boundary_value: complex, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Dense ``(2n+1)``-square system: the value row on top, then rows k = -n..n-1."""
    L = (
        toeplitz_mult(a2, n) @ fourier_diff(2, n)
        + toeplitz_mult(a1, n) @ fourier_diff(1, n)
        + toeplitz_mult(a0, n)
    ).toarray()
    k = np.arange(-n, n + 1)
    top = (-1.0) ** k
    A = np.vstack([top[None, :], L[:-1]])
    rhs = np.zeros(2 * n + 1, dtype=complex)
    rhs[0] = boundary_value
    return A, rhs


def solve_periodic(
    a2: FourierSeries,
    a1: FourierSeries,
    a0: FourierSeries,
    boundary_value: complex,
    n: int,
    cond_max: float = 1e16,
) -> tuple[FourierSeries, float]:
    """Periodic solution on k = -n..n with ``y(pi) = boundary_value``.

    Returns the series and the 1-norm condition estimate of the system.  The
    condition number grows exponentially with ``n`` for the ellipse ODEs, so
    this solver is a cross-check rather than the production path.
    """
    A, rhs = periodic_system(a2, a1, a0, boundary_value, n)
    cond = condition_estimate(A)
    if not np.isfinite(cond) or cond > cond_max:
        raise SingularSystemError(f"periodic system is singular (cond ~ {cond:.3g})", cond)
    return FourierSeries(sla.solve(A, rhs), -n), cond


def equispaced_phi(M: int) -> np.ndarray:
    """``M`` equispaced points on [-pi, pi)."""
    return -np.pi + 2 * np.pi * np.arange(M) / M


def fourier_transform(values) -> FourierSeries:
    """Coefficients k = -K..K from ``2K+1`` samples at ``equispaced_phi``.

    For an even number of samples the unpaired Nyquist mode is split evenly
    between k = -M/2 and k = M/2, which keeps real data real.
    """
    v = np.asarray(values, dtype=complex)
    M = v.size
    if M == 0:
        raise ValueError("no samples")
    c = np.fft.fft(v) / M
    K = M // 2
    k = np.arange(-K, K + 1)
    out = c[k % M] * (-1.0) ** k
    if M % 2 == 0:
        out[0] *= 0.5
        out[-1] *= 0.5
    return FourierSeries(out, -K)


def fourier_inverse_transform(series: FourierSeries, M: int) -> np.ndarray:
    """Values at ``M`` equispaced points; the series must fit (aliasing otherwise)."""
    c = np.zeros(M, dtype=complex)
    for k, yk in zip(series.indices, series.coeffs):
        c[k % M] += yk * (-1.0) ** k
    return np.fft.ifft(c) * M
