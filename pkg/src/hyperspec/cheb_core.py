"""Chebyshev / ultraspherical series and the sparse operator calculus.

Coefficient vectors are degree-indexed from 0 and complex throughout.
Operators act on coefficient vectors:

* ``diff_operator(1, n)``  T -> C^(1) coefficients of the derivative
* ``diff_operator(2, n)``  T -> C^(2) coefficients of the second derivative
* ``conversion_operator("T->C1", n)`` and ``("C1->C2", n)``
* ``mult_operator_T(a, n)`` multiplication by ``a`` in the T basis
* ``mult_operator_C(lam, a, n)`` multiplication by ``a`` in the C^(lam) basis
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from scipy import sparse

__all__ = [
    "ChebSeries",
    "UltraSeries",
    "BandedOperator",
    "clenshaw_eval",
    "endpoint_derivative",
    "diff_operator",
    "conversion_operator",
    "mult_operator_T",
    "mult_operator_C",
    "cheb_points",
    "cheb_transform",
    "cheb_inverse_transform",
    "chebyshev_row",
]


def _as_coeffs(coeffs) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).ravel()
    if not np.all(np.isfinite(c)):
        raise ValueError("Chebyshev coefficients must be finite")
    return c


@dataclass(frozen=True, eq=False)
class ChebSeries:
    """Truncated Chebyshev expansion ``sum_j coeffs[j] T_j(l)`` on an interval.

    The interval ``(x_l, x_r)`` is related to ``l`` in ``[-1, 1]`` through
    ``x = x_l (1 - l)/2 + x_r (1 + l)/2``.
    """

    coeffs: np.ndarray
    interval: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs))
        xl, xr = (float(v) for v in self.interval)
        if not xl < xr:
            raise ValueError(f"interval must satisfy x_l < x_r, got {self.interval}")
        object.__setattr__(self, "interval", (xl, xr))
        self.coeffs.setflags(write=False)

    @property
    def halfwidth(self) -> float:
        return 0.5 * (self.interval[1] - self.interval[0])

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.interval[1] + self.interval[0])

    def __len__(self) -> int:
        return self.coeffs.size

    def to_local(self, x):
        """Map ``x`` from the physical interval to ``l``."""
        return (np.asarray(x) - self.midpoint) / self.halfwidth

    def from_local(self, ell):
        return self.midpoint + self.halfwidth * np.asarray(ell)

    def __call__(self, x):
        return clenshaw_eval(self, x)

    def deriv(self) -> "ChebSeries":
        """Derivative with respect to the physical variable."""
        if self.coeffs.size == 1:
            return ChebSeries([0.0], self.interval)
        d = np.polynomial.chebyshev.chebder(self.coeffs) / self.halfwidth
        return ChebSeries(d, self.interval)

    def derivative_at(self, x) -> complex:
        """First derivative at ``x``; endpoints use ``T_j'(+-1)`` directly."""
        if x == self.interval[1]:
            return endpoint_derivative(self, +1)
        if x == self.interval[0]:
            return endpoint_derivative(self, -1)
        return complex(self.deriv()(x))

    def chop(self, tol: float) -> "ChebSeries":
        """Drop trailing coefficients below ``tol * max|c|``."""
        return ChebSeries(self.coeffs[: chopped_length(self.coeffs, tol)], self.interval)

    @classmethod
    def from_values(cls, values, interval=(-1.0, 1.0)) -> "ChebSeries":
        """Interpolant through values at the second-kind points of ``interval``."""
        return cls(cheb_transform(values), interval)

    @classmethod
    def from_function(cls, f, interval=(-1.0, 1.0), tol=1e-16, n_max=2**14) -> "ChebSeries":
        """Adaptive interpolant of a vectorised callable on ``interval``."""
        n = 17
        while True:
            pts = cheb_points(n, interval)
            c = cheb_transform(f(pts))
            scale = np.max(np.abs(c))
            if scale == 0.0:
                return cls([0.0], interval)
            tail = np.abs(c[-8:])
            if np.all(tail <= tol * scale) or n >= n_max:
                return cls(c[: chopped_length(c, tol)], interval)
            n = 2 * n - 1


def chopped_length(coeffs, tol: float) -> int:
    """Number of coefficients kept when trailing ones below ``tol * max`` are dropped."""
    mags = np.abs(np.asarray(coeffs))
    if mags.size == 0:
        return 0
    big = np.nonzero(mags > tol * mags.max())[0]
    return int(big[-1]) + 1 if big.size else 1


@dataclass(frozen=True, eq=False)
class UltraSeries:
    """Truncated expansion ``sum_j coeffs[j] C_j^(lam)(l)`` with ``lam`` in {1, 2}."""

    coeffs: np.ndarray
    lam: int
    interval: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        if self.lam not in (1, 2):
            raise ValueError("ultraspherical order must be 1 or 2")
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs))

    def __call__(self, x):
        ell = (np.asarray(x) - 0.5 * sum(self.interval)) / (0.5 * (self.interval[1] - self.interval[0]))
        return _gegenbauer_sum(self.coeffs, self.lam, ell)


def _gegenbauer_sum(coeffs, lam, ell):
    # C_{j+1} = (2(j+lam) l C_j - (j+2lam-1) C_{j-1}) / (j+1)
    ell = np.asarray(ell, dtype=complex)
    out = np.zeros_like(ell) + coeffs[0]
    if coeffs.size == 1:
        return out
    cm1 = np.ones_like(ell)
    c0 = 2 * lam * ell
    out = out + coeffs[1] * c0
    for j in range(1, coeffs.size - 1):
        cp1 = (2 * (j + lam) * ell * c0 - (j + 2 * lam - 1) * cm1) / (j + 1)
        out = out + coeffs[j + 1] * cp1
        cm1, c0 = c0, cp1
    return out


def clenshaw_eval(s, x):
    """Evaluate a Chebyshev series at ``x`` (scalar or array, real or complex).

    ``s`` may be a :class:`ChebSeries` or a raw coefficient vector on [-1, 1].
    """
    if isinstance(s, ChebSeries):
        c, ell = s.coeffs, s.to_local(x)
    else:
        c = np.atleast_1d(np.asarray(s, dtype=complex))
        if np.any(np.isnan(c)):
            raise ValueError("NaN in Chebyshev coefficients")
        ell = np.asarray(x)
    scalar = np.ndim(ell) == 0
    ell = np.asarray(ell, dtype=complex)
    if c.size == 0:
        out = np.zeros_like(ell)
    else:
        b1 = np.zeros_like(ell)
        b2 = np.zeros_like(ell)
        two_l = 2 * ell
        for ck in c[:0:-1]:
            b1, b2 = ck + two_l * b1 - b2, b1
        out = c[0] + ell * b1 - b2
    return complex(out) if scalar else out


def endpoint_derivative(s: ChebSeries, end: int) -> complex:
    """``y'`` at the right (``end=+1``) or left (``end=-1``) endpoint."""
    if end not in (1, -1):
        raise ValueError("end must be +1 or -1")
    j = np.arange(len(s))
    w = j**2 if end == 1 else (-1.0) ** (j + 1) * j**2
    return complex(np.dot(w, s.coeffs) / s.halfwidth)


def chebyshev_row(ell: float, n: int) -> np.ndarray:
    """Row ``[T_0(l), ..., T_{n-1}(l)]`` for a point constraint."""
    j = np.arange(n)
    if ell in (1.0, -1.0):
        return float(ell) ** j
    if ell == 0.0:
        return np.cos(j * np.pi / 2).round()
    return np.cos(j * np.arccos(ell))


@dataclass(frozen=True, eq=False)
class BandedOperator:
    """Sparse matrix with a declared band plus optional dense rows.

    Entries outside ``-lower <= col - row <= upper`` must vanish except in
    the rows listed in ``dense_rows``.
    """

    matrix: sparse.csr_array
    lower: int
    upper: int
    dense_rows: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.lower < 0 or self.upper < 0:
            raise ValueError("bandwidths must be non-negative")
        object.__setattr__(self, "matrix", sparse.csr_array(self.matrix, dtype=complex))

    @classmethod
    def from_sparse(cls, mat, dense_rows=()) -> "BandedOperator":
        """Wrap ``mat``, inferring the band from its non-zero pattern."""
        coo = sparse.coo_array(mat)
        keep = ~np.isin(coo.row, dense_rows) & (coo.data != 0)
        offs = coo.col[keep].astype(int) - coo.row[keep].astype(int)
        lower = int(max(0, -offs.min())) if offs.size else 0
        upper = int(max(0, offs.max())) if offs.size else 0
        return cls(sparse.csr_array(mat), lower, upper, tuple(dense_rows))

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def respects_band(self) -> bool:
        coo = self.matrix.tocoo()
        mask = (coo.data != 0) & ~np.isin(coo.row, self.dense_rows)
        offs = coo.col[mask].astype(int) - coo.row[mask].astype(int)
        return bool(np.all((offs >= -self.lower) & (offs <= self.upper)))

    def truncate(self, rows: int, cols: int) -> "BandedOperator":
        return BandedOperator(
            self.matrix[:rows, :cols], self.lower, self.upper,
            tuple(r for r in self.dense_rows if r < rows),
        )

    def __matmul__(self, other):
        if isinstance(other, BandedOperator):
            return BandedOperator(
                self.matrix @ other.matrix, self.lower + other.lower, self.upper + other.upper
            )
        return self.matrix @ np.asarray(other)

    def __add__(self, other: "BandedOperator") -> "BandedOperator":
        return BandedOperator(
            self.matrix + other.matrix, max(self.lower, other.lower), max(self.upper, other.upper)
        )

    def __sub__(self, other: "BandedOperator") -> "BandedOperator":
        return self + (-1.0) * other

    def __rmul__(self, scalar) -> "BandedOperator":
        return BandedOperator(scalar * self.matrix, self.lower, self.upper, self.dense_rows)

    def __neg__(self) -> "BandedOperator":
        return (-1.0) * self


def _diag_op(diags: dict[int, np.ndarray], n: int, lower: int, upper: int) -> BandedOperator:
    mat = sparse.diags_array(
        [d[: n - abs(k)] for k, d in diags.items()], offsets=list(diags), shape=(n, n), dtype=complex
    )
    return BandedOperator(sparse.csr_array(mat), lower, upper)


def diff_operator(order: int, n: int) -> BandedOperator:
    """D1 (T -> C^(1)) or D2 (T -> C^(2)) truncated to n x n."""
    if order not in (1, 2):
        raise ValueError("differentiation order must be 1 or 2")
    if n < 1:
        raise ValueError("n must be positive")
    j = np.arange(n, dtype=float)
    if order == 1:
        return _diag_op({1: j + 1}, n, 0, 1)
    return _diag_op({2: 2 * (j + 2)}, n, 0, 2)


def conversion_operator(kind: str, n: int) -> BandedOperator:
    """S0 (``"T->C1"``) or S1 (``"C1->C2"``), upper triangular with two bands."""
    if n < 1:
        raise ValueError("n must be positive")
    j = np.arange(n, dtype=float)
    if kind == "T->C1":
        diag = np.full(n, 0.5)
        diag[0] = 1.0
        return _diag_op({0: diag, 2: np.full(n, -0.5)}, n, 0, 2)
    if kind == "C1->C2":
        return _diag_op({0: 1.0 / (j + 1), 2: -1.0 / (j + 3)}, n, 0, 2)
    raise ValueError(f"unknown conversion {kind!r}")


def _coeffs_of(a) -> np.ndarray:
    return a.coeffs if isinstance(a, ChebSeries) else _as_coeffs(a)


def mult_operator_T(a, n: int) -> BandedOperator:
    """Multiplication by ``a`` in the Chebyshev basis (Toeplitz + Hankel)."""
    c = _coeffs_of(a)
    m = c.size
    ext = np.zeros(2 * n + m, dtype=complex)
    ext[:m] = c
    rows, cols, vals = [], [], []
    for i in range(n):
        lo, hi = max(0, i - m + 1), min(n, i + m)
        k = np.arange(lo, hi)
        v = 0.5 * ext[np.abs(i - k)]
        if i > 0:
            v = v + 0.5 * ext[i + k]
        v[k == i] += 0.5 * c[0]
        rows.append(np.full(k.size, i))
        cols.append(k)
        vals.append(v)
    mat = sparse.csr_array(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    mat.eliminate_zeros()
    return BandedOperator(mat, m - 1, m - 1)


def _jacobi_operator(lam: int, n: int) -> sparse.csr_array:
    # l C_j = [(j+1) C_{j+1} + (j+2lam-1) C_{j-1}] / (2(j+lam))
    j = np.arange(n, dtype=float)
    sub = (j[:-1] + 1) / (2 * (j[:-1] + lam))
    sup = (j[1:] + 2 * lam - 1) / (2 * (j[1:] + lam))
    return sparse.csr_array(sparse.diags_array([sub, sup], offsets=[-1, 1], shape=(n, n)))


def mult_operator_C(lam: int, a, n: int) -> BandedOperator:
    """Multiplication by ``a`` (given in the T basis) acting on C^(lam) coefficients.

    Built as ``sum_j a_j T_j(J)`` with ``J`` the Gegenbauer Jacobi operator,
    evaluated by a matrix Clenshaw recurrence on an enlarged truncation so
    the returned n x n block is exact.
    """
    if lam not in (1, 2):
        raise ValueError("ultraspherical order must be 1 or 2")
    c = _coeffs_of(a)
    m = c.size
    N = n + m + 2
    J = _jacobi_operator(lam, N).astype(complex)
    eye = sparse.eye_array(N, dtype=complex, format="csr")
    b1 = sparse.csr_array((N, N), dtype=complex)
    b2 = sparse.csr_array((N, N), dtype=complex)
    for ck in c[:0:-1]:
        b1, b2 = ck * eye + 2 * (J @ b1) - b2, b1
    M = c[0] * eye + J @ b1 - b2
    M = sparse.csr_array(M[:n, :n])
    # drop round-off dust outside the exact band
    coo = M.tocoo()
    keep = np.abs(coo.col.astype(int) - coo.row.astype(int)) <= m - 1
    M = sparse.csr_array((coo.data[keep], (coo.row[keep], coo.col[keep])), shape=(n, n))
    M.eliminate_zeros()
    return BandedOperator(M, m - 1, m - 1)


def cheb_points(n: int, interval=(-1.0, 1.0)) -> np.ndarray:
    """Second-kind points ``cos(j pi/(n-1))``, j = 0..n-1, mapped to ``interval``."""
    if n < 1:
        raise ValueError("n must be positive")
    ell = np.array([0.0]) if n == 1 else np.cos(np.pi * np.arange(n) / (n - 1))
    xl, xr = interval
    return xl * (1 - ell) / 2 + xr * (1 + ell) / 2


def cheb_transform(values) -> np.ndarray:
    """Values at second-kind points -> Chebyshev coefficients (DCT-I)."""
    v = np.atleast_1d(np.asarray(values, dtype=complex))
    n = v.size
    if n == 1:
        return v.copy()
    c = scipy.fft.dct(v, type=1) / (n - 1)
    c[0] /= 2
    c[-1] /= 2
    return c


def cheb_inverse_transform(coeffs) -> np.ndarray:
    """Chebyshev coefficients -> values at the second-kind points."""
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).copy()
    n = c.size
    if n == 1:
        return c
    c[1:-1] /= 2
    return scipy.fft.dct(c, type=1)
