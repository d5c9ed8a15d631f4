"""Ultraspherical (coefficient-space) solver for second-order linear ODEs.

An ODE ``a2(l) y'' + a1(l) y' + a0(l) y = f(l)`` on ``l`` in [-1, 1] is
discretised as::

    [ constraint rows                 ]         [ targets ]
    [ P_{n-k} (M2[a2] D2 + S1 M1[a1] D1  ] y  =  [ S1 S0 f ]
    [          + S1 S0 M0[a0]) P_n^T   ]

A Chebyshev collocation discretisation is provided for conditioning
comparisons.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, onenormest, splu

from .cheb_core import (
    BandedOperator,
    ChebSeries,
    cheb_points,
    cheb_transform,
    chebyshev_row,
    chopped_length,
    conversion_operator,
    diff_operator,
    mult_operator_C,
    mult_operator_T,
)

logger = logging.getLogger(__name__)

__all__ = [
    "Constraint",
    "OdeSpec",
    "SolveReport",
    "SolverError",
    "SingularSystemError",
    "ConvergenceError",
    "assemble",
    "solve",
    "solve_adaptive",
    "collocation_matrix",
    "solve_collocation",
    "condition_estimate",
]

DENSE_LIMIT = 256
COND_MAX = 1e14
CHOP_TOL = float(np.finfo(float).eps)


class SolverError(RuntimeError):
    """Base class for solver failures."""


class SingularSystemError(SolverError):
    def __init__(self, message, condition=np.inf):
        super().__init__(message)
        self.condition = condition


class ConvergenceError(SolverError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class Constraint:
    """Value constraint ``y(location) = target`` with ``location`` in [-1, 1]."""

    location: float
    target: complex
    kind: str = "point_value"

    def __post_init__(self):
        if not -1.0 <= self.location <= 1.0:
            raise ValueError("constraint location must lie in [-1, 1]")
        if self.kind not in ("point_value", "endpoint_value"):
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        if self.kind == "endpoint_value" and abs(self.location) != 1.0:
            raise ValueError("endpoint constraints sit at l = -1 or l = 1")

    def row(self, n: int) -> np.ndarray:
        return chebyshev_row(self.location, n)


@dataclass(frozen=True, eq=False)
class OdeSpec:
    """``a2 y'' + a1 y' + a0 y = rhs`` in the mapped variable ``l``.

    The coefficient series live on [-1, 1]; ``interval`` is the physical
    interval the solution is reported on.
    """

    a2: ChebSeries
    a1: ChebSeries
    a0: ChebSeries
    constraints: tuple[Constraint, ...]
    interval: tuple[float, float] = (-1.0, 1.0)
    rhs: ChebSeries | None = None

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if len(self.constraints) == 0:
            raise ValueError("at least one constraint is required")
        for s in (self.a2, self.a1, self.a0):
            if len(s) == 0:
                raise ValueError("coefficient series must be non-empty")

    @property
    def bandwidth(self) -> int:
        return max(len(self.a2), len(self.a1), len(self.a0))


@dataclass(frozen=True)
class SolveReport:
    n_used: int
    tail_magnitude: float
    condition_estimate: float | None = None
    n_system: int = 0
    residual: float = 0.0
    history: tuple = field(default=(), repr=False)


def _operator(spec: OdeSpec, n: int) -> sparse.csr_array:
    """Rows of L = M2 D2 + S1 M1 D1 + S1 S0 M0 truncated to n x n (exact entries)."""
    N = n + spec.bandwidth + 4
    S0 = conversion_operator("T->C1", N)
    S1 = conversion_operator("C1->C2", N)
    L = (
        mult_operator_C(2, spec.a2, N) @ diff_operator(2, N)
        + S1 @ (mult_operator_C(1, spec.a1, N) @ diff_operator(1, N))
        + S1 @ (S0 @ mult_operator_T(spec.a0, N))
    )
    return sparse.csr_array(L.matrix[:n, :n])


def _rhs_rows(spec: OdeSpec, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=complex)
    if spec.rhs is not None:
        N = max(n, len(spec.rhs)) + 4
        f = np.zeros(N, dtype=complex)
        f[: len(spec.rhs)] = spec.rhs.coeffs
        S0 = conversion_operator("T->C1", N)
        S1 = conversion_operator("C1->C2", N)
        out[:] = (S1 @ (S0 @ f))[:n]
    return out


def assemble(spec: OdeSpec, n: int) -> tuple[BandedOperator, np.ndarray]:
    """Almost-banded n x n system: constraint rows on top, then ODE rows."""
    k = len(spec.constraints)
    if n < 3:
        raise ValueError("n must be at least 3")
    if n < k:
        raise ValueError(f"n={n} is smaller than the number of constraints ({k})")
    L = _operator(spec, n)[: n - k]
    top = sparse.csr_array(np.vstack([c.row(n) for c in spec.constraints]).astype(complex))
    A = sparse.csr_array(sparse.vstack([top, L]))
    rhs = np.concatenate([[c.target for c in spec.constraints], _rhs_rows(spec, n - k)])
    return BandedOperator.from_sparse(A, dense_rows=tuple(range(k))), rhs.astype(complex)


def condition_estimate(matrix) -> float:
    """1-norm condition number estimate (LAPACK ``gecon`` or ``onenormest``)."""
    if isinstance(matrix, BandedOperator):
        matrix = matrix.matrix
    if sparse.issparse(matrix) and matrix.shape[0] > DENSE_LIMIT:
        A = sparse.csc_array(matrix, dtype=complex)
        try:
            lu = splu(A)
        except RuntimeError:
            return np.inf
        n = A.shape[0]
        inv = LinearOperator(
            (n, n), matvec=lu.solve, rmatvec=lambda v: lu.solve(v, trans="H"), dtype=complex
        )
        return float(onenormest(A) * onenormest(inv))
    A = np.asarray(matrix.toarray() if sparse.issparse(matrix) else matrix, dtype=complex)
    if A.shape[0] != A.shape[1]:
        raise ValueError("condition_estimate needs a square matrix")
    anorm = np.abs(A).sum(axis=0).max()
    lu, piv, info = scipy.linalg.lapack.zgetrf(A)
    if info > 0 or np.any(np.diag(lu) == 0):
        return np.inf
    rcond, info = scipy.linalg.lapack.zgecon(lu, anorm, norm="1")
    return np.inf if rcond == 0 else float(1.0 / rcond)


def _linear_solve(A: BandedOperator, rhs: np.ndarray) -> tuple[np.ndarray, float]:
    n = A.shape[0]
    if n <= DENSE_LIMIT:
        dense = A.toarray()
        lu, piv, info = scipy.linalg.lapack.zgetrf(dense)
        if info > 0:
            raise SingularSystemError("singular ultraspherical system", np.inf)
        anorm = np.abs(dense).sum(axis=0).max()
        rcond, _ = scipy.linalg.lapack.zgecon(lu, anorm, norm="1")
        cond = np.inf if rcond == 0 else 1.0 / rcond
        x, info = scipy.linalg.lapack.zgetrs(lu, piv, rhs)
        return x, float(cond)
    try:
        lu = splu(sparse.csc_array(A.matrix), permc_spec="COLAMD")
    except RuntimeError as exc:
        raise SingularSystemError(f"singular ultraspherical system: {exc}", np.inf) from exc
    x = lu.solve(rhs)
    return x, condition_estimate(A)


def solve(spec: OdeSpec, n: int, cond_max: float = COND_MAX) -> tuple[ChebSeries, SolveReport]:
    """Solve with exactly ``n`` Chebyshev coefficients."""
    A, rhs = assemble(spec, n)
    x, cond = _linear_solve(A, rhs)
    if not np.all(np.isfinite(x)) or cond > cond_max:
        raise SingularSystemError(
            f"ultraspherical system is singular or ill-conditioned (cond ~ {cond:.3g})", cond
        )
    resid = np.abs(A @ x - rhs).max() / max(np.abs(rhs).max(), 1e-300)
    tail = float(np.abs(x[-5:]).max())
    report = SolveReport(
        n_used=n, tail_magnitude=tail, condition_estimate=cond, n_system=n, residual=float(resid)
    )
    return ChebSeries(x, spec.interval), report


def solve_adaptive(
    spec: OdeSpec, tol: float = 1e-15, n_max: int = 512, n_min: int = 16
) -> tuple[ChebSeries, SolveReport]:
    """Double ``n`` from ``n_min`` until the last five coefficients are negligible.

    ``tol`` only decides convergence.  The returned series keeps all
    coefficients of the final solve (less trailing exact zeros): chopping the
    tail, even at ``eps``, costs accuracy in endpoint derivatives, which weight
    ``y_j`` by ``j**2``.  ``report.n_used`` counts coefficients above
    ``eps * max|y_j|`` and ``report.n_system`` is the size of the final solve.

    After the tail first drops below ``tol`` the solve is repeated once at
    twice the size and that solution is returned (unless the tail is exactly
    zero or ``n_max`` is reached).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = max(n_min, len(spec.constraints) + 3)
    history = []
    accepted = None
    while True:
        try:
            y, rep = solve(spec, n)
        except SingularSystemError:
            if accepted is None:
                raise
            break
        scale = np.abs(y.coeffs).max()
        tail = np.abs(y.coeffs[-5:]).max()
        history.append((n, float(tail / scale if scale else 0.0)))
        if tail <= tol * scale:
            done = accepted is not None or tail == 0 or n >= n_max
            accepted = (y, rep, tail, n)
            if done:
                break
        elif n >= n_max:
            report = SolveReport(
                n_used=n, tail_magnitude=float(tail), condition_estimate=rep.condition_estimate,
                n_system=n, residual=rep.residual, history=tuple(history),
            )
            raise ConvergenceError(
                f"no convergence at n_max={n_max}: relative tail {tail / scale:.2e} > {tol:.1e}",
                report,
            )
        else:
            accepted = None
        # after the first pass, one confirming solve at twice the size: near
        # singular interior points the system is ill-conditioned and amplifies
        # the truncation error, so a small tail alone does not settle accuracy
        n = min(2 * n, n_max)
        logger.debug("refining ultraspherical solve to n=%d", n)
    y, rep, tail, n = accepted
    out = ChebSeries(y.coeffs[: chopped_length(y.coeffs, 0.0)], spec.interval)
    return out, SolveReport(
        n_used=chopped_length(y.coeffs, CHOP_TOL),
        tail_magnitude=float(tail),
        condition_estimate=rep.condition_estimate,
        n_system=n,
        residual=rep.residual,
        history=tuple(history),
    )


def _cheb_diff_matrix(n: int) -> tuple[np.ndarray, np.ndarray]:
    # classical Chebyshev differentiation matrix on cos(j pi/(n-1))
    x = cheb_points(n)
    c = np.ones(n)
    c[0] = c[-1] = 2.0
    c = c * (-1.0) ** np.arange(n)
    dX = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dX + np.eye(n))
    D -= np.diag(D.sum(axis=1))
    return D, x


def _interp_row(points: np.ndarray, ell: float) -> np.ndarray:
    hit = np.nonzero(points == ell)[0]
    row = np.zeros(points.size)
    if hit.size:
        row[hit[0]] = 1.0
        return row
    w = (-1.0) ** np.arange(points.size)
    w[0] *= 0.5
    w[-1] *= 0.5
    t = w / (ell - points)
    return t / t.sum()


def collocation_matrix(spec: OdeSpec, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense Chebyshev collocation matrix on n second-kind points.

    Each constraint replaces the ODE row at the collocation point nearest
    to its location.  Returns ``(matrix, rhs, points)`` with ``points`` in l.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    D, x = _cheb_diff_matrix(n)
    ev = lambda s: s(x) if s is not None else np.zeros(n)  # noqa: E731
    A = ev(spec.a2)[:, None] * (D @ D) + ev(spec.a1)[:, None] * D + np.diag(ev(spec.a0))
    rhs = ev(spec.rhs).astype(complex)
    used: set[int] = set()
    for con in spec.constraints:
        order = np.argsort(np.abs(x - con.location), kind="stable")
        idx = next(int(i) for i in order if int(i) not in used)
        used.add(idx)
        A[idx] = _interp_row(x, con.location)
        rhs[idx] = con.target
    return A, rhs, x


def solve_collocation(spec: OdeSpec, n: int) -> ChebSeries:
    A, rhs, _ = collocation_matrix(spec, n)
    vals = np.linalg.solve(A, rhs)
    return ChebSeries(cheb_transform(vals), spec.interval)
