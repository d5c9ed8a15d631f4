"""Continuation of F(a, b, c, z) into the complex plane.

The sphere is covered by three domains, each a disk-like region in the local
variable of the real-line construction:

* I   : ellipse with semi-axes (A, B) around z = 0
* II  : the same ellipse in t = 1 - z
* III : disk of radius 1/R in s = -1/(z - 1/2)

On each boundary the local ODEs are solved as ODEs in the curve parameter
phi, with boundary values taken from real-line solves at phi = +-pi.  The
interior values follow from the Laplace equation in elliptic coordinates
``w = r (A cos(phi) + i B sin(phi))``, solved with a Chebyshev expansion in
r in [-1, 1] and a Fourier expansion in phi.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla
from numpy.polynomial import chebyshev as C
from scipy.special import jv

from .cheb_core import (
    ChebSeries,
    chopped_length,
    conversion_operator,
    diff_operator,
    mult_operator_C,
)
from .fourier_core import FourierSeries, equispaced_phi, fourier_transform, solve_periodic
from .real_line import (
    FORM_NAMES,
    ConnectionConstants,
    HypParams,
    HypRepresentation,
    LocalForm,
    PrefactoredSeries,
    SingularPointError,
    build_representation,
    local_forms,
    prefactor,
    prefactored_form,
    principal_power,
    solve_locals,
)
from .us_solver import Constraint, OdeSpec, SingularSystemError, SolverError, solve_adaptive

logger = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_A",
    "DomainGeometry",
    "Curve",
    "PhiOde",
    "BoundaryData",
    "ChebFourierField",
    "ComplexRepresentation",
    "domain_geometry",
    "phi_ode",
    "solve_on_boundary",
    "solve_on_boundary_fourier",
    "laplace_solve",
    "laplace_solve_adaptive",
    "laplace_residual",
    "eval_field",
    "eval_field_grid",
    "elliptic_coordinates",
    "build_complex",
    "refit_constants",
    "eval_complex",
]

DEFAULT_A = 0.6
EVAL_CHUNK = 4096
EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class DomainGeometry:
    """Ellipse semi-axes (A, B) for domains I/II and disk radius R (1/R in s)."""

    A: float
    B: float
    R: float
    centers: tuple = (0.0, 1.0, 0.5)

    @property
    def distance(self) -> float:
        """Shortest distance from each domain boundary to the nearest other singular point."""
        return 1.0 - self.A

    def in_domain_I(self, z: complex) -> bool:
        return _ellipse_radius(complex(z), self.A, self.B) <= 1.0

    def in_domain_II(self, z: complex) -> bool:
        return _ellipse_radius(1.0 - complex(z), self.A, self.B) <= 1.0

    def domain_of(self, z: complex) -> str:
        if self.in_domain_I(z):
            return "I"
        if self.in_domain_II(z):
            return "II"
        return "III"


def domain_geometry(A: float = DEFAULT_A) -> DomainGeometry:
    """Semi-axes and radius that put every boundary at distance 1 - A from the singularities."""
    A = float(A)
    if not 0.5 < A < 1.0:
        raise ValueError("A must lie strictly between 1/2 and 1")
    root = math.sqrt(1.0 - 1.0 / (4.0 * A * A))
    B = 1.0 / ((A + 1.0) * root)
    return DomainGeometry(A, B, B * root)


def _ellipse_radius(w: complex, A: float, B: float) -> float:
    return float(np.hypot(w.real / A, w.imag / B))


def elliptic_coordinates(w, A: float, B: float):
    """``(r, phi)`` with ``w = r (A cos(phi) + i B sin(phi))``, r >= 0."""
    w = np.asarray(w, dtype=complex)
    xi, eta = w.real / A, w.imag / B
    return np.hypot(xi, eta), np.arctan2(eta, xi)


@dataclass(frozen=True)
class Curve:
    """``w(phi) = A cos(phi) + i B sin(phi)`` around the local origin (circle if A = B)."""

    A: float
    B: float

    def fourier(self) -> FourierSeries:
        return FourierSeries([(self.A - self.B) / 2, 0.0, (self.A + self.B) / 2], -1)

    def __call__(self, phi):
        return self.A * np.cos(phi) + 1j * self.B * np.sin(phi)


def _fmul(f: FourierSeries, g: FourierSeries) -> FourierSeries:
    return FourierSeries(np.convolve(f.coeffs, g.coeffs), f.kmin + g.kmin)


def _fadd(f: FourierSeries, g: FourierSeries) -> FourierSeries:
    lo, hi = min(f.kmin, g.kmin), max(f.kmax, g.kmax)
    return FourierSeries(f.padded(lo, hi) + g.padded(lo, hi), lo)


def _poly_of(poly, w: FourierSeries) -> FourierSeries:
    out = FourierSeries([0.0])
    for coef in poly.coef[::-1]:
        out = _fadd(_fmul(out, w), FourierSeries([coef]))
    return out


@dataclass(frozen=True)
class PhiOde:
    """``a2 y'' + a1 y' + a0 y = 0`` in phi, with trigonometric-polynomial coefficients."""

    a2: FourierSeries
    a1: FourierSeries
    a0: FourierSeries

    @property
    def bandwidth(self) -> int:
        return max(max(abs(s.kmin), abs(s.kmax)) for s in (self.a2, self.a1, self.a0))


def phi_ode(form: LocalForm, curve: Curve) -> PhiOde:
    """Chain rule with ``w'' = -w``: the local ODE ``p y'' + q y' + r y = 0`` along ``curve``."""
    w = curve.fourier()
    dw = w.deriv()
    p, q, r = (_poly_of(pol, w) for pol in (form.p, form.q, form.r))
    dw2 = _fmul(dw, dw)
    return PhiOde(
        _fmul(dw, p),
        _fadd(_fmul(q, dw2), _fmul(p, w)),
        _fmul(r, _fmul(dw2, dw)),
    )


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Solution on a domain boundary: Chebyshev in phi/pi and trimmed Fourier series."""

    series: FourierSeries
    cheb: ChebSeries
    n_used: int
    n_system: int
    samples: int


def _phi_cheb(f: FourierSeries, scale: float) -> ChebSeries:
    """Chebyshev series in l = phi/pi of ``scale * f``.

    Uses ``exp(i a l) = J_0(a) + 2 sum_j i^j J_j(a) T_j(l)`` term by term.
    """
    amax = np.pi * max(abs(f.kmin), abs(f.kmax))
    deg = int(amax + 30)
    j = np.arange(deg + 1)
    weight = np.where(j == 0, 1.0, 2.0) * (1j) ** j
    out = np.zeros(deg + 1, dtype=complex)
    for k, fk in zip(f.indices, f.coeffs):
        if fk != 0:
            out += fk * weight * jv(j, np.pi * k)
    out *= scale
    return ChebSeries(out[: chopped_length(out, EPS / 16)])


def _shift_pi(f: FourierSeries) -> FourierSeries:
    """``f(phi + pi)``."""
    return FourierSeries(f.coeffs * (-1.0) ** np.arange(f.kmin, f.kmax + 1), f.kmin)


def solve_on_boundary(
    ode: PhiOde, value: complex, tol: float = 1e-15, n_max: int = 2048, pin: str = "pi"
) -> BoundaryData:
    """Ultraspherical solve on phi in [-pi, pi] with ``y(-pi) = y(pi) = value``.

    The periodic solution is the only one taking equal values at both ends,
    since the other local solution has a nontrivial monodromy around the
    enclosed singular point.  Its Fourier coefficients come from equispaced
    samples, trimmed below machine precision relative to the largest.

    With ``pin="zero"`` the value is imposed at phi = 0 instead: the solve
    runs in ``phi + pi`` and ``cheb`` refers to that shifted variable, while
    ``series`` is returned in phi.  Pinning where ``|y|`` is small lets a
    trace of the non-periodic solution bend the data near the pin.
    """
    if pin not in ("pi", "zero"):
        raise ValueError(f"unknown pin {pin!r}")
    if pin == "zero":
        ode = PhiOde(_shift_pi(ode.a2), _shift_pi(ode.a1), _shift_pi(ode.a0))
    spec = OdeSpec(
        _phi_cheb(ode.a2, 1.0),
        _phi_cheb(ode.a1, np.pi),
        _phi_cheb(ode.a0, np.pi**2),
        (Constraint(-1.0, value, "endpoint_value"), Constraint(1.0, value, "endpoint_value")),
    )
    y, rep = solve_adaptive(spec, tol=tol, n_max=n_max, n_min=64)
    M = 256
    while True:
        fs = fourier_transform(y(equispaced_phi(M) / np.pi))
        mags = np.abs(fs.coeffs)
        edge = max(mags[:4].max(), mags[-4:].max())
        if edge <= 4 * EPS * mags.max() or M >= 8192:
            break
        M *= 2
    fs = fs.trimmed(EPS)
    if pin == "zero":
        fs = _shift_pi(fs)
    return BoundaryData(fs, y, rep.n_used, rep.n_system, M)


def solve_on_boundary_fourier(ode: PhiOde, value: complex, n: int) -> tuple[FourierSeries, float]:
    """Cross-check: the coefficient-space periodic solve on k = -n..n."""
    return solve_periodic(ode.a2, ode.a1, ode.a0, value, n)


@dataclass(frozen=True, eq=False)
class ChebFourierField:
    """``u(r, phi) = sum_{j,k} X[j, k - kmin] T_j(r) exp(i k phi)``, r in [-1, 1]."""

    X: np.ndarray
    kmin: int
    A: float
    B: float

    @property
    def kmax(self) -> int:
        return self.kmin + self.X.shape[1] - 1

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def mode(self, k: int) -> np.ndarray:
        return self.X[:, k - self.kmin]

    def boundary(self) -> FourierSeries:
        return FourierSeries(self.X.sum(axis=0), self.kmin)

    def __call__(self, r, phi):
        return eval_field(self, r, phi)


def eval_field(field: ChebFourierField, r, phi):
    """Field values at paired ``(r, phi)`` (broadcast)."""
    r, phi = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(phi, dtype=float))
    shape = r.shape
    r, phi = r.ravel(), phi.ravel()
    k = np.arange(field.kmin, field.kmax + 1)
    out = np.empty(r.size, dtype=complex)
    for lo in range(0, r.size, EVAL_CHUNK):
        sl = slice(lo, lo + EVAL_CHUNK)
        V = C.chebvander(r[sl], field.n - 1)
        # Each point's value must not depend on the batch it is evaluated in:
        # BLAS kernels and complex SIMD loops (FMA) round differently for
        # different lengths, so use einsum, real arithmetic and a fixed-order sum.
        rad_re = np.einsum("ij,jk->ik", V, field.X.real)
        rad_im = np.einsum("ij,jk->ik", V, field.X.imag)
        theta = np.multiply.outer(phi[sl], k)
        cos, sin = np.cos(theta), np.sin(theta)
        t_re = (rad_re * cos - rad_im * sin).T.copy()
        t_im = (rad_re * sin + rad_im * cos).T.copy()
        acc_re, acc_im = t_re[0].copy(), t_im[0].copy()
        for a, b in zip(t_re[1:], t_im[1:]):
            acc_re += a
            acc_im += b
        acc = acc_re + 1j * acc_im
        out[sl] = acc
    out = out.reshape(shape)
    return complex(out) if out.ndim == 0 else out


def eval_field_grid(field: ChebFourierField, r, phi) -> np.ndarray:
    """Values on the tensor grid ``r x phi`` (shape ``len(r), len(phi)``)."""
    radial = C.chebvander(np.asarray(r, dtype=float), field.n - 1) @ field.X
    k = np.arange(field.kmin, field.kmax + 1)
    return radial @ np.exp(1j * np.multiply.outer(k, np.asarray(phi, dtype=float)))


@dataclass(frozen=True)
class _RadialTerms:
    T0: np.ndarray
    T1: np.ndarray
    T2: np.ndarray


def _radial_terms(n: int) -> _RadialTerms:
    """``S1 S0``, ``S1 M1[r] D1`` and ``M2[r^2] D2`` on rows 0..n-3, columns 0..n-1."""
    N = n + 6
    S0, S1 = conversion_operator("T->C1", N), conversion_operator("C1->C2", N)
    T0 = (S1 @ S0).toarray()
    T1 = (S1 @ mult_operator_C(1, [0.0, 1.0], N) @ diff_operator(1, N)).toarray()
    T2 = (mult_operator_C(2, [0.5, 0.0, 0.5], N) @ diff_operator(2, N)).toarray()
    return _RadialTerms(*(t[: n - 2, :n] for t in (T0, T1, T2)))


def _mode_blocks(terms: _RadialTerms, A: float, B: float):
    cm = 0.5 * (1 / A**2 + 1 / B**2)
    cd = 0.25 * (1 / A**2 - 1 / B**2)

    def diag(k):
        return cm * (terms.T2 + terms.T1 - k * k * terms.T0)

    def from_above(j):
        # contribution of u_j to the equation of mode j - 2
        return cd * (terms.T2 + (2 * j - 1) * terms.T1 + j * (j - 2) * terms.T0)

    def from_below(j):
        # contribution of u_j to the equation of mode j + 2
        return cd * (terms.T2 - (2 * j + 1) * terms.T1 + j * (j + 2) * terms.T0)

    return diag, from_above, from_below


def _parity_index(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    p = k % 2
    cols = np.arange(p, n, 2)
    rows = np.arange(p, n - 2, 2)
    return rows, cols


def _assemble_chain(modes, gamma, terms, A, B, n):
    diag, from_above, from_below = _mode_blocks(terms, A, B)
    D, Lo, Up, rhs = [], [], [], []
    for i, k in enumerate(modes):
        rows, cols = _parity_index(n, k)
        h = cols.size
        blk = np.zeros((h, h), dtype=complex)
        blk[0] = 1.0
        blk[1:] = diag(k)[np.ix_(rows, cols)]
        D.append(blk)
        if i > 0:
            lo = np.zeros((h, h), dtype=complex)
            lo[1:] = from_below(modes[i - 1])[np.ix_(rows, cols)]
            Lo.append(lo)
        if i < len(modes) - 1:
            up = np.zeros((h, h), dtype=complex)
            up[1:] = from_above(modes[i + 1])[np.ix_(rows, cols)]
            Up.append(up)
        b = np.zeros(h, dtype=complex)
        b[0] = gamma[i]
        rhs.append(b)
    return D, Lo, Up, rhs


def _block_thomas(D, Lo, Up, rhs):
    """Block LU for a block-tridiagonal system (no pivoting across blocks)."""
    nb = len(D)
    facs, rp = [], []
    Dp, bp = D[0], rhs[0]
    for i in range(nb):
        if i > 0:
            # W = Lo_i D'_{i-1}^{-1}
            W = sla.lu_solve(facs[-1], Lo[i - 1].T, trans=1).T
            Dp = D[i] - W @ Up[i - 1]
            bp = rhs[i] - W @ rp[-1]
        lu = sla.lu_factor(Dp, check_finite=True)
        if np.any(np.diag(lu[0]) == 0):
            raise SingularSystemError("singular diagonal block in the Laplace system", np.inf)
        facs.append(lu)
        rp.append(bp)
    x = [None] * nb
    x[-1] = sla.lu_solve(facs[-1], rp[-1])
    for i in range(nb - 2, -1, -1):
        x[i] = sla.lu_solve(facs[i], rp[i] - Up[i] @ x[i + 1])
    return x


def _disk_mode(k: int, gamma_k: complex, terms: _RadialTerms, A: float, n: int) -> np.ndarray:
    """One decoupled disk mode: banded rows plus the dense boundary row.

    The boundary row is split as ``e_0 e_0^T + e_0 v^T``; the banded part is
    solved with ``solve_banded`` and the rank-one correction by
    Sherman-Morrison.
    """
    cm = 1.0 / A**2
    rows, cols = _parity_index(n, k)
    h = cols.size
    Bm = np.zeros((h, h), dtype=complex)
    Bm[0, 0] = 1.0
    Bm[1:] = cm * (terms.T2 + terms.T1 - k * k * terms.T0)[np.ix_(rows, cols)]
    nz = np.nonzero(Bm)
    offs = nz[1] - nz[0]
    lower, upper = max(0, -offs.min()), max(0, offs.max())
    ab = np.zeros((lower + upper + 1, h), dtype=complex)
    for i, j in zip(*nz):
        ab[upper + i - j, j] = Bm[i, j]
    e0 = np.zeros(h, dtype=complex)
    e0[0] = 1.0
    v = np.ones(h)
    v[0] = 0.0
    y = sla.solve_banded((lower, upper), ab, gamma_k * e0)
    zvec = sla.solve_banded((lower, upper), ab, e0)
    denom = 1.0 + v @ zvec
    if denom == 0:
        raise SingularSystemError("singular disk mode system", np.inf)
    return y - zvec * (v @ y) / denom


def laplace_solve(
    boundary: FourierSeries, A: float, B: float, n: int, pad: int = 0, path: str = "auto"
) -> ChebFourierField:
    """Harmonic extension of ``boundary`` into the ellipse (or disk if A = B).

    Modes ``kmin - pad .. kmax + pad`` are solved with ``n`` Chebyshev
    coefficients in r (n even).  Modes k and k +- 2 couple on an ellipse, so
    each parity class of k gives one block-tridiagonal system.  ``path``
    selects ``"disk"`` (uncoupled modes, A = B only), ``"ellipse"`` (the
    block systems) or ``"auto"``.
    """
    if n < 8:
        raise ValueError("n must be at least 8")
    if path not in ("auto", "disk", "ellipse"):
        raise ValueError(f"unknown path {path!r}")
    n += n % 2
    kmin, kmax = boundary.kmin - pad, boundary.kmax + pad
    gamma = boundary.padded(kmin, kmax)
    terms = _radial_terms(n)
    X = np.zeros((n, kmax - kmin + 1), dtype=complex)
    disk = abs(A - B) <= 1e-14 * max(A, B)
    if path == "disk" and not disk:
        raise ValueError("the disk path needs A = B")
    disk = disk and path != "ellipse"
    for start in (kmin, kmin + 1):
        modes = list(range(start, kmax + 1, 2))
        if not modes:
            continue
        g = [gamma[k - kmin] for k in modes]
        if disk:
            sols = [_disk_mode(k, gk, terms, A, n) for k, gk in zip(modes, g)]
        else:
            sols = _block_thomas(*_assemble_chain(modes, g, terms, A, B, n))
        for k, s in zip(modes, sols):
            _, cols = _parity_index(n, k)
            X[cols, k - kmin] = s
    if not np.all(np.isfinite(X)):
        raise SingularSystemError("non-finite Laplace solution", np.inf)
    return ChebFourierField(X, kmin, A, B)


def laplace_solve_adaptive(
    boundary: FourierSeries, A: float, B: float, tol: float = 1e-15, n_max: int = 256
) -> ChebFourierField:
    """Double n (from 32) and the mode padding until both tails are negligible."""
    n, pad = 32, 0 if abs(A - B) <= 1e-14 * max(A, B) else 8
    scale = np.abs(boundary.coeffs).max()
    while True:
        field = laplace_solve(boundary, A, B, n, pad)
        mags = np.abs(field.X)
        radial_ok = mags[-4:].max() <= tol * max(mags.max(), scale)
        edge = np.abs(np.concatenate([field.X[:, :2], field.X[:, -2:]], axis=1)).max()
        modes_ok = pad == 0 or edge <= tol * mags.max()
        if radial_ok and modes_ok:
            return field
        if n >= n_max and (modes_ok or pad > 512):
            raise SolverError(f"Laplace solve did not resolve (n={n}, pad={pad})")
        if not radial_ok and n < n_max:
            n *= 2
        if not modes_ok:
            pad *= 2


def laplace_residual(field: ChebFourierField) -> float:
    """Max relative residual of the coupled mode equations over all modes."""
    terms = _radial_terms(field.n)
    diag, from_above, from_below = _mode_blocks(terms, field.A, field.B)
    disk = abs(field.A - field.B) <= 1e-14 * max(field.A, field.B)
    scale = np.abs(field.X).max() or 1.0
    worst = 0.0
    for k in range(field.kmin, field.kmax + 1):
        res = diag(k) @ field.mode(k)
        if not disk:
            if k + 2 <= field.kmax:
                res = res + from_above(k + 2) @ field.mode(k + 2)
            if k - 2 >= field.kmin:
                res = res + from_below(k - 2) @ field.mode(k - 2)
        norm = max(1.0, k * k) * scale
        worst = max(worst, float(np.abs(res).max() / norm))
    return worst


@dataclass(frozen=True, eq=False)
class ComplexRepresentation:
    """Real-line representation plus the five Laplace fields."""

    real: HypRepresentation
    geometry: DomainGeometry
    fields: dict
    boundaries: dict = field(default_factory=dict)
    center_corrections: dict = field(default_factory=dict)
    # (root, exponent) prefactors of each field, see ``real_line.form_factors``
    factors: dict = field(default_factory=dict)
    # constants refitted on the domain overlaps (None: the real-line ones)
    constants: ConnectionConstants | None = None

    @property
    def params(self) -> HypParams:
        return self.real.params

    @property
    def connection(self) -> ConnectionConstants:
        return self.constants or self.real.constants

    def __call__(self, z):
        return eval_complex(self, z)

    def domain_of(self, z: complex) -> str:
        z = complex(z)
        if math.isinf(abs(z)):
            return "III"
        return self.geometry.domain_of(z)

    def evaluate(self, z, domain: str | None = None):
        """F(z) through the fields of ``domain`` (default: I, then II, then III).

        ``z`` may be an array when ``domain`` is given; all points then use
        that domain's expression.
        """
        if domain is None:
            z = complex(z)
            domain = self.domain_of(z)
        z = np.asarray(z, dtype=complex)
        K = self.connection
        if domain == "I":
            g = self.geometry
            out = self._field("y_I", *elliptic_coordinates(z, g.A, g.B), z)
        elif domain == "II":
            u, w = self._basis(z, "II")
            out = K.alpha * u + K.beta * w
        elif domain == "III":
            v, w = self._basis(z, "III")
            out = K.gamma * v + K.delta * w
        else:
            raise ValueError(f"unknown domain {domain!r}")
        return complex(out) if np.ndim(out) == 0 else out

    def _basis(self, z: np.ndarray, domain: str) -> tuple[np.ndarray, np.ndarray]:
        """The two local solutions of domain II or III, powers included, at ``z``."""
        g, p = self.geometry, self.params
        if domain == "II":
            t = 1.0 - z
            r, phi = elliptic_coordinates(t, g.A, g.B)
            if p.kappa.real <= 0 and np.any(np.abs(t) < self.real.guard):
                raise SingularPointError("z is too close to the singular point 1")
            u = self._field("u", r, phi, t)
            w = self._field("u_tilde", r, phi, t)
            return u, principal_power(t, p.kappa) * w
        with np.errstate(divide="ignore"):
            s = np.where(np.isinf(np.abs(z)), 0j, -1.0 / (z - 0.5))
        r, phi = elliptic_coordinates(s, 1.0 / g.R, 1.0 / g.R)
        if np.any(r > 1.0 + 1e-12):
            raise AssertionError("a point lies outside every domain")
        low = (z.imag == 0) & (s.real < 0)
        v = self._field("v", r, phi, s)
        w = self._field("v_tilde", r, phi, s)
        sa = np.where(low, principal_power(s, p.a, lower=True), principal_power(s, p.a))
        sb = np.where(low, principal_power(s, p.b, lower=True), principal_power(s, p.b))
        return sa * v, sb * w

    def _field(self, name, r, phi, w):
        out = eval_field(self.fields[name], r, phi)
        fac = self.factors.get(name, ())
        return prefactor(w, fac) * out if fac else out

    def domains(self, z) -> np.ndarray:
        """Domain label per point (array version of ``domain_of``)."""
        z = np.asarray(z, dtype=complex)
        g = self.geometry
        out = np.full(z.shape, "III", dtype="<U3")
        finite = np.isfinite(z)
        with np.errstate(invalid="ignore"):
            r1 = elliptic_coordinates(np.where(finite, z, 0), g.A, g.B)[0]
            r2 = elliptic_coordinates(np.where(finite, 1.0 - z, 0), g.A, g.B)[0]
        out[finite & (r2 <= 1.0)] = "II"
        out[finite & (r1 <= 1.0)] = "I"
        return out


def build_complex(
    a, b, c, A: float = DEFAULT_A, tol: float = 1e-15, n_max: int = 512, epsilon: float = 1e-6,
    real: HypRepresentation | None = None,
) -> ComplexRepresentation:
    """Real-line representation, boundary solves and Laplace fields for all five forms."""
    rep = real or build_representation(a, b, c, tol=tol, n_max=n_max, epsilon=epsilon)
    p = rep.params
    g = domain_geometry(A)
    rs = 1.0 / g.R
    wide = {"y_I": (-g.A, g.A), "u": (-g.A, g.A), "u_tilde": (-g.A, g.A),
            "v": (-rs, rs), "v_tilde": (-rs, rs)}
    locs = solve_locals(p, tol=tol, n_max=n_max, intervals=wide, epsilon=epsilon)
    factors = {name: locs.factors(name) for name in FORM_NAMES}
    forms = {n: prefactored_form(f, factors[n]) for n, f in local_forms(p).items()}
    fields, bnds, corrections = {}, {}, {}
    for name, form in forms.items():
        curve = Curve(rs, rs) if name.startswith("v") else Curve(g.A, g.B)
        lo, hi = wide[name]
        sol = locs[name]
        if isinstance(sol, PrefactoredSeries):
            sol = sol.core
        # pin the boundary solve at the real crossing where the core is larger
        v_lo, v_hi = complex(sol(lo)), complex(sol(hi))
        if abs(v_hi) > abs(v_lo):
            bd = solve_on_boundary(phi_ode(form, curve), v_hi, tol=tol, pin="zero")
        else:
            bd = solve_on_boundary(phi_ode(form, curve), v_lo, tol=tol)
        bnds[name] = bd
        fld = laplace_solve_adaptive(bd.series, curve.A, curve.B, tol=tol)
        # every local solution is 1 at the local origin, the domain center;
        # this removes the scale error of the widened real-line solve
        center = eval_field(fld, 0.0, 0.0)
        if center == 0 or not np.isfinite(center):
            raise SolverError(f"{name}: field vanishes at the domain center")
        fields[name] = ChebFourierField(fld.X / center, fld.kmin, fld.A, fld.B)
        corrections[name] = abs(center - 1.0)
        logger.debug(
            "%s: boundary n=%d, modes %d..%d, radial n=%d, center correction %.1e",
            name, bd.n_used, bd.series.kmin, bd.series.kmax, fld.n, corrections[name],
        )
    crep = ComplexRepresentation(rep, g, fields, bnds, corrections, factors)
    return replace(crep, constants=refit_constants(crep))


OVERLAP_RADIUS = 0.97


def _overlap_II(g: DomainGeometry) -> np.ndarray:
    """Off-axis points well inside both domain I and domain II."""
    x, y = np.meshgrid(np.linspace(0.41, 0.59, 7), np.linspace(0.05, 0.7, 27))
    z = (x + 1j * y).ravel()
    z = np.concatenate([z, z.conj()])
    rI = elliptic_coordinates(z, g.A, g.B)[0]
    rII = elliptic_coordinates(1.0 - z, g.A, g.B)[0]
    return z[(rI <= OVERLAP_RADIUS) & (rII <= OVERLAP_RADIUS)]


def _overlap_III(g: DomainGeometry) -> np.ndarray:
    """Off-axis points of domain III that also lie well inside domain I or II."""
    rho, theta = np.meshgrid(np.array([0.8, 0.88, 0.95]) / g.R, np.linspace(-np.pi, np.pi, 97))
    z = 0.5 - 1.0 / (rho * np.exp(1j * theta)).ravel()
    rI = elliptic_coordinates(z, g.A, g.B)[0]
    rII = elliptic_coordinates(1.0 - z, g.A, g.B)[0]
    keep = (np.abs(z.imag) >= 0.05) & ((rI <= OVERLAP_RADIUS) | (rII <= OVERLAP_RADIUS))
    return z[keep]


def _fit_pair(c1: np.ndarray, c2: np.ndarray, data: np.ndarray, old: tuple) -> tuple:
    """Least-squares ``(x1, x2)`` in ``x1 c1 + x2 c2 = data``; keeps ``old`` unless it improves."""
    n1, n2 = np.linalg.norm(c1), np.linalg.norm(c2)
    if not (n1 > 0 and n2 > 0 and np.all(np.isfinite(c1)) and np.all(np.isfinite(c2))):
        return old
    sol = np.linalg.lstsq(np.column_stack([c1 / n1, c2 / n2]), data, rcond=None)[0]
    new = (complex(sol[0] / n1), complex(sol[1] / n2))
    res = lambda x: np.linalg.norm(x[0] * c1 + x[1] * c2 - data)  # noqa: E731
    return new if res(new) < res(old) else old


def refit_constants(rep: ComplexRepresentation) -> ConnectionConstants:
    """Connection constants refined on the off-axis domain overlaps.

    C^1 matching on the real line fixes each constant only as well as its
    term shows at the matching point: for a large Re(c - a - b) the term
    ``beta t^(c-a-b) u~`` is tiny at t = 1/2 yet of order one near the top of
    the domain II ellipse.  A least-squares fit of the domain II (then III)
    basis against the domain I (then I or II) values on overlap points, where
    the weak term is far larger, removes that amplification.  The real-line
    constants are kept whenever the fit does not lower the residual.
    """
    g, K = rep.geometry, rep.real.constants
    z2 = _overlap_II(g)
    u, w = rep._basis(z2, "II")
    alpha, beta = _fit_pair(u, w, rep.evaluate(z2, "I"), (K.alpha, K.beta))
    stage = replace(rep, constants=ConnectionConstants(alpha, beta, K.gamma, K.delta))
    z3 = _overlap_III(g)
    labels = stage.domains(z3)
    data = np.empty(z3.size, dtype=complex)
    for dom in ("I", "II"):
        sel = labels == dom
        if np.any(sel):
            data[sel] = stage.evaluate(z3[sel], dom)
    v, w = rep._basis(z3, "III")
    gamma, delta = _fit_pair(v, w, data, (K.gamma, K.delta))
    return ConnectionConstants(alpha, beta, gamma, delta)


def eval_complex(rep, z):
    """F at complex ``z`` (scalar or array).

    Real ``z`` goes through the real-line representation, which is both more
    accurate and carries the lower-side convention on the cut z > 1.
    """
    def one(zz):
        zz = complex(zz)
        if zz.imag == 0 and not math.isinf(abs(zz)):
            return rep.real.evaluate(zz.real)
        return rep.evaluate(zz)

    if np.ndim(z) == 0:
        return one(z)
    return np.array([one(v) for v in np.ravel(z)]).reshape(np.shape(z))
