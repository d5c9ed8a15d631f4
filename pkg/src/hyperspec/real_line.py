"""The hypergeometric function on the compactified real line.

Three domains, each with its own local variable:

* I   : x in [-1/2, 1/2]
* II  : t = 1 - x in [-1/2, 1/2]
* III : s = -1/(x - 1/2) in [-1, 1]

Five equivalent ODEs are solved with ``y(0) = 1`` (one in I, two each in II
and III) and glued together by C^1 matching at x = 1/2 and x = -1/2::

    F = y_I(x)                                   in I
    F = alpha u(t) + beta t^(c-a-b) u~(t)        in II
    F = gamma s^a v(s) + delta s^b v~(s)         in III

Powers use the principal logarithm.  On the cut x > 1 the value returned is
the limit from the lower half plane, F(x - i0), in both II and III.
"""

from __future__ import annotations

import cmath
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial

from .cheb_core import ChebSeries
from .us_solver import Constraint, OdeSpec, SolverError, solve_adaptive

logger = logging.getLogger(__name__)

__all__ = [
    "HypParams",
    "GenericityReport",
    "DegenerateParametersError",
    "NearDegenerateWarning",
    "MatchingError",
    "SingularPointError",
    "LocalForm",
    "LocalSolutionSet",
    "PrefactoredSeries",
    "form_factors",
    "prefactored_form",
    "factor_subsets",
    "evaluation_condition",
    "prefactor",
    "ConnectionConstants",
    "HypRepresentation",
    "FORM_NAMES",
    "genericness_check",
    "local_forms",
    "kummer_forms",
    "solve_locals",
    "match_II",
    "match_III",
    "build_representation",
    "eval_real",
    "principal_power",
]

FORM_NAMES = ("y_I", "u", "u_tilde", "v", "v_tilde")
REAL_INTERVALS = {
    "y_I": (-0.5, 0.5),
    "u": (-0.5, 0.5),
    "u_tilde": (-0.5, 0.5),
    "v": (-1.0, 1.0),
    "v_tilde": (-1.0, 1.0),
}
DEFAULT_EPSILON = 1e-6
DEFAULT_GUARD = 1e-6
MATCH_COND_MAX = 1e12


class DegenerateParametersError(ValueError):
    """Parameters violate the genericness condition exactly."""

    def __init__(self, message, violated=()):
        super().__init__(message)
        self.violated = tuple(violated)


class NearDegenerateWarning(UserWarning):
    pass


class MatchingError(RuntimeError):
    def __init__(self, message, condition=np.inf):
        super().__init__(message)
        self.condition = condition


class SingularPointError(ValueError):
    pass


@dataclass(frozen=True)
class HypParams:
    a: complex
    b: complex
    c: complex

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = complex(getattr(self, name))
            if not cmath.isfinite(v):
                raise ValueError(f"parameter {name} must be finite")
            object.__setattr__(self, name, v)

    def normalized(self) -> "HypParams":
        """Swap a and b if needed so that Re b >= Re a."""
        if self.b.real < self.a.real:
            return HypParams(self.b, self.a, self.c)
        return self

    @property
    def kappa(self) -> complex:
        """Exponent c - a - b of the second solution at x = 1."""
        return self.c - self.a - self.b


def _dist_to_integers(w: complex) -> float:
    return abs(w - round(w.real))


def _is_integer(w: complex) -> bool:
    return _dist_to_integers(w) <= 8 * np.finfo(float).eps * (1 + abs(w))


@dataclass(frozen=True)
class GenericityReport:
    distances: dict
    epsilon: float
    violated: tuple = ()
    warnings: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violated

    @property
    def status(self) -> str:
        if self.violated:
            return "fail"
        return "warn" if self.warnings else "pass"


def genericness_check(p: HypParams, epsilon: float = DEFAULT_EPSILON) -> GenericityReport:
    """Distances of c, c-a-b and b-a to the integers, with a verdict.

    c - a - b or b - a an exact integer is fatal (logarithmic solutions at
    x = 1 or x = infinity make the matching constants non-unique), as is c a
    non-positive integer (F undefined).  A positive integer c only affects
    the second solution at x = 0, which is never constructed, so it is a
    warning.  Anything within ``epsilon`` of an integer is a warning.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    quantities = {"c": p.c, "c-a-b": p.c - p.a - p.b, "b-a": p.b - p.a}
    dist = {k: _dist_to_integers(v) for k, v in quantities.items()}
    violated, notes = [], []
    for name in ("c-a-b", "b-a"):
        w = quantities[name]
        if _is_integer(w):
            violated.append(f"{name} = {w.real:g} is an integer")
        elif dist[name] < epsilon:
            notes.append(f"{name} is within {dist[name]:.1e} of an integer")
    if _is_integer(p.c):
        if round(p.c.real) <= 0:
            violated.append(f"c = {p.c.real:g} is a non-positive integer")
        else:
            notes.append(f"c = {p.c.real:g} is an integer (log solution at x=0 is not used)")
    elif dist["c"] < epsilon:
        notes.append(f"c is within {dist['c']:.1e} of an integer")
    return GenericityReport(dist, epsilon, tuple(violated), tuple(notes))


def _enforce_genericity(p: HypParams, epsilon: float) -> GenericityReport:
    rep = genericness_check(p, epsilon)
    if rep.violated:
        raise DegenerateParametersError(
            "non-generic parameters: " + "; ".join(rep.violated), rep.violated
        )
    for note in rep.warnings:
        warnings.warn(note, NearDegenerateWarning, stacklevel=3)
    return rep


@dataclass(frozen=True)
class LocalForm:
    """``p(w) y'' + q(w) y' + r(w) y = 0`` in a local variable ``w``, y(0) = 1."""

    name: str
    p: Polynomial
    q: Polynomial
    r: Polynomial
    variable: str

    def ode(self, interval) -> OdeSpec:
        """Map to l in [-1, 1] via w = mid + h l and multiply through by h^2."""
        xl, xr = interval
        if not xl < 0.0 < xr:
            raise ValueError("the local origin must lie inside the interval")
        mid, h = 0.5 * (xl + xr), 0.5 * (xr - xl)
        w = Polynomial([mid, h])
        polys = (self.p(w), h * self.q(w), h * h * self.r(w))
        a2, a1, a0 = (
            ChebSeries(pol.convert(kind=Chebyshev).coef.astype(complex)) for pol in polys
        )
        ell0 = -mid / h
        return OdeSpec(a2, a1, a0, (Constraint(ell0, 1.0),), interval=(xl, xr))


def local_forms(p: HypParams) -> dict[str, LocalForm]:
    """The five ODE forms with polynomial coefficients in their local variable."""
    a, b, c = p.a, p.b, p.c
    P = lambda *cs: Polynomial(np.array(cs, dtype=complex))  # noqa: E731
    quarter_cubic = P(0, -1, 0, 0.25)  # (s/4)(s-2)(s+2)
    mid = c - (a + b + 1) / 2

    def infinity_form(name, e, f):
        # exponent e taken at infinity, f the other one
        return LocalForm(
            name,
            quarter_cubic,
            P(f - e - 1, mid, (e + 1) / 2),
            P(e * mid, e * (e + 1) / 4),
            "s",
        )

    return {
        "y_I": LocalForm("y_I", P(0, 1, -1), P(c, -(1 + a + b)), P(-a * b), "x"),
        "u": LocalForm("u", P(0, 1, -1), P(a + b + 1 - c, -(1 + a + b)), P(-a * b), "t"),
        "u_tilde": LocalForm(
            "u_tilde", P(0, 1, -1), P(c - a - b + 1, -(2 * c - a - b + 1)), P(-(b - c) * (a - c)), "t"
        ),
        "v": infinity_form("v", a, b),
        "v_tilde": infinity_form("v_tilde", b, a),
    }


def kummer_forms(
    p: HypParams, intervals: dict | None = None, epsilon: float = DEFAULT_EPSILON
) -> dict[str, OdeSpec]:
    """Five ``OdeSpec`` objects, each mapped from its interval to [-1, 1]."""
    _enforce_genericity(p, epsilon)
    iv = dict(REAL_INTERVALS, **(intervals or {}))
    return {name: form.ode(iv[name]) for name, form in local_forms(p).items()}


def form_factors(p: HypParams) -> dict[str, tuple]:
    """Candidate prefactors ``(root, exponent)`` of each local form.

    A local solution y(w) may be written ``prod (1 - w/root)^k * g(w)`` where
    k is an exponent with negative real part at a finite singular point.  If
    y grows like that power its Chebyshev coefficients can exceed y(w) by many
    orders of magnitude, so evaluating the series loses relative accuracy,
    while the core g has a much smaller range.  For the domain I form this
    is Euler's transformation.
    """
    one_c = 1 - p.c
    ends = {"x": ((1.0, p.kappa),), "t": ((1.0, one_c),), "s": ((-2.0, p.kappa), (2.0, one_c))}
    kinds = {"y_I": "x", "u": "t", "u_tilde": "t", "v": "s", "v_tilde": "s"}
    return {
        name: tuple((r, k) for r, k in ends[kind] if k.real < 0) for name, kind in kinds.items()
    }


def prefactored_form(form: LocalForm, factors) -> LocalForm:
    """The ODE for g where y = prod (1 - w/root)^k g.

    With ``l1 = sum k/(w - root)`` the equation becomes
    ``p g'' + (2 p l1 + q) g' + (p (l1^2 - sum k/(w-root)^2) + q l1 + r) g = 0``.
    Each root is a zero of p and k one of its exponents, so both new
    coefficients are polynomials; this is checked.
    """
    if not factors:
        return form
    lin = [Polynomial([-r, 1.0]) for r, _ in factors]
    D1 = Polynomial([1.0 + 0j])
    for f in lin:
        D1 = D1 * f
    others = []
    for i in range(len(factors)):
        o = Polynomial([1.0 + 0j])
        for j, f in enumerate(lin):
            if j != i:
                o = o * f
        others.append(o)
    L1 = sum((k * o for (_, k), o in zip(factors, others)), Polynomial([0j]))
    Lsq = sum((k * o * o for (_, k), o in zip(factors, others)), Polynomial([0j]))
    q_num = 2 * form.p * L1 + form.q * D1
    r_num = form.p * (L1 * L1 - Lsq) + form.q * L1 * D1 + form.r * D1 * D1
    q_new, q_rem = divmod(q_num, D1)
    r_new, r_rem = divmod(r_num, D1 * D1)
    scale = max(np.abs(q_num.coef).max(), np.abs(r_num.coef).max(), 1.0)
    for rem in (q_rem, r_rem):
        if np.abs(rem.coef).max() > 1e-10 * scale:
            raise ValueError(f"{form.name}: prefactor exponents do not match the equation")
    return LocalForm(form.name, form.p, q_new, r_new, form.variable)


def factor_subsets(factors) -> list[tuple]:
    """Every subset of ``factors``, the empty one first."""
    return [
        tuple(f for i, f in enumerate(factors) if mask >> i & 1)
        for mask in range(2 ** len(factors))
    ]


def evaluation_condition(series: ChebSeries, samples: int = 65) -> float:
    """``sum |c_j| / min |g|`` over Chebyshev points: the relative error
    amplification of evaluating ``g`` from its coefficients."""
    lo, hi = series.interval
    x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(np.pi * np.arange(samples) / (samples - 1))
    smallest = np.abs(series(x)).min()
    return float(np.abs(series.coeffs).sum() / smallest) if smallest > 0 else math.inf


def prefactor(w, factors, lower: bool = False):
    """``prod (1 - w/root)^k`` with principal powers (1 for no factors)."""
    w = np.asarray(w, dtype=complex)
    out = np.ones_like(w)
    for r, k in factors:
        out = out * principal_power(1.0 - w / r, k, lower=lower)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class PrefactoredSeries:
    """``prod (1 - w/root)^k * core(w)`` with ``core`` a Chebyshev series."""

    core: ChebSeries
    factors: tuple

    @property
    def coeffs(self) -> np.ndarray:
        return self.core.coeffs

    @property
    def interval(self) -> tuple[float, float]:
        return self.core.interval

    def __len__(self) -> int:
        return len(self.core)

    def __call__(self, w):
        return prefactor(w, self.factors) * self.core(w)

    def _logs(self, w: complex) -> tuple[complex, complex]:
        l1 = sum(k / (w - r) for r, k in self.factors)
        l2 = sum(k / (w - r) ** 2 for r, k in self.factors)
        return l1, l2

    def derivative_at(self, w) -> complex:
        w = complex(w)
        l1, _ = self._logs(w)
        g0, g1 = complex(self.core(w)), self.core.derivative_at(w)
        return prefactor(w, self.factors) * (g1 + l1 * g0)

    def second_derivative_at(self, w) -> complex:
        w = complex(w)
        l1, l2 = self._logs(w)
        g = self.core
        g0, g1, g2 = complex(g(w)), complex(g.deriv()(w)), complex(g.deriv().deriv()(w))
        return prefactor(w, self.factors) * (g2 + 2 * l1 * g1 + (l1 * l1 - l2) * g0)


def _derivs(f, w: float) -> tuple[complex, complex, complex]:
    """Value, first and second derivative of a local solution."""
    if isinstance(f, PrefactoredSeries):
        return complex(f(w)), f.derivative_at(w), f.second_derivative_at(w)
    return complex(f(w)), complex(f.deriv()(w)), complex(f.deriv().deriv()(w))


@dataclass(frozen=True, eq=False)
class LocalSolutionSet:
    y_I: ChebSeries | PrefactoredSeries
    u: ChebSeries | PrefactoredSeries
    u_tilde: ChebSeries | PrefactoredSeries
    v: ChebSeries | PrefactoredSeries
    v_tilde: ChebSeries | PrefactoredSeries
    params: HypParams
    reports: dict = field(default_factory=dict)

    @property
    def exponents(self) -> dict:
        p = self.params
        return {"y_I": 0, "u": 0, "u_tilde": p.kappa, "v": p.a, "v_tilde": p.b}

    def __getitem__(self, name: str) -> ChebSeries:
        return getattr(self, name)

    def factors(self, name: str) -> tuple:
        sol = getattr(self, name)
        return sol.factors if isinstance(sol, PrefactoredSeries) else ()

    def n_used(self) -> dict[str, int]:
        return {k: r.n_used for k, r in self.reports.items()}


def solve_locals(
    p: HypParams,
    tol: float = 1e-15,
    n_max: int = 512,
    intervals: dict | None = None,
    epsilon: float = DEFAULT_EPSILON,
) -> LocalSolutionSet:
    """Adaptive ultraspherical solves of the five forms.

    Each form is solved with every subset of its candidate prefactors (see
    ``form_factors``) and the variant with the smallest evaluation condition
    is kept.  A prefactor with a large imaginary exponent can make the core
    oscillate, so it does not always help.
    """
    p = p.normalized()
    _enforce_genericity(p, epsilon)
    iv = dict(REAL_INTERVALS, **(intervals or {}))
    forms, candidates = local_forms(p), form_factors(p)
    sols, reports = {}, {}
    for name, form in forms.items():
        best, failure = None, None
        for fac in factor_subsets(candidates[name]):
            spec = prefactored_form(form, fac).ode(iv[name])
            try:
                sol, rep = solve_adaptive(spec, tol=tol, n_max=n_max)
            except SolverError as exc:
                failure = failure or exc
                continue
            cond = evaluation_condition(sol)
            if best is None or cond < best[0]:
                best = (cond, fac, sol, rep)
        if best is None:
            raise failure
        _, fac, sol, reports[name] = best
        sols[name] = PrefactoredSeries(sol, fac) if fac else sol
        logger.debug("%s: n_used=%d factors=%s", name, reports[name].n_used, fac)
    return LocalSolutionSet(params=p, reports=reports, **sols)


def principal_power(w, k: complex, lower: bool = False):
    """``w**k`` with the principal log; ``lower`` puts negative reals at arg -pi."""
    w = np.asarray(w, dtype=complex)
    arg = np.angle(w)
    neg_real = (w.imag == 0) & (w.real < 0)
    arg = np.where(neg_real, -np.pi if lower else np.pi, arg)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(k * (np.log(np.abs(w)) + 1j * arg))
    out = np.where(w == 0, 0.0 if k.real > 0 else (1.0 if k == 0 else np.inf), out)
    return out if out.ndim else complex(out)


def _solve_2x2(M: np.ndarray, rhs: np.ndarray, what: str) -> tuple[complex, complex]:
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > MATCH_COND_MAX:
        raise MatchingError(
            f"{what} matching system is singular (cond ~ {cond:.3g}); "
            "the two local solutions are not numerically independent",
            cond,
        )
    x = np.linalg.solve(M, rhs)
    return complex(x[0]), complex(x[1])


def _value_and_slope(s: ChebSeries, w: float) -> tuple[complex, complex]:
    return complex(s(w)), s.derivative_at(w)


def match_II(locals_: LocalSolutionSet, y_value=None, y_slope=None) -> tuple[complex, complex]:
    """(alpha, beta) from C^1 continuity at x = 1/2 (t = 1/2, dt/dx = -1).

    ``y_value``/``y_slope`` override F(1/2) and F'(1/2), which otherwise come
    from ``locals_.y_I``.
    """
    kappa = locals_.params.kappa
    if y_value is None or y_slope is None:
        y = locals_.y_I
        y_value = complex(y(0.5)) if y_value is None else y_value
        y_slope = y.derivative_at(0.5) if y_slope is None else y_slope
    u, du = _value_and_slope(locals_.u, 0.5)
    w, dw = _value_and_slope(locals_.u_tilde, 0.5)
    tk = 0.5**kappa
    g, dg = tk * w, tk * (kappa / 0.5 * w + dw)
    M = np.array([[u, g], [-du, -dg]])
    return _solve_2x2(M, np.array([y_value, y_slope]), "x = 1/2")


def match_III(locals_: LocalSolutionSet, y_value=None, y_slope=None) -> tuple[complex, complex]:
    """(gamma, delta) from C^1 continuity at x = -1/2 (s = 1, ds/dx = 1)."""
    a, b = locals_.params.a, locals_.params.b
    if y_value is None or y_slope is None:
        y = locals_.y_I
        y_value = complex(y(-0.5)) if y_value is None else y_value
        y_slope = y.derivative_at(-0.5) if y_slope is None else y_slope
    v, dv = _value_and_slope(locals_.v, 1.0)
    w, dw = _value_and_slope(locals_.v_tilde, 1.0)
    M = np.array([[v, w], [a * v + dv, b * w + dw]])
    return _solve_2x2(M, np.array([y_value, y_slope]), "x = -1/2")


@dataclass(frozen=True)
class ConnectionConstants:
    alpha: complex
    beta: complex
    gamma: complex
    delta: complex

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.alpha, self.beta, self.gamma, self.delta)


@dataclass(frozen=True, eq=False)
class HypRepresentation:
    """Five local solutions plus connection constants: F on R u {inf}."""

    params: HypParams
    locals: LocalSolutionSet
    constants: ConnectionConstants
    guard: float = DEFAULT_GUARD
    genericity: GenericityReport | None = None

    @staticmethod
    def domain_of(x: float) -> str:
        if abs(x) <= 0.5:
            return "I"
        if 0.5 < x <= 1.5:
            return "II"
        return "III"

    def __call__(self, x):
        return eval_real(self, x)

    def evaluate(self, x: float, domain: str | None = None) -> complex:
        """F(x) in the given domain (default: the owning domain).

        Forcing a domain evaluates that domain's analytic expression, which is
        how continuity across domain boundaries is checked.
        """
        x = float(x)
        p, L, K = self.params, self.locals, self.constants
        if math.isinf(x):
            return self._at_infinity()
        domain = domain or self.domain_of(x)
        if domain == "I":
            return complex(L.y_I(x))
        if domain == "II":
            t = 1.0 - x
            if abs(t) < self.guard:
                if p.kappa.real <= 0:
                    raise SingularPointError(f"x = {x} is within {self.guard:g} of the singular point 1")
                if t == 0:
                    return K.alpha * complex(L.u(0.0))
            tk = principal_power(t, p.kappa)
            return K.alpha * complex(L.u(t)) + K.beta * tk * complex(L.u_tilde(t))
        if domain == "III":
            s = -1.0 / (x - 0.5)
            lower = s < 0
            sa = principal_power(s, p.a, lower=lower)
            sb = principal_power(s, p.b, lower=lower)
            return K.gamma * sa * complex(L.v(s)) + K.delta * sb * complex(L.v_tilde(s))
        raise ValueError(f"unknown domain {domain!r}")

    def derivative(self, x: float, domain: str | None = None) -> complex:
        """dF/dx from the given domain's expression."""
        x = float(x)
        p, L, K = self.params, self.locals, self.constants
        domain = domain or self.domain_of(x)
        if domain == "I":
            return L.y_I.derivative_at(x)
        if domain == "II":
            t = 1.0 - x
            tk = principal_power(t, p.kappa)
            dt = K.alpha * L.u.derivative_at(t) + K.beta * tk * (
                p.kappa / t * complex(L.u_tilde(t)) + L.u_tilde.derivative_at(t)
            )
            return -dt
        s = -1.0 / (x - 0.5)
        lower = s < 0
        sa = principal_power(s, p.a, lower=lower)
        sb = principal_power(s, p.b, lower=lower)
        ds = K.gamma * sa * (p.a / s * complex(L.v(s)) + L.v.derivative_at(s)) + K.delta * sb * (
            p.b / s * complex(L.v_tilde(s)) + L.v_tilde.derivative_at(s)
        )
        return s * s * ds

    def second_derivative(self, x: float, domain: str | None = None) -> complex:
        """d^2F/dx^2 from the given domain's expression (for residual checks)."""
        x = float(x)
        p, L, K = self.params, self.locals, self.constants
        domain = domain or self.domain_of(x)
        if domain == "I":
            return _derivs(L.y_I, x)[2]
        if domain == "II":
            t = 1.0 - x
            k = p.kappa
            u2 = _derivs(L.u, t)[2]
            w0, w1, w2 = _derivs(L.u_tilde, t)
            tk = principal_power(t, k)
            return K.alpha * u2 + K.beta * tk * (w2 + 2 * k / t * w1 + k * (k - 1) / t**2 * w0)
        s = -1.0 / (x - 0.5)
        lower = s < 0
        out1, out2 = 0j, 0j
        for const, e, f in ((K.gamma, p.a, L.v), (K.delta, p.b, L.v_tilde)):
            f0, f1, f2 = _derivs(f, s)
            se = principal_power(s, e, lower=lower)
            out1 += const * se * (e / s * f0 + f1)
            out2 += const * se * (e * (e - 1) / s**2 * f0 + 2 * e / s * f1 + f2)
        return s**4 * out2 + 2 * s**3 * out1

    def _at_infinity(self) -> complex:
        p = self.params
        if p.a.real > 0 and p.b.real > 0:
            return 0j
        raise SingularPointError("F is unbounded at x = infinity for these parameters")


def build_representation(
    a,
    b,
    c,
    tol: float = 1e-15,
    n_max: int = 512,
    epsilon: float = DEFAULT_EPSILON,
    guard: float = DEFAULT_GUARD,
) -> HypRepresentation:
    """Solve the five forms on the real-line intervals and match them."""
    p = HypParams(a, b, c).normalized()
    rep = _enforce_genericity(p, epsilon)
    locs = solve_locals(p, tol=tol, n_max=n_max, epsilon=epsilon)
    alpha, beta = match_II(locs)
    gamma, delta = match_III(locs)
    return HypRepresentation(p, locs, ConnectionConstants(alpha, beta, gamma, delta), guard, rep)


def eval_real(rep: HypRepresentation, x):
    """F(a, b, c, x) for real x (scalar or array); x = +-inf allowed."""
    if np.ndim(x) == 0:
        return rep.evaluate(x)
    return np.array([rep.evaluate(v) for v in np.ravel(x)]).reshape(np.shape(x))

