"""Convergence and conditioning studies on the test problem F(-1/3, 1/2, 1/2, x).

The local solution on [-1/2, 1/2] is ``(1 - x)^(1/3)``, which makes it a
convenient benchmark: the interval contains the regular singular point x = 0
and the solution is known in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complex_plane import Curve, domain_geometry, phi_ode
from .fourier_core import periodic_system
from .real_line import HypParams, kummer_forms, local_forms
from .us_solver import assemble, collocation_matrix, solve, solve_collocation

__all__ = [
    "TEST_PARAMS",
    "StudyResult",
    "fit_power",
    "fit_exponential",
    "conditioning_study",
    "convergence_study",
]

TEST_PARAMS = (-1.0 / 3.0, 0.5, 0.5)
DEFAULT_NS = (16, 24, 32, 48, 64, 96, 128, 192, 256, 384, 512)
FOURIER_COND_LIMIT = 1e15


@dataclass(frozen=True)
class StudyResult:
    """Raw data per method and the fitted growth parameter of each."""

    data: dict
    fits: dict


def fit_power(n, y) -> float:
    """Least-squares exponent p in ``y ~ C n^p``."""
    return float(np.polyfit(np.log(n), np.log(y), 1)[0])


def fit_exponential(n, y) -> float:
    """Least-squares rate q in ``y ~ C exp(q n)``."""
    return float(np.polyfit(np.asarray(n, dtype=float), np.log(y), 1)[0])


def _test_spec():
    return kummer_forms(HypParams(*TEST_PARAMS))["y_I"]


def conditioning_study(ns=DEFAULT_NS, fourier_ns=range(4, 40, 2), A: float = 0.6) -> StudyResult:
    """2-norm condition numbers of the US, collocation and Fourier coefficient systems.

    The US and collocation matrices discretise the test problem on [-1/2, 1/2].
    The Fourier system is the periodic boundary problem on the domain-I
    ellipse, indexed by N = 2n + 1; sizes whose condition number exceeds
    ``FOURIER_COND_LIMIT`` are excluded from the fit because the estimate
    itself saturates there.
    """
    spec = _test_spec()
    ns = np.asarray(ns)
    us = np.array([np.linalg.cond(assemble(spec, int(n))[0].toarray()) for n in ns])
    ps = np.array([np.linalg.cond(collocation_matrix(spec, int(n))[0]) for n in ns])
    g = domain_geometry(A)
    ode = phi_ode(local_forms(HypParams(*TEST_PARAMS))["y_I"], Curve(g.A, g.B))
    value = (1.0 + g.A) ** (1.0 / 3.0)
    N, fc = [], []
    for n in fourier_ns:
        mat, _ = periodic_system(ode.a2, ode.a1, ode.a0, value, int(n))
        N.append(2 * int(n) + 1)
        fc.append(np.linalg.cond(mat))
    N, fc = np.array(N), np.array(fc)
    ok = fc < FOURIER_COND_LIMIT
    data = {"us": (ns, us), "collocation": (ns, ps), "fourier": (N, fc)}
    fits = {
        "us": fit_power(ns, us),
        "collocation": fit_power(ns, ps),
        "fourier": fit_exponential(N[ok], fc[ok]),
    }
    return StudyResult(data, fits)


def convergence_study(ns=range(8, 65, 4)) -> StudyResult:
    """Max relative error on [-1/2, 1/2] against ``(1 - x)^(1/3)`` versus n."""
    spec = _test_spec()
    x = np.linspace(-0.5, 0.5, 201)
    exact = (1.0 - x) ** (1.0 / 3.0)
    ns = np.asarray(list(ns))
    us, ps = [], []
    for n in ns:
        y, _ = solve(spec, int(n))
        us.append(np.abs(y(x) - exact).max())
        ps.append(np.abs(solve_collocation(spec, int(n))(x) - exact).max())
    us, ps = np.array(us), np.array(ps)
    fits = {
        "us_first_n_below_1e-13": int(ns[np.argmax(us < 1e-13)]) if np.any(us < 1e-13) else None,
    }
    return StudyResult({"us": (ns, us), "collocation": (ns, ps)}, fits)
