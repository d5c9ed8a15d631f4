import warnings

import numpy as np
import pytest

from conftest import random_generic_triples
from hyperspec.oracle import mpmath_reference, series_2f1
from hyperspec.real_line import (
    DegenerateParametersError,
    HypParams,
    NearDegenerateWarning,
    SingularPointError,
    build_representation,
    eval_real,
    genericness_check,
    kummer_forms,
    local_forms,
    match_II,
    match_III,
    principal_power,
    solve_locals,
)
from hyperspec.cheb_core import ChebSeries

TEST = HypParams(-1.0 / 3.0, 0.5, 0.5)
TRIPLES = random_generic_triples(20, seed=11)


@pytest.fixture(scope="module")
def test_rep():
    return build_representation(*TEST.__dict__.values())


@pytest.fixture(scope="module")
def random_reps():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearDegenerateWarning)
        return [build_representation(*t) for t in TRIPLES]


def test_form_coefficients():
    forms = local_forms(TEST)
    assert forms["u_tilde"].r.coef[0] == 0  # (b - c)(a - c) with b = c
    assert forms["u"].q.coef[0] == pytest.approx(2 / 3)
    assert forms["v"].r.coef[0] == pytest.approx(1 / 36)
    specs = kummer_forms(TEST)
    assert set(specs) == {"y_I", "u", "u_tilde", "v", "v_tilde"}
    assert specs["v"].interval == (-1.0, 1.0)
    assert all(len(s.constraints) == 1 for s in specs.values())


def test_local_solutions_test_example():
    locs = solve_locals(TEST)
    assert np.array_equal(locs.u_tilde.coeffs, [1.0])
    assert abs(locs.v(1.0) - 1.5 ** (1 / 3)) < 1e-14
    for name in ("y_I", "u", "u_tilde", "v", "v_tilde"):
        assert abs(locs[name](0.0) - 1) <= 1e-13
    n = locs.n_used()
    for name, published in zip(("y_I", "u", "u_tilde", "v", "v_tilde"), (28, 28, 1, 30, 27)):
        assert abs(n[name] - published) <= 8, (name, n[name])


def test_matching_constants_test_example(test_rep):
    want = (0, 1, 1, 0)
    got = test_rep.constants.as_tuple()
    assert max(abs(g - w) for g, w in zip(got, want)) <= 1e-13


def test_self_matching():
    locs = solve_locals(HypParams(0.1, 0.25, 0.7))
    # feed domain II's own first solution as "F": expect (1, 0)
    alpha, beta = match_II(locs, complex(locs.u(0.5)), -locs.u.derivative_at(0.5))
    assert abs(alpha - 1) < 1e-13 and abs(beta) < 1e-13
    a = locs.params.a
    v, dv = complex(locs.v(1.0)), locs.v.derivative_at(1.0)
    gamma, delta = match_III(locs, v, a * v + dv)
    assert abs(gamma - 1) < 1e-13 and abs(delta) < 1e-13


def test_table1_real_rows():
    rep = build_representation(-0.1, 0.2, 0.3)
    assert abs(rep(0.5) - 0.956) < 1e-3
    assert abs(rep(1.5) - (0.904 + 0.179j)) < 1e-3
    assert abs(rep(100.0) - (1.365 + 0.400j)) < 1e-3
    assert rep(0.0) == 1
    rep = build_representation(2.25, 3.75, -0.5)
    ref = complex(mpmath_reference(2.25, 3.75, -0.5, -1.0))
    assert abs(rep(-1.0) - ref) / abs(ref) <= 1e-10


def test_genericness_examples():
    r = genericness_check(TEST)
    assert r.status == "pass"
    assert [r.distances[k] for k in ("c", "c-a-b", "b-a")] == pytest.approx([0.5, 1 / 3, 1 / 6])
    r = genericness_check(HypParams(1, 1, 2))
    assert r.status == "fail"
    assert any("c-a-b" in v for v in r.violated) and any("b-a" in v for v in r.violated)
    r = genericness_check(HypParams(0.1, 0.2, -0.3))
    assert r.status == "pass"
    assert [r.distances[k] for k in ("c", "c-a-b", "b-a")] == pytest.approx([0.3, 0.4, 0.1])
    with pytest.raises(ValueError):
        genericness_check(TEST, 0.0)


def test_degenerate_rejected_and_near_degenerate_warns():
    with pytest.raises(DegenerateParametersError) as info:
        build_representation(1, 1, 2)
    assert "c-a-b" in str(info.value) and "b-a" in str(info.value)
    with pytest.raises(DegenerateParametersError, match="non-positive"):
        build_representation(0.3, 0.45, -2)
    with pytest.warns(NearDegenerateWarning):
        rep = build_representation(0.2, 0.45, 0.65 + 2 + 5e-7)  # c - a - b = 2 + 5e-7
    assert np.isfinite(rep(0.3))


def test_principal_power_branches():
    assert principal_power(-8.0, 1 / 3) == pytest.approx(2 * np.exp(1j * np.pi / 3))
    assert principal_power(-8.0, 1 / 3, lower=True) == pytest.approx(2 * np.exp(-1j * np.pi / 3))
    assert principal_power(0.0, 0.5) == 0


def test_test_example_identity(test_rep):
    x = np.linspace(-10, 10, 1000)
    x = x[np.abs(x - 1) >= 0.05]
    F = eval_real(test_rep, x)
    exact = np.array([complex(mpmath_reference(-1 / 3, 0.5, 0.5, v)) for v in x])
    assert np.max(np.abs(F - exact) / (1 + np.abs(F))) <= 1e-12


def test_singular_point_guard(test_rep):
    assert abs(test_rep(1.0)) < 1e-15  # exponent 1/3 > 0 makes F(1) finite (zero here)
    rep = build_representation(0.3, 0.45, 0.5)  # c - a - b < 0: unbounded at 1
    with pytest.raises(SingularPointError):
        rep(1.0 + 1e-8)
    with pytest.raises(SingularPointError):
        test_rep(np.inf)
    assert build_representation(0.3, 0.45, 0.5)(np.inf) == 0


def test_c1_matching_random(random_reps):
    for rep in random_reps:
        for x0, other in ((0.5, "II"), (-0.5, "III")):
            f1, f2 = rep.evaluate(x0, "I"), rep.evaluate(x0, other)
            d1, d2 = rep.derivative(x0, "I"), rep.derivative(x0, other)
            assert abs(f1 - f2) <= 1e-11 * (1 + abs(f1))
            assert abs(d1 - d2) <= 1e-11 * (1 + abs(d1))


def test_oracle_agreement_random(random_reps):
    x = np.linspace(-0.4, 0.4, 9)
    for rep in random_reps:
        p = rep.params
        for v in x:
            ref = complex(series_2f1(p.a, p.b, p.c, v))
            assert abs(rep(v) - ref) <= 1e-12 * abs(ref) + 1e-15


def test_ab_symmetry():
    for a, b, c in TRIPLES[:5]:
        r1, r2 = build_representation(a, b, c), build_representation(b, a, c)
        for x in (-3.0, -0.3, 0.2, 0.8, 1.3, 4.0):
            f1, f2 = r1(x), r2(x)
            assert abs(f1 - f2) <= 1e-11 * abs(f1)
            ref = complex(mpmath_reference(b, a, c, x))
            assert abs(f2 - ref) <= 1e-9 * abs(ref)


def _ode_residual(rep, x):
    p = rep.params
    F, F1, F2 = rep(x), rep.derivative(x), rep.second_derivative(x)
    terms = (x * (1 - x) * F2, (p.c - (1 + p.a + p.b) * x) * F1, -p.a * p.b * F)
    return abs(sum(terms)) / sum(abs(t) for t in terms)


def test_global_ode_residual(random_reps):
    for rep in random_reps:
        for x in (-4.0, -0.9, -0.2, 0.3, 0.8, 1.3, 2.5, 7.0):
            assert _ode_residual(rep, x) <= 1e-9


def test_second_derivative_closed_form(test_rep):
    for x in (-3.0, -0.2, 0.2, 0.9, 1.2, 4.0):
        # z = x - i0 puts 1 - z on the upper side: the principal arg(1 - x) = pi
        exact = -2.0 / 9.0 * principal_power(1.0 - x, -5.0 / 3.0)
        assert abs(test_rep.second_derivative(x) - exact) <= 1e-11 * abs(exact)


def test_prefactored_random_second_derivative(random_reps):
    # the prefactored cores must give the same F'' from both sides of x = -1/2
    for rep in random_reps:
        for x0, other in ((0.5, "II"), (-0.5, "III")):
            f1, f2 = rep.second_derivative(x0, "I"), rep.second_derivative(x0, other)
            assert abs(f1 - f2) <= 1e-9 * (1 + abs(f1))


def test_exact_domain_boundaries(test_rep):
    assert test_rep.domain_of(0.5) == "I"
    assert test_rep.domain_of(-0.5) == "I"
    assert test_rep.domain_of(1.5) == "II"
    assert test_rep.domain_of(1.5000001) == "III"


def test_chebseries_type_is_used():
    locs = solve_locals(TEST)
    assert isinstance(locs.y_I, ChebSeries)
