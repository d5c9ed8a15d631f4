import math

import mpmath
import pytest

from hyperspec.oracle import (
    OracleError,
    TABLE_COLUMNS,
    closed_form_test,
    mpmath_reference,
    read_table,
    series_2f1,
    table_reference,
)


def test_series_at_origin():
    assert series_2f1(0.3, -1.2, 2.5, 0) == 1


def test_series_test_example():
    val = series_2f1(-1.0 / 3.0, 0.5, 0.5, 0.5)
    assert abs(complex(val) - 0.5 ** (1 / 3)) <= 1e-16
    assert abs(complex(val) - 0.79370052598) <= 1e-11


def test_series_log_closed_form():
    with mpmath.workdps(40):
        val = series_2f1(1, 1, 2, 0.5)
        assert abs(val - 2 * mpmath.log(2)) <= mpmath.mpf(10) ** -38
    assert abs(complex(val) - 1.38629436) <= 1e-8


def test_series_errors():
    with pytest.raises(OracleError):
        series_2f1(1, 1, -2, 0.2)
    with pytest.raises(OracleError):
        series_2f1(1, 1, 0, 0.2)
    with pytest.raises(OracleError):
        series_2f1(0.1, 0.2, 0.3, 0.9)
    with pytest.raises(OracleError):
        series_2f1(0.1, 0.2, 0.3, 0.2, digits=20)


def test_direct_and_pfaff_agree():
    # both regions hold for |z| <= 0.7 with Re z < 1/2
    digits = 40
    for a, b, c, z in [(0.3, -1.2, 2.5, -0.6), (2 + 1j, 0.5, 1.5 - 2j, -0.3 + 0.5j), (-0.1, 0.2, 0.3, 0.45j)]:
        with mpmath.workdps(digits + 10):
            zz = mpmath.mpc(z)
            direct = series_2f1(a, b, c, z, digits)
            w = zz / (zz - 1)
            cb = mpmath.mpc(c) - mpmath.mpc(b)
            pfaff = (1 - zz) ** (-mpmath.mpc(a)) * series_2f1(a, cb, c, w, digits)
            assert abs(direct - pfaff) <= mpmath.mpf(10) ** (-digits + 2) * abs(direct)


def test_series_matches_closed_form():
    for z in (0.6, -0.5, 0.3 + 0.5j, -0.7j, -3.0, -2 + 4j):
        with mpmath.workdps(50):
            exact = (1 - mpmath.mpc(z)) ** (mpmath.mpf(1) / 3)
            val = series_2f1(-mpmath.mpf(1) / 3, mpmath.mpf(1) / 2, mpmath.mpf(1) / 2, z)
            assert abs(val - exact) <= mpmath.mpf(10) ** -38 * abs(exact)


def test_precision_monotonicity():
    z = 0.65
    with mpmath.workdps(80):
        third = mpmath.mpf(1) / 3
        a = -third
        exact = (1 - mpmath.mpf(z)) ** third
    errors = []
    for digits in (30, 40, 50, 60):
        val = series_2f1(a, mpmath.mpf(1) / 2, mpmath.mpf(1) / 2, z, digits)
        with mpmath.workdps(80):
            errors.append(abs(val - exact))
    assert all(e2 <= e1 for e1, e2 in zip(errors, errors[1:]))
    assert errors[-1] < mpmath.mpf(10) ** -58


def test_closed_form_examples():
    assert closed_form_test(0) == 1
    assert abs(closed_form_test(0.6) - 0.7368063) <= 1e-7
    assert abs(closed_form_test(-0.5) - 1.1447142) <= 1e-7
    # principal branch on the cut
    assert closed_form_test(2.0).imag > 0


def test_mpmath_reference_agrees_with_series():
    for args in [(0.3, -1.2, 2.5, 0.4 - 0.2j), (2 + 8j, 3 - 5j, 1.4 - 3.1j, 0.25)]:
        assert abs(mpmath_reference(*args) - series_2f1(*args)) <= 1e-30 * abs(series_2f1(*args))


def test_table_reference_rows():
    rows = table_reference()
    assert len(rows) == 19
    assert len(table_reference("1")) == 9 and len(table_reference("2")) == 10
    first = rows[0]
    assert first.params == (-0.1, 0.2, 0.3) and first.z == 0.5
    assert first.printed == ("0.956", "") and first.dF == 1.2e-16 and first.n == 30
    big = [r for r in rows if r.z == 0.75 and r.a == 2 + 8j][0]
    assert big.value == 6882.463 - 6596.555j and big.dF == 8.3e-15 and big.n == 50
    assert big.c == complex(math.sqrt(2), -math.pi)
    t2 = [r for r in table_reference("2") if r.z == 1 + 5j][0]
    assert t2.value == -0.0183 + 0.0436j and t2.dF == 9.1e-14
    assert first.printed_tolerance() == (1e-3, 0.0)


def test_table_reference_bad_key():
    with pytest.raises(ValueError):
        table_reference("3")


def test_read_table(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert read_table(empty) == []
    header_only = tmp_path / "header.csv"
    header_only.write_text(",".join(TABLE_COLUMNS) + "\n")
    assert read_table(header_only) == []
    bad = tmp_path / "bad.csv"
    bad.write_text("a_re,a_im\n1,0\n")
    with pytest.raises(OracleError):
        read_table(bad)
