"""Multiprecision reference values for F(a, b, c, z).

The Maclaurin series is summed in mpmath arithmetic, directly for |z| <= 0.7
and after the Pfaff transformation

    F(a, b, c, z) = (1 - z)^(-a) F(a, c - b, c, z / (z - 1))

for Re z < 1/2.  Outside those regions ``mpmath_reference`` wraps
``mpmath.hyp2f1`` as an external cross-check.  The tabulated benchmark values
ship with the package as CSV files.
"""

from __future__ import annotations

import csv
from decimal import Decimal
import io
from dataclasses import dataclass
from importlib import resources

import mpmath

__all__ = [
    "DEFAULT_DIGITS",
    "OracleError",
    "TableRow",
    "series_2f1",
    "closed_form_test",
    "mpmath_reference",
    "table_reference",
    "read_table",
    "TABLE_COLUMNS",
]

DEFAULT_DIGITS = 40
MIN_DIGITS = 30
DIRECT_RADIUS = 0.7
MAX_TERMS = 200_000
TABLE_COLUMNS = (
    "a_re", "a_im", "b_re", "b_im", "c_re", "c_im",
    "z_re", "z_im", "F_re", "F_im", "dF", "n", "source_table",
)


class OracleError(ValueError):
    pass


def _as_mpc(w) -> mpmath.mpc:
    return mpmath.mpc(complex(w)) if not isinstance(w, (mpmath.mpc, mpmath.mpf)) else mpmath.mpc(w)


def _check_c(c: mpmath.mpc) -> None:
    if c.imag == 0 and c.real <= 0 and c.real == mpmath.floor(c.real):
        raise OracleError(f"c = {c.real} is a non-positive integer; F is undefined")


def _maclaurin(a, b, c, z, digits: int) -> mpmath.mpc:
    term = mpmath.mpc(1)
    total = mpmath.mpc(1)
    stop = mpmath.mpf(10) ** (-digits - 5)
    for j in range(MAX_TERMS):
        term *= (a + j) * (b + j) / ((c + j) * (j + 1)) * z
        total += term
        if term == 0:
            return total
        if abs(term) < stop * abs(total) and j > 2:
            return total
    raise OracleError(f"series did not converge in {MAX_TERMS} terms at |z| = {float(abs(z)):.3g}")


def series_2f1(a, b, c, z, digits: int = DEFAULT_DIGITS) -> mpmath.mpc:
    """F(a, b, c, z) by series summation at ``digits + 10`` working digits.

    Parameters may be Python numbers or mpmath values.  Raises
    ``OracleError`` outside |z| <= 0.7 or Re z < 1/2.
    """
    if digits < MIN_DIGITS:
        raise OracleError(f"at least {MIN_DIGITS} digits are required")
    with mpmath.workdps(digits + 10):
        a, b, c, z = (_as_mpc(w) for w in (a, b, c, z))
        _check_c(c)
        if abs(z) <= DIRECT_RADIUS:
            val = _maclaurin(a, b, c, z, digits)
        elif z.real < 0.5:
            w = z / (z - 1)
            val = (1 - z) ** (-a) * _maclaurin(a, c - b, c, w, digits)
        else:
            raise OracleError(f"z = {complex(z)} is outside the series region")
    with mpmath.workdps(digits):
        return +val


def closed_form_test(z) -> complex:
    """Principal ``(1 - z)^(1/3)``, equal to F(-1/3, 1/2, 1/2, z)."""
    return complex(1 - complex(z)) ** (1.0 / 3.0)


def mpmath_reference(a, b, c, z, digits: int = DEFAULT_DIGITS) -> mpmath.mpc:
    """External multiprecision value from ``mpmath.hyp2f1``.

    On the cut z > 1 this is the limit from below, F(z - i0).
    """
    with mpmath.workdps(digits):
        return +mpmath.hyp2f1(*(_as_mpc(w) for w in (a, b, c, z)))


@dataclass(frozen=True)
class TableRow:
    a: complex
    b: complex
    c: complex
    z: complex
    value: complex
    printed: tuple[str, str]
    dF: float
    n: int | None
    source_table: str

    @property
    def params(self) -> tuple[complex, complex, complex]:
        return (self.a, self.b, self.c)

    def printed_tolerance(self) -> tuple[float, float]:
        """One unit in the last printed digit of each component (0 if not printed)."""
        return tuple(_last_digit_unit(s) for s in self.printed)


def _last_digit_unit(text: str) -> float:
    if not text:
        return 0.0
    return float(Decimal(1).scaleb(Decimal(text).as_tuple().exponent))


def _parse_rows(handle) -> list[TableRow]:
    reader = csv.DictReader(row for row in handle if not row.lstrip().startswith("#"))
    if reader.fieldnames is None:
        return []
    missing = set(TABLE_COLUMNS) - set(reader.fieldnames)
    if missing:
        raise OracleError(f"table is missing columns: {sorted(missing)}")
    rows = []
    for rec in reader:
        num = lambda k: float(rec[k]) if rec[k].strip() else 0.0  # noqa: E731
        rows.append(
            TableRow(
                a=complex(num("a_re"), num("a_im")),
                b=complex(num("b_re"), num("b_im")),
                c=complex(num("c_re"), num("c_im")),
                z=complex(num("z_re"), num("z_im")),
                value=complex(num("F_re"), num("F_im")),
                printed=(rec["F_re"].strip(), rec["F_im"].strip()),
                dF=num("dF"),
                n=int(rec["n"]) if rec["n"].strip() else None,
                source_table=rec["source_table"].strip(),
            )
        )
    return rows


def read_table(path) -> list[TableRow]:
    """Rows of a CSV file in the benchmark table format."""
    with open(path, newline="") as fh:
        return _parse_rows(fh)


def _packaged(name: str) -> list[TableRow]:
    text = resources.files("hyperspec").joinpath("data", name).read_text()
    return _parse_rows(io.StringIO(text))


def table_reference(which: str | None = None) -> list[TableRow]:
    """The shipped benchmark rows: ``"1"`` (real z), ``"2"`` (complex z) or both."""
    names = {"1": ["table1.csv"], "2": ["table2.csv"], None: ["table1.csv", "table2.csv"]}
    if which not in names:
        raise ValueError("which must be '1', '2' or None")
    return [row for name in names[which] for row in _packaged(name)]
