"""Command-line interface: ``hyperspec {eval,table,grid,bench}``.

Exit codes: 0 success, 1 table rows failing their tolerance, 2 non-generic
parameters, 3 solver failure, 64 usage error, 66 unreadable input file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import __version__
from .complex_plane import DEFAULT_A, domain_geometry
from .function import HypergeometricFunction
from .oracle import OracleError, closed_form_test, mpmath_reference, read_table
from .real_line import (
    DegenerateParametersError,
    MatchingError,
    NearDegenerateWarning,
    SingularPointError,
)
from .studies import TEST_PARAMS, conditioning_study, convergence_study
from .us_solver import SolverError

EXIT_OK, EXIT_FAILED_ROWS, EXIT_DEGENERATE, EXIT_SOLVER = 0, 1, 2, 3
EXIT_USAGE, EXIT_NOINPUT = 64, 66
MAX_RESOLUTION = 2000


class UsageError(Exception):
    pass


def _real(text: str) -> float:
    return float(Fraction(text)) if "/" in text else float(text)


def parse_complex(text: str) -> complex:
    """Parse literals such as ``0.5``, ``-1/3``, ``2i``, ``1-2.5e-3i`` or ``inf``.

    Raises ``UsageError`` on anything else.
    """
    s = text.strip().replace(" ", "")
    if s.startswith("(") and s.endswith(")"):
        s = s[1:-1]
    if s.lower() in ("inf", "+inf", "infinity", "oo"):
        return complex(math.inf, 0.0)
    if not s:
        raise UsageError(f"malformed complex literal {text!r}")
    if s[-1] in "ij":
        body = s[:-1]
        # split at the last sign that is not part of an exponent
        cut = max((i for i, ch in enumerate(body) if ch in "+-" and i > 0 and body[i - 1] not in "eE"),
                  default=0)
        re_part, im_part = body[:cut], body[cut:]
        if im_part in ("", "+", "-"):
            im_part += "1"
        parts = (re_part or "0", im_part)
    else:
        parts = (s, "0")
    try:
        vals = [_real(p) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"malformed complex literal {text!r}") from exc
    if not all(math.isfinite(v) for v in vals):
        raise UsageError(f"malformed complex literal {text!r}")
    return complex(*vals)


@dataclass(frozen=True)
class RunConfig:
    a: complex
    b: complex
    c: complex
    A: float = DEFAULT_A
    tol: float = 1e-15
    n_max: int = 512
    epsilon_generic: float = 1e-6
    fmt: str = "csv"

    def build(self) -> HypergeometricFunction:
        return HypergeometricFunction(
            self.a, self.b, self.c, A=self.A, tol=self.tol,
            n_max=self.n_max, epsilon=self.epsilon_generic,
        )

    def is_test_example(self) -> bool:
        return (self.a, self.b, self.c) == tuple(complex(v) for v in TEST_PARAMS)

    def header(self, command: str) -> list[str]:
        return [
            f"hyperspec {__version__} {command}",
            f"a={_fmt_c(self.a)} b={_fmt_c(self.b)} c={_fmt_c(self.c)}",
            f"A={self.A!r} tol={self.tol!r} n_max={self.n_max} epsilon={self.epsilon_generic!r}",
        ]


def _fmt_c(z: complex) -> str:
    return f"{z.real!r}{z.imag:+}i"


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HYPERSPEC_THREADS", "1")))
    except ValueError:
        return 1


def _evaluate_all(fn: HypergeometricFunction, zs, singular_ok: bool = False):
    """Evaluate in input order; with ``singular_ok`` unbounded points give NaN.

    ``HYPERSPEC_THREADS`` > 1 splits the points into chunks evaluated
    concurrently; results are reassembled in input order.
    """
    if any(complex(z).imag != 0 for z in zs):
        fn.complex  # build once before fanning out
    workers = _threads()
    if workers == 1 or len(zs) < 2:
        return fn.evaluate_many(zs, singular_nan=singular_ok)
    size = -(-len(zs) // workers)
    chunks = [zs[i : i + size] for i in range(0, len(zs), size)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda ch: fn.evaluate_many(ch, singular_nan=singular_ok), chunks)
        return [e for part in parts for e in part]


def _rel(F: complex, ref: complex) -> float:
    return abs(F - ref) / abs(ref) if ref != 0 else abs(F - ref)


def _write(records, columns, header, fmt, out, config=None):
    if fmt == "json":
        doc = {}
        if config is not None:
            doc = {k: [getattr(config, k).real, getattr(config, k).imag] for k in ("a", "b", "c")}
        doc["meta"] = header
        doc["points"] = records
        out.write(json.dumps(doc, indent=1) + "\n")
        return
    for line in header:
        out.write(f"# {line}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow(rec)


def _point_records(evals, refs, fmt):
    rows = []
    for ev, ref in zip(evals, refs):
        dF = None if ref is None else _rel(ev.value, ref)
        if fmt == "json":
            item = {"z": [ev.z.real, ev.z.imag], "F": [ev.value.real, ev.value.imag],
                    "domain": ev.domain}
            if ev.branch:
                item["branch"] = ev.branch
            if dF is not None:
                item["dF"] = dF
            rows.append(item)
        else:
            rows.append([repr(ev.z.real), repr(ev.z.imag), repr(ev.value.real),
                         repr(ev.value.imag), ev.domain, ev.branch,
                         "" if dF is None else repr(dF)])
    return rows


POINT_COLUMNS = ["z_re", "z_im", "F_re", "F_im", "domain", "branch", "dF"]


def cmd_eval(config: RunConfig, zs, reference: bool, out) -> int:
    fn = config.build()
    evals = _evaluate_all(fn, zs)
    refs = [None] * len(zs)
    if config.is_test_example():
        refs = [closed_form_test(z) if not math.isinf(abs(z)) else None for z in zs]
    elif reference:
        refs = [complex(mpmath_reference(config.a, config.b, config.c, z)) for z in zs]
    _write(_point_records(evals, refs, config.fmt), POINT_COLUMNS,
           config.header("eval"), config.fmt, out, config)
    return EXIT_OK


def table_tolerance(row) -> float:
    """Allowed relative deviation from the multiprecision reference."""
    return max(1e3 * row.dF, 1e-12)


def cmd_table(base: RunConfig, path: str, out) -> int:
    try:
        rows = read_table(path)
    except (OSError, UnicodeDecodeError, OracleError, ValueError) as exc:
        print(f"error: cannot read table {path}: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    cache = {}
    records, passed = [], 0
    for row in rows:
        if row.params not in cache:
            cfg = RunConfig(*row.params, A=base.A, tol=base.tol, n_max=base.n_max,
                            epsilon_generic=base.epsilon_generic)
            cache[row.params] = cfg.build()
        F = cache[row.params].evaluate(row.z).value
        ref = complex(mpmath_reference(*row.params, row.z))
        dF = _rel(F, ref)
        units = row.printed_tolerance()
        printed_ok = all(
            abs(got - want) <= unit
            for got, want, unit in ((F.real, row.value.real, units[0]), (F.imag, row.value.imag, units[1]))
            if unit > 0
        )
        ok = printed_ok and dF <= table_tolerance(row)
        passed += ok
        records.append([_fmt_c(row.a), _fmt_c(row.b), _fmt_c(row.c), _fmt_c(row.z),
                        repr(F.real), repr(F.imag), repr(dF), repr(row.dF),
                        "pass" if ok else "FAIL"])
    header = [f"hyperspec {__version__} table {os.path.basename(path)}",
              f"A={base.A!r} tol={base.tol!r} n_max={base.n_max}",
              f"{passed}/{len(rows)} rows pass" if rows else "0 rows"]
    if base.fmt == "json":
        keys = ["a", "b", "c", "z", "F_re", "F_im", "dF", "dF_reported", "status"]
        _write([dict(zip(keys, r)) for r in records], None, header, "json", out)
    else:
        _write(records, ["a", "b", "c", "z", "F_re", "F_im", "dF", "dF_reported", "status"],
               header, "csv", out)
    print(header[-1], file=sys.stderr)
    return EXIT_OK if passed == len(rows) else EXIT_FAILED_ROWS


def grid_points(region: str, resolution: int, bounds, A: float) -> np.ndarray:
    """Grid points in input order (row-major for two-dimensional regions)."""
    xmin, xmax, ymin, ymax = bounds
    if region == "real-line":
        return np.linspace(xmin, xmax, resolution).astype(complex)
    if region == "complex-rect":
        x, y = np.linspace(xmin, xmax, resolution), np.linspace(ymin, ymax, resolution)
        return (x[None, :] + 1j * y[:, None]).ravel()
    if region == "sphere":
        theta = np.linspace(0.0, np.pi, resolution)
        lam = -np.pi + 2 * np.pi * np.arange(resolution) / resolution
        pts = []
        for th in theta:
            if th == np.pi:
                pts.extend([complex(math.inf, 0.0)] * resolution)
            else:
                pts.extend(np.tan(th / 2) * np.exp(1j * lam))
        return np.array(pts)
    if region == "domain-I":
        g = domain_geometry(A)
        r = np.linspace(0.0, 1.0, resolution)
        phi = -np.pi + 2 * np.pi * np.arange(resolution) / resolution
        w = g.A * np.cos(phi) + 1j * g.B * np.sin(phi)
        pts = np.outer(r, w).ravel()
        # keep phi = 0 and phi = -pi exactly on the real axis
        return np.where(np.abs(pts.imag) < 1e-300, pts.real + 0j, pts)
    raise UsageError(f"unknown region {region!r}")


def cmd_grid(config: RunConfig, region: str, resolution: int, bounds, out) -> int:
    if not 1 <= resolution <= MAX_RESOLUTION:
        raise UsageError(f"resolution must be between 1 and {MAX_RESOLUTION}")
    zs = list(grid_points(region, resolution, bounds, config.A))
    fn = config.build()
    evals = _evaluate_all(fn, zs, singular_ok=True)
    refs = [None] * len(zs)
    header = config.header(f"grid {region} {resolution}")
    if config.is_test_example():
        refs = [closed_form_test(z) if not math.isinf(abs(z)) else None for z in zs]
        errs = [
            _rel(ev.value, ref) for ev, ref in zip(evals, refs)
            if ref is not None and abs(ev.z - 1) >= 0.05
        ]
        if errs:
            header.append(f"max relative error vs (1-z)^(1/3) (|z-1| >= 0.05): {max(errs)!r}")
    _write(_point_records(evals, refs, config.fmt), POINT_COLUMNS, header, config.fmt, out, config)
    return EXIT_OK


def cmd_bench(study: str, ns, out, fmt: str) -> int:
    if study == "conditioning":
        res = conditioning_study(ns=ns) if ns else conditioning_study()
        header = [f"hyperspec {__version__} bench conditioning (2-norm condition numbers)",
                  f"fitted exponent US: {res.fits['us']:.3f} (n^p)",
                  f"fitted exponent collocation: {res.fits['collocation']:.3f} (n^p)",
                  f"fitted rate Fourier coefficient system: {res.fits['fourier']:.3f} (exp(q N))"]
    elif study == "convergence":
        res = convergence_study(ns=ns) if ns else convergence_study()
        header = [f"hyperspec {__version__} bench convergence (max error on [-1/2, 1/2])",
                  f"US error below 1e-13 from n = {res.fits['us_first_n_below_1e-13']}"]
    else:
        raise UsageError(f"unknown study {study!r}")
    records = [[method, int(n), repr(float(v))]
               for method, (nn, vals) in res.data.items() for n, v in zip(nn, vals)]
    if fmt == "json":
        _write([dict(zip(["method", "n", "value"], r)) for r in records], None, header, "json", out)
    else:
        _write(records, ["method", "n", "value"], header, "csv", out)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common(p: argparse.ArgumentParser, params: bool = True) -> None:
    if params:
        for name in ("a", "b", "c"):
            p.add_argument(f"--{name}", required=True, help=f"parameter {name} (e.g. -1/3, 2+8i)")
    p.add_argument("--A", type=float, default=DEFAULT_A, help="ellipse semi-axis, 1/2 < A < 1")
    p.add_argument("--tol", type=float, default=1e-15)
    p.add_argument("--n-max", type=int, default=512)
    p.add_argument("--epsilon", type=float, default=1e-6, help="near-degeneracy warning threshold")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperspec", description="Gauss hypergeometric function by spectral methods")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("eval", help="evaluate F at one or more points")
    _common(p)
    p.add_argument("--z", action="append", required=True, help="evaluation point; repeatable")
    p.add_argument("--reference", action="store_true", help="also report dF against mpmath")
    p = sub.add_parser("table", help="reproduce a benchmark table file")
    _common(p, params=False)
    p.add_argument("file")
    p = sub.add_parser("grid", help="evaluate on a grid")
    _common(p)
    p.add_argument("--region", choices=("real-line", "complex-rect", "sphere", "domain-I"),
                   default="real-line")
    p.add_argument("--resolution", type=int, default=100)
    p.add_argument("--xmin", type=float, default=-10.0)
    p.add_argument("--xmax", type=float, default=10.0)
    p.add_argument("--ymin", type=float, default=-10.0)
    p.add_argument("--ymax", type=float, default=10.0)
    p = sub.add_parser("bench", help="convergence or conditioning study on the test problem")
    p.add_argument("--study", choices=("convergence", "conditioning"), required=True)
    p.add_argument("--n", type=int, action="append", help="system size; repeatable")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    return parser


def _config(args) -> RunConfig:
    vals = [parse_complex(getattr(args, k)) for k in ("a", "b", "c")]
    if any(math.isinf(abs(v)) for v in vals):
        raise UsageError("parameters must be finite")
    if not 0.5 < args.A < 1.0:
        raise UsageError("A must lie strictly between 1/2 and 1")
    return RunConfig(*vals, A=args.A, tol=args.tol, n_max=args.n_max,
                     epsilon_generic=args.epsilon, fmt=args.format)


_SHOWN: set[str] = set()


def _show_warning(message, category, filename, lineno, file=None, line=None):
    text = str(message)
    if text not in _SHOWN:
        _SHOWN.add(text)
        print(f"warning: {text}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    warnings.showwarning = _show_warning
    warnings.simplefilter("always", NearDegenerateWarning)
    buffer = io.StringIO()
    try:
        if args.command == "eval":
            code = cmd_eval(_config(args), [parse_complex(z) for z in args.z], args.reference, buffer)
        elif args.command == "grid":
            code = cmd_grid(_config(args), args.region, args.resolution,
                            (args.xmin, args.xmax, args.ymin, args.ymax), buffer)
        elif args.command == "table":
            if not 0.5 < args.A < 1.0:
                raise UsageError("A must lie strictly between 1/2 and 1")
            code = cmd_table(RunConfig(0, 0, 0, A=args.A, tol=args.tol, n_max=args.n_max,
                                       epsilon_generic=args.epsilon, fmt=args.format),
                             args.file, buffer)
        else:
            code = cmd_bench(args.study, args.n, buffer, args.format)
    except UsageError as exc:
        print(f"hyperspec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateParametersError as exc:
        print(f"hyperspec: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (SolverError, MatchingError, SingularPointError) as exc:
        print(f"hyperspec: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    text = buffer.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # downstream closed early (e.g. piped into head)
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    return code


if __name__ == "__main__":
    sys.exit(main())
