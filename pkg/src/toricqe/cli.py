"""Command-line front end.

Subcommands solve a family (``lpp``, ``page``, ``koiso-cao``, ``cp2b2``),
audit a stored solution document (``verify``) or tabulate its profile
(``profile``).  Exit codes: 0 success, 1 solver failure, 2 invalid input,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, cp2b2, families, verify
from .errors import PoleEvaluation, ToricQEError
from .families import Family, FamilySolution
from .numerics import DEFAULT_CONFIG, SolverConfig

SCHEMA_VERSION = "1"
CSV_HEADER = ("t", "z", "F", "phi", "sigma", "ode_residual")
DEFAULT_SAMPLES = 101

EXIT_OK, EXIT_SOLVER, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("toricqe")


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# documents


def build_document(sol: FamilySolution, reports) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "family": sol.family.value,
        "a": float(sol.a),
        "constants": {k: float(v) for k, v in sol.constants.items()},
        "residual_summary": [r.summary() for r in reports],
        "provenance": {
            **sol.provenance,
            "build": f"toricqe {__version__}",
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        },
    }
    if sol.m is not None:
        doc["m"] = float(sol.m)
    if sol.family is Family.CP2B2:
        k = sol.constants
        st = cp2b2.ConstraintState(sol.a, sol.m, k["b"], k["c"], k["d"], k["mu"])
        doc["constraint_residuals"] = [float(r) for r in cp2b2.constraint_residuals(st)]
    return doc


def dumps_document(doc: dict) -> str:
    # json writes floats with repr, the shortest string that round-trips exactly
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def _number(d: dict, key: str) -> float:
    try:
        v = d[key]
    except KeyError:
        raise InputError(f"document lacks '{key}'") from None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InputError(f"'{key}' must be a number")
    return float(v)


def load_document(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        doc = json.loads(text)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read document {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise InputError("document must be a table")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise InputError(f"unsupported schema_version {doc.get('schema_version')!r}")
    try:
        Family(doc.get("family"))
    except ValueError:
        raise InputError(f"unknown family {doc.get('family')!r}") from None
    if not isinstance(doc.get("constants"), dict):
        raise InputError("document lacks a constants table")
    return doc


def solution_from_document(doc: dict, cfg: SolverConfig = DEFAULT_CONFIG) -> FamilySolution:
    """Rebuild a family from stored constants without solving anything."""
    fam = Family(doc["family"])
    k = doc["constants"]
    prov = doc.get("provenance", {})
    if fam is Family.LPP:
        m = _number(doc, "m")
        if not m > 1:
            raise InputError("m must exceed 1")
        return families.lpp_from_constants(
            m, *(_number(k, n) for n in ("b", "c", "d", "mu")), cfg=cfg, provenance=prov
        )
    if fam is Family.PAGE:
        a = _number(k, "a_star")
        return families.page_from_constants(a, *(_number(k, n) for n in ("A", "B", "C", "b", "c")), provenance=prov)
    if fam is Family.KOISO_CAO:
        return families.koiso_cao_from_constants(_number(k, "c"), _number(k, "d"), provenance=prov)
    a, m = _number(doc, "a"), _number(doc, "m")
    if not (a > 1 and m > 1):
        raise InputError("cp2b2 documents need a > 1 and m > 1")
    return cp2b2.cp2b2_from_constants(a, m, *(_number(k, n) for n in ("b", "c", "d", "mu")), provenance=prov)


# ---------------------------------------------------------------------------
# output


def atomic_write(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return "%.17g" % (x + 0.0)  # no negative zero


def profile_rows(sol: FamilySolution, samples: int) -> list[tuple[float, ...]]:
    if sol.profile is None:
        raise InputError(f"{sol.family.value} solutions carry no profile")
    cd = sol.conformal
    rows = []
    ts = np.linspace(-sol.a, 1.0, samples)
    for t in ts:
        t = float(t)
        z = sol.profile.z(t)
        # z vanishes on both facets, so F = 1/z has a pole there
        F = math.inf if t in (ts[0], ts[-1]) or z == 0 else 1.0 / z
        try:
            r = families.ode_residual(sol, t)
        except PoleEvaluation:
            r = math.nan
        rows.append((t, z, F, cd.phi(t), cd.sigma(t), r))
    return rows


def profile_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def plot_script(csv_name: str, title: str) -> str:
    """A gnuplot script drawing the four profile columns from ``csv_name``."""
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set terminal pngcairo size 1000,800",
        f"set output '{Path(csv_name).stem}.png'",
        "set multiplot layout 2,2 title '" + title + "'",
        "set xlabel 't'",
    ]
    for col in (2, 4, 5, 6):
        lines.append(f"plot '{csv_name}' using 1:{col} with lines")
    lines.append("unset multiplot")
    return "\n".join(lines) + "\n"


def write_profile(sol: FamilySolution, csv_path: Path, samples: int):
    csv_path = Path(csv_path)
    atomic_write(csv_path, profile_csv(profile_rows(sol, samples)))
    atomic_write(csv_path.with_suffix(".gp"), plot_script(csv_path.name, _stem(sol)))


def _stem(sol: FamilySolution) -> str:
    if sol.family is Family.LPP:
        return f"lpp_m{sol.m:g}"
    if sol.family is Family.CP2B2:
        return f"cp2b2_a{sol.a:g}_m{sol.m:g}"
    return sol.family.value.replace("-", "_")


def print_table(sol: FamilySolution, reports, stream):
    head = f"{sol.family.value}  a = {sol.a:.17g}"
    if sol.m is not None:
        head += f"  m = {sol.m:g}"
    print(head, file=stream)
    for k, v in sol.constants.items():
        print(f"  {k:<14s} {v: .17g}", file=stream)
    for r in reports:
        print("  " + r.line(), file=stream)


# ---------------------------------------------------------------------------
# commands


def _config(args) -> SolverConfig:
    try:
        return DEFAULT_CONFIG.replace(
            **{k: v for k, v in (("abs_tol", args.abs_tol), ("rel_tol", args.rel_tol), ("max_iter", args.max_iter)) if v is not None}
        )
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from None


def _emit(sol: FamilySolution, args) -> int:
    reports = verify.run_all_checks(sol)
    doc = build_document(sol, reports)
    to_stdout = args.json == "-"
    print_table(sol, reports, sys.stderr if to_stdout else sys.stdout)
    out = Path(args.out)
    stem = _stem(sol)
    if to_stdout:
        sys.stdout.write(dumps_document(doc))
    else:
        atomic_write(Path(args.json) if args.json else out / f"{stem}.json", dumps_document(doc))
    if sol.profile is not None:
        write_profile(sol, out / f"{stem}.csv", DEFAULT_SAMPLES)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY


def cmd_lpp(args) -> int:
    if not args.m > 1:
        raise InputError("m must exceed 1")
    return _emit(families.lpp_solve(args.m, _config(args)), args)


def cmd_page(args) -> int:
    return _emit(families.page_solve(_config(args)), args)


def cmd_koiso_cao(args) -> int:
    return _emit(families.koiso_cao_solve(_config(args)), args)


def cmd_cp2b2(args) -> int:
    if not args.a > 1:
        raise InputError("a must exceed 1")
    if not args.m > 1:
        raise InputError("m must exceed 1")
    guess = tuple(args.guess) if args.guess else cp2b2.DEFAULT_GUESS
    return _emit(cp2b2.solve_constraints(args.a, args.m, guess, _config(args)), args)


def _load_solution(args) -> FamilySolution:
    doc = load_document(args.doc)
    try:
        return solution_from_document(doc, _config(args))
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_verify(args) -> int:
    try:
        sol = _load_solution(args)
    except ToricQEError as exc:
        # stored constants that cannot even build a metric fail verification
        print(f"FAIL  reconstruction: {exc}")
        return EXIT_VERIFY
    reports = verify.run_all_checks(sol)
    print_table(sol, reports, sys.stdout)
    if args.json:
        text = json.dumps([r.summary() for r in reports], indent=2) + "\n"
        if args.json == "-":
            sys.stdout.write(text)
        else:
            atomic_write(Path(args.json), text)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY


def cmd_profile(args) -> int:
    if args.samples < 2:
        raise InputError("samples must be at least 2")
    try:
        sol = _load_solution(args)
        rows = profile_rows(sol, args.samples)
    except ToricQEError as exc:
        raise InputError(f"cannot tabulate the document: {exc}") from None
    text = profile_csv(rows)
    if args.json == "-" or args.out == "-":
        sys.stdout.write(text)
        return EXIT_OK
    path = Path(args.out) if args.out else Path(args.doc).with_suffix(".csv")
    atomic_write(path, text)
    atomic_write(path.with_suffix(".gp"), plot_script(path.name, _stem(sol)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--abs-tol", type=float, default=None, help="absolute solver tolerance")
    common.add_argument("--rel-tol", type=float, default=None, help="relative solver tolerance")
    common.add_argument("--max-iter", type=int, default=None, help="iteration cap")
    common.add_argument("--json", default=None, help="document path, or '-' for standard output")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="toricqe", description="Toric quasi-Einstein metrics on blow-ups of CP^2.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("lpp", parents=[common], help="Lü-Page-Pope quasi-Einstein metric")
    s.add_argument("--m", type=float, required=True)
    s.add_argument("--out", default=".", help="output directory")
    s.set_defaults(func=cmd_lpp)

    s = sub.add_parser("page", parents=[common], help="Page's Einstein metric")
    s.add_argument("--out", default=".", help="output directory")
    s.set_defaults(func=cmd_page)

    s = sub.add_parser("koiso-cao", parents=[common], help="Koiso-Cao Kähler-Ricci soliton")
    s.add_argument("--out", default=".", help="output directory")
    s.set_defaults(func=cmd_koiso_cao)

    s = sub.add_parser("cp2b2", parents=[common], help="constraint system on the two-point blow-up")
    s.add_argument("--a", type=float, default=2.0)
    s.add_argument("--m", type=float, default=2.0)
    s.add_argument("--guess", type=float, nargs=4, metavar=("B", "C", "D", "MU"))
    s.add_argument("--out", default=".", help="output directory")
    s.set_defaults(func=cmd_cp2b2)

    s = sub.add_parser("verify", parents=[common], help="audit a solution document")
    s.add_argument("doc")
    s.add_argument("--out", default=None, help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("profile", parents=[common], help="tabulate a document's profile as CSV")
    s.add_argument("doc")
    s.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    s.add_argument("--out", default=None, help="CSV path (default: next to the document)")
    s.set_defaults(func=cmd_profile)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, matching the invalid-input code
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ToricQEError as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
