"""Command line interface.

Subcommands: validate, classify, analyze, bound, certify, report.  Every
command is deterministic: the same invocation on the same input produces
byte-identical output.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .algebra import (
    HomogeneousSpace,
    SpecFormatError,
    builtin_names,
    load_builtin,
    load_spec,
    validate,
)
from .bounds import (
    CSV_COLUMNS,
    _csv_row,
    distortion,
    optimize,
    report_csv,
    report_text,
)
from .connection import canonical_connection
from .curvature import classify, seminorm_grams, sub_ricci, rigidity
from .spectral import certify

_EPILOG = """\
CSV columns for bound reports (bound --format csv, report):
  example  spec name
  theorem  bound identifier (main, t1zero, asn, sntf, *-variant)
  bound    eigenvalue lower bound
  x        optimizing curvature parameter in [0, 1)
  rho1     horizontal curvature constant at the optimum
  rho2     vertical curvature constant at the optimum
  omega    kappa / rho2
  chi      rho2 * sup T2 (clamped at 0)
  psi      rho2 * sigma^2
  m        torsion penalty inf_s (s*omega + chi/s + psi/s^2)
report prepends the swept parameter value to each row and, when sweeping b
on so4_twisted, appends x_frontier, the largest admissible x at that b.
"""

_EXIT_BAD_SPEC = 2
_EXIT_INVALID = 3
_EXIT_CERTIFY = 4


def _parse_params(pairs: list[str] | None) -> dict[str, float]:
    out: dict[str, float] = {}
    for item in pairs or []:
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or not name:
            raise SpecFormatError(f"--param expects name=value, got {item!r}")
        try:
            out[name] = float(value)
        except ValueError as exc:
            raise SpecFormatError(f"--param {name}: {value!r} is not a number") from exc
    return out


def _load(spec: str, params: dict[str, float]) -> HomogeneousSpace:
    if spec in builtin_names():
        return load_builtin(spec, **params)
    path = Path(spec)
    if not path.exists():
        raise SpecFormatError(f"{spec!r} is neither a builtin name nor a file")
    return load_spec(path, params)


def _require_valid(space: HomogeneousSpace) -> list[str]:
    return validate(space)


def _fmt(v: float) -> str:
    return format(v, ".12g")


def _cmd_validate(args) -> int:
    space = _load(args.spec, _parse_params(args.param))
    problems = _require_valid(space)
    if problems:
        for p in problems:
            print(f"invalid: {p}")
        return _EXIT_INVALID
    print(f"{space.name}: ok (dim_h={space.dim_h}, dim_v={space.dim_v})")
    return 0


_FLAG_ORDER = (
    "h_rigid",
    "v_rigid",
    "totally_rigid",
    "h_normal",
    "v_normal",
    "strictly_normal",
    "vm_integrable",
    "almost_strictly_normal",
)


def _checked_space(args) -> HomogeneousSpace | int:
    space = _load(args.spec, _parse_params(args.param))
    problems = _require_valid(space)
    if problems:
        for p in problems:
            print(f"invalid: {p}", file=sys.stderr)
        return _EXIT_INVALID
    return space


def _cmd_classify(args) -> int:
    space = _checked_space(args)
    if isinstance(space, int):
        return space
    flags = classify(canonical_connection(space))
    print(f"example = {space.name}")
    for name in _FLAG_ORDER:
        print(f"{name} = {'yes' if getattr(flags, name) else 'no'}")
    return 0


def _analysis_rows(space: HomogeneousSpace) -> list[tuple[str, str]]:
    conn = canonical_connection(space)
    d = space.dim_h
    flags = classify(conn)
    grams = seminorm_grams(conn)
    dist = distortion(space)
    src = sub_ricci(conn)
    rows: list[tuple[str, str]] = [("example", space.name)]
    rows += [(name, "yes" if getattr(flags, name) else "no") for name in _FLAG_ORDER]
    kappa = float(np.linalg.eigvalsh(grams.tau_hv[:d, :d])[-1])
    sigma = float(np.linalg.svd(dist.t1, compute_uv=False)[0]) if dist.t1.size else 0.0
    sup_t2 = float(np.linalg.eigvalsh(dist.t2)[-1])
    rows.append(("kappa", _fmt(kappa)))
    rows.append(("sigma", _fmt(sigma)))
    rows.append(("sup_t2", _fmt(sup_t2)))

    def matrix_rows(tag: str, mat: np.ndarray) -> None:
        for i in range(mat.shape[0]):
            for j in range(mat.shape[1]):
                if mat[i, j] != 0.0:
                    rows.append((f"{tag}[{i + 1}][{j + 1}]", _fmt(float(mat[i, j]))))

    matrix_rows("sub_ricci", src[:d, :d])
    matrix_rows("gram_tau_h", grams.tau_h)
    matrix_rows("t1", dist.t1)
    matrix_rows("t2", dist.t2)
    rig = rigidity(conn)
    for i in range(space.dim):
        if rig[i] != 0.0:
            rows.append((f"rigidity[{i + 1}]", _fmt(float(rig[i]))))
    return rows


def _cmd_analyze(args) -> int:
    space = _checked_space(args)
    if isinstance(space, int):
        return space
    rows = _analysis_rows(space)
    if args.format == "csv":
        print("key,value")
        for key, value in rows:
            print(f"{key},{value}")
    else:
        for key, value in rows:
            print(f"{key} = {value}")
    return 0


def _cmd_bound(args) -> int:
    space = _checked_space(args)
    if isinstance(space, int):
        return space
    report = optimize(
        space, x_points=args.x_grid, rho2_per_decade=args.rho2_grid
    )
    text = report_csv(report) if args.format == "csv" else report_text(report)
    print(text, end="")
    return 0


def _cmd_certify(args) -> int:
    space = _checked_space(args)
    if isinstance(space, int):
        return space
    if space.oracle is None:
        print(
            f"{space.name}: certification needs a spectral model "
            "(oracle block with a frame map)",
            file=sys.stderr,
        )
        return _EXIT_BAD_SPEC
    report = optimize(
        space, x_points=args.x_grid, rho2_per_decade=args.rho2_grid
    )
    result = certify(space, report, cutoff=args.cutoff)
    print(f"example = {space.name}")
    print(f"lambda1 = {_fmt(result.lambda1)} at irrep {result.witness}")
    print(f"tail = {result.tail_note}")
    for entry in result.entries:
        status = "PASS" if entry.passed else "FAIL"
        print(f"{entry.theorem}: bound {_fmt(entry.bound)} -> {status}")
    if not result.all_passed:
        return _EXIT_CERTIFY
    return 0


def _x_frontier(b: float) -> float:
    """Largest x admissible at twist b: below it the curvature form keeps a
    positive horizontal block for some vertical weight."""
    q = 0.25 * b * b / (1.0 + b * b)
    return ((1.0 - q) + 2.0 * math.sqrt(1.0 - q)) / (3.0 + q)


def _parse_sweep(text: str) -> tuple[str, np.ndarray]:
    name, sep, rng = text.partition("=")
    name = name.strip()
    parts = rng.split(":")
    if not sep or not name or len(parts) != 3:
        raise SpecFormatError(
            f"--sweep expects name=start:stop:count, got {text!r}"
        )
    lo, hi = float(parts[0]), float(parts[1])
    count = int(parts[2])
    if count < 1:
        raise SpecFormatError("--sweep count must be at least 1")
    return name, np.linspace(lo, hi, count)


def _cmd_report(args) -> int:
    params = _parse_params(args.param)
    name, values = _parse_sweep(args.sweep)
    probe = _load(args.spec, params)
    with_frontier = probe.name == "so4_twisted" and name == "b"
    header = [name, *CSV_COLUMNS]
    if with_frontier:
        header.append("x_frontier")
    print(",".join(header))
    for value in values:
        space = _load(args.spec, {**params, name: float(value)})
        problems = _require_valid(space)
        if problems:
            for p in problems:
                print(f"invalid at {name}={_fmt(float(value))}: {p}", file=sys.stderr)
            return _EXIT_INVALID
        report = optimize(
            space, x_points=args.x_grid, rho2_per_decade=args.rho2_grid
        )
        suffix = f",{_fmt(_x_frontier(float(value)))}" if with_frontier else ""
        if not report.entries:
            row = ",".join([space.name, "none"] + [""] * 8)
            print(f"{_fmt(float(value))},{row}{suffix}")
            continue
        for e in report.entries:
            print(f"{_fmt(float(value))},{_csv_row(space.name, e.theorem, e, e.value)}{suffix}")
        for note in report.discrepancies:
            src = next(e for e in report.entries if e.theorem == note.theorem)
            row = _csv_row(space.name, f"{note.theorem}-variant", src, note.variant)
            print(f"{_fmt(float(value))},{row}{suffix}")
    return 0


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("spec", help="builtin example name or path to a spec file")
    sub.add_argument(
        "--param",
        action="append",
        metavar="NAME=VALUE",
        help="override a spec parameter (repeatable)",
    )


def _add_grids(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--x-grid", type=int, default=2000, metavar="N", help="x grid points"
    )
    sub.add_argument(
        "--rho2-grid",
        type=int,
        default=200,
        metavar="N",
        help="rho2 grid points per decade",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sublap",
        description="Spectral gap bounds for step-2 sub-Riemannian "
        "homogeneous spaces.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("validate", help="check the structure constants")
    _add_common(p)
    p.set_defaults(func=_cmd_validate)

    p = commands.add_parser("classify", help="print the structure flags")
    _add_common(p)
    p.set_defaults(func=_cmd_classify)

    p = commands.add_parser("analyze", help="print curvature and torsion data")
    _add_common(p)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=_cmd_analyze)

    p = commands.add_parser("bound", help="optimize the eigenvalue bounds")
    _add_common(p)
    _add_grids(p)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=_cmd_bound)

    p = commands.add_parser(
        "certify", help="compare the bounds against the exact spectrum"
    )
    _add_common(p)
    _add_grids(p)
    p.add_argument(
        "--cutoff", type=float, default=None, metavar="R", help="Casimir cutoff"
    )
    p.set_defaults(func=_cmd_certify)

    p = commands.add_parser(
        "report", help="sweep a parameter and emit bound-vs-parameter CSV"
    )
    _add_common(p)
    _add_grids(p)
    p.add_argument(
        "--sweep",
        required=True,
        metavar="NAME=START:STOP:COUNT",
        help="parameter range to sweep",
    )
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_BAD_SPEC
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_BAD_SPEC
    except (RuntimeError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_INVALID
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
