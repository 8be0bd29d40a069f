"""Command-line front end.

    cayley-ising regions     --theta 0.2:10 --theta1 0.2:4 --grid 100 --format csv
    cayley-ising gibbs-check --theta 5 --theta1 2 --field mu3 --depth 2
    cayley-ising classify    --J 1 --J1 1 --beta 0.44068679350977147 --measure 2
    cayley-ising classify    --example 3.1
    cayley-ising zero-t      --J 1 --J1 1 --beta 1,2,4,8,16 --depth 2

Exit codes: 0 success, 2 configuration error, 3 resource limit, 4 region or
domain error.  Output is assembled in memory and written only on success,
so a failing run never leaves partial output behind.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .errors import DomainError, RegionError, ResourceLimitError
from .factors import (
    DEFAULT_MAX_EXPONENT,
    DEFAULT_TOL,
    FactorClassification,
    classify,
    reproduce_equal_coupling_example,
    reproduce_zero_j_example,
)
from .gibbs import check_consistency, named_measures, zero_temperature_scan
from .model import ModelParams
from .recursion import ConstantField, classify_thetas, solve_periodic, solve_ti

SCHEMA_VERSION = "1.0"
OUTDIR_ENV = "CAYLEY_ISING_OUTDIR"

EXIT_OK, EXIT_CONFIG, EXIT_RESOURCE, EXIT_DOMAIN = 0, 2, 3, 4


class ConfigError(Exception):
    pass


# -- serialisation -------------------------------------------------------------


def _fmt_float(x: float) -> str:
    return format(x, ".17g")


def to_json(obj: Any) -> str:
    """JSON with every float printed to 17 significant digits; non-finite floats become null."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj)) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        import json

        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{to_json(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _csv_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v)) if math.isfinite(v) else ""
    return str(v)


def to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def document(command: str, **body: Any) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, **body}


# -- argument handling -----------------------------------------------------------


def _float_or_range(text: str) -> tuple[float, float]:
    parts = text.split(":")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or lo:hi, got {text!r}") from None
    if len(values) == 1:
        return values[0], values[0]
    if len(values) == 2:
        return values[0], values[1]
    raise argparse.ArgumentTypeError(f"expected a number or lo:hi, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _grid(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    try:
        sizes = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or NxM, got {text!r}") from None
    if len(sizes) == 1:
        return sizes[0], sizes[0]
    if len(sizes) == 2:
        return sizes[0], sizes[1]
    raise argparse.ArgumentTypeError(f"expected N or NxM, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cayley-ising", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_params(p: argparse.ArgumentParser, ranges: bool = False, beta_list: bool = False) -> None:
        g = p.add_argument_group("model parameters (either --theta/--theta1 or --J/--J1/--beta)")
        num = _float_or_range if ranges else float
        g.add_argument("--theta", type=num, help="exp(2 beta J)" + (" or lo:hi" if ranges else ""))
        g.add_argument("--theta1", type=num, help="exp(2 beta J1)" + (" or lo:hi" if ranges else ""))
        g.add_argument("--J", type=float)
        g.add_argument("--J1", type=float)
        g.add_argument("--beta", type=_float_list if beta_list else float, help="comma-separated schedule" if beta_list else None)

    def add_output(p: argparse.ArgumentParser, default: str) -> None:
        p.add_argument("--format", choices=("json", "csv"), default=default)
        p.add_argument("--out", metavar="PATH", help="write here instead of standard output")

    p = sub.add_parser("regions", help="phase-diagram grid in the (theta, theta1) plane")
    add_params(p, ranges=True)
    p.add_argument("--grid", type=_grid, default=(100, 100), help="N or NxM points (theta1 x theta)")
    add_output(p, "csv")

    p = sub.add_parser("gibbs-check", help="consistency of finite-volume measures vs the recursion")
    add_params(p)
    p.add_argument("--field", choices=("mu1", "mu2", "mu3", "mu12", "mu21", "constant"), default="mu2")
    p.add_argument("--h", type=float, default=0.0, help="field value for --field constant")
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--tol", type=float, default=1e-10)
    add_output(p, "json")

    p = sub.add_parser("classify", help="factor type of a translation-invariant state")
    add_params(p)
    p.add_argument("--measure", type=int, choices=(1, 2, 3), default=2)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-exponent", type=int, default=DEFAULT_MAX_EXPONENT)
    p.add_argument("--example", choices=("3.1", "3.2"), help="reproduce a worked example instead")
    add_output(p, "json")

    p = sub.add_parser("zero-t", help="approach of the ordered measures to ground states")
    add_params(p, beta_list=True)
    p.add_argument("--depth", type=int, default=2)
    add_output(p, "csv")
    return parser


def _params_point(args: argparse.Namespace) -> ModelParams:
    theta_style = args.theta is not None or args.theta1 is not None
    j_style = args.J is not None or args.J1 is not None
    if theta_style == j_style:
        raise ConfigError("give exactly one of --theta/--theta1 or --J/--J1/--beta")
    if theta_style:
        if args.theta is None or args.theta1 is None or args.beta is not None:
            raise ConfigError("--theta and --theta1 are both required and exclude --beta")
        if args.theta <= 0 or args.theta1 <= 0:
            raise ConfigError("theta and theta1 must be positive")
        return ModelParams.from_thetas(args.theta, args.theta1)
    if args.J is None or args.J1 is None or args.beta is None:
        raise ConfigError("--J, --J1 and --beta are all required")
    if args.beta <= 0:
        raise ConfigError("beta must be positive")
    return ModelParams(args.J, args.J1, args.beta)


# -- commands ---------------------------------------------------------------------


def cmd_regions(args: argparse.Namespace) -> tuple[dict | None, list[dict], list[str]]:
    if args.J is not None or args.J1 is not None or args.beta is not None:
        raise ConfigError("regions takes --theta and --theta1 (numbers or lo:hi ranges)")
    if args.theta is None or args.theta1 is None:
        raise ConfigError("--theta and --theta1 are required")
    (t_lo, t_hi), (t1_lo, t1_hi) = args.theta, args.theta1
    n1, n = args.grid
    for lo, hi, count, name in ((t_lo, t_hi, n, "theta"), (t1_lo, t1_hi, n1, "theta1")):
        if lo <= 0 or hi < lo:
            raise ConfigError(f"{name} range must be positive and non-empty")
        if hi > lo and count < 2:
            raise ConfigError("grid resolution must be at least 2 for a range")
    thetas = np.linspace(t_lo, t_hi, n) if t_hi > t_lo else np.array([t_lo])
    theta1s = np.linspace(t1_lo, t1_hi, n1) if t1_hi > t1_lo else np.array([t1_lo])
    rows = []
    for t1 in theta1s:
        for t in thetas:
            params = ModelParams.from_thetas(float(t), float(t1))
            rc = classify_thetas(float(t), float(t1))
            ti, per = solve_ti(params), solve_periodic(params)
            rows.append({
                "theta": float(t),
                "theta1": float(t1),
                "region": rc.tag.value,
                "boundary_distance": rc.boundary_distance,
                "u1": ti.u1,
                "u3": ti.u3,
                "u_star": per.u_star,
                "v_star": per.v_star,
            })
    columns = ["theta", "theta1", "region", "boundary_distance", "u1", "u3", "u_star", "v_star"]
    return None, rows, columns


def _pick_field(args: argparse.Namespace, params: ModelParams):
    if args.field == "constant":
        return ConstantField(args.h)
    available = dict(named_measures(params))
    if args.field not in available:
        raise RegionError(f"{args.field} does not exist at theta={params.theta:.6g}, theta1={params.theta1:.6g}")
    return available[args.field]


def cmd_gibbs_check(args: argparse.Namespace) -> dict:
    params = _params_point(args)
    field_ = _pick_field(args, params)
    report = check_consistency(params, field_, args.depth, tol=args.tol)
    return document(
        "gibbs-check",
        params=_params_dict(params),
        field_name=args.field,
        field=field_.describe(),
        depth=report.depth,
        max_discrepancy=report.max_discrepancy,
        tol=report.tol,
        consistency_passed=report.passed,
        recursion_passed=report.recursion_ok,
        recursion_residual=report.recursion_residual,
        equivalence_holds=report.agrees_with_recursion,
    )


def _params_dict(params: ModelParams) -> dict:
    return {"J": params.J, "J1": params.J1, "beta": params.beta, "theta": params.theta, "theta1": params.theta1}


def _fraction(r: Fraction | None) -> str | None:
    return None if r is None else f"{r.numerator}/{r.denominator}"


def classification_dict(c: FactorClassification) -> dict:
    return {
        "measure": c.measure,
        "type": c.type_tag.value,
        "label": c.label,
        "delta": c.delta,
        "exponents": c.exponents,
        "k": c.k,
        "modular_period": c.modular_period,
        "subfactor_r": _fraction(c.subfactor_r),
        "verdict": c.verdict,
        "excluded_ratios": list(c.excluded_ratios),
        "field_h": c.field_h,
        "tol": c.tol,
        "max_exponent": c.max_exponent,
    }


def cmd_classify(args: argparse.Namespace) -> dict:
    if args.example == "3.1":
        ex = reproduce_zero_j_example(args.tol, args.max_exponent)
        return document(
            "classify",
            example="3.1",
            params=_params_dict(ex.params),
            cubic_root=ex.t,
            cubic_residual=ex.cubic_residual,
            h1=ex.h1,
            h1_from_fixed_point=ex.h1_from_fixed_point,
            identity_residual=ex.identity_residual,
            half_arctanh_residual=ex.half_arctanh_residual,
            n=ex.n_exponent,
            k=ex.k,
            delta=ex.delta,
            delta1=ex.delta1,
            subfactor_r=_fraction(ex.r),
            classifications=[classification_dict(c) for c in (ex.ordered_mirror, ex.unordered, ex.ordered)],
        )
    if args.example == "3.2":
        ex = reproduce_equal_coupling_example(args.tol, args.max_exponent)
        return document(
            "classify",
            example="3.2",
            params=_params_dict(ex.params),
            above_sqrt5=ex.above_sqrt5,
            u1=ex.u1,
            u3=ex.u3,
            delta=ex.delta,
            delta1=ex.delta1,
            power_identity_residual=ex.power_identity_residual,
            factored_residual=ex.factored_residual,
            subfactor_r=_fraction(ex.r),
            modular_period=ex.t0,
            modular_period_ordered=ex.t0_ordered,
            classifications=[classification_dict(c) for c in (ex.ordered_mirror, ex.unordered, ex.ordered)],
        )
    params = _params_point(args)
    c = classify(params, args.measure, args.tol, args.max_exponent)
    return document("classify", params=_params_dict(params), **classification_dict(c))


ZERO_T_COLUMNS = [
    "beta", "theta", "theta1", "region", "u3", "root_marginal_u3",
    "mu3_plus", "log_mu3_plus_complement", "mu1_minus", "log_mu1_minus_complement",
    "mu2_root_marginal", "mu12_minus_plus", "log_mu12_complement",
    "mu21_plus_minus", "log_mu21_complement", "monotone",
]


def cmd_zero_t(args: argparse.Namespace) -> tuple[dict, list[dict], list[str]]:
    if args.J is None or args.J1 is None or args.beta is None or args.theta is not None or args.theta1 is not None:
        raise ConfigError("zero-t takes --J, --J1 and a --beta schedule")
    if args.J1 == 0:
        raise ConfigError("zero-t needs J1 != 0")
    scan = zero_temperature_scan(args.J, args.J1, args.beta, args.depth)
    rows = []
    for r in scan.rows:
        row = {c: getattr(r, c, None) for c in ZERO_T_COLUMNS[:-1]}
        row["region"] = r.region.value
        row["monotone"] = scan.monotone
        rows.append(row)
    flags = {
        "u3_increasing": scan.u3_increasing,
        "mu3_increasing": scan.mu3_increasing,
        "mu1_increasing": scan.mu1_increasing,
        "mu12_increasing": scan.mu12_increasing,
        "mu21_increasing": scan.mu21_increasing,
        "monotone": scan.monotone,
    }
    meta = {"J": args.J, "J1": args.J1, "depth": args.depth, "flags": flags}
    return meta, rows, ZERO_T_COLUMNS


def render(args: argparse.Namespace) -> str:
    if args.command in ("regions", "zero-t"):
        meta, rows, columns = (cmd_regions if args.command == "regions" else cmd_zero_t)(args)
        if args.format == "csv":
            return to_csv(rows, columns)
        return to_json(document(args.command, **(meta or {}), columns=columns, rows=rows)) + "\n"
    doc = cmd_gibbs_check(args) if args.command == "gibbs-check" else cmd_classify(args)
    if args.format == "csv":
        flat = {k: v for k, v in doc.items() if not isinstance(v, (dict, list))}
        return to_csv([flat], list(flat))
    return to_json(doc) + "\n"


def _output_path(path: str) -> str:
    base = os.environ.get(OUTDIR_ENV)
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = render(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (RegionError, DomainError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if args.out:
        with open(_output_path(args.out), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
