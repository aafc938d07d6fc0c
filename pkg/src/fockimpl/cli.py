"""Command-line front door.

Every subcommand builds a JSON report (deterministic: keys sorted, identical
inputs give bit-identical output) and exits 0 when all of its assertions
pass, 2 when a numerical assertion fails, and 3 on input errors such as
malformed JSON, a bad operator file, or an unknown subcommand.

Operator files use the interchange schema of save_operator: kind,
source_modes, target_modes, and a matrix of [re, im] pairs.  Group files
hold {"generators": [...]} where each generator is a unitary on particle
modes, written as a matrix of [re, im] pairs (plain numbers are accepted for
real entries); for a rectangular operator a generator is an object
{"source": matrix, "target": matrix} giving the element at both truncation
levels.  An optional "plus_modes" key names the particle modes the group's
circle weights +1 (one list, or {"source": [...], "target": [...]});
without it the charge count runs against the total particle number.

CSV output (--csv): the dirac command writes the ladder table with columns
n_max, m_max, hs_plus_minus, hs_minus_plus; every other command flattens the
scalar report fields to key,value rows.  Plot data (--plot-data) is written
as whitespace-separated x y lines grouped under "# series: <name>" headers.

The environment variable FOCKIMPL_TOL overrides the default tolerance of
every assertion the commands make.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from .selfdual import (
    CAR,
    CCR,
    BogoliubovMap,
    NumericalValidityError,
    PreconditionError,
    ResourceError,
    StructuralError,
    index_data,
    operator_from_dict,
    validate,
)
from .car_structure import (
    decompose,
    chi_character,
    purity_class,
    spectral_profile,
    state_operator,
)
from .ccr_structure import decompose_ccr, validate_ccr
from .car_fock import DEFAULT_MODE_CAP, bosonized_statistics, implementers, verify_cuntz
from .ccr_fock import DEFAULT_N_MAX, implementers_ccr, verify_ccr_family
from .gauge import (
    GaugeElement,
    charge_decomposition_car,
    charge_decomposition_ccr,
    charge_projection,
    is_gauge_invariant,
    u1_charge,
)
from .experiments import (
    build_dirac_v,
    build_example_vphi,
    dirac_hs_ladder,
    dirac_truncation,
    localization_check,
    off_interval_sample,
    run_example_ex2,
    run_example_vphi,
)


class _InputError(Exception):
    """Bad command line, unreadable file, or malformed schema: exit code 3."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; input errors own exit 3 here
    def error(self, message):
        raise _InputError(message)


def _tol(default: float) -> float:
    raw = os.environ.get("FOCKIMPL_TOL")
    if raw is None:
        return default
    try:
        value = float(raw)
    except ValueError:
        raise _InputError(f"FOCKIMPL_TOL must be a number, got {raw!r}") from None
    if not value > 0.0:
        raise _InputError("FOCKIMPL_TOL must be positive")
    return value


def _matrix_json(a: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(a)]


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _InputError(f"malformed JSON in {path}: {exc}") from exc


def _load_operator(path: str) -> BogoliubovMap:
    data = _load_json(path)
    if not isinstance(data, dict):
        raise _InputError(f"operator file {path} must hold a JSON object")
    return operator_from_dict(data)


def _entry_to_complex(entry) -> complex:
    if isinstance(entry, (list, tuple)):
        if len(entry) != 2:
            raise _InputError("matrix entries must be [re, im] pairs")
        return complex(float(entry[0]), float(entry[1]))
    if isinstance(entry, (int, float)):
        return complex(entry)
    raise _InputError(f"matrix entry {entry!r} is neither a pair nor a number")


def _parse_matrix(raw) -> np.ndarray:
    if not isinstance(raw, list) or not raw or not all(isinstance(r, list) for r in raw):
        raise _InputError("a generator matrix must be a non-empty list of rows")
    try:
        mat = np.array([[_entry_to_complex(x) for x in row] for row in raw])
    except (TypeError, ValueError) as exc:
        raise _InputError(f"malformed generator matrix: {exc}") from exc
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise _InputError(f"generator matrix must be square, got shape {mat.shape}")
    return mat


def _load_group(path: str):
    data = _load_json(path)
    if not isinstance(data, dict) or "generators" not in data:
        raise _InputError(f'group file {path} must hold {{"generators": [...]}}')
    gens = data["generators"]
    if not isinstance(gens, list) or not gens:
        raise _InputError("group file needs a non-empty generator list")
    out = []
    for g in gens:
        if isinstance(g, dict):
            if set(g) != {"source", "target"}:
                raise _InputError('two-level generators need exactly "source" and "target"')
            out.append(
                (GaugeElement(_parse_matrix(g["source"])), GaugeElement(_parse_matrix(g["target"])))
            )
        else:
            out.append(GaugeElement(_parse_matrix(g)))
    return out, data.get("plus_modes")


def _charge_projections(v: BogoliubovMap, plus):
    """Secondary projections for the charge count, from the group file.

    plus_modes lists the particle modes weighted +1 by the group's circle,
    either one list (square maps) or {"source": [...], "target": [...]};
    omitted, the count runs against the total-number circle.
    """
    if plus is None:
        return None, None
    if isinstance(plus, dict):
        if set(plus) != {"source", "target"}:
            raise _InputError('plus_modes needs exactly "source" and "target"')
        source_modes, target_modes = plus["source"], plus["target"]
    else:
        source_modes = target_modes = plus
    if not isinstance(source_modes, list) or not isinstance(target_modes, list):
        raise _InputError("plus_modes must list particle mode indices")
    try:
        idx_s = [int(i) for i in source_modes]
        idx_t = [int(i) for i in target_modes]
    except (TypeError, ValueError):
        raise _InputError("plus_modes must list particle mode indices") from None
    return charge_projection(v.source, idx_s), charge_projection(v.target, idx_t)


# ---------------------------------------------------------------------------
# command handlers: each returns (report, passed, table, series)


def _cmd_car_analyze(args):
    v = _load_operator(args.operator)
    if v.kind != CAR:
        raise _InputError("car analyze needs a fermionic operator file")
    tol = _tol(1e-10)
    report_v = validate(v, tol)
    data = decompose(v)
    s_op = state_operator(v)
    reassembly = float(
        np.linalg.norm(data.u_v.matrix @ data.w_v.matrix - v.matrix, 2)
    )
    report = {
        "kind": v.kind,
        "source_modes": v.source.modes,
        "target_modes": v.target.modes,
        "validation": report_v.as_dict(),
        "index": index_data(v).as_dict(),
        "chi": chi_character(v),
        "purity": purity_class(v),
        "state_profile": spectral_profile(s_op).as_dict(),
        "pairing_block": _matrix_json(data.param.t),
        "hole_basis": _matrix_json(data.param.h),
        "defect_basis": _matrix_json(data.k_v),
        "hole_dim": data.l_v,
        "defect_dim": data.k_v.shape[1],
        "reassembly_residual": reassembly,
        "tol": tol,
    }
    passed = report_v.passed and reassembly <= max(tol, 1e-9)
    return report, passed, None, None


def _cmd_car_implement(args):
    v = _load_operator(args.operator)
    if v.kind != CAR:
        raise _InputError("car implement needs a fermionic operator file")
    tol = _tol(1e-10)
    family = implementers(v, mode_cap=args.mode_cap)
    cuntz = verify_cuntz(family, tol=tol)
    report = {
        "kind": v.kind,
        "source_modes": v.source.modes,
        "target_modes": v.target.modes,
        "members": len(family.members),
        "statistics_dimension": family.statistics_dimension,
        "multi_indices": [list(ix) for ix in family.indices],
        "cuntz": cuntz.as_dict(),
    }
    passed = cuntz.passed
    if v.is_square:
        _, parameter, stats = bosonized_statistics(family, tol=max(tol, 1e-9))
        report["statistics_parameter"] = [parameter.real, parameter.imag]
        report["statistics"] = stats
        passed = passed and stats["passed"]
    return report, passed, None, None


def _cmd_ccr_analyze(args):
    v = _load_operator(args.operator)
    if v.kind != CCR:
        raise _InputError("ccr analyze needs a bosonic operator file")
    tol = _tol(1e-10)
    report_v = validate_ccr(v, tol)
    data = decompose_ccr(v)
    z = data.param.z
    reassembly = float(
        np.linalg.norm(data.u_v.matrix @ data.w_v.matrix - v.matrix, 2)
    )
    report = {
        "kind": v.kind,
        "source_modes": v.source.modes,
        "target_modes": v.target.modes,
        "validation": report_v.as_dict(),
        "index": index_data(v).as_dict(),
        "disk_parameter": _matrix_json(z),
        "disk_parameter_norm": float(np.linalg.norm(z, 2)),
        "defect_modes": data.m_v,
        "reassembly_residual": reassembly,
        "tol": tol,
    }
    passed = report_v.passed and reassembly <= max(tol, 1e-9)
    return report, passed, None, None


def _cmd_ccr_implement(args):
    v = _load_operator(args.operator)
    if v.kind != CCR:
        raise _InputError("ccr implement needs a bosonic operator file")
    tol = _tol(1e-6)
    family = implementers_ccr(v, n_terms=args.n_terms, n_max=args.n_max)
    report_f = verify_ccr_family(family, n_protected=args.n_protected, tol=tol)
    report = {
        "kind": v.kind,
        "source_modes": v.source.modes,
        "target_modes": v.target.modes,
        "n_max": args.n_max,
        "n_terms": args.n_terms,
        "members": len(family.members),
        "family": report_f.as_dict(),
    }
    return report, report_f.passed, None, None


def _cmd_charge(args):
    v = _load_operator(args.operator)
    generators, plus = _load_group(args.group)
    tol = _tol(1e-9 if v.kind == CAR else 1e-5)
    invariance = is_gauge_invariant(v, generators, tol=max(tol, 1e-10))
    report = {
        "kind": v.kind,
        "source_modes": v.source.modes,
        "target_modes": v.target.modes,
        "invariance_residuals": list(invariance.residuals),
        "gauge_invariant": invariance.passed,
    }
    p_source, p_target = _charge_projections(v, plus)
    try:
        report["u1_charge"] = u1_charge(v, p=p_source, p_target=p_target)
    except (PreconditionError, StructuralError):
        # the map need not be graded by the requested circle
        report["u1_charge"] = None
    passed = invariance.passed
    if invariance.passed:
        try:
            if v.kind == CAR:
                decomposition = charge_decomposition_car(v, generators, tol=tol)
            else:
                decomposition = charge_decomposition_ccr(
                    v, generators, tol=tol, n_terms=args.n_terms, n_max=args.n_max
                )
            report["decomposition"] = decomposition.as_dict()
            passed = passed and decomposition.passed
        except ResourceError as exc:
            report["decomposition"] = {"skipped": str(exc)}
    return report, passed, None, None


def _cmd_example_vphi(args):
    tol = _tol(1e-12)
    report = run_example_vphi(args.phi, k=args.modes, tol=tol)
    grid = np.linspace(-math.pi / 4.0, math.pi / 4.0, 33)
    sweep = []
    for phi in grid:
        w = build_example_vphi(float(phi), args.modes)
        sweep.append((float(phi), float(state_operator(w)[0, 0].real)))
    series = {"lambda_vs_phi": sweep}
    report["sweep"] = [[x, y] for x, y in sweep]
    return report, True, None, series


def _cmd_example_ex2(args):
    tol = _tol(1e-12)
    report = run_example_ex2(args.modes, tol=tol)
    return report, True, None, None


def _parse_ladder(text: str) -> list[int]:
    try:
        levels = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise _InputError(f"ladder must be comma-separated integers, got {text!r}") from None
    if not levels:
        raise _InputError("empty ladder")
    return levels


def _cmd_dirac(args):
    levels = _parse_ladder(args.n_max_ladder)
    ladder = dirac_hs_ladder(levels)
    tol = _tol(1e-6)
    t = dirac_truncation(args.localization_n_max)
    v = build_dirac_v(t)
    localization = localization_check(
        v, t, [("off_interval_bump", off_interval_sample(t))], tol=tol
    )
    report = {
        "ladder": ladder.as_dict(),
        "localization": localization.as_dict(),
    }
    passed = ladder.monotone and ladder.below_bounds and localization.passed
    header = ["n_max", "m_max", "hs_plus_minus", "hs_minus_plus"]
    rows = [
        [r.n_max, r.m_max, repr(r.hs_plus_minus), repr(r.hs_minus_plus)]
        for r in ladder.rows
    ]
    series = {
        "hs_plus_minus": [(float(r.n_max), r.hs_plus_minus) for r in ladder.rows],
        "hs_minus_plus": [(float(r.n_max), r.hs_minus_plus) for r in ladder.rows],
    }
    return report, passed, (header, rows), series


# ---------------------------------------------------------------------------
# output plumbing


def _flatten_scalars(report: dict, prefix: str = "") -> list[tuple[str, object]]:
    rows = []
    for key in sorted(report):
        value = report[key]
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            rows.extend(_flatten_scalars(value, prefix=name + "."))
        elif isinstance(value, (bool, int, float, str)) or value is None:
            rows.append((name, value))
    return rows


def _write_csv(path: str, table, report: dict) -> None:
    if table is None:
        header, rows = ["key", "value"], _flatten_scalars(report)
    else:
        header, rows = table
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_plot_data(path: str, series) -> None:
    lines = []
    for name in sorted(series or {}):
        lines.append(f"# series: {name}")
        for x, y in series[name]:
            lines.append(f"{x!r} {y!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _emit(args, report: dict, table, series) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.csv:
        _write_csv(args.csv, table, report)
    if args.plot_data:
        if series is None:
            raise _InputError("this command has no plottable series")
        _write_plot_data(args.plot_data, series)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="fockimpl",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", help="also write a CSV table (ladder rows, or flattened scalars)")
    common.add_argument("--plot-data", dest="plot_data", help="also write x-y series for plotting")

    sub = parser.add_subparsers(dest="command", required=True)

    car = sub.add_parser("car", help="fermionic operators").add_subparsers(
        dest="action", required=True
    )
    p = car.add_parser("analyze", parents=[common], help="index, state profile, decomposition, character")
    p.add_argument("operator", help="operator JSON file")
    p.set_defaults(handler=_cmd_car_analyze)
    p = car.add_parser("implement", parents=[common], help="implementer family and Cuntz report")
    p.add_argument("operator", help="operator JSON file")
    p.add_argument("--mode-cap", type=int, default=DEFAULT_MODE_CAP, help="refuse Fock spaces above this mode count")
    p.set_defaults(handler=_cmd_car_implement)

    ccr = sub.add_parser("ccr", help="bosonic operators").add_subparsers(
        dest="action", required=True
    )
    p = ccr.add_parser("analyze", parents=[common], help="kappa-isometry check and disk parameter")
    p.add_argument("operator", help="operator JSON file")
    p.set_defaults(handler=_cmd_ccr_analyze)
    p = ccr.add_parser("implement", parents=[common], help="implementer family at an occupation cutoff")
    p.add_argument("operator", help="operator JSON file")
    p.add_argument("--n-max", type=int, default=DEFAULT_N_MAX, help="occupation cutoff per report")
    p.add_argument("--n-terms", type=int, default=2, help="largest defect multi-index length")
    p.add_argument(
        "--n-protected",
        type=int,
        default=2,
        help="residuals are compressed to total occupation at most this; keep well below --n-max",
    )
    p.set_defaults(handler=_cmd_ccr_implement)

    p = sub.add_parser("charge", parents=[common], help="gauge invariance and charge decomposition")
    p.add_argument("operator", help="operator JSON file")
    p.add_argument("group", help='group JSON file: {"generators": [...]}')
    p.add_argument("--n-max", type=int, default=DEFAULT_N_MAX, help="bosonic occupation cutoff")
    p.add_argument("--n-terms", type=int, default=2, help="bosonic multi-index length")
    p.set_defaults(handler=_cmd_charge)

    example = sub.add_parser("example", help="worked examples").add_subparsers(
        dest="action", required=True
    )
    p = example.add_parser("vphi", parents=[common], help="rotating two-mode family")
    p.add_argument("--phi", type=float, required=True, help="rotation angle")
    p.add_argument("--modes", type=int, default=4, help="source modes")
    p.set_defaults(handler=_cmd_example_vphi)
    p = example.add_parser("ex2", parents=[common], help="sign-character pathology")
    p.add_argument("--modes", type=int, default=4, help="source modes")
    p.set_defaults(handler=_cmd_example_ex2)

    p = sub.add_parser("dirac", parents=[common], help="chiral shift Hilbert-Schmidt ladder")
    p.add_argument(
        "--n-max-ladder",
        default="256,1024,4096",
        help="comma-separated increasing Fourier cutoffs",
    )
    p.add_argument(
        "--localization-n-max",
        type=int,
        default=128,
        help="window size for the off-interval localization sample",
    )
    p.set_defaults(handler=_cmd_dirac)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        report, passed, table, series = args.handler(args)
        _emit(args, report, table, series)
    except _InputError as exc:
        print(f"fockimpl: input error: {exc}", file=sys.stderr)
        return 3
    except (StructuralError, PreconditionError, ResourceError) as exc:
        print(f"fockimpl: input error: {exc}", file=sys.stderr)
        return 3
    except NumericalValidityError as exc:
        print(f"fockimpl: assertion failed: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"fockimpl: input error: {exc}", file=sys.stderr)
        return 3
    return 0 if passed else 2


if __name__ == "__main__":
    sys.exit(main())
