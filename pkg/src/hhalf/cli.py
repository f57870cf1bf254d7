"""Batch front end: JSON descriptors in, JSON and CSV reports out.

Every subcommand reads its inputs (inline JSON or file paths), runs
one library operation, prints a JSON report to stdout, and optionally
writes it to a file; rauch-check, kernel, and energy also emit a CSV
convergence table next to the report.  Reports are byte identical for
identical config and seed.  Exit codes: 0 success, 1 input validation
failure, 2 numerical failure.
"""

import argparse
import csv
import json
import os
import sys

from dataclasses import replace

import numpy as np

from .catalog import trial_functions
from .config import config_from_env
from .errors import NumericalError, ValidationError
from .fourier import (
    SampleGrid,
    douglas_energy,
    from_modes,
    function_from_json,
    function_to_json,
    h_half_norm,
    hilbert_transform,
    norm_squared,
)
from .maps import descriptor_from_json, descriptor_to_json, make_map
from .period import (
    PeriodMatrix,
    equivariance_defect,
    integrability_residual,
    period_from_json,
    period_matrix,
    period_to_json,
    rauch_derivative,
    rauch_fd_defect,
    siegel_action,
    siegel_membership,
    siegel_report_to_json,
)
from .pullback import (
    BlockOperator,
    operator_from_json,
    operator_to_json,
    pullback_matrix,
)
from .quantum import (
    default_deltas,
    diagonal_report,
    hs_bracket_check,
    hs_norm,
    kernel_eval,
    quantum_derivative_matrix,
)
from .suite import run_all

kernel_base_points = (0.0, np.pi / 3.0, 1.0)


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; route everything
    # through the validation channel so bad input is always exit 1.
    def error(self, message):
        raise ValidationError(message)


def _json_argument(value, flag):
    """Inline JSON when the value starts with '{', else a file path."""
    if value.lstrip().startswith("{"):
        try:
            return json.loads(value)
        except json.JSONDecodeError as exc:
            raise ValidationError("%s is not valid JSON: %s" % (flag, exc))
    try:
        with open(value) as handle:
            return json.load(handle)
    except OSError as exc:
        raise ValidationError("cannot read %s file: %s" % (flag, exc))
    except json.JSONDecodeError as exc:
        raise ValidationError(
            "%s file %s is not valid JSON: %s" % (flag, value, exc)
        )


def _function_from_modes(obj):
    if not isinstance(obj, dict) or not obj:
        raise ValidationError(
            '--modes wants a nonempty object like {"1": [0.5, 0.0]}'
        )
    modes = {}
    for key, value in obj.items():
        try:
            n = int(key)
        except ValueError:
            raise ValidationError("mode index %r is not an integer" % (key,))
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            modes[n] = complex(value)
        elif (
            isinstance(value, list)
            and len(value) == 2
            and all(isinstance(part, (int, float)) for part in value)
        ):
            modes[n] = complex(value[0], value[1])
        else:
            raise ValidationError(
                "mode %s must be a number or an [re, im] pair" % key
            )
    bandlimit = max(abs(n) for n in modes)
    if bandlimit == 0:
        raise ValidationError("--modes needs at least one nonzero index")
    return from_modes(bandlimit, modes)


def _function_argument(args):
    given_input = getattr(args, "input", None) is not None
    given_modes = getattr(args, "modes", None) is not None
    if given_input == given_modes:
        raise ValidationError("give exactly one of --input or --modes")
    if given_input:
        return function_from_json(_json_argument(args.input, "--input"))
    return _function_from_modes(_json_argument(args.modes, "--modes"))


def _descriptor_argument(value):
    return descriptor_from_json(_json_argument(value, "--map"))


def _single_map(args):
    maps = getattr(args, "map", None) or []
    if len(maps) != 1:
        raise ValidationError("this subcommand wants --map exactly once")
    return _descriptor_argument(maps[0])


def _matrix_argument(value):
    obj = _json_argument(value, "--matrix")
    if isinstance(obj, dict) and "Z" in obj:
        return period_from_json(obj)
    if isinstance(obj, dict) and "A" in obj and "B" in obj:
        return operator_from_json(obj)
    raise ValidationError(
        "--matrix wants a period matrix or a block operator object"
    )


def _tolerance(args, default):
    value = getattr(args, "tol", None)
    if value is None:
        return default
    if not value > 0.0:
        raise ValidationError("--tol must be positive")
    return float(value)


def _window_argument(args):
    value = getattr(args, "window", None)
    if value is None:
        return default_deltas
    try:
        return tuple(float(part) for part in value.split(","))
    except ValueError:
        raise ValidationError(
            "--window wants comma separated deltas, largest first"
        )


def _resolve_config(args):
    cfg = config_from_env()
    updates = {}
    if getattr(args, "grid", None) is not None:
        updates["grid_size"] = args.grid
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        updates["out"] = args.out
    return replace(cfg, **updates) if updates else cfg


def _grid(cfg):
    return SampleGrid(cfg.grid_size)


def _cmd_norm(args, cfg):
    f = _function_argument(args)
    report = {
        "command": "norm",
        "bandlimit": f.bandlimit,
        "h_half_norm": h_half_norm(f),
        "norm_squared": norm_squared(f),
    }
    return report, None, 0


def _cmd_hilbert(args, cfg):
    f = _function_argument(args)
    return function_to_json(hilbert_transform(f)), None, 0


def _cmd_energy(args, cfg):
    f = _function_argument(args)
    tol = _tolerance(args, cfg.spectral_tol)
    target = norm_squared(f)
    sizes, m = [], 8
    while m < cfg.grid_size:
        sizes.append(m)
        m *= 2
    sizes.append(cfg.grid_size)
    curve = []
    for m in sizes:
        value = douglas_energy(f, SampleGrid(m, np.pi / m))
        defect = abs(value - target) / target if target else abs(value)
        curve.append(
            {"grid_size": m, "douglas_energy": value, "relative_defect": defect}
        )
    final = curve[-1]
    report = {
        "command": "energy",
        "bandlimit": f.bandlimit,
        "grid_size": cfg.grid_size,
        "douglas_energy": final["douglas_energy"],
        "h_half_norm_squared": target,
        "relative_defect": final["relative_defect"],
        "tol": tol,
        "within_tol": bool(final["relative_defect"] <= tol),
        "curve": curve,
    }
    rows = [
        (row["grid_size"], row["douglas_energy"], row["relative_defect"])
        for row in curve
    ]
    return report, (("grid_size", "douglas_energy", "relative_defect"), rows), 0


def _cmd_pullback_matrix(args, cfg):
    grid = _grid(cfg)
    m = make_map(_single_map(args), grid)
    return operator_to_json(pullback_matrix(m, cfg.cutoff, grid)), None, 0


def _cmd_period(args, cfg):
    grid = _grid(cfg)
    m = make_map(_single_map(args), grid)
    return period_to_json(period_matrix(m, cfg.cutoff, grid)), None, 0


def _period_argument(args, cfg):
    given_map = bool(getattr(args, "map", None))
    given_matrix = getattr(args, "matrix", None) is not None
    if given_map == given_matrix:
        raise ValidationError("give exactly one of --map or --matrix")
    if given_map:
        grid = _grid(cfg)
        m = make_map(_single_map(args), grid)
        return period_matrix(m, cfg.cutoff, grid)
    loaded = _matrix_argument(args.matrix)
    if isinstance(loaded, BlockOperator):
        basepoint = PeriodMatrix(
            loaded.cutoff, np.zeros((loaded.cutoff, loaded.cutoff))
        )
        return siegel_action(loaded, basepoint)
    return loaded


def _cmd_siegel_check(args, cfg):
    tol = _tolerance(args, cfg.matrix_tol)
    p = _period_argument(args, cfg)
    report = siegel_membership(p, tol)
    symmetric = report.symmetry_defect <= tol * (1.0 + report.sigma_max)
    out = {
        "command": "siegel-check",
        "cutoff": p.cutoff,
        "tol": tol,
        "member": bool(report.member),
        "symmetric": bool(symmetric),
        "passed": bool(report.member and symmetric),
        "report": siegel_report_to_json(report),
    }
    return out, None, 0


def _cmd_rauch_check(args, cfg):
    if args.m is None:
        raise ValidationError("rauch-check needs --m")
    eps = 1e-3 if args.eps is None else args.eps
    if not eps > 0.0:
        raise ValidationError("--eps must be positive")
    grid = _grid(cfg)
    derivative = rauch_derivative(args.m, cfg.cutoff)
    entries = [
        [int(r) + 1, int(s) + 1, float(derivative[r, s].real)]
        for r, s in zip(*np.nonzero(derivative))
    ]
    bound = 0.05 * float(np.max(np.abs(derivative)))
    curve = []
    previous = None
    for k in range(3):
        step = eps / 2.0**k
        defect = rauch_fd_defect(args.m, step, cfg.cutoff, grid)
        ratio = None if previous is None else defect / previous
        curve.append({"eps": step, "defect": defect, "ratio": ratio})
        previous = defect
    report = {
        "command": "rauch-check",
        "m": args.m,
        "eps": eps,
        "cutoff": cfg.cutoff,
        "grid_size": cfg.grid_size,
        "defect": curve[0]["defect"],
        "bound": bound,
        "within_bound": bool(curve[0]["defect"] <= bound),
        "derivative_entries": entries,
        "curve": curve,
    }
    rows = [
        (row["eps"], row["defect"], "" if row["ratio"] is None else row["ratio"])
        for row in curve
    ]
    return report, (("eps", "defect", "ratio"), rows), 0


def _cmd_equivariance(args, cfg):
    maps = getattr(args, "map", None) or []
    if len(maps) != 2:
        raise ValidationError("equivariance wants --map twice: outer, inner")
    outer_d = _descriptor_argument(maps[0])
    inner_d = _descriptor_argument(maps[1])
    grid = _grid(cfg)
    defect = equivariance_defect(
        make_map(outer_d, grid), make_map(inner_d, grid), cfg.cutoff, grid
    )
    tol = _tolerance(args, cfg.matrix_tol)
    report = {
        "command": "equivariance",
        "cutoff": cfg.cutoff,
        "grid_size": cfg.grid_size,
        "outer": descriptor_to_json(outer_d),
        "inner": descriptor_to_json(inner_d),
        "defect": defect,
        "tol": tol,
        "within_tol": bool(defect <= tol),
    }
    return report, None, 0


def _cmd_integrability(args, cfg):
    tol = _tolerance(args, cfg.matrix_tol)
    given_map = bool(getattr(args, "map", None))
    given_matrix = getattr(args, "matrix", None) is not None
    if given_map == given_matrix:
        raise ValidationError("give exactly one of --map or --matrix")
    grid = _grid(cfg)
    trials = trial_functions(4, 8, cfg.seed)
    if given_map:
        source = make_map(_single_map(args), grid)
        cutoff = cfg.cutoff
        residual = integrability_residual(source, trials, grid, cutoff)
    else:
        source = _matrix_argument(args.matrix)
        cutoff = source.cutoff
        residual = integrability_residual(source, trials, grid)
    report = {
        "command": "integrability",
        "cutoff": cutoff,
        "grid_size": cfg.grid_size,
        "seed": cfg.seed,
        "trial_count": 4,
        "trial_bandlimit": 8,
        "residual": residual,
        "tol": tol,
        "within_tol": bool(residual <= tol),
    }
    return report, None, 0


def _cmd_quantum_hs(args, cfg):
    f = _function_argument(args)
    cutoff = max(2 * f.bandlimit, 1)
    value = hs_norm(quantum_derivative_matrix(f, cutoff))
    squared_norm = norm_squared(f)
    report = {
        "command": "quantum-hs",
        "bandlimit": f.bandlimit,
        "cutoff": cutoff,
        "hs_norm": value,
        "hs_norm_squared": value * value,
        "h_half_norm_squared": squared_norm,
        "lower_bound": 2.0 * squared_norm,
        "upper_bound": 4.0 * squared_norm,
    }
    if f.real:
        low, high = hs_bracket_check(f)
        report["bracket_holds"] = [bool(low), bool(high)]
    else:
        report["bracket_holds"] = None
    return report, None, 0


def _cmd_kernel(args, cfg):
    if args.order is None:
        raise ValidationError("kernel needs --order 0, 1, or 2")
    d = _single_map(args)
    h = make_map(d, _grid(cfg))
    deltas = _window_argument(args)
    tol = _tolerance(args, cfg.spectral_tol)
    points = [
        diagonal_report(h, args.order, x, deltas) for x in kernel_base_points
    ]
    worst = max(point["defect"] for point in points)
    rows = []
    for x in kernel_base_points:
        for delta in deltas:
            rows.append(
                (x, delta, float(kernel_eval(h, args.order, x, x + delta)))
            )
    report = {
        "command": "kernel",
        "order": args.order,
        "map": descriptor_to_json(d),
        "deltas": [float(delta) for delta in deltas],
        "base_points": list(kernel_base_points),
        "points": points,
        "worst_defect": worst,
        "tol": tol,
        "within_tol": bool(worst <= tol),
    }
    return report, (("x", "delta", "kernel_value"), rows), 0


def _cmd_invariance_suite(args, cfg):
    results = run_all(cfg.seed)
    rows = [
        {
            "criterion": result.criterion,
            "name": result.name,
            "passed": result.passed,
            "detail": result.detail,
        }
        for result in results
    ]
    all_passed = all(result.passed for result in results)
    report = {
        "command": "invariance-suite",
        "seed": cfg.seed,
        "all_passed": bool(all_passed),
        "criteria": rows,
    }
    return report, None, 0 if all_passed else 2


_handlers = {
    "norm": _cmd_norm,
    "hilbert": _cmd_hilbert,
    "energy": _cmd_energy,
    "pullback-matrix": _cmd_pullback_matrix,
    "period": _cmd_period,
    "siegel-check": _cmd_siegel_check,
    "rauch-check": _cmd_rauch_check,
    "equivariance": _cmd_equivariance,
    "integrability": _cmd_integrability,
    "quantum-hs": _cmd_quantum_hs,
    "kernel": _cmd_kernel,
    "invariance-suite": _cmd_invariance_suite,
}


def _add_common(parser):
    parser.add_argument("--grid", type=int, help="sample count M")
    parser.add_argument("--seed", type=int, help="seed for randomized trials")
    parser.add_argument("--out", help="report path; .csv selects the table")
    parser.add_argument("--tol", type=float, help="pass tolerance")


def _build_parser():
    parser = _Parser(
        prog="hhalf",
        description="Half-order circle calculus: norms, pullbacks, periods.",
    )
    sub = parser.add_subparsers(
        dest="command", required=True, parser_class=_Parser
    )

    helps = {
        "norm": "H^{1/2} norm of a circle function",
        "hilbert": "apply the Hilbert transform; emits a function object",
        "energy": "douglas energy with a grid convergence table",
        "pullback-matrix": "block operator of a circle map; emits an operator",
        "period": "period matrix of a circle map; emits a period object",
        "siegel-check": "siegel disc membership of a period matrix",
        "rauch-check": "finite-difference check of the derivative formula",
        "equivariance": "composition equivariance of the period map",
        "integrability": "multiplication-closure residual of a structure",
        "quantum-hs": "hilbert-schmidt norm of the quantum derivative",
        "kernel": "welding kernel diagonal limits with a value table",
        "invariance-suite": "run the full property catalog",
    }
    parsers = {}
    for name in _handlers:
        parsers[name] = sub.add_parser(name, help=helps[name])
        _add_common(parsers[name])

    for name in ("norm", "hilbert", "energy", "quantum-hs"):
        parsers[name].add_argument("--input", help="circle function JSON")
        parsers[name].add_argument("--modes", help='inline modes {"n": value}')
    for name in (
        "pullback-matrix",
        "period",
        "siegel-check",
        "equivariance",
        "integrability",
        "kernel",
    ):
        parsers[name].add_argument(
            "--map",
            action="append",
            help="map descriptor JSON (twice for equivariance: outer, inner)",
        )
    for name in ("siegel-check", "integrability"):
        parsers[name].add_argument(
            "--matrix", help="period matrix or block operator JSON"
        )
    parsers["rauch-check"].add_argument(
        "--m", type=int, help="monomial direction degree"
    )
    parsers["rauch-check"].add_argument(
        "--eps", type=float, help="finite difference step (default 1e-3)"
    )
    parsers["kernel"].add_argument(
        "--order", type=int, choices=(0, 1, 2), help="kernel order"
    )
    parsers["kernel"].add_argument(
        "--window", help="comma separated deltas, largest first"
    )
    return parser


def _write_csv(path, header, rows):
    def cell(value):
        if isinstance(value, float):
            return repr(float(value))
        return value

    try:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            for row in rows:
                writer.writerow([cell(value) for value in row])
    except OSError as exc:
        raise ValidationError("cannot write %s: %s" % (path, exc))


def _emit(report, curve, out):
    # Files are written before stdout so a closed pipe cannot lose them.
    text = json.dumps(report, indent=2, sort_keys=True)
    if out is not None:
        if out.endswith(".csv"):
            if curve is None:
                raise ValidationError(
                    "this subcommand has no CSV table; use a .json output path"
                )
            _write_csv(out, *curve)
        else:
            try:
                with open(out, "w") as handle:
                    handle.write(text + "\n")
            except OSError as exc:
                raise ValidationError("cannot write %s: %s" % (out, exc))
            if curve is not None:
                _write_csv(os.path.splitext(out)[0] + ".csv", *curve)
    print(text)


def run_command(argv):
    """Parse argv, run one subcommand, emit reports; returns exit code."""
    try:
        args = _build_parser().parse_args(argv)
        cfg = _resolve_config(args)
        report, curve, code = _handlers[args.command](args, cfg)
        _emit(report, curve, cfg.out)
        return code
    except ValidationError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except NumericalError as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return 2
    except BrokenPipeError:
        # The consumer closed stdout early (e.g. head); park stdout on
        # devnull so interpreter shutdown does not raise again.
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


def main(argv=None):
    return run_command(list(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    sys.exit(main())
