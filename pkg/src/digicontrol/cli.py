"""``digicontrol`` command line: design, sweep, simulate and curves.

Flags given on the command line override values from ``--config`` (a JSON
object whose keys are the long flag names, with ``-`` or ``_``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, design_freq, design_poly, realize, sweep
from .controller import Controller, DesignError
from .plant import ContinuousPlant, discretize
from .polyalg import poly_roots

EXIT_DESIGN_ERROR = 2

# Built-in defaults, applied after the config file.
DEFAULTS = {
    "sigma": -10.0,
    "fs": 100.0,
    "integrator": False,
    "structure": "pd",
    "phase_margin": 30.0,
    "input": "step",
    "disturbance": "zero",
    "input_amplitude": 1.0,
    "disturbance_amplitude": 1.0,
    "samples": 200,
    "perturb_delay": 0,
    "format": None,
    "jobs": 1,
    "points": analysis.GRID_POINTS,
}


class UsageError(Exception):
    pass


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _unit_interval(text) -> float:
    value = float(text)
    if not 0.0 <= value < 1.0:
        raise argparse.ArgumentTypeError(f"p must lie in [0, 1), got {value}")
    return value


# ---------------------------------------------------------------- parser


def _add_plant_flags(p):
    p.add_argument("--sigma", type=float, help="plant pole in 1/s (default -10)")
    p.add_argument("--fs", type=float, help="sample rate in Hz (default 100)")


def _add_output_flags(p):
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out", help="output path (default stdout)")


def _add_tuning_flags(p, with_method: bool):
    if with_method:
        p.add_argument("--method", choices=("poly", "freq"),
                       help="inline design method (alternative to --controller)")
        p.add_argument("--controller", help="controller JSON written by 'design'")
    p.add_argument("--p", type=_unit_interval, help="closed-loop pole position in [0, 1)")
    p.add_argument("--integrator", type=parse_bool, help="add a loop integrator (poly)")
    p.add_argument("--structure", choices=("pd", "pid"))
    p.add_argument("--bandwidth", type=float, help="crossover target in cycles/sample")
    p.add_argument("--phase-margin", type=float, help="phase margin in degrees")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="digicontrol", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file with default flag values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="design one controller and report its margins")
    p.add_argument("method", choices=("poly", "freq"))
    _add_plant_flags(p)
    _add_tuning_flags(p, with_method=False)
    p.add_argument("--out")

    p = sub.add_parser("sweep", help="tabulate margins over a tuning grid")
    p.add_argument("method", nargs="?", choices=("poly", "freq"))
    p.add_argument("--grid", help="start:step:stop or comma list (p or bandwidth values)")
    p.add_argument("--table", type=int, choices=sorted(sweep.TABLE_GRIDS),
                   help="use the method and grid of a reference table")
    p.add_argument("--jobs", type=int, help="worker threads (default 1)")
    _add_plant_flags(p)
    _add_tuning_flags(p, with_method=False)
    _add_output_flags(p)

    p = sub.add_parser("simulate", help="closed-loop time response")
    _add_plant_flags(p)
    _add_tuning_flags(p, with_method=True)
    p.add_argument("--input", help="reference: step, ramp, zero or a file of samples")
    p.add_argument("--disturbance", help="plant-input disturbance: step, ramp, zero or a file")
    p.add_argument("--input-amplitude", type=float)
    p.add_argument("--disturbance-amplitude", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--perturb-delay", type=int)
    _add_output_flags(p)

    p = sub.add_parser("curves", help="frequency-domain curves and pole/zero sets")
    p.add_argument("which", choices=("sensitivity", "loop", "nyquist", "pz"))
    p.add_argument("--points", type=int, help="frequency grid size")
    _add_plant_flags(p)
    _add_tuning_flags(p, with_method=True)
    _add_output_flags(p)
    return parser


def _load_config(path):
    if not path:
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve(args: argparse.Namespace, config: dict) -> argparse.Namespace:
    """Fill unset flags from the config file, then from built-in defaults."""
    merged = vars(args).copy()
    for key, value in merged.items():
        if value is None:
            if key in config:
                merged[key] = config[key]
            elif key in DEFAULTS:
                merged[key] = DEFAULTS[key]
    try:
        if merged.get("p") is not None:
            merged["p"] = _unit_interval(merged["p"])
        merged["integrator"] = parse_bool(merged.get("integrator", False))
    except argparse.ArgumentTypeError as exc:
        raise UsageError(str(exc)) from exc
    return argparse.Namespace(**merged)


# ---------------------------------------------------------------- helpers


def make_plant(args):
    return discretize(ContinuousPlant(float(args.sigma)), float(args.fs))


def design_from_args(plant, method, args) -> Controller:
    if method == "poly":
        if args.p is None:
            raise UsageError("--p is required for a polynomial design")
        return design_poly.design(plant, design_poly.PolePlacementSpec(args.p, args.integrator))
    if method == "freq":
        if args.bandwidth is None:
            raise UsageError("--bandwidth is required for a frequency design")
        try:
            spec = design_freq.FreqSpec.from_degrees(
                float(args.bandwidth), float(args.phase_margin), args.structure)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        return design_freq.design(plant, spec)
    raise UsageError(f"unknown method {method!r}")


def controller_from_args(plant, args) -> Controller:
    if getattr(args, "controller", None):
        with open(args.controller) as fh:
            data = json.load(fh)
        return Controller.from_dict(data.get("controller", data))
    if not getattr(args, "method", None):
        raise UsageError("give --controller FILE or --method poly|freq with tuning flags")
    return design_from_args(plant, args.method, args)


def _read_samples(path) -> list:
    text = Path(path).read_text()
    stripped = text.strip()
    if stripped.startswith("["):
        return [float(v) for v in json.loads(stripped)]
    values = []
    for line in stripped.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cell = line.split(",")[-1].strip()
        try:
            values.append(float(cell))
        except ValueError:
            continue  # header line
    return values


def make_signal(spec, amplitude):
    kind = str(spec)
    if kind in ("step", "ramp", "zero"):
        return realize.InputSignal(kind, float(amplitude))
    if not Path(kind).is_file():
        raise UsageError(f"input {kind!r} is neither step/ramp/zero nor a readable file")
    return realize.InputSignal.from_array(_read_samples(kind))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def to_json(data) -> str:
    return json.dumps(_jsonable(data), indent=2) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _complex_rows(kind, values):
    return [(kind, float(v.real), float(v.imag)) for v in np.atleast_1d(values)]


# ---------------------------------------------------------------- commands


def cmd_design(args) -> int:
    plant = make_plant(args)
    ctrl = design_from_args(plant, args.method, args)
    report = analysis.margins(plant, ctrl)
    payload = {"plant": plant.to_dict(), "controller": ctrl.to_dict(), "margins": report.to_dict()}
    emit(to_json(payload), args.out)
    if report.nominal_unstable:
        print(f"warning: closed loop is unstable (r0 = {report.r0:.4f})", file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    plant = make_plant(args)
    if args.table is not None:
        rows = sweep.table(plant, args.table, jobs=args.jobs)
    else:
        if args.method is None:
            raise UsageError("give a method (poly|freq) or --table N")
        try:
            grid = sweep.parse_grid(args.grid or "")
        except ValueError as exc:
            raise UsageError(f"bad --grid: {exc}") from exc
        options = ({"with_integrator": args.integrator} if args.method == "poly" else
                   {"structure": args.structure, "phi_deg": args.phase_margin})
        rows = sweep.sweep(plant, args.method, grid, jobs=args.jobs, **options)
    if args.format == "json":
        emit(to_json([r.to_dict() for r in rows]), args.out)
    else:
        emit(to_csv(sweep.COLUMNS, [r.values() for r in rows]), args.out)
    return 0


def cmd_simulate(args) -> int:
    plant = make_plant(args)
    ctrl = controller_from_args(plant, args)
    if args.samples < 1 or args.perturb_delay < 0:
        raise UsageError("--samples must be >= 1 and --perturb-delay >= 0")
    trace = realize.simulate(
        plant, ctrl,
        ref=make_signal(args.input, args.input_amplitude),
        dist=make_signal(args.disturbance, args.disturbance_amplitude),
        n_samples=args.samples,
        perturb_delay=args.perturb_delay,
    )
    if args.format == "json":
        emit(to_json(trace.to_dict()), args.out)
    else:
        emit(to_csv(trace.COLUMNS, trace.rows()), args.out)
    return 0


def _with_marker(grid, extra: dict):
    """Merge marker frequencies into the grid, keeping it strictly increasing."""
    omegas = list(grid)
    labels = [""] * len(omegas)
    for name, w in extra.items():
        if w is None:
            continue
        i = int(np.searchsorted(omegas, w))
        if i < len(omegas) and omegas[i] == w:
            labels[i] = name
        else:
            omegas.insert(i, w)
            labels.insert(i, name)
    return np.array(omegas), labels


def cmd_curves(args) -> int:
    plant = make_plant(args)
    ctrl = controller_from_args(plant, args)
    loop, closed = analysis.assemble(plant, ctrl)
    grid = analysis.default_grid(args.points)
    fmt = args.format or "csv"

    if args.which == "pz":
        cl = poly_roots(closed.char_poly).roots
        nz = np.flatnonzero(closed.numerators["r->y"])
        cl_zeros = poly_roots(closed.numerators["r->y"][nz[0]:]).roots if nz.size and \
            nz[0] < len(closed.char_poly) - 1 else np.zeros(0)
        groups = {
            "controller_pole": ctrl.poles,
            "controller_zero": ctrl.zeros,
            "closed_loop_pole": cl,
            "closed_loop_zero": cl_zeros,
        }
        if fmt == "json":
            emit(to_json({k: [{"re": float(v.real), "im": float(v.imag)} for v in vals]
                          for k, vals in groups.items()}), args.out)
        else:
            rows = [r for k, vals in groups.items() for r in _complex_rows(k, vals)]
            emit(to_csv(("kind", "re", "im"), rows), args.out)
        return 0

    if args.which == "nyquist":
        curve = analysis.nyquist_curve(loop, grid)
        if fmt == "json":
            emit(to_json(curve), args.out)
        else:
            markers = {k: (None if v is None else v[0]) for k, v in curve["markers"].items()}
            omegas, labels = _with_marker(grid, markers)
            values = loop(omegas)
            emit(to_csv(("omega", "re", "im", "marker"),
                        zip(omegas, values.real, values.imag, labels)), args.out)
        return 0

    if args.which == "sensitivity":
        _, peak_omega = analysis.sensitivity_peak(loop, grid)
        omegas, labels = _with_marker(grid, {"sens_peak": peak_omega})
        values = analysis.sensitivity(loop, omegas)
    else:
        omega_c, _ = analysis.gain_crossover(loop, grid)
        omegas, labels = _with_marker(grid, {"crossover": omega_c})
        values = loop(omegas)
    with np.errstate(divide="ignore"):
        mag_db = 20.0 * np.log10(np.abs(values))
    phase_deg = np.degrees(np.angle(values))
    if fmt == "json":
        emit(to_json({"which": args.which, "omega": omegas, "mag_db": mag_db,
                      "phase_deg": phase_deg, "marker": labels}), args.out)
    else:
        emit(to_csv(("omega", "mag_db", "phase_deg", "marker"),
                    zip(omegas, mag_db, phase_deg, labels)), args.out)
    return 0


COMMANDS = {
    "design": cmd_design,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "curves": cmd_curves,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = resolve(args, _load_config(args.config))
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except DesignError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DESIGN_ERROR
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
