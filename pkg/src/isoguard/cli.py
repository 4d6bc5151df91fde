"""``isoguard`` command line.

Every subcommand parses its inputs, calls one library function and
formats the result. Output goes to ``--out`` or stdout and never contains
timestamps; ``--meta`` writes run metadata to a separate JSON sidecar.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .attacks import (
    SourceArchitecture,
    distance_penalty,
    laser_damage_guard,
    laser_seeding_budget,
    load_architecture,
    reports_to_csv,
    trojan_horse_budget,
)
from .bench import (
    ProcedureConfig,
    SetupModel,
    Readings,
    estimate_from_readings,
    replay_readings,
    run_procedure,
    simulate_meters,
)
from .errors import CalibrationDiverged, IsoguardError
from .fixtures import ingest_fixture
from .magneto_optics import (
    FaradayStage,
    MaterialParams,
    calibrate_material,
    curve_to_csv,
    isolation_curve,
    temperature_grid,
)
from .materials import DEFAULT_THETA_REF, INITIAL_GUESS, default_material, format_material, load_material
from .units import fmt, parse_power

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_CALIBRATION_POOR = 4
EXIT_CALIBRATION_DIVERGED = 5

EXIT_CODES_HELP = f"""\
exit codes:
  {EXIT_OK}  success
  {EXIT_USAGE}  usage error (bad or missing flags)
  {EXIT_INPUT}  input error (file missing or unparsable, value out of range)
  {EXIT_CALIBRATION_POOR}  fit-material: fit written but some anchor misses by more than --tolerance
  {EXIT_CALIBRATION_DIVERGED}  fit-material: fit did not improve on the initial parameters

environment:
  ISOGUARD_FIXTURE_PATH  extra directories (os.pathsep separated) searched for fixture names
"""

# flags whose values may start with "-" (e.g. --range -20:175:1)
_SIGNED_VALUE_FLAGS = ("--range", "--anchors", "--power-range")


class InputError(Exception):
    """Bad input file or value; reported on one line with exit code 3."""


def _power(text: str) -> float:
    try:
        return parse_power(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"expected start:stop[:step], got {text!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric range {text!r}") from None
    start, stop = vals[0], vals[1]
    step = vals[2] if len(vals) == 3 else 1.0
    if not (step > 0 and stop >= start):
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return start, stop, step


def _power_range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
    start, stop, step = (_power(p) for p in parts)
    if not (step > 0 and stop >= start):
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return start, stop, step


def _anchors(text: str) -> list[tuple[float, float]]:
    out = []
    for item in text.split(","):
        try:
            t, iso = item.split(":")
            out.append((float(t), float(iso)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"anchor {item!r} is not temperature:isolation") from None
    return out


def _resolve_material(ref: str) -> MaterialParams:
    path = Path(ref)
    if path.is_file():
        return load_material(path)
    try:
        return default_material(ref)
    except KeyError:
        raise InputError(f"--material {ref!r}: not a file and not one of tgg, yig, biyig") from None


def _read_anchor_file(path: str) -> list[tuple[float, float]]:
    out = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.replace(" ", "") == "temperature_c,isolation_db":
            continue
        try:
            t, iso = (float(c) for c in line.split(","))
        except ValueError:
            raise InputError(f"{path}:{lineno}: expected temperature_c,isolation_db") from None
        out.append((t, iso))
    return out


def _architecture(args: argparse.Namespace) -> SourceArchitecture:
    if args.arch:
        return load_architecture(args.arch)
    if not args.fixture:
        raise InputError("give --arch or --fixture")
    return SourceArchitecture(
        sacrificial=ingest_fixture(args.fixture),
        downstream_isolation=tuple(args.downstream),
        laser_builtin_isolation=args.builtin,
    )


def _dump_json(obj: object) -> str:
    return json.dumps(obj, indent=2) + "\n"


# -- subcommands -------------------------------------------------------------

def cmd_material_curve(args: argparse.Namespace) -> tuple[str, int]:
    material = _resolve_material(args.material)
    stage = FaradayStage(material, args.theta_ref, t_ref=args.t_ref, beta=args.beta, cap_db=args.cap_db)
    t_min, t_max, step = args.range or (material.t_valid_min_c, material.t_valid_max_c, 1.0)
    points = isolation_curve(stage, t_min, t_max, step)
    if args.format == "json":
        return _dump_json([p._asdict() for p in points]), EXIT_OK
    return curve_to_csv(points), EXIT_OK


def cmd_fit_material(args: argparse.Namespace) -> tuple[str, int]:
    if args.anchors_file:
        anchors = _read_anchor_file(args.anchors_file)
    elif args.anchors:
        anchors = args.anchors
    else:
        raise InputError("give --anchors or --anchors-file")
    key = args.initial.strip()
    initial = INITIAL_GUESS.get(key) or next(
        (v for k, v in INITIAL_GUESS.items() if k.lower() == key.lower()), None)
    if initial is None:
        initial = _resolve_material(key)
    if args.name:
        initial = replace(initial, name=args.name)
    stage = FaradayStage(initial, args.theta_ref, t_ref=args.t_ref, beta=args.beta)
    result = calibrate_material(anchors, stage, initial, tolerance_db=args.tolerance)
    code = EXIT_CALIBRATION_POOR if result.poor else EXIT_OK
    if args.format == "json":
        body = {
            "material": {k: v for k, v in vars(result.material).items()},
            "rms_error_db": result.rms_error_db,
            "max_error_db": result.max_error_db,
            "tolerance_db": result.tolerance_db,
            "anchor_errors_db": list(result.anchor_errors_db),
            "poor": result.poor,
        }
        return _dump_json(body), code
    header = (f"fitted to {len(anchors)} anchors; rms error {fmt(result.rms_error_db)} dB, "
              f"max error {fmt(result.max_error_db)} dB"
              + (f" (POOR: tolerance {fmt(result.tolerance_db)} dB)" if result.poor else ""))
    return format_material(result.material, header), code


def cmd_bench(args: argparse.Namespace) -> tuple[str, int]:
    sample = ingest_fixture(args.fixture)
    cfg = ProcedureConfig(
        start_power=args.start_power,
        step=args.step,
        stop_power=args.stop_power,
        base_exposure=args.base_exposure,
        extended_exposure=args.extended_exposure,
        stop_on_destruction=not args.continue_after_destruction,
    )
    log = run_procedure(sample, cfg)
    if args.format == "json":
        s = log.summary
        body = {
            "entries": [e._asdict() for e in log.entries],
            "summary": {**vars(s), "damage": list(s.damage) if s.damage else None,
                        "table_row": s.table_row()},
        }
        return _dump_json(body), EXIT_OK
    return log.to_csv(), EXIT_OK


def cmd_attack_seeding(args: argparse.Namespace) -> tuple[str, int]:
    arch = _architecture(args)
    reports = [laser_seeding_budget(arch, p, mode=args.mode) for p in args.power]
    if args.format == "json":
        return _dump_json([json.loads(r.to_json()) for r in reports]), EXIT_OK
    return reports_to_csv(reports), EXIT_OK


def cmd_attack_damage(args: argparse.Namespace) -> tuple[str, int]:
    arch = _architecture(args)
    powers = list(args.power or [])
    if args.power_range:
        powers += temperature_grid(*args.power_range)
    if not powers:
        raise InputError("give --power or --power-range")
    reports = [laser_damage_guard(arch, p, exposure=args.exposure) for p in powers]
    if args.format == "json":
        return _dump_json([json.loads(r.to_json()) for r in reports]), EXIT_OK
    return reports_to_csv(reports), EXIT_OK


def cmd_attack_trojan(args: argparse.Namespace) -> tuple[str, int]:
    if args.delta is not None:
        deltas = [("", d) for d in args.delta]
    elif args.fixture:
        deltas = []
        for ref in args.fixture:
            s = run_procedure(ingest_fixture(ref)).summary
            deltas.append((s.sample, s.max_decrease_db))
    else:
        raise InputError("give --delta or --fixture")
    rows = []
    for sample, d in deltas:
        b = trojan_horse_budget(d)
        km = distance_penalty(d, args.slope) if args.slope else None
        rows.append({"sample": sample, "delta_db": d, "multiplier": b.multiplier,
                     "orders": b.orders, "distance_penalty_km": km})
    if args.format == "json":
        return _dump_json(rows), EXIT_OK
    lines = ["sample,delta_db,multiplier,orders,distance_penalty_km"]
    lines += [",".join([r["sample"], fmt(r["delta_db"]), fmt(r["multiplier"]), fmt(r["orders"]),
                        fmt(r["distance_penalty_km"])]) for r in rows]
    return "\n".join(lines) + "\n", EXIT_OK


def cmd_meters(args: argparse.Namespace) -> tuple[str, int]:
    setup = SetupModel()
    readings_given = [args.opm1, args.opm2, args.opm3]
    if all(r is not None for r in readings_given):
        readings = Readings(*readings_given)
        iso, il = estimate_from_readings(setup, readings)
    elif any(r is not None for r in readings_given):
        raise InputError("give all of --opm1, --opm2, --opm3")
    elif args.power is None:
        raise InputError("give --power (with --isolation/--insertion-loss or --fixture) or --opm1/2/3")
    elif args.fixture:
        readings = replay_readings(setup, ingest_fixture(args.fixture), args.power)
        iso, il = estimate_from_readings(setup, readings)
    elif args.isolation is not None and args.insertion_loss is not None:
        readings = simulate_meters(setup, args.power, args.isolation, args.insertion_loss)
        iso, il = args.isolation, args.insertion_loss
    else:
        raise InputError("give --isolation and --insertion-loss, or --fixture, with --power")
    row = {"opm1_w": readings.opm1, "opm2_w": readings.opm2, "opm3_w": readings.opm3,
           "isolation_db": iso, "insertion_loss_db": il}
    if args.format == "json":
        return _dump_json(row), EXIT_OK
    return ",".join(row) + "\n" + ",".join(fmt(v) for v in row.values()) + "\n", EXIT_OK


# -- parser ------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--meta", help="write run metadata (command, arguments, version) to this JSON file")


def _arch_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--arch", help="architecture file (key = value)")
    g.add_argument("--fixture", help="sacrificial component fixture (path or name)")
    p.add_argument("--downstream", type=float, nargs="*", default=[],
                   help="with --fixture: isolation (dB) of each downstream component")
    p.add_argument("--builtin", type=float, default=30.0,
                   help="with --fixture: laser built-in isolation in dB (default 30)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isoguard",
        description="Isolator/circulator degradation under high-power injection and QKD attack budgets.",
        epilog=EXIT_CODES_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, func: Callable, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_, description=help_, epilog=EXIT_CODES_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(func=func)
        _common(p)
        return p

    p = add("material-curve", cmd_material_curve, "isolation vs temperature for a single-stage isolator")
    p.add_argument("--material", required=True, help="tgg, yig, biyig or a material file")
    p.add_argument("--beta", type=float, default=45.0, help="analyzer angle, deg")
    p.add_argument("--theta-ref", type=float, default=DEFAULT_THETA_REF, help="rotation at --t-ref, deg")
    p.add_argument("--t-ref", type=float, default=25.0, help="reference temperature, degC")
    p.add_argument("--cap-db", type=float, default=120.0, help="isolation ceiling, dB")
    p.add_argument("--range", type=_range, help="start:stop[:step] in degC (default: validity range, 1 C)")

    p = add("fit-material", cmd_fit_material, "fit Verdet parameters to isolation anchors")
    p.add_argument("--anchors", type=_anchors, help="comma list of temperature:isolation, e.g. 25:40,70:30")
    p.add_argument("--anchors-file", help="CSV with temperature_c,isolation_db rows")
    p.add_argument("--initial", default="YIG", help="initial guess: YIG, TGG, BiYIG or a material file")
    p.add_argument("--name", help="name for the fitted material")
    p.add_argument("--beta", type=float, default=45.0)
    p.add_argument("--theta-ref", type=float, default=DEFAULT_THETA_REF)
    p.add_argument("--t-ref", type=float, default=25.0)
    p.add_argument("--tolerance", type=float, default=2.0, help="max anchor miss before flagging, dB")

    p = add("bench", cmd_bench, "emulate the stepwise illumination procedure on a fixture")
    p.add_argument("--fixture", required=True, help="fixture path or name")
    p.add_argument("--start-power", type=_power, default=0.16)
    p.add_argument("--step", type=_power, help="fixed power step (default: follow the fixture's powers)")
    p.add_argument("--stop-power", type=_power)
    p.add_argument("--base-exposure", type=float, default=60.0, help="s")
    p.add_argument("--extended-exposure", type=float, default=900.0, help="s")
    p.add_argument("--continue-after-destruction", action="store_true")

    p = add("attack-seeding", cmd_attack_seeding, "laser-seeding budget behind a sacrificial component")
    _arch_flags(p)
    p.add_argument("--power", type=_power, nargs="+", required=True, help="injected power(s), e.g. 10 or 500mW")
    p.add_argument("--mode", choices=("worst", "point"), default="worst")

    p = add("attack-damage", cmd_attack_damage, "laser-damage verdicts for injected powers")
    _arch_flags(p)
    p.add_argument("--power", type=_power, nargs="+")
    p.add_argument("--power-range", type=_power_range, help="start:stop:step sweep of injected power")
    p.add_argument("--exposure", type=float, default=0.0, help="exposure time, s")

    p = add("attack-trojan", cmd_attack_trojan, "Trojan-horse photon budget growth from lost isolation")
    p.add_argument("--delta", type=float, nargs="+", help="isolation decrease(s), dB")
    p.add_argument("--fixture", nargs="+", help="use each fixture's maximum decrease instead")
    p.add_argument("--slope", type=float, help="fiber loss, dB/km, to express the loss as distance")

    p = add("meters", cmd_meters, "simulate or invert the bench power-meter readings")
    p.add_argument("--power", type=_power, help="HPL power launched into the sample")
    p.add_argument("--isolation", type=float, help="dB")
    p.add_argument("--insertion-loss", type=float, help="dB")
    p.add_argument("--fixture", help="replay a fixture at --power")
    p.add_argument("--opm1", type=_power)
    p.add_argument("--opm2", type=_power)
    p.add_argument("--opm3", type=_power)
    return parser


def _join_signed_values(argv: Sequence[str]) -> list[str]:
    out: list[str] = []
    it = iter(argv)
    for a in it:
        if a in _SIGNED_VALUE_FLAGS:
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def _write_meta(path: str, args: argparse.Namespace, code: int) -> None:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "meta")}
    meta = {"tool": "isoguard", "version": __version__, "command": args.command,
            "arguments": params, "exit_code": code}
    Path(path).write_text(json.dumps(meta, indent=2, default=str) + "\n", encoding="utf-8")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = _join_signed_values(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text, code = args.func(args)
    except CalibrationDiverged as exc:
        print(f"isoguard {args.command}: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION_DIVERGED
    except (InputError, IsoguardError, OSError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"isoguard {args.command}: {msg}", file=sys.stderr)
        return EXIT_INPUT
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.meta:
        _write_meta(args.meta, args, code)
    if code == EXIT_CALIBRATION_POOR:
        print(f"isoguard {args.command}: calibration poor (anchor miss above tolerance)", file=sys.stderr)
    return code
