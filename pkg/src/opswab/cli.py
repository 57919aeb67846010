"""Command line front end.

Subcommands: ``serve`` (websocket gateway), ``replay`` (scripted session to
a trace file), ``calibrate`` (bench measurements to a wrist calibration),
``workspace`` (reachable-point cloud and extents) and ``acceptance`` (the
operational criteria suite).  Every failure path exits nonzero with a
one-line message on stderr.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .config import RunConfig, default_config, load_config
from .errors import OpswabError


def _config_from(args: argparse.Namespace) -> RunConfig:
    if args.config is None:
        return default_config()
    return load_config(Path(args.config))


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import run_service

    config = _config_from(args)
    port = config.port if args.port is None else args.port
    print(f"listening on ws://{args.host}:{port} (lockstep path: /lockstep)")
    run_service(config, host=args.host, port=port)
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    from .replay import load_script, run_replay
    from .teleop import save_trace

    config = _config_from(args)
    script = load_script(Path(args.input))
    session, report = run_replay(config, script)
    save_trace(session.trace, Path(args.out))
    print(f"replayed {len(script)} steps into {report.rows} trace rows: {args.out}")
    print(
        f"final phase {session.phase.value}; sampling success {report.success} "
        f"(dwell {report.dwell_s:.2f} s, peak normal force "
        f"{report.max_normal_force_n:.3f} N)"
    )
    return 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    from .config import load_measured_effective, load_swabs
    from .stiffness import calibrate_from_effective, save_calibration

    pressures, measured = load_measured_effective(Path(args.table))
    swabs = load_swabs(Path(args.swabs))
    result = calibrate_from_effective(pressures, measured, swabs)
    for note in result.excluded:
        print(f"warning: excluded {note}", file=sys.stderr)
    save_calibration(result.table, Path(args.out))
    worst = max((max(v) for v in result.spread.values()), default=0.0)
    print(
        f"calibrated {len(pressures)} pressure rows from {len(swabs)} swabs "
        f"(worst kept-row spread {worst:.1%}): {args.out}"
    )
    return 0


def _cmd_workspace(args: argparse.Namespace) -> int:
    from .kinematics import HUMAN_WRIST_TRAVEL_MM, WristGeometry, workspace_sample

    n = args.samples
    cloud, extents = workspace_sample(
        WristGeometry(), n_alpha=n + n % 2, n_beta=n, n_length=n
    )
    with open(args.out, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(("x_mm", "y_mm", "z_mm"))
        for point in cloud:
            writer.writerow([repr(float(v)) for v in point])
    print(f"{len(cloud)} reachable tool points: {args.out}")
    for axis, (lo, hi) in extents.items():
        print(f"  {axis}: [{lo:8.2f}, {hi:8.2f}] mm  (span {hi - lo:.1f} mm)")
    print("human wrist travel, for comparison:")
    for name, value in HUMAN_WRIST_TRAVEL_MM.items():
        print(f"  {name}: {value} mm")
    return 0


def _cmd_acceptance(args: argparse.Namespace) -> int:
    from .acceptance import run_all

    config = _config_from(args)
    results = run_all(config)
    for result in results:
        print(result.line())
    passed = sum(result.passed for result in results)
    print(f"{passed}/{len(results)} criteria passed")
    return 0 if passed == len(results) else 1


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError("needs at least 2 samples per axis")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opswab",
        description="Teleoperated swab-sampling stack: gateway, replay and checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the websocket gateway")
    serve.add_argument("--config", default=None, help="INI run configuration")
    serve.add_argument("--port", type=int, default=None, help="override the config port")
    serve.add_argument("--host", default="127.0.0.1")
    serve.set_defaults(func=_cmd_serve)

    replay = sub.add_parser("replay", help="run a scripted session to a trace file")
    replay.add_argument("--config", default=None, help="INI run configuration")
    replay.add_argument("--input", required=True, help="step script CSV")
    replay.add_argument("--out", required=True, help="trace CSV to write")
    replay.set_defaults(func=_cmd_replay)

    calibrate = sub.add_parser(
        "calibrate", help="fit a wrist calibration from bench measurements"
    )
    calibrate.add_argument("--table", required=True, help="measured effective-stiffness CSV")
    calibrate.add_argument("--swabs", required=True, help="swab registry CSV")
    calibrate.add_argument("--out", required=True, help="calibration CSV to write")
    calibrate.set_defaults(func=_cmd_calibrate)

    workspace = sub.add_parser(
        "workspace", help="sample the reachable tool-point envelope"
    )
    workspace.add_argument("--samples", type=_positive_int, default=21,
                           help="grid resolution per configuration axis")
    workspace.add_argument("--out", required=True, help="point cloud CSV to write")
    workspace.set_defaults(func=_cmd_workspace)

    acceptance = sub.add_parser("acceptance", help="run the operational criteria suite")
    acceptance.add_argument("--config", default=None, help="INI run configuration")
    acceptance.set_defaults(func=_cmd_acceptance)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OpswabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
