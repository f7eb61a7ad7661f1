"""Command line: ``sefdtd run``, ``sefdtd list`` and ``sefdtd sweep``.

Exit codes: 0 run completed and every check passed, 1 a check failed,
2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from sefdtd.config import ConfigError, load_config, validate_config
from sefdtd.scenarios import (
    EXIT_CHECK,
    EXIT_CONFIG,
    EXIT_NUMERIC,
    RunSummary,
    list_scenarios,
    run_config,
    scenario_config,
)


def _overrides(args) -> dict:
    out = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError([f"--set {item}: expected key=value"])
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    if args.coupling:
        out["coupling"] = args.coupling
    if args.resolution is not None:
        out["resolution"] = args.resolution
    if args.duration is not None:
        out["duration"] = args.duration
    if args.l is not None:
        out["geometry.l"] = args.l
    if args.mirror_cells is not None:
        out["geometry.N"] = args.mirror_cells
    return out


def _config(args, extra: dict | None = None):
    overrides = {**_overrides(args), **(extra or {})}
    if args.config:
        base = load_config(args.config)
        return validate_config({**base.to_raw(), **overrides}) if overrides else base
    if not args.scenario:
        raise ConfigError(["scenario: give a scenario name or --config"])
    return scenario_config(args.scenario, overrides)


def _report(summary: RunSummary, stream=None) -> None:
    stream = stream or sys.stdout
    status = "ok" if summary.passed else f"exit {summary.exit_code}"
    print(f"{summary.scenario}: {status} ({summary.wall_time:.1f} s)", file=stream)
    if summary.error:
        print(f"  error: {summary.error}", file=stream)
    for c in summary.checks:
        print(f"  {'PASS' if c.passed else 'FAIL'} {c.name}: measured {c.measured:.6g} {c.unit}, "
              f"target {c.target:.6g}, tolerance {c.tolerance:g}", file=stream)
    for key, path in summary.files.items():
        print(f"  {key}: {path}", file=stream)


def cmd_run(args) -> int:
    cfg = _config(args)
    summary = run_config(cfg, args.out)
    _report(summary)
    return summary.exit_code


def cmd_list(args) -> int:
    print(list_scenarios())
    return 0


def cmd_sweep(args) -> int:
    key, _, values = args.param.partition("=")
    values = [v.strip() for v in values.split(",") if v.strip()]
    if not key or not values:
        raise ConfigError([f"--param {args.param}: expected key=v1,v2,..."])
    configs = [_config(args, {key.strip(): v}) for v in values]
    root = Path(args.out) if args.out else Path(configs[0].out_dir) / f"{configs[0].scenario}-sweep"

    def job(item):
        value, cfg = item
        return run_config(cfg, root / f"{key.strip()}={value}")

    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        summaries = list(pool.map(job, zip(values, configs)))
    for value, s in zip(values, summaries):
        print(f"[{key.strip()}={value}]", end=" ")
        _report(s)
    codes = {s.exit_code for s in summaries}
    for code in (EXIT_NUMERIC, EXIT_CONFIG, EXIT_CHECK):
        if code in codes:
            return code
    return 0


def _common(p) -> None:
    p.add_argument("scenario", nargs="?", help="registered scenario name (see `list`)")
    p.add_argument("--config", type=Path, help="key = value scenario file instead of a name")
    p.add_argument("--coupling", choices=["eq3", "eq4"], help="oscillator model (eq4 default)")
    p.add_argument("--resolution", type=float, help="points per wavelength in the densest medium")
    p.add_argument("--duration", type=float, help="simulated time in seconds")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--l", help="square cavity side: l1, l2 or a length in m")
    p.add_argument("--mirror-cells", type=int, help="Bragg mirror pairs per side")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="any config key, repeatable")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sefdtd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario and write trace.csv and summary.txt")
    _common(run)
    run.set_defaults(func=cmd_run)
    lst = sub.add_parser("list", help="list registered scenarios")
    lst.set_defaults(func=cmd_list)
    sweep = sub.add_parser("sweep", help="run one scenario over a list of parameter values")
    _common(sweep)
    sweep.add_argument("--param", required=True, metavar="KEY=V1,V2,...", help="config key and its values")
    sweep.add_argument("--workers", type=int, default=4, help="worker threads")
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
