"""Command-line entry points.

Subcommands:
  run      execute one scenario (optional intervention script), print metrics
  compare  run baseline vs. intervened, print the paired report, write figures
  serve    real-time WebSocket session for the browser interface
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .harness import (ScriptVehicleUnknown, compare, load_scenario_file,
                      load_script, render_report_text, report_to_json, run)
from .scenario import ParseError, ValidationError


def _load_inputs(args):
    config = load_scenario_file(Path(args.scenario))
    script = ()
    if getattr(args, "script", None):
        script = load_script(Path(args.script).read_text(), config)
    return config, script


def _cmd_run(args) -> int:
    config, script = _load_inputs(args)
    trace = Path(args.trace) if args.trace else None
    metrics, _ = run(config, script, trace_path=trace)
    payload = asdict(metrics)
    payload["ego_lane_change_times"] = list(payload["ego_lane_change_times"])
    text = json.dumps(payload, sort_keys=True, indent=2, default=str) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return 0


def _cmd_compare(args) -> int:
    config, script = _load_inputs(args)
    name = Path(args.scenario).stem
    report = compare(config, script, name=name)
    sys.stdout.write(render_report_text(report))
    out_dir = Path(args.out) if args.out else Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{name}_report.json").write_text(report_to_json(report))
    if not args.no_figures:
        from .report import render_figures
        for path in render_figures(report, out_dir):
            sys.stdout.write(f"figure: {path}\n")
    sys.stdout.write(f"report: {out_dir / f'{name}_report.json'}\n")
    return 0


def _cmd_serve(args) -> int:
    from .bridge import serve
    serve(scenario_dir=Path(args.scenario_dir), port=args.port, rtf=args.rtf,
          scenario=args.scenario)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="foresim",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario headless")
    p_run.add_argument("scenario", help="scenario config file")
    p_run.add_argument("--script", help="intervention script file")
    p_run.add_argument("--trace", help="write per-tick CSV trace here")
    p_run.add_argument("--out", help="write metrics JSON here")
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="baseline vs. intervened report")
    p_cmp.add_argument("scenario", help="scenario config file")
    p_cmp.add_argument("--script", required=True,
                       help="intervention script file")
    p_cmp.add_argument("--out", help="output directory (default: cwd)")
    p_cmp.add_argument("--no-figures", action="store_true",
                       help="skip PNG rendering")
    p_cmp.set_defaults(func=_cmd_compare)

    p_srv = sub.add_parser("serve", help="interactive WebSocket session")
    p_srv.add_argument("--port", type=int, default=8700)
    p_srv.add_argument("--rtf", type=float, default=1.0,
                       help="real-time factor (sim seconds per wall second)")
    p_srv.add_argument("--scenario-dir", default="scenarios")
    p_srv.add_argument("--scenario", default=None,
                       help="scenario name to load at startup")
    p_srv.set_defaults(func=_cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, ScriptVehicleUnknown,
            ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
