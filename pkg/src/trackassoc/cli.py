"""Command line entry point: ``simulate``, ``associate`` and ``report``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from .config import ConfigError, RunConfig
from .geodesy import GeodesyError
from .logio import LogFormatError, write_log, write_truth
from .metrics import CoverageError
from .pipeline import emit_report, run_pipeline
from .sim.scenarios import SCENARIOS, ScenarioConfig

# exit status per failure category
EXIT_CONFIG, EXIT_INPUT, EXIT_IO, EXIT_RUNTIME = 2, 3, 4, 5


def cmd_simulate(args) -> int:
    cfg = ScenarioConfig(seed=args.seed)
    scenario = SCENARIOS[args.scenario](cfg)
    out = Path(args.out)
    write_log(scenario.log, out)
    write_truth(scenario.truth, out / "truth.csv")
    meta = {"scenario": args.scenario, **asdict(cfg)}
    (out / "scenario.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {len(scenario.log.camera)} camera, {len(scenario.log.v2v)} V2V and "
          f"{len(scenario.log.host)} host records to {out}")
    return 0


def cmd_associate(args) -> int:
    overrides = {"seed": args.seed, "output_dir": args.out}
    if args.scenario is not None:
        overrides.update(scenario=args.scenario, input_dir=None)
    if args.input is not None:
        overrides.update(input_dir=str(Path(args.input).resolve()), scenario=None)
    cfg = RunConfig.load(args.config, **{k: v for k, v in overrides.items() if k in ("seed", "output_dir")})
    if args.scenario is not None or args.input is not None:
        doc = cfg.to_dict()
        doc.update({k: v for k, v in overrides.items() if k in ("scenario", "input_dir")})
        cfg = RunConfig.from_dict(doc)
    report = run_pipeline(cfg)
    paths = emit_report(report, args.out)
    print(f"{len(report.ticks)} ticks associated; wrote {', '.join(p.name for p in paths)} to {args.out}")
    _print_tma(report.summary()["tma"])
    return 0


def _print_tma(tma):
    if tma is None:
        print("no ground truth: TMA not computed")
        return
    print(f"aggregate TMA: {tma['aggregate_tma']}  ({tma['correct']}/{tma['total']})")
    for vid, v in tma["per_vehicle"].items():
        print(f"  {vid}: TMA {v['tma']}  ({v['correct']}/{v['total']}, no decision {v['no_decision']})")


def cmd_report(args) -> int:
    path = Path(args.input) / "report.json"
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise LogFormatError(path, None, None, "report not found; run 'associate' first") from None
    except json.JSONDecodeError as exc:
        raise LogFormatError(path, exc.lineno, None, f"invalid JSON: {exc.msg}") from None
    print(f"ticks: {doc['ticks']}")
    _print_tma(doc["tma"])
    print("counters:")
    for k, v in sorted(doc["counters"].items()):
        print(f"  {k}: {v}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trackassoc", description="Camera / V2V track-to-track association harness.")
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings such as dropped detections")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate a synthetic sensor log with ground truth")
    s.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True, help="output log directory")
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("associate", help="run the association pipeline described by a config file")
    a.add_argument("--config", required=True, help="flat JSON run configuration")
    a.add_argument("--out", required=True, help="report directory")
    a.add_argument("--seed", type=int, help="override the config seed")
    src = a.add_mutually_exclusive_group()
    src.add_argument("--scenario", choices=sorted(SCENARIOS), help="override the input with a scenario")
    src.add_argument("--input", help="override the input with a log directory")
    a.set_defaults(func=cmd_associate)

    r = sub.add_parser("report", help="summarize a report directory")
    r.add_argument("--in", dest="input", required=True, help="directory holding report.json")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error [config]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LogFormatError, GeodesyError, CoverageError) as exc:
        print(f"error [input]: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError) as exc:
        print(f"error [runtime]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
