"""Command line entry point.

    quasitree run config.yaml [--check] [--export dot|graphml] [--seed N]
                              [--radius N] [--stages ball,relmetric,...]
    quasitree acceptance [--only 1,4,8]
    quasitree fixtures
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from .export import FORMATS, ExportError, export_graph
from .fixtures import FIXTURES
from .pipeline import ConfigError, ExperimentConfig, run_pipeline, strip_timings

log = logging.getLogger("quasitree")

# Expected outcomes per fixture, checked against the report by ``--check``.
EXPECTATIONS = {
    "free-product-c5-z": {
        "relative distances are lower bounds": lambda r: all(
            v.startswith("LowerBound") for v in r["relmetric"]["subgroups"]["H1"]["rel_from_identity"].values()
            if v != "Exact(0)"),
        "projection bounds hold": lambda r: r["projection"]["bounds"]["ok"],
        "axioms A1-A3 hold": lambda r: all(r["projection"]["axioms"][k]["pass"] for k in ("A1", "A2", "A3")),
        "complex connected": lambda r: r["complex"]["connected"],
        "t in X": lambda r: "t" in r["genset"]["X"]["elements"],
        "X symmetric": lambda r: r["genset"]["symmetric"],
        "embedding bounds hold": lambda r: r["genset"]["embedding"]["ok"],
        "alpha bound holds": lambda r: r["genset"]["alpha"]["ok"],
        "acyl count stable": lambda r: len(set(r["acyl"]["max_count_by_cap"].values())) == 1,
    },
    "direct-product-c5-z": {
        "relative distances at most 3": lambda r: all(
            v.startswith("Exact") and int(v[6:-1]) <= 3
            for v in r["relmetric"]["subgroups"]["H1"]["rel_from_identity"].values()),
        "projection bounds hold": lambda r: r["projection"]["bounds"]["ok"],
        "complex connected": lambda r: r["complex"]["connected"],
    },
    "direct-product-z-z": {
        "acyl count grows": lambda r: (lambda v: all(a < b for a, b in zip(v, v[1:])))(
            [r["acyl"]["max_count_by_cap"][k] for k in sorted(r["acyl"]["max_count_by_cap"], key=int)]),
    },
}


def load_config(path: str | Path) -> dict:
    text = Path(path).read_text()
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    return data


def check_report(fixture: str, stages: dict) -> list[tuple[str, bool]]:
    results = []
    for name, fn in EXPECTATIONS.get(fixture, {}).items():
        try:
            ok = bool(fn(stages))
        except (KeyError, TypeError, ValueError):
            ok = False  # the stage did not run or failed
        results.append((name, ok))
    return results


def cmd_run(args: argparse.Namespace) -> int:
    try:
        data = load_config(args.config)
    except (OSError, yaml.YAMLError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        data["seed"] = args.seed
    if args.radius is not None:
        data["radius"] = args.radius
    if args.stages is not None:
        data["stages"] = [s for s in args.stages.split(",") if s]
    try:
        config = ExperimentConfig.from_dict(data)
        report, wb = run_pipeline(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out = config.output or {}
    report_path = Path(args.output or out.get("report", "report.json"))
    report_path.write_text(json.dumps(strip_timings(report) | {"timings": report["timings"]}, indent=2, sort_keys=True) + "\n")
    print(f"report written to {report_path}")
    if wb.acyl_csv:
        csv_path = Path(out.get("csv", report_path.with_suffix(".acyl.csv")))
        csv_path.write_text(wb.acyl_csv)
        print(f"acylindricity table written to {csv_path}")

    if args.export:
        folder = Path(out.get("export_dir", report_path.parent))
        folder.mkdir(parents=True, exist_ok=True)
        objects = {"ball": wb.ball, "complex": wb.complex}
        for name, obj in objects.items():
            if obj is None:
                continue
            try:
                path = export_graph(obj, args.export, folder / f"{name}.{args.export}")
                print(f"{name} exported to {path}")
            except ExportError as exc:
                print(f"export error: {exc}", file=sys.stderr)
                return 2

    failed = [s for s, v in report["stages"].items() if v.get("status") == "error"]
    for s in failed:
        print(f"stage {s} failed: {report['stages'][s]['error']}", file=sys.stderr)
    code = 1 if failed else 0
    if args.check:
        fixture = config.fixture if isinstance(config.fixture, str) else ""
        results = check_report(fixture, report["stages"])
        if not results:
            print(f"no expectations recorded for fixture {fixture!r}")
        for name, ok in results:
            print(f"{'PASS' if ok else 'FAIL'}: {name}")
        if not all(ok for _, ok in results):
            code = 1
    return code


def cmd_acceptance(args: argparse.Namespace) -> int:
    from .acceptance import run_all

    numbers = [int(n) for n in args.only.split(",")] if args.only else None
    results = run_all(numbers)
    for r in results:
        print(r.line())
    if args.json:
        Path(args.json).write_text(json.dumps([
            {"number": r.number, "title": r.title, "passed": r.passed, "seconds": round(r.seconds, 2), "detail": r.detail}
            for r in results], indent=2, default=str) + "\n")
    return 0 if all(r.passed for r in results) else 1


def cmd_fixtures(args: argparse.Namespace) -> int:
    for name, spec in FIXTURES.items():
        print(f"{name}: {spec.family}, factors {[f.name + ('' if f.order is None else str(f.order)) for f in spec.factors]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quasitree", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a YAML config")
    run.add_argument("config")
    run.add_argument("--check", action="store_true", help="compare against the fixture's expected outcomes")
    run.add_argument("--export", choices=FORMATS, help="export the ball and the complex")
    run.add_argument("--seed", type=int)
    run.add_argument("--radius", type=int)
    run.add_argument("--stages", help="comma-separated stage list (empty for none)")
    run.add_argument("-o", "--output", help="report path (overrides the config)")
    run.set_defaults(func=cmd_run)

    acc = sub.add_parser("acceptance", help="run the acceptance criteria")
    acc.add_argument("--only", help="comma-separated criterion numbers")
    acc.add_argument("--json", help="write detailed results here")
    acc.set_defaults(func=cmd_acceptance)

    fx = sub.add_parser("fixtures", help="list built-in fixtures")
    fx.set_defaults(func=cmd_fixtures)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
