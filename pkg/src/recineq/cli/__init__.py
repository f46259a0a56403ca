"""Command line: ``recineq run|list|dump``.

Exit status is 0 when every certificate in every report is certified, 1 when
some certificate is not, and 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from ..certificate import Verdict
from .config import ConfigError, ScenarioConfig, load_config
from .scenarios import SCENARIOS, ScenarioResult, random_block_instance

OUT_ENV = "RECINEQ_OUT"
DEFAULT_OUT = "recineq-reports"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def run_scenario(cfg: ScenarioConfig) -> tuple[dict, ScenarioResult]:
    """Run one scenario; returns the report dict and the raw result."""
    scenario = SCENARIOS[cfg.scenario]
    cfg = scenario.configure(cfg)
    result = scenario.run(cfg)
    verdicts = [c.verdict for c in result.certificates]
    report = {
        "scenario": cfg.scenario,
        "description": scenario.description,
        "config": cfg.to_dict(),
        "passed": all(v is Verdict.CERTIFIED for v in verdicts),
        "verdict_counts": {v.value: verdicts.count(v) for v in Verdict if v in verdicts},
        "certificates": [c.to_dict() for c in result.certificates],
    }
    return report, result


def render_report(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=True) + "\n"


def write_report(report: dict, result: ScenarioResult, out: Path, with_csv: bool) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    name = report["scenario"]
    written = []
    if with_csv:
        report["sidecars"] = [f"{name}.{key}.csv" for key in result.sidecars]
        for key, make in result.sidecars.items():
            path = out / f"{name}.{key}.csv"
            path.write_text(make(), encoding="utf-8")
            written.append(path)
    path = out / f"{name}.json"
    path.write_text(render_report(report), encoding="utf-8")
    written.insert(0, path)
    return written


def _cmd_list(args) -> int:
    width = max(map(len, SCENARIOS))
    for name, s in SCENARIOS.items():
        print(f"{name:<{width}}  {s.description}")
    return EXIT_OK


def _cmd_run(args) -> int:
    names = list(SCENARIOS) if args.scenarios == ["all"] else args.scenarios
    unknown = [n for n in names if n not in SCENARIOS]
    if unknown:
        print(f"error: unknown scenario(s): {', '.join(unknown)}; see `recineq list`", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfgs = [SCENARIOS[n].configure(load_config(n, args.config)) for n in names]
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(run_scenario, cfgs))
    status = EXIT_OK
    for report, result in results:
        paths = write_report(report, result, out, args.csv)
        mark = "PASS" if report["passed"] else "FAIL"
        print(f"{mark} {report['scenario']}: {report['verdict_counts']} -> {paths[0]}")
        if not report["passed"]:
            status = EXIT_FAIL
    return status


def _cmd_dump(args) -> int:
    from ..pathology import block_padding, parse_machine, specker_rows, to_text
    from ..seqcore import Seq

    if args.construction == "specker":
        a = Seq(lambda n: Fraction(1, (n + 1) ** 2))
        print("n,value,witness")
        for row in specker_rows(a, args.upto):
            print(f"{row.n},{row.value},{row.witness}")
    elif args.construction == "block":
        import random

        s, alpha, theta, _, _ = random_block_instance(random.Random(args.seed))
        bc = block_padding(s, alpha, theta, args.upto)
        print(f"# theta={theta}")
        print("k,beta,alpha")
        for k in range(args.upto + 1):
            print(f"{k},{bc.beta_at(k)},{alpha(k)}")
    else:
        if args.code is None:
            print("error: dump machine needs a code or machine text", file=sys.stderr)
            return EXIT_USAGE
        try:
            machine = parse_machine(args.code)
        except ValueError as err:
            print(f"error: {err}", file=sys.stderr)
            return EXIT_USAGE
        print(to_text(machine))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="recineq", description="Rates for recursive inequalities, checked on data.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run scenarios and write reports")
    run.add_argument("scenarios", nargs="+", metavar="scenario", help="scenario names, or 'all'")
    run.add_argument("--config", help="INI file with a [params] section")
    run.add_argument("--out", help=f"report directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    run.add_argument("--csv", action="store_true", help="also write CSV sidecars")
    run.add_argument("--jobs", type=int, default=1, help="scenarios to run concurrently")
    run.set_defaults(func=_cmd_run)

    ls = sub.add_parser("list", help="list scenarios")
    ls.set_defaults(func=_cmd_list)

    dump = sub.add_parser("dump", help="print a construction as CSV or text")
    dump.add_argument("construction", choices=["specker", "block", "machine"])
    dump.add_argument("code", nargs="?", help="machine code or text (for 'machine')")
    dump.add_argument("--upto", type=int, default=200)
    dump.add_argument("--seed", type=int, default=0)
    dump.set_defaults(func=_cmd_dump)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)
