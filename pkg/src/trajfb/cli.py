"""Command-line entry point: ``trajfb {run,summarize,check,gen-env}``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError, EmptyInput, EnumerationTooLarge

EXIT_OK, EXIT_CONFIG, EXIT_FEASIBILITY, EXIT_CHECK = 0, 2, 3, 4


def _cmd_run(args) -> int:
    from .harness import ExperimentConfig, run_experiment, write_csv

    cfg = ExperimentConfig.load(args.config)
    out = args.out or cfg.output
    if not out:
        raise ConfigError("no output path: pass --out or set 'output' in the config")
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    write_csv(run_experiment(cfg, threads=args.threads), out)
    return EXIT_OK


def _cmd_summarize(args) -> int:
    from .harness import read_csv, summarize

    try:
        records = read_csv(args.infile)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.infile}: {exc}") from exc
    summary = summarize(records)
    text = json.dumps(summary, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _cmd_check(args) -> int:
    from .checks import run_suite

    report = run_suite(args.suite)
    text = json.dumps(report, indent=2, default=float)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK if all(item["pass"] for item in report.values()) else EXIT_CHECK


def _cmd_gen_env(args) -> int:
    from .harness import generate_env

    try:
        spec = json.loads(Path(args.spec).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read spec {args.spec}: {exc}") from exc
    Path(args.out).write_text(generate_env(spec).to_json() + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trajfb", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment grid and write per-episode regret CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--threads", type=int, default=1, help="parallel (agent, seed) cells")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("summarize", help="summarize a regret CSV into JSON")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_summarize)

    p = sub.add_parser("check", help="run oracle / lemma check suites")
    p.add_argument("--suite", choices=("oracles", "lemmas", "all"), default="all")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("gen-env", help="materialise an environment spec as MDP JSON")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_env)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EnumerationTooLarge as exc:
        print(f"trajfb: {exc}", file=sys.stderr)
        return EXIT_FEASIBILITY
    except (ConfigError, EmptyInput) as exc:
        print(f"trajfb: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
