"""Command-line entry point.

    rulepath extract --config run.toml [--out DIR] [--significant-only]
                     [--sort path|gtest] [--top-k N] [--threads N]

Each job in the config writes <name>.report.json and <name>.report.md
into the output directory. Log verbosity comes from the RULEPATH_LOG
environment variable (DEBUG, INFO, WARNING, ERROR).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, load_config, with_overrides
from .pipeline import Report, run
from .query import EmptyScopeError
from .regpath import DegenerateLabelsError
from .sparse_glm import FitNumericalError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_EMPTY_SCOPE = 4
EXIT_DEGENERATE = 5
EXIT_NUMERICAL = 6

log = logging.getLogger("rulepath")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rulepath",
        description="Extract ranked, statistically annotated grammar rules "
        "from dependency treebanks.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    extract = commands.add_parser("extract", help="run every job in a config file")
    extract.add_argument("--config", required=True, help="TOML run configuration")
    extract.add_argument("--out", default=None, help="output directory for reports")
    extract.add_argument(
        "--significant-only",
        action="store_true",
        default=None,
        help="report only rules with p < 0.01",
    )
    extract.add_argument("--sort", choices=("path", "gtest"), default=None)
    extract.add_argument("--top-k", type=int, default=None, metavar="N")
    extract.add_argument("--threads", type=int, default=1, metavar="N")
    return parser


def _write_report(report: Report, out_dir: Path) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / f"{report.job_name}.report.json"
    md_path = out_dir / f"{report.job_name}.report.md"
    json_path.write_text(report.to_json(), encoding="utf-8")
    md_path.write_text(report.to_markdown(), encoding="utf-8")
    return json_path, md_path


def _run_job(config: RunConfig) -> Report:
    log.info("job %s: starting", config.name)
    report = run(config)
    log.info("job %s: %d rules", config.name, len(report.rules))
    return report


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("RULEPATH_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    if args.command != "extract":  # pragma: no cover - argparse enforces this
        return EXIT_USAGE
    if args.top_k is not None and args.top_k < 0:
        print("error: --top-k must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE

    try:
        configs = load_config(args.config)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    configs = [
        with_overrides(
            c,
            significant_only=args.significant_only,
            sort=args.sort,
            top_k=args.top_k,
            out_dir=args.out,
        )
        for c in configs
    ]

    try:
        if args.threads > 1 and len(configs) > 1:
            with concurrent.futures.ThreadPoolExecutor(args.threads) as pool:
                reports = list(pool.map(_run_job, configs))
        else:
            reports = [_run_job(c) for c in configs]
    except OSError as exc:
        print(f"error: cannot read treebank: {exc}", file=sys.stderr)
        return EXIT_IO
    except EmptyScopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_SCOPE
    except DegenerateLabelsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except FitNumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    for config, report in zip(configs, reports):
        json_path, md_path = _write_report(report, Path(config.out_dir))
        significant = sum(1 for r in report.rules if r.significant)
        print(
            f"{report.job_name}: {report.scope['n']} instances, "
            f"mu={report.scope['mu']:.4f}, {len(report.rules)} rules "
            f"({significant} significant) -> {json_path}, {md_path}"
        )
    return EXIT_OK


def entry_point() -> None:  # console script
    raise SystemExit(main())


if __name__ == "__main__":
    entry_point()
