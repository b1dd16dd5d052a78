"""Command-line entry point: ``adaptloop run|analyze|kb``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from .config import KB_ENV_VAR, load_config
from .errors import AdaptLoopError
from .knowledge_base import KnowledgeBase
from .monitor import Category
from .queueing import StageRates, mean_service_time, mm1k_analytics

log = logging.getLogger("adaptloop")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0 or v == float("inf"):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text}")
    return v


def _nonneg_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v >= 0 or v == float("inf"):
        raise argparse.ArgumentTypeError(f"must be non-negative and finite: {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adaptloop", description="Anomaly-driven adaptation loop simulator.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a configured session and write the report")
    run.add_argument("config", type=Path)
    run.add_argument("--seed", type=int)
    run.add_argument("--no-adaptation", action="store_true", help="detect and queue only, never adapt")
    run.add_argument("--severe-threshold", type=_nonneg_float, metavar="MS")
    run.add_argument("--out", type=Path, help="report directory (overrides the config)")
    run.add_argument("--kb", type=Path, help=f"KB file (overrides ${KB_ENV_VAR} and the config)")

    an = sub.add_parser("analyze", help="closed-form M/M/1/K metrics for three service stages")
    an.add_argument("lam", type=_nonneg_float, metavar="LAMBDA")
    an.add_argument("mu1", type=_positive_float)
    an.add_argument("mu2", type=_positive_float)
    an.add_argument("mu3", type=_positive_float)
    an.add_argument("K", type=_positive_int)

    kb = sub.add_parser("kb", help="knowledge base maintenance")
    kb.add_argument("--path", type=Path, help=f"KB file (default: ${KB_ENV_VAR})")
    kbsub = kb.add_subparsers(dest="kb_command", required=True)
    ex = kbsub.add_parser("export", help="write the KB as CSV (stdout when no file given)")
    ex.add_argument("out", nargs="?", type=Path)
    im = kbsub.add_parser("import", help="append the records of a KB CSV file")
    im.add_argument("src", type=Path)
    hi = kbsub.add_parser("history", help="per-adaptation use count and impact for one anomaly type")
    hi.add_argument("category")
    return p


def _kb_path(explicit: Path | None) -> Path | None:
    if explicit is not None:
        return explicit
    env = os.environ.get(KB_ENV_VAR)
    return Path(env) if env else None


def cmd_run(args) -> int:
    from .pipeline import run_session
    from .report import write_report

    cfg = load_config(args.config)
    cfg = cfg.with_overrides(
        seed=args.seed,
        no_adaptation=args.no_adaptation,
        severe_threshold=args.severe_threshold,
        kb_path=_kb_path(args.kb),
        report_dir=args.out,
    )
    if cfg.catalog_path is not None and not cfg.catalog_path.is_file():
        raise AdaptLoopError(f"catalog file not found: {cfg.catalog_path}")
    kb = KnowledgeBase(cfg.kb_path)
    result = run_session(cfg, kb)
    files = write_report(result, cfg.report_dir, kb)
    log.info("wrote %d report files to %s", len(files), cfg.report_dir)
    print(f"anomalies: {len(result.events)}  adaptations: {result.adaptations}  report: {cfg.report_dir}")
    return 0


def cmd_analyze(args) -> int:
    from .report import analytics_table

    x_bar = mean_service_time(StageRates(args.mu1, args.mu2, args.mu3))
    m = mm1k_analytics(args.lam, 1.0 / x_bar, args.K)
    sys.stdout.write(analytics_table(m, x_bar))
    return 0


def cmd_kb(args) -> int:
    path = _kb_path(args.path)
    if args.kb_command == "export":
        kb = KnowledgeBase(path) if path is not None and path.exists() else KnowledgeBase()
        if args.out is None:
            sys.stdout.write(kb.to_csv_text())
        else:
            n = kb.export_csv(args.out)
            log.info("exported %d records to %s", n, args.out)
        return 0
    if path is None:
        raise AdaptLoopError(f"no KB path: pass --path or set ${KB_ENV_VAR}")
    kb = KnowledgeBase(path)
    if args.kb_command == "import":
        n = kb.import_csv(args.src)
        print(f"imported {n} records")
        return 0
    cat = Category.parse(args.category)
    print("adaptation,ct,i")
    for h in kb.history(cat):
        print(f"{h.an},{h.ct},{'' if h.i is None else format(h.i, '.9g')}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {"run": cmd_run, "analyze": cmd_analyze, "kb": cmd_kb}
    try:
        return handlers[args.command](args)
    except AdaptLoopError as exc:
        print(f"adaptloop {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"adaptloop {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
