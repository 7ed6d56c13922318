"""Command-line entry points: run, resume, report.

Exit codes: 0 success, 2 invalid configuration, 3 unreadable checkpoint,
4 missing report artifacts, 130 interrupted (checkpoint stays resumable).
Set BOTUNE_LOG=DEBUG|INFO|WARNING to control verbosity.
"""
from __future__ import annotations

import argparse
import logging
import os
import shutil
import sys
from pathlib import Path

from .config import MODES, build_trainee, config_from_snapshot, load_config
from .controller import continue_run, load_checkpoint, run, summarize
from .errors import CheckpointCorrupt, ConfigError, UnsupportedVersion
from .report import report_directory


def _setup_logging():
    level = os.environ.get("BOTUNE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def cmd_run(args) -> int:
    overrides = {}
    for key in ("mode", "cycles", "epochs", "seed"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    try:
        cfg = load_config(args.config, **overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(args.config, out / "config.toml")
    trainee = build_trainee(cfg)
    try:
        summary = run(cfg, trainee, out_dir=out)
    except KeyboardInterrupt:
        print(f"interrupted; resume with: botune resume --checkpoint {out / 'checkpoint.json'}",
              file=sys.stderr)
        return 130
    print(f"best objective {summary.best_objective!r} at {summary.best_assignment}")
    print(f"artifacts in {out}")
    return 0


def cmd_resume(args) -> int:
    try:
        ckpt = load_checkpoint(args.checkpoint)
    except (CheckpointCorrupt, UnsupportedVersion, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    out = Path(args.checkpoint).parent
    try:
        cfg = config_from_snapshot(ckpt.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    trainee = build_trainee(cfg)
    try:
        if args.cycles > 0:
            summary = continue_run(ckpt, trainee, args.cycles, out_dir=out)
        else:
            from .controller import _persist

            _persist(ckpt, out)  # report-only pass: rewrite artifacts
            summary = summarize(ckpt)
    except KeyboardInterrupt:
        print("interrupted; checkpoint remains resumable", file=sys.stderr)
        return 130
    print(f"best objective {summary.best_objective!r} at {summary.best_assignment}")
    return 0


def cmd_report(args) -> int:
    try:
        written = report_directory(args.dir)
    except (FileNotFoundError, CheckpointCorrupt, UnsupportedVersion) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    print(f"wrote {len(written)} report files under {args.dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="botune")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--mode", choices=MODES, default=None)
    p_run.add_argument("--cycles", type=int, default=None)
    p_run.add_argument("--epochs", type=int, default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", required=True)
    p_run.set_defaults(func=cmd_run)

    p_resume = sub.add_parser("resume", help="continue from a checkpoint")
    p_resume.add_argument("--checkpoint", required=True)
    p_resume.add_argument("--cycles", type=int, default=0,
                          help="additional cycles to run (0: rewrite reports only)")
    p_resume.set_defaults(func=cmd_resume)

    p_report = sub.add_parser("report", help="emit plots and comparison tables")
    p_report.add_argument("--dir", required=True)
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
