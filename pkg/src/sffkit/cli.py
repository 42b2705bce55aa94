"""
Script: cli.py
Created: 2026-10-08
Purpose: CLI entry point: extract, evaluate, compare, spectrogram, synth, serve
Keywords: cli, argparse, uvicorn, entrypoint, sffkit
Status: active
Prerequisites:
  - uvicorn (serve only)
Changelog:
  - 2026-10-08: Initial version (extract/evaluate/compare/spectrogram)
  - 2026-10-11: synth, serve and --publish
  - 2026-10-18: compare --tasks (per-task stacked tables)
See-Also: harness.py, client.py
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__, config
from .audio import check_balance, load_manifest, load_wav
from .errors import SffKitError
from .harness import (
    compare_features,
    compare_tasks,
    cross_validate,
    extract_all,
    format_comparison,
    format_task_tables,
    parse_grid,
    read_feature_table,
    relative_percent,
    task_from_token,
    write_comparison,
    write_report,
    write_task_comparisons,
)
from .models import ExperimentConfig, FeatureKind, SffConfig, SpeakingTask
from .sff import sff_envelope_frames
from .synthetic import write_synthetic_corpus
from .transforms import stft_magnitude, write_spectrogram

logger = logging.getLogger("sffkit.cli")

TASK_CHOICES = ["vowel", "sentence", "read_text", "all"]
KIND_CHOICES = ["mfcc", "sffcc", "mfcc-sff"]


def _load_config(path: Optional[str]) -> ExperimentConfig:
    if not path:
        return ExperimentConfig()
    return ExperimentConfig.model_validate_json(Path(path).read_text())


def _task_list(text: str) -> List[SpeakingTask]:
    try:
        return [SpeakingTask(t.strip()) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"tasks must be a comma-separated subset of vowel,sentence,read_text; got {text!r}"
        ) from None


def _publish(url: Optional[str], reports) -> None:
    if not url:
        return
    from .client import SffKitClient

    client = SffKitClient(url)
    for report in reports:
        run_id = client.publish_report(report)
        print(f"Published {report.feature_kind.value}: run_id={run_id}")


# =============================================================================
# Commands
# =============================================================================

def cmd_extract(args) -> int:
    base = _load_config(args.config)
    cfg = base.model_copy(update={
        "feature_kind": FeatureKind.parse(args.features),
        "task": task_from_token(args.task),
        "output_dir": args.out,
        "skip_errors": args.skip_errors or base.skip_errors,
        "workers": args.workers,
    })
    manifest = load_manifest(args.manifest)
    balance = check_balance(manifest)
    if not balance.balanced:
        logger.warning("speaker counts per class are unbalanced: %s", balance.counts)
    path = extract_all(manifest, cfg)
    print(f"Features: {path}")
    return 0


def cmd_evaluate(args) -> int:
    table, cfg = read_feature_table(args.features_file)
    cfg = cfg or ExperimentConfig(feature_kind=table.feature_kind)
    update = {"output_dir": args.out, "workers": args.workers}
    if args.grid:
        update["c_grid"] = parse_grid(args.grid)
    cfg = ExperimentConfig.model_validate({**cfg.model_dump(), **update})
    report = cross_validate(table, cfg)
    write_report(report, args.out)
    print(f"{table.feature_kind.value}: accuracy {report.accuracy_mean * 100:.1f} ± "
          f"{report.accuracy_std * 100:.1f}, UAR {report.pooled.uar:.3f} over {report.fold_count} folds")
    _publish(args.publish, [report])
    return 0


def _print_deltas(comparison) -> None:
    prefix = f"[{comparison.task.value}] " if comparison.task else ""
    for row in comparison.rows[1:]:
        print(f"{prefix}{row.feature_kind.value} vs {comparison.baseline.value}: "
              f"{row.absolute_delta:+.1f} pp, {relative_percent(row.relative_delta)} % relative")


def cmd_compare(args) -> int:
    kinds = [FeatureKind.parse(k) for k in args.kinds.split(",") if k.strip()]
    cfg = _load_config(args.config).model_copy(update={
        "task": task_from_token(args.task),
        "output_dir": args.out,
        "workers": args.workers,
    })
    if args.grid:
        cfg = cfg.model_copy(update={"c_grid": parse_grid(args.grid)})
    manifest = load_manifest(args.manifest)

    if args.tasks:
        protocol, per_task = compare_tasks(manifest, args.tasks, kinds, cfg)
        write_task_comparisons(protocol, per_task, args.out)
        print(format_task_tables(protocol))
        for comparison in protocol.comparisons:
            _print_deltas(comparison)
        _publish(args.publish, [rep for reports in per_task.values() for rep in reports.values()])
        return 0

    comparison, reports = compare_features(manifest, kinds, cfg)
    write_comparison(comparison, reports, args.out)
    print(format_comparison(comparison))
    _print_deltas(comparison)
    _publish(args.publish, reports.values())
    return 0


def cmd_spectrogram(args) -> int:
    sig = load_wav(args.wav)
    if args.method == "sff":
        spec = sff_envelope_frames(sig, SffConfig(r=args.r, delta_f_hz=args.delta_f), args.hop)
    else:
        spec = stft_magnitude(sig, args.window, args.hop)
    path = write_spectrogram(spec, args.out)
    print(f"{spec.origin.value} spectrogram {spec.frames.shape[0]}x{spec.frames.shape[1]}: {path}")
    return 0


def cmd_synth(args) -> int:
    path = write_synthetic_corpus(
        args.out,
        speakers_per_class=args.speakers_per_class,
        utterances_per_speaker=args.utterances,
        sample_rate_hz=args.sample_rate,
        duration_s=args.duration,
        seed=args.seed,
    )
    print(f"Manifest: {path}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    if args.db:
        os.environ["SFFKIT_DB"] = args.db
        config.SFFKIT_DB = args.db
    print(f"sffkit v{__version__}")
    print(f"Starting on {args.host}:{args.port}")
    print(f"Database: {config.SFFKIT_DB}")

    from .app import app
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# =============================================================================
# Parser
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sffkit",
        description="SFF-based cepstral features and LOSO SVM experiments for PD severity",
    )
    parser.add_argument("--log-level", default=config.SFFKIT_LOG_LEVEL, help="Logging level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="Extract pooled 39-dim features for a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--features", choices=KIND_CHOICES, default="sffcc")
    p.add_argument("--task", choices=TASK_CHOICES, default="all")
    p.add_argument("--config", help="ExperimentConfig JSON file")
    p.add_argument("--out", default="results")
    p.add_argument("--skip-errors", action="store_true", help="Skip failing recordings (logged)")
    p.add_argument("--workers", type=int, default=config.SFFKIT_WORKERS)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("evaluate", help="Nested LOSO SVM evaluation of a feature file")
    p.add_argument("--features-file", required=True)
    p.add_argument("--grid", help='C grid, e.g. "1e-4..1e4" or "0.1,1,10"')
    p.add_argument("--out", default="results")
    p.add_argument("--workers", type=int, default=config.SFFKIT_WORKERS)
    p.add_argument("--publish", metavar="URL", help="Post the report to an sffkit service")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="Compare feature kinds; the first kind is the baseline")
    p.add_argument("--manifest", required=True)
    p.add_argument("--kinds", default="mfcc,sffcc,mfcc-sff")
    p.add_argument("--task", choices=TASK_CHOICES, default="all")
    p.add_argument("--tasks", type=_task_list, metavar="LIST",
                   help="One comparison per task, e.g. vowel,sentence,read_text (overrides --task)")
    p.add_argument("--config", help="ExperimentConfig JSON file")
    p.add_argument("--grid", help='C grid, e.g. "1e-4..1e4"')
    p.add_argument("--out", default="results")
    p.add_argument("--workers", type=int, default=config.SFFKIT_WORKERS)
    p.add_argument("--publish", metavar="URL", help="Post the reports to an sffkit service")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("spectrogram", help="Export an STFT or SFF magnitude matrix as CSV")
    p.add_argument("--wav", required=True)
    p.add_argument("--method", choices=["stft", "sff"], default="sff")
    p.add_argument("--out", required=True)
    p.add_argument("--hop", type=float, default=0.010, help="Frame hop in seconds")
    p.add_argument("--window", type=float, default=0.030, help="STFT window in seconds")
    p.add_argument("--r", type=float, default=0.99, help="SFF pole magnitude")
    p.add_argument("--delta-f", type=float, default=31.25, help="SFF channel spacing in Hz")
    p.set_defaults(func=cmd_spectrogram)

    p = sub.add_parser("synth", help="Write a synthetic 3-class corpus and its manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--speakers-per-class", type=int, default=10)
    p.add_argument("--utterances", type=int, default=1)
    p.add_argument("--sample-rate", type=int, default=8000)
    p.add_argument("--duration", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="Run the HTTP service")
    p.add_argument("--host", default="0.0.0.0", help="Host to bind (default: 0.0.0.0)")
    p.add_argument("--port", type=int, default=config.SFFKIT_PORT,
                   help=f"Port to bind (default: {config.SFFKIT_PORT})")
    p.add_argument("--db", default=None, help=f"SQLite database path (default: {config.SFFKIT_DB})")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    config.setup_logging(args.log_level)
    try:
        return args.func(args)
    except SffKitError as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
