"""Command-line entry point: ``cliquewatch <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from . import pipeline
from .graph import CliqueReport, Clique
from .orders import DEFAULT_ANCHOR, OrderFileError
from .synth import CliqueSpec, GroundTruth, SynthConfig, generate, score

LOG_ENV = "CLIQUEWATCH_LOG_LEVEL"

logger = logging.getLogger("cliquewatch")


def _int_list(text: str) -> list[int]:
    """``"1,5,60"`` or an inclusive range ``"1:200"`` / ``"5:200:5"``."""
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(start, stop + 1, step))
    return [int(p) for p in text.split(",") if p.strip()]


def _float_list(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--window-seconds", type=int, default=pipeline.DEFAULT_WINDOW_SECONDS)
    parser.add_argument("--min-length", type=int, default=pipeline.DEFAULT_MIN_LENGTH)
    parser.add_argument("--corr-threshold", type=float, default=pipeline.DEFAULT_CORR_THRESHOLD)
    parser.add_argument("--occurrence-threshold", type=int, default=pipeline.DEFAULT_OCCURRENCE_THRESHOLD)
    parser.add_argument("--anchor", default=DEFAULT_ANCHOR, metavar="HH:MM:SS")
    parser.add_argument("--max-bad-rows", type=int, default=0, help="malformed rows tolerated per file")
    parser.add_argument("--keep-pre-anchor", action="store_true", help="keep orders stamped before the anchor")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cliquewatch", description="Detect suspect collusive cliques from limit-order files.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run the full detection over day-ordered files")
    p.add_argument("inputs", nargs="+", type=Path)
    _common(p)
    p.add_argument("--output-dir", "-o", type=Path)
    p.add_argument("--emit", nargs="+", choices=pipeline.EMIT_CHOICES, default=["report"])
    p.add_argument("--jobs", "-j", type=int, default=1)

    p = sub.add_parser("sweep-window", help="pair correlation versus window width on one day")
    p.add_argument("input", type=Path)
    p.add_argument("investor_a")
    p.add_argument("investor_b")
    p.add_argument("--sizes", type=_int_list, default=_int_list("1:200"))
    p.add_argument("--output", type=Path)
    _common(p)

    p = sub.add_parser("sweep-threshold", help="component count versus correlation threshold on one day")
    p.add_argument("input", type=Path)
    p.add_argument("--thresholds", type=_float_list, default=_float_list("0.80,0.85,0.90,0.95"))
    p.add_argument("--output", type=Path)
    _common(p)

    p = sub.add_parser("stats", help="length CDF of aggregated series")
    p.add_argument("inputs", nargs="+", type=Path)
    p.add_argument("--output", type=Path)
    _common(p)

    p = sub.add_parser("synth", help="generate a synthetic market with planted cliques")
    p.add_argument("--output-dir", "-o", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--days", type=int, default=9)
    p.add_argument("--noise-traders", type=int, default=300)
    p.add_argument("--day-traders", type=int, default=30)
    p.add_argument("--clique-sizes", type=_int_list, default=[2, 3, 6])
    p.add_argument("--lag-seconds", type=int, default=10)
    p.add_argument("--jitter", type=float, default=0.1)
    p.add_argument("--participation", type=float, default=1.0)
    p.add_argument("--clique-events", type=int, default=40, help="clique events per day")
    p.add_argument("--orders-per-day", type=int, default=20_000)

    p = sub.add_parser("score", help="pair precision/recall of a report against planted truth")
    p.add_argument("report", type=Path)
    p.add_argument("truth", type=Path)
    return parser


def _run_config(args, inputs) -> pipeline.RunConfig:
    return pipeline.RunConfig(
        inputs=tuple(inputs),
        window_seconds=args.window_seconds,
        min_length=args.min_length,
        corr_threshold=args.corr_threshold,
        occurrence_threshold=args.occurrence_threshold,
        anchor=args.anchor,
        output_dir=getattr(args, "output_dir", None),
        emit=frozenset(getattr(args, "emit", ["report"])),
        max_bad_rows=args.max_bad_rows,
        keep_pre_anchor=args.keep_pre_anchor,
        jobs=getattr(args, "jobs", 1),
    )


def _write_csv(header: str, rows, output: Path | None) -> None:
    lines = [header] + [",".join(r) for r in rows]
    text = "\n".join(lines) + "\n"
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text, encoding="utf-8")


def _report_from_json(text: str) -> CliqueReport:
    data = json.loads(text)
    cliques = tuple(
        Clique(
            tuple(c["members"]),
            tuple((a, b, int(w)) for a, b, w in c["edges"]),
            c.get("days_observed", 0),
            c.get("complete", False),
        )
        for c in data["cliques"]
    )
    return CliqueReport(cliques, data.get("parameters", {}), tuple(data.get("days", ())))


def _dispatch(args) -> int:
    if args.command == "detect":
        config = _run_config(args, args.inputs)
        report = pipeline.run_pipeline(config)
        if config.output_dir is None or "report" not in config.emit:
            sys.stdout.write(report.to_json())
        else:
            logger.info("%d cliques written to %s", len(report), config.output_dir / "report.json")
        return 0

    if args.command == "sweep-window":
        config = _run_config(args, [args.input])
        rows = pipeline.sweep_window(config, args.investor_a, args.investor_b, args.sizes)
        _write_csv(
            "window_seconds,correlation",
            ((str(w), "" if r is None else f"{r:.6f}") for w, r in rows),
            args.output,
        )
        return 0

    if args.command == "sweep-threshold":
        config = _run_config(args, [args.input])
        rows = pipeline.sweep_threshold(config, args.thresholds)
        _write_csv("threshold,components", ((f"{t:g}", str(c)) for t, c in rows), args.output)
        return 0

    if args.command == "stats":
        config = _run_config(args, args.inputs)
        _write_csv("length,cdf", ((str(l), f"{f:.6f}") for l, f in pipeline.stats(config)), args.output)
        return 0

    if args.command == "synth":
        spec = dict(
            lag_seconds=args.lag_seconds,
            volume_jitter=args.jitter,
            participation=args.participation,
            events_per_day=args.clique_events,
        )
        config = SynthConfig(
            n_noise_traders=args.noise_traders,
            n_day_traders=args.day_traders,
            cliques=tuple(CliqueSpec(size, **spec) for size in args.clique_sizes),
            days=args.days,
            orders_per_day_mean=args.orders_per_day,
            rng_seed=args.seed,
        )
        paths = generate(config).write(args.output_dir)
        logger.info("wrote %d day files to %s", len(paths), args.output_dir)
        return 0

    if args.command == "score":
        report = _report_from_json(args.report.read_text(encoding="utf-8"))
        truth = GroundTruth.from_json(args.truth.read_text(encoding="utf-8"))
        sys.stdout.write(json.dumps(score(report, truth).to_dict(), sort_keys=True, indent=2) + "\n")
        return 0

    raise AssertionError(args.command)


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get(LOG_ENV, "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (OrderFileError, ValueError, KeyError, OSError) as exc:
        print(f"cliquewatch: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
