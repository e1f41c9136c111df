"""End-to-end detection over daily order files and the parameter studies."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .correlation import CorrelationMatrix, correlate, correlation_matrix, unify
from .graph import (
    DEFAULT_CORR_THRESHOLD,
    DEFAULT_OCCURRENCE_THRESHOLD,
    CliqueReport,
    DailyGraph,
    build_daily_graph,
    cliques_from_integrated,
    connected_components,
    integrate,
    write_dot,
)
from .orders import DEFAULT_ANCHOR, OrderFileFormat, id_sort_key, parse_clock, parse_orders, to_signed_series
from .series import (
    DEFAULT_MIN_LENGTH,
    DEFAULT_WINDOW_SECONDS,
    AggregatedSeries,
    AggregationConfig,
    aggregate,
    aggregate_all,
    filter_eligible,
    length_cdf,
)

logger = logging.getLogger(__name__)

EMIT_CHOICES = ("matrix", "daily_dot", "integrated_dot", "report", "stats")


@dataclass(frozen=True)
class RunConfig:
    inputs: tuple[Path, ...]
    window_seconds: int = DEFAULT_WINDOW_SECONDS
    min_length: int = DEFAULT_MIN_LENGTH
    corr_threshold: float = DEFAULT_CORR_THRESHOLD
    occurrence_threshold: int = DEFAULT_OCCURRENCE_THRESHOLD
    anchor: str = DEFAULT_ANCHOR
    output_dir: Path | None = None
    emit: frozenset[str] = field(default_factory=lambda: frozenset({"report"}))
    max_bad_rows: int = 0
    keep_pre_anchor: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(Path(p) for p in self.inputs))
        if not self.inputs:
            raise ValueError("at least one input file is required")
        AggregationConfig(self.window_seconds, self.min_length)
        if not 0.0 < self.corr_threshold < 1.0:
            raise ValueError(f"correlation threshold must lie in (0, 1), got {self.corr_threshold}")
        if self.occurrence_threshold < 1:
            raise ValueError(f"occurrence threshold must be >= 1, got {self.occurrence_threshold}")
        if self.max_bad_rows < 0:
            raise ValueError("max_bad_rows must be >= 0")
        parse_clock(self.anchor)
        unknown = set(self.emit) - set(EMIT_CHOICES)
        if unknown:
            raise ValueError(f"unknown emit flags: {sorted(unknown)}")

    @property
    def aggregation(self) -> AggregationConfig:
        return AggregationConfig(self.window_seconds, self.min_length)

    @property
    def file_format(self) -> OrderFileFormat:
        return OrderFileFormat(self.anchor, self.keep_pre_anchor, self.max_bad_rows)

    def parameters(self) -> dict:
        return {
            "window_seconds": self.window_seconds,
            "min_length": self.min_length,
            "corr_threshold": self.corr_threshold,
            "occurrence_threshold": self.occurrence_threshold,
            "anchor": self.anchor,
        }


@dataclass(frozen=True)
class DayResult:
    label: str
    n_orders: int
    series: dict[str, AggregatedSeries]
    matrix: CorrelationMatrix | None
    graph: DailyGraph

    def summary(self) -> dict:
        return {
            "day": self.label,
            "orders": self.n_orders,
            "investors": len(self.series),
            "eligible": len(self.graph.nodes),
            "edges": len(self.graph.edges),
            "components": len(connected_components(self.graph)),
        }


def load_day(path: Path, config: RunConfig) -> tuple[int, dict[str, AggregatedSeries]]:
    with open(path, "rb") as fh:
        orders = parse_orders(fh, config.file_format)
    return len(orders), aggregate_all(to_signed_series(orders), config.aggregation)


def day_graph(label: str, eligible: dict[str, AggregatedSeries], delta_w: float) -> tuple[CorrelationMatrix | None, DailyGraph]:
    if len(eligible) < 2:
        logger.warning("day %s: %d eligible series, no correlations computed", label, len(eligible))
        return None, DailyGraph(label, tuple(sorted(eligible, key=id_sort_key)), {})
    matrix = correlation_matrix(eligible)
    return matrix, build_daily_graph(matrix, delta_w, day=label)


def process_day(path: Path, config: RunConfig) -> DayResult:
    label = Path(path).stem
    n_orders, series = load_day(path, config)
    eligible = filter_eligible(series, config.aggregation)
    matrix, graph = day_graph(label, eligible, config.corr_threshold)
    logger.info("day %s: %d orders, %d eligible, %d edges", label, n_orders, len(eligible), len(graph.edges))
    return DayResult(label, n_orders, series, matrix, graph)


def _process_all(config: RunConfig) -> list[DayResult]:
    if config.jobs > 1 and len(config.inputs) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(process_day, config.inputs, [config] * len(config.inputs)))
    return [process_day(p, config) for p in config.inputs]


def run_pipeline(config: RunConfig) -> CliqueReport:
    """Detect suspect cliques across all input days and write requested artifacts."""
    days = _process_all(config)
    integrated = integrate([d.graph for d in days], config.occurrence_threshold)
    report = CliqueReport(
        cliques_from_integrated(integrated),
        parameters=config.parameters(),
        days=tuple(d.summary() for d in days),
    )
    if config.output_dir is not None:
        _write_outputs(config, days, integrated, report)
    return report


def _write_outputs(config: RunConfig, days: list[DayResult], integrated, report: CliqueReport) -> None:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for d in days:
        if "matrix" in config.emit and d.matrix is not None:
            with open(out / f"{d.label}.matrix.csv", "w", encoding="utf-8", newline="") as fh:
                d.matrix.write_csv(fh)
        if "daily_dot" in config.emit:
            with open(out / f"{d.label}.dot", "w", encoding="utf-8") as fh:
                write_dot(d.graph, fh, name=d.label)
        if "stats" in config.emit:
            with open(out / f"{d.label}.length_cdf.csv", "w", encoding="utf-8") as fh:
                write_cdf(length_cdf(d.series), fh)
    if "integrated_dot" in config.emit:
        with open(out / "integrated.dot", "w", encoding="utf-8") as fh:
            write_dot(integrated, fh, name="integrated")
    if "report" in config.emit:
        (out / "report.json").write_text(report.to_json(), encoding="utf-8")


def write_cdf(points, fh) -> None:
    fh.write("length,cdf\n")
    for length, value in points:
        fh.write(f"{length},{value:.6f}\n")


def sweep_window(config: RunConfig, investor_a: str, investor_b: str, sizes: Sequence[int]) -> list[tuple[int, float | None]]:
    """Correlation of one investor pair as the window width varies (single day)."""
    if len(config.inputs) != 1:
        raise ValueError("sweep_window works on exactly one input day")
    if not sizes:
        raise ValueError("no window sizes given")
    with open(config.inputs[0], "rb") as fh:
        signed = to_signed_series(parse_orders(fh, config.file_format))
    for inv in (investor_a, investor_b):
        if inv not in signed:
            raise KeyError(f"investor {inv!r} not present in {config.inputs[0]}")
    out = []
    for width in sizes:
        agg = AggregationConfig(width, config.min_length)
        a = aggregate(signed[investor_a], agg)
        b = aggregate(signed[investor_b], agg)
        r = None
        if len(a) and len(b):
            pair = unify(a, b)
            if len(pair.indices) >= 2:
                r = correlate(pair)
        out.append((width, r))
    return out


def sweep_threshold(config: RunConfig, thresholds: Sequence[float]) -> list[tuple[float, int]]:
    """Daily-graph component count for each correlation threshold (single day)."""
    if not thresholds:
        raise ValueError("no thresholds given")
    if len(config.inputs) != 1:
        raise ValueError("sweep_threshold works on exactly one input day")
    day = process_day(config.inputs[0], config)
    return threshold_counts(day.matrix, thresholds)


def threshold_counts(matrix: CorrelationMatrix | None, thresholds: Sequence[float]) -> list[tuple[float, int]]:
    out = []
    for t in thresholds:
        if matrix is None:
            if not 0.0 < t < 1.0:
                raise ValueError(f"correlation threshold must lie in (0, 1), got {t}")
            out.append((t, 0))
            continue
        out.append((t, len(connected_components(build_daily_graph(matrix, t)))))
    return out


def stats(config: RunConfig) -> list[tuple[int, float]]:
    """Length CDF of the aggregated series pooled over all input days."""
    pooled: dict[str, AggregatedSeries] = {}
    for k, path in enumerate(config.inputs):
        _, series = load_day(path, config)
        pooled.update({f"{k}:{inv}": s for inv, s in series.items()})
    return length_cdf(pooled)
