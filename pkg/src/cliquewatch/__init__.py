"""Detection of suspect collusive trading cliques from limit-order data."""

from .correlation import CorrelationMatrix, UnifiedPair, correlate, correlation_matrix, unify
from .graph import (
    Clique,
    CliqueReport,
    DailyGraph,
    IntegratedGraph,
    build_daily_graph,
    connected_components,
    detect_cliques,
    integrate,
    write_dot,
)
from .orders import (
    OrderFileError,
    OrderFileFormat,
    OrderRecord,
    Side,
    SignedVolumeEvent,
    SignedVolumeSeries,
    parse_orders,
    to_signed_series,
)
from .series import AggregatedSeries, AggregationConfig, aggregate, filter_eligible, length_cdf

__version__ = "0.1.0"
