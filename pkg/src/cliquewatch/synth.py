"""Synthetic multi-day order files with planted collusive cliques.

The behaviour model is our own construction. Each clique has a leader whose
orders are mirrored by every follower on the same side, a uniformly drawn
delay of at most ``lag_seconds`` later, with volume scaled by ``1 + jitter * z``
(z standard normal). Noise traders place a handful of independent orders and
rarely pass the length filter. Day traders place hundreds of independent
orders, so their series are long but uncorrelated. Independent order sides are
fair coin flips, which keeps signed volumes zero-mean.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .graph import CliqueReport, edge_key
from .orders import DEFAULT_ANCHOR, HEADER, format_clock, id_sort_key, parse_clock

DEFAULT_SESSIONS = (
    ("09:00:00", "10:15:00"),
    ("10:30:00", "11:30:00"),
    ("13:30:00", "14:10:00"),
    ("14:20:00", "15:00:00"),
)


@dataclass(frozen=True)
class CliqueSpec:
    size: int
    lag_seconds: int = 10
    volume_jitter: float = 0.1
    participation: float = 1.0
    events_per_day: int = 40

    def __post_init__(self) -> None:
        if self.size < 2:
            raise ValueError(f"a planted clique needs >= 2 members, got {self.size}")
        if self.lag_seconds < 0:
            raise ValueError("lag_seconds must be >= 0")
        if self.volume_jitter < 0:
            raise ValueError("volume_jitter must be >= 0")
        if not 0.0 < self.participation <= 1.0:
            raise ValueError("participation must lie in (0, 1]")
        if self.events_per_day < 0:
            raise ValueError("events_per_day must be >= 0")


@dataclass(frozen=True)
class SynthConfig:
    n_noise_traders: int = 300
    n_day_traders: int = 30
    cliques: tuple[CliqueSpec, ...] = (CliqueSpec(2), CliqueSpec(3), CliqueSpec(6))
    days: int = 9
    orders_per_day_mean: int = 20_000
    noise_orders_mean: float = 4.0
    sessions: tuple[tuple[str, str], ...] = DEFAULT_SESSIONS
    anchor: str = DEFAULT_ANCHOR
    base_price: int = 3200
    rng_seed: int = 0

    def __post_init__(self) -> None:
        for name in ("n_noise_traders", "n_day_traders", "days", "orders_per_day_mean"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.noise_orders_mean < 0:
            raise ValueError("noise_orders_mean must be >= 0")
        spans = self.session_bounds()
        if not spans:
            raise ValueError("at least one session is required")
        prev_end = None
        for start, end in spans:
            if end <= start:
                raise ValueError("session end must follow its start")
            if prev_end is not None and start < prev_end:
                raise ValueError("sessions must be chronological and non-overlapping")
            prev_end = end
        if spans[0][0] < 0:
            raise ValueError("sessions may not start before the anchor")

    def session_bounds(self) -> list[tuple[int, int]]:
        """Sessions as ``[start, end)`` seconds relative to the anchor."""
        base = parse_clock(self.anchor)
        return [(parse_clock(a) - base, parse_clock(b) - base) for a, b in self.sessions]

    @property
    def session_seconds(self) -> int:
        return sum(end - start for start, end in self.session_bounds())


@dataclass(frozen=True)
class GroundTruth:
    planted: tuple[tuple[str, ...], ...] = ()

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for group in self.planted:
            if len(group) < 2:
                raise ValueError("planted sets need >= 2 members")
            if seen & set(group):
                raise ValueError("planted sets must be disjoint")
            seen.update(group)

    def pairs(self) -> set[tuple[str, str]]:
        return {edge_key(a, b) for g in self.planted for a, b in combinations(g, 2)}

    def to_json(self) -> str:
        return json.dumps({"planted": [list(g) for g in self.planted]}, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "GroundTruth":
        data = json.loads(text)
        return cls(tuple(tuple(str(x) for x in g) for g in data["planted"]))


@dataclass(frozen=True)
class SynthMarket:
    config: SynthConfig
    days: tuple[str, ...]  # one order CSV text per trading day
    truth: GroundTruth
    day_traders: tuple[str, ...] = ()
    noise_traders: tuple[str, ...] = ()

    def write(self, directory: str | Path) -> list[Path]:
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for k, text in enumerate(self.days, start=1):
            path = out / f"day_{k:02d}.csv"
            path.write_text(text, encoding="utf-8")
            paths.append(path)
        (out / "truth.json").write_text(self.truth.to_json(), encoding="utf-8")
        return paths


class _Sessions:
    """Maps uniform draws on total trading seconds to anchor-relative times."""

    def __init__(self, bounds: Sequence[tuple[int, int]]):
        self.starts = np.array([s for s, _ in bounds], dtype=np.int64)
        self.ends = np.array([e for _, e in bounds], dtype=np.int64)
        lengths = self.ends - self.starts
        self.offsets = np.concatenate([[0], np.cumsum(lengths)])
        self.total = int(self.offsets[-1])

    def place(self, u: np.ndarray) -> np.ndarray:
        k = np.searchsorted(self.offsets, u, side="right") - 1
        return self.starts[k] + (u - self.offsets[k])

    def session_of(self, t: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.starts, t, side="right") - 1


def _volumes(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.geometric(0.2, size=n).astype(np.int64)


def _assign_ids(rng: np.random.Generator, config: SynthConfig):
    n_clique = sum(c.size for c in config.cliques)
    total = config.n_noise_traders + config.n_day_traders + n_clique
    ids = [str(x) for x in (100000 + rng.permutation(total * 10)[:total])]
    cursor = 0
    groups = []
    for spec in config.cliques:
        groups.append(tuple(ids[cursor : cursor + spec.size]))
        cursor += spec.size
    day = ids[cursor : cursor + config.n_day_traders]
    cursor += config.n_day_traders
    noise = ids[cursor:]
    return groups, day, noise


def _check_capacity(config: SynthConfig, day_orders_mean: float) -> None:
    seconds = config.session_seconds
    # one investor can place at most one order per second
    if day_orders_mean > seconds:
        raise ValueError(
            f"day traders would average {day_orders_mean:.0f} orders in {seconds} trading seconds"
        )
    if config.noise_orders_mean > seconds:
        raise ValueError(f"noise traders would average more orders than {seconds} trading seconds")
    for spec in config.cliques:
        if spec.events_per_day > seconds:
            raise ValueError(f"{spec.events_per_day} clique events do not fit in {seconds} trading seconds")
        if spec.lag_seconds >= min(e - s for s, e in config.session_bounds()):
            raise ValueError("clique lag exceeds the shortest session")


def _day_trader_mean(config: SynthConfig) -> float:
    clique_orders = sum(c.events_per_day * c.size for c in config.cliques)
    noise_orders = config.n_noise_traders * config.noise_orders_mean
    rest = config.orders_per_day_mean - clique_orders - noise_orders
    if config.n_day_traders == 0:
        return 0.0
    return max(rest, 0) / config.n_day_traders


def _unique_times(rng: np.random.Generator, sessions: _Sessions, n: int) -> np.ndarray:
    n = min(n, sessions.total)
    return np.sort(sessions.place(rng.choice(sessions.total, size=n, replace=False)))


def _generate_day(config, day, groups, day_traders, noise_traders, base_price) -> str:
    rng = np.random.default_rng([config.rng_seed, day])
    sessions = _Sessions(config.session_bounds())
    inv_col: list[np.ndarray] = []
    t_col: list[np.ndarray] = []
    sign_col: list[np.ndarray] = []
    vol_col: list[np.ndarray] = []

    def emit(inv: str, t: np.ndarray, sign: np.ndarray, vol: np.ndarray) -> None:
        inv_col.append(np.full(len(t), inv, dtype=object))
        t_col.append(np.asarray(t, dtype=np.int64))
        sign_col.append(np.asarray(sign, dtype=np.int64))
        vol_col.append(np.asarray(vol, dtype=np.int64))

    for spec, members in zip(config.cliques, groups):
        k = spec.events_per_day
        t0 = _unique_times(rng, sessions, k)
        session = sessions.session_of(t0)
        # leave room for the followers' delay inside the same session
        t0 = np.minimum(t0, sessions.ends[session] - 1 - spec.lag_seconds)
        t0 = np.maximum(t0, sessions.starts[session])
        sign = rng.choice(np.array([-1, 1]), size=k)
        base = _volumes(rng, k)
        emit(members[0], t0, sign, base)
        for follower in members[1:]:
            delay = rng.integers(0, spec.lag_seconds + 1, size=k)
            scale = 1.0 + spec.volume_jitter * rng.standard_normal(k)
            vol = np.maximum(1, np.rint(base * scale)).astype(np.int64)
            take = rng.random(k) < spec.participation
            emit(follower, (t0 + delay)[take], sign[take], vol[take])

    mean_day = _day_trader_mean(config)
    independent = [(inv, mean_day) for inv in day_traders] + [(inv, config.noise_orders_mean) for inv in noise_traders]
    for inv, mean in independent:
        t = _unique_times(rng, sessions, int(rng.poisson(mean)))
        emit(inv, t, rng.choice(np.array([-1, 1]), size=len(t)), _volumes(rng, len(t)))

    if not t_col:
        return ",".join(HEADER) + "\n"
    inv = np.concatenate(inv_col)
    t = np.concatenate(t_col)
    sign = np.concatenate(sign_col)
    vol = np.concatenate(vol_col)
    order = np.argsort(t, kind="stable")
    # a buyer bids a few ticks under the day's price, a seller asks above it
    price = base_price - sign * rng.integers(0, 6, size=len(t))

    anchor = parse_clock(config.anchor)
    lines = [",".join(HEADER)]
    for i in order.tolist():
        side = "Buy" if sign[i] > 0 else "Sell"
        lines.append(f"{inv[i]},{format_clock(anchor + int(t[i]))},{side},{int(price[i])},{int(vol[i])}")
    return "\n".join(lines) + "\n"


def generate(config: SynthConfig | None = None) -> SynthMarket:
    """Build every trading day and the planted ground truth; deterministic in ``rng_seed``."""
    config = config or SynthConfig()
    mean_day = _day_trader_mean(config)
    _check_capacity(config, mean_day)
    rng = np.random.default_rng(config.rng_seed)
    groups, day_traders, noise_traders = _assign_ids(rng, config)
    prices = config.base_price + np.cumsum(rng.integers(-20, 21, size=config.days))
    prices = np.maximum(prices, 10)
    days = tuple(
        _generate_day(config, d, groups, day_traders, noise_traders, int(prices[d])) for d in range(config.days)
    )
    truth = GroundTruth(tuple(tuple(sorted(g, key=id_sort_key)) for g in groups))
    return SynthMarket(config, days, truth, tuple(day_traders), tuple(noise_traders))


@dataclass(frozen=True)
class Score:
    """Pair-level detection quality; ``None`` marks an undefined ratio."""

    pair_precision: Optional[float]
    pair_recall: Optional[float]
    clique_exact_matches: int
    true_positives: int
    false_positives: int
    false_negatives: int

    def to_dict(self) -> dict:
        return {
            "pair_precision": self.pair_precision,
            "pair_recall": self.pair_recall,
            "precision_undefined": self.pair_precision is None,
            "recall_undefined": self.pair_recall is None,
            "clique_exact_matches": self.clique_exact_matches,
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
        }


def _member_sets(groups: Iterable[Iterable[str]]) -> list[frozenset[str]]:
    return [frozenset(g) for g in groups]


def score(report: CliqueReport | Iterable[Iterable[str]], truth: GroundTruth) -> Score:
    """Compare detected cliques with planted sets over unordered investor pairs."""
    detected_groups = (
        [c.members for c in report.cliques] if isinstance(report, CliqueReport) else list(report)
    )
    detected = {edge_key(a, b) for g in detected_groups for a, b in combinations(sorted(set(g)), 2)}
    planted = truth.pairs()
    tp = len(detected & planted)
    fp = len(detected - planted)
    fn = len(planted - detected)
    if detected:
        precision: Optional[float] = tp / (tp + fp)
    else:
        precision = 1.0 if not planted else None
    recall = tp / (tp + fn) if planted else None
    exact = len(set(_member_sets(detected_groups)) & set(_member_sets(truth.planted)))
    return Score(precision, recall, exact, tp, fp, fn)
