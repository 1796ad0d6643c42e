"""Risk-certificate sweeps over a market dataset.

For every contract window the sweep recomputes the baseline balancing prices
through the merit-order engine (each settlement period cleared at its
historical system imbalance), takes the realized day-ahead price and the mean
baseline balancing price as the decision's price expectation (perfect price
foresight, so results read as a theoretical upper bound), computes one bid per
normalized risk certificate, and settles that bid in the requested evaluation
modes. Hours missing any input are listed in a gap report and skipped in
every series symmetrically, keeping the certificate series comparable.

Per-hour work is pure, so hours may be evaluated in parallel; the report is
assembled in time order and is independent of the parallelism degree.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .errors import DataError, DomainError
from .io import DatasetBundle, format_timestamp
from .market_model import MarketResolution, resample_mean, sub_windows
from .merit_order import build_curve, clearing_price
from .settlement import MODES, HourLedgerEntry, settle_hour
from .strategy import (
    BidDecision,
    PriceExpectation,
    compute_optimal_bid,
    normalized_delta,
)
from .synthetic import SyntheticScenario, build_bundle, generate_synthetic, preset_scenario

__all__ = [
    "SweepConfig",
    "StrategyResult",
    "BacktestReport",
    "run_sweep",
    "summarize",
    "strategy_label",
    "SyntheticScenario",
    "build_bundle",
    "generate_synthetic",
    "preset_scenario",
]

DEFAULT_ALPHA_TILDES = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class SweepConfig:
    """What to sweep: certificates, evaluation modes, capacity, horizon."""

    beta_mw: float
    resolution: MarketResolution = MarketResolution()
    alpha_tildes: tuple[float, ...] = DEFAULT_ALPHA_TILDES
    modes: tuple[str, ...] = MODES
    start: datetime | None = None
    end: datetime | None = None
    jobs: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.beta_mw) and self.beta_mw > 0):
            raise DomainError(f"beta_mw must be finite and > 0, got {self.beta_mw}")
        if not self.alpha_tildes:
            raise DomainError("alpha_tildes must be non-empty")
        for a in self.alpha_tildes:
            if not (0.0 <= a <= 1.0):
                raise DomainError(f"alpha_tilde {a} outside [0, 1]")
        if any(b <= a for a, b in zip(self.alpha_tildes, self.alpha_tildes[1:])):
            raise DomainError(f"alpha_tildes must be strictly increasing, got {self.alpha_tildes}")
        if not self.modes:
            raise DomainError("modes must be non-empty")
        for m in self.modes:
            if m not in MODES:
                raise DomainError(f"unknown mode {m!r}, expected subset of {MODES}")
        if len(set(self.modes)) != len(self.modes):
            raise DomainError(f"duplicate modes in {self.modes}")
        if self.jobs < 1:
            raise DomainError(f"jobs must be >= 1, got {self.jobs}")


@dataclass
class StrategyResult:
    """Ledger and distribution summary of one (certificate, mode) series."""

    alpha_tilde: float
    mode: str
    entries: list[HourLedgerEntry]
    profits_eur_per_mw: np.ndarray
    cumulative_eur_per_mw: np.ndarray
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    mean_eur_per_mw: float
    std_eur_per_mw: float
    q05_eur_per_mw: float
    q95_eur_per_mw: float
    total_profit_eur: float
    scarcity_quarters: int
    sign_flip_hours: int
    infeasible_hours: int


@dataclass
class BacktestReport:
    """Everything a sweep produced, in deterministic time order."""

    config: SweepConfig
    hours: list[datetime]
    decisions: dict[float, list[BidDecision]]
    series: dict[tuple[float, str], StrategyResult]
    gaps: list[dict]
    dataset_stats: dict
    invocation: dict = field(default_factory=dict)


def strategy_label(alpha_tilde: float, mode: str) -> str:
    """Stable identifier, e.g. ``a025_no_impact`` for (0.25, no_impact)."""
    return f"a{_alpha_label(alpha_tilde)}_{mode}"


def _alpha_label(alpha_tilde: float) -> str:
    pct = 100.0 * alpha_tilde
    if abs(pct - round(pct)) < 1e-9:
        return f"{int(round(pct)):03d}"
    return f"{pct:.6g}".replace(".", "p")


def run_sweep(config: SweepConfig, bundle: DatasetBundle) -> BacktestReport:
    """Evaluate every configured certificate and mode over the dataset."""
    if bundle.resolution != config.resolution:
        raise DataError(
            f"dataset resolution {bundle.resolution} does not match "
            f"configured resolution {config.resolution}"
        )

    hours, gaps = [], []
    for hour in bundle.candidate_hours():
        if config.start is not None and hour < config.start:
            continue
        if config.end is not None and hour >= config.end:
            continue
        missing = bundle.missing_for_hour(hour)
        if missing:
            gaps.append({"hour_utc": format_timestamp(hour), "missing": missing})
        else:
            hours.append(hour)

    def evaluate(hour: datetime):
        return _evaluate_hour(hour, bundle, config)

    if config.jobs > 1 and len(hours) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            evaluated = list(pool.map(evaluate, hours))
    else:
        evaluated = [evaluate(h) for h in hours]

    decisions: dict[float, list[BidDecision]] = {a: [] for a in config.alpha_tildes}
    entries: dict[tuple[float, str], list[HourLedgerEntry]] = {
        (a, m): [] for a in config.alpha_tildes for m in config.modes
    }
    for per_hour in evaluated:
        for alpha in config.alpha_tildes:
            decision, by_mode = per_hour[alpha]
            decisions[alpha].append(decision)
            for mode in config.modes:
                entries[(alpha, mode)].append(by_mode[mode])

    series = {}
    for alpha in config.alpha_tildes:
        pooled = np.concatenate(
            [_normalized_profits(entries[(alpha, m)], config.beta_mw) for m in config.modes]
        )
        edges = _histogram_edges(pooled)
        for mode in config.modes:
            series[(alpha, mode)] = _build_series(
                alpha, mode, entries[(alpha, mode)], config.beta_mw, edges
            )

    return BacktestReport(
        config=config,
        hours=hours,
        decisions=decisions,
        series=series,
        gaps=gaps,
        dataset_stats=_dataset_stats(bundle, hours, config.resolution),
    )


def _evaluate_hour(hour: datetime, bundle: DatasetBundle, config: SweepConfig):
    res = config.resolution
    window = bundle.hour_window(hour)
    quarters = sub_windows(window, res)
    production = [bundle.production[q.start] for q in quarters]
    imbalance = [bundle.system_imbalance[q.start] for q in quarters]
    curves = [build_curve(bundle.balancing_bids[q.start], q) for q in quarters]

    baseline = [clearing_price(c, si).price_eur_mwh for c, si in zip(curves, imbalance)]
    expectation = PriceExpectation(
        da_eur_mwh=bundle.da_prices[hour],
        bal_eur_mwh=resample_mean(baseline, res.periods_per_contract),
    )
    forecast = bundle.forecasts[hour]

    out = {}
    for alpha in config.alpha_tildes:
        delta = normalized_delta(alpha, forecast, config.beta_mw, res)
        decision = compute_optimal_bid(expectation, forecast, delta, config.beta_mw, res)
        settled = {
            mode: settle_hour(
                window,
                decision.bid_mwh,
                expectation.da_eur_mwh,
                production,
                imbalance,
                curves,
                mode,
                res,
            )
            for mode in config.modes
        }
        out[alpha] = (decision, settled)
    return out


def _normalized_profits(entries: list[HourLedgerEntry], beta_mw: float) -> np.ndarray:
    return np.array([e.total_profit_eur / beta_mw for e in entries], dtype=float)


def _build_series(alpha, mode, entries, beta_mw, edges) -> StrategyResult:
    profits = _normalized_profits(entries, beta_mw)
    if profits.size:
        counts, _ = np.histogram(profits, bins=edges)
        mean = float(profits.mean())
        std = float(profits.std())
        q05, q95 = (float(q) for q in np.percentile(profits, [5, 95]))
    else:
        counts = np.zeros(0, dtype=int)
        edges = np.zeros(0, dtype=float)
        mean = std = q05 = q95 = 0.0
    return StrategyResult(
        alpha_tilde=alpha,
        mode=mode,
        entries=entries,
        profits_eur_per_mw=profits,
        cumulative_eur_per_mw=np.cumsum(profits),
        hist_edges=edges,
        hist_counts=counts,
        mean_eur_per_mw=mean,
        std_eur_per_mw=std,
        q05_eur_per_mw=q05,
        q95_eur_per_mw=q95,
        total_profit_eur=math.fsum(e.total_profit_eur for e in entries),
        scarcity_quarters=sum(e.scarcity_quarters for e in entries),
        sign_flip_hours=sum(1 for e in entries if e.sign_flip),
        infeasible_hours=0,  # normalized certificates are feasible by construction
    )


def _histogram_edges(samples: np.ndarray) -> np.ndarray:
    """Freedman-Diaconis edges on the pooled sample; Sturges when the IQR collapses."""
    if samples.size == 0:
        return np.zeros(0, dtype=float)
    lo, hi = float(samples.min()), float(samples.max())
    if lo == hi:
        return np.array([lo - 0.5, hi + 0.5])
    q25, q75 = np.percentile(samples, [25, 75])
    iqr = float(q75 - q25)
    if iqr > 0:
        width = 2.0 * iqr / samples.size ** (1.0 / 3.0)
    else:
        width = (hi - lo) / (1 + math.ceil(math.log2(samples.size)))
    nbins = max(1, min(400, math.ceil((hi - lo) / width)))
    return np.linspace(lo, hi, nbins + 1)


def _dataset_stats(bundle: DatasetBundle, hours: list[datetime], res: MarketResolution) -> dict:
    values = []
    for hour in hours:
        for window in sub_windows(bundle.hour_window(hour), res):
            values.append(bundle.system_imbalance[window.start])
    if not values:
        return {
            "settled_quarters": 0,
            "median_abs_si_mw": 0.0,
            "si_abs_within_100mw_share": 0.0,
            "zero_si_quarters": 0,
        }
    si = np.array(values)
    return {
        "settled_quarters": int(si.size),
        "median_abs_si_mw": float(np.median(np.abs(si))),
        "si_abs_within_100mw_share": float(np.mean(np.abs(si) <= 100.0)),
        "zero_si_quarters": int(np.sum(si == 0.0)),
    }


def summarize(report: BacktestReport) -> dict:
    """Assemble the emission tables: cumulative series, histograms, ledger, summary."""
    config = report.config
    labels = {
        (a, m): strategy_label(a, m) for a in config.alpha_tildes for m in config.modes
    }

    columns = ["timestamp_utc"] + [
        f"{labels[(a, m)]}_eur_per_mw" for a in config.alpha_tildes for m in config.modes
    ]
    cum_rows = []
    for i, hour in enumerate(report.hours):
        row = [format_timestamp(hour)]
        for a in config.alpha_tildes:
            for m in config.modes:
                row.append(float(report.series[(a, m)].cumulative_eur_per_mw[i]))
        cum_rows.append(row)

    histograms = {}
    for (a, m), label in labels.items():
        s = report.series[(a, m)]
        histograms[label] = [
            (float(s.hist_edges[i]), float(s.hist_edges[i + 1]), int(s.hist_counts[i]))
            for i in range(len(s.hist_counts))
        ]

    ledger = []
    for a in config.alpha_tildes:
        for m in config.modes:
            s = report.series[(a, m)]
            for decision, entry in zip(report.decisions[a], s.entries):
                ledger.append(
                    {
                        "timestamp_utc": format_timestamp(entry.hour.start),
                        "alpha_tilde": a,
                        "mode": m,
                        "bid_mwh": entry.bid_mwh,
                        "delta_mwh": decision.delta_mwh,
                        "direction": decision.direction,
                        "clamped": decision.clamped,
                        "infeasible": False,
                        "da_price_eur_mwh": entry.da_price_eur_mwh,
                        "da_revenue_eur": entry.da_revenue_eur,
                        "balancing_payoff_eur": entry.balancing_payoff_eur,
                        "total_profit_eur": entry.total_profit_eur,
                        "profit_eur_per_mw": entry.total_profit_eur / config.beta_mw,
                        "scarcity_quarters": entry.scarcity_quarters,
                        "sign_flip": entry.sign_flip,
                    }
                )

    strategies = {}
    for (a, m), label in labels.items():
        s = report.series[(a, m)]
        strategies[label] = {
            "alpha_tilde": a,
            "mode": m,
            "hours": len(s.entries),
            "total_profit_eur": s.total_profit_eur,
            "total_profit_eur_per_mw": s.total_profit_eur / config.beta_mw,
            "mean_hourly_eur_per_mw": s.mean_eur_per_mw,
            "std_hourly_eur_per_mw": s.std_eur_per_mw,
            "q05_hourly_eur_per_mw": s.q05_eur_per_mw,
            "q95_hourly_eur_per_mw": s.q95_eur_per_mw,
            "scarcity_quarters": s.scarcity_quarters,
            "sign_flip_hours": s.sign_flip_hours,
            "infeasible_hours": s.infeasible_hours,
        }

    summary = {
        "schema": "windbid.summary.v1",
        "config": {
            "beta_mw": config.beta_mw,
            "day_ahead_minutes": config.resolution.day_ahead_minutes,
            "balancing_minutes": config.resolution.balancing_minutes,
            "alpha_tildes": list(config.alpha_tildes),
            "modes": list(config.modes),
            "start": None if config.start is None else format_timestamp(config.start),
            "end": None if config.end is None else format_timestamp(config.end),
            "jobs": config.jobs,
        },
        "invocation": report.invocation,
        "hours_settled": len(report.hours),
        "gaps": report.gaps,
        "dataset_stats": report.dataset_stats,
        "strategies": strategies,
    }

    return {
        "cumulative": {"columns": columns, "rows": cum_rows},
        "histograms": histograms,
        "ledger": ledger,
        "summary": summary,
    }
