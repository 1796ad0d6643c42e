"""Dataset ingestion, validation, and report emission.

All input files are CSV with fixed headers that name both column and unit;
timestamps are ISO-8601 UTC, numbers use ``.`` decimals, no locale handling.
A dataset directory holds:

* ``metadata.json``     installed capacity, resolutions, timezone declaration
* ``forecasts.csv``     ``timestamp_utc,mean_mwh,variance_mwh2``   (day-ahead resolution)
* ``da_prices.csv``     ``timestamp_utc,price_eur_mwh``            (day-ahead resolution)
* ``production.csv``    ``timestamp_utc,energy_mwh``               (settlement resolution)
* ``system_imbalance.csv``  ``timestamp_utc,si_mw``                (settlement resolution)
* ``balancing_bids.csv``    ``timestamp_utc,product,direction,volume_mw,price_eur_mwh``
  with ``product`` in {aFRR,mFRR} and ``direction`` in {up,down}; one row per
  bid, many rows per settlement period.

Malformed content (unparseable fields, duplicate or misaligned timestamps,
non-positive volumes, non-finite numbers) raises; hours with missing rows
become gap entries in the validation report and are skipped symmetrically by
the backtest. Floats are emitted with 17 significant digits so every value
round-trips bit-exactly, and all writers are deterministic: identical inputs
yield byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import TYPE_CHECKING

from .errors import (
    AlignmentError,
    DataError,
    DuplicateTimestampError,
    ParseError,
)
from .market_model import ContractWindow, MarketResolution, sub_windows
from .merit_order import BalancingEnergyBid
from .strategy import ForecastMoments, contract_energy_cap_mwh

if TYPE_CHECKING:
    from .backtest import BacktestReport

METADATA_FILE = "metadata.json"
FORECASTS_FILE = "forecasts.csv"
DA_PRICES_FILE = "da_prices.csv"
PRODUCTION_FILE = "production.csv"
SYSTEM_IMBALANCE_FILE = "system_imbalance.csv"
BALANCING_BIDS_FILE = "balancing_bids.csv"

FORECAST_HEADER = ["timestamp_utc", "mean_mwh", "variance_mwh2"]
PRICE_HEADER = ["timestamp_utc", "price_eur_mwh"]
PRODUCTION_HEADER = ["timestamp_utc", "energy_mwh"]
SYSTEM_IMBALANCE_HEADER = ["timestamp_utc", "si_mw"]
BIDS_HEADER = ["timestamp_utc", "product", "direction", "volume_mw", "price_eur_mwh"]


def format_number(value: float) -> str:
    """17 significant digits: every double round-trips exactly."""
    return f"{value:.17g}"


def format_timestamp(ts: datetime) -> str:
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class BundleMetadata:
    beta_mw: float
    resolution: MarketResolution
    timezone: str = "UTC"


@dataclass
class ValidationReport:
    """Machine-readable load outcome: gaps, non-fatal anomalies, row counts."""

    gaps: list[dict] = field(default_factory=list)
    anomalies: list[dict] = field(default_factory=list)
    row_counts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"gaps": self.gaps, "anomalies": self.anomalies, "row_counts": self.row_counts}


@dataclass
class DatasetBundle:
    """A validated market dataset, keyed by UTC window starts."""

    metadata: BundleMetadata
    forecasts: dict[datetime, ForecastMoments]
    da_prices: dict[datetime, float]
    production: dict[datetime, float]
    system_imbalance: dict[datetime, float]
    balancing_bids: dict[datetime, list[BalancingEnergyBid]]

    @property
    def resolution(self) -> MarketResolution:
        return self.metadata.resolution

    def hour_window(self, start: datetime) -> ContractWindow:
        return ContractWindow(start, self.resolution.day_ahead_minutes)

    def missing_for_hour(self, start: datetime) -> list[str]:
        """Names of the inputs missing for one contract window; empty if complete."""
        missing = []
        if start not in self.forecasts:
            missing.append("forecast")
        if start not in self.da_prices:
            missing.append("da_price")
        for window in sub_windows(self.hour_window(start), self.resolution):
            tag = window.start.strftime("%H:%M")
            if window.start not in self.production:
                missing.append(f"production@{tag}")
            if window.start not in self.system_imbalance:
                missing.append(f"system_imbalance@{tag}")
            if window.start not in self.balancing_bids:
                missing.append(f"balancing_bids@{tag}")
        return missing

    def candidate_hours(self) -> list[datetime]:
        """All contract-window starts touched by any input series, sorted."""
        hourly = set(self.forecasts) | set(self.da_prices)
        da_min = self.resolution.day_ahead_minutes
        for ts in set(self.production) | set(self.system_imbalance) | set(self.balancing_bids):
            minute_of_day = ts.hour * 60 + ts.minute
            hourly.add(ts - timedelta(minutes=minute_of_day % da_min))
        return sorted(hourly)

    def complete_hours(self) -> list[datetime]:
        return [h for h in self.candidate_hours() if not self.missing_for_hour(h)]


def load_forecast_series(path: str | Path, resolution_minutes: int) -> dict[datetime, ForecastMoments]:
    """Load an hourly ``timestamp_utc,mean_mwh,variance_mwh2`` file."""
    forecasts = {}
    for ts, row, loc in _read_rows(Path(path), FORECAST_HEADER, resolution_minutes):
        try:
            forecasts[ts] = ForecastMoments(
                mean_mwh=_parse_float(row["mean_mwh"], loc),
                variance_mwh2=_parse_float(row["variance_mwh2"], loc),
            )
        except DataError as exc:
            raise DataError(f"{loc}: {exc}") from exc
    return forecasts


def load_price_series(path: str | Path, resolution_minutes: int) -> dict[datetime, float]:
    """Load a ``timestamp_utc,price_eur_mwh`` file."""
    return {
        ts: _parse_float(row["price_eur_mwh"], loc)
        for ts, row, loc in _read_rows(Path(path), PRICE_HEADER, resolution_minutes)
    }


def load_bids_series(
    path: str | Path, resolution_minutes: int
) -> dict[datetime, list[BalancingEnergyBid]]:
    """Load a balancing-bids file: many rows per settlement period."""
    bids: dict[datetime, list[BalancingEnergyBid]] = {}
    for ts, row, loc in _read_rows(Path(path), BIDS_HEADER, resolution_minutes, unique=False):
        try:
            bid = BalancingEnergyBid(
                product=row["product"],
                direction=row["direction"],
                volume_mw=_parse_float(row["volume_mw"], loc),
                price_eur_mwh=_parse_float(row["price_eur_mwh"], loc),
            )
        except DataError as exc:
            raise DataError(f"{loc}: {exc}") from exc
        bids.setdefault(ts, []).append(bid)
    return bids


def load_bundle(data_dir: str | Path) -> tuple[DatasetBundle, ValidationReport]:
    """Load and validate a dataset directory.

    Raises on malformed content; missing hours are reported, not fatal.
    """
    data_dir = Path(data_dir)
    metadata = _load_metadata(data_dir / METADATA_FILE)
    res = metadata.resolution
    hour_cap = contract_energy_cap_mwh(metadata.beta_mw, res)
    quarter_cap = hour_cap / res.periods_per_contract

    report = ValidationReport()

    forecasts = load_forecast_series(data_dir / FORECASTS_FILE, res.day_ahead_minutes)
    for ts, forecast in forecasts.items():
        if forecast.mean_mwh > hour_cap:
            raise DataError(
                f"{data_dir / FORECASTS_FILE}: forecast mean {forecast.mean_mwh} MWh at "
                f"{format_timestamp(ts)} exceeds capacity cap {hour_cap} MWh"
            )

    da_prices = load_price_series(data_dir / DA_PRICES_FILE, res.day_ahead_minutes)

    production = {}
    for ts, row, loc in _read_rows(
        data_dir / PRODUCTION_FILE, PRODUCTION_HEADER, res.balancing_minutes
    ):
        energy = _parse_float(row["energy_mwh"], loc)
        if energy < 0:
            raise DataError(f"{loc}: production energy must be >= 0, got {energy}")
        if energy > quarter_cap * (1 + 1e-9):
            # SCADA can briefly exceed nameplate; keep the row, flag it
            report.anomalies.append(
                {
                    "kind": "production_above_capacity",
                    "timestamp_utc": format_timestamp(ts),
                    "energy_mwh": energy,
                    "quarter_cap_mwh": quarter_cap,
                }
            )
        production[ts] = energy

    system_imbalance = {}
    for ts, row, loc in _read_rows(
        data_dir / SYSTEM_IMBALANCE_FILE, SYSTEM_IMBALANCE_HEADER, res.balancing_minutes
    ):
        system_imbalance[ts] = _parse_float(row["si_mw"], loc)

    balancing_bids = load_bids_series(data_dir / BALANCING_BIDS_FILE, res.balancing_minutes)

    bundle = DatasetBundle(
        metadata=metadata,
        forecasts=forecasts,
        da_prices=da_prices,
        production=production,
        system_imbalance=system_imbalance,
        balancing_bids=balancing_bids,
    )
    for hour in bundle.candidate_hours():
        missing = bundle.missing_for_hour(hour)
        if missing:
            report.gaps.append({"hour_utc": format_timestamp(hour), "missing": missing})
    report.row_counts = {
        "forecasts": len(forecasts),
        "da_prices": len(da_prices),
        "production": len(production),
        "system_imbalance": len(system_imbalance),
        "balancing_bid_rows": sum(len(v) for v in balancing_bids.values()),
    }
    return bundle, report


def write_bundle(bundle: DatasetBundle, out_dir: str | Path) -> dict[str, Path]:
    """Write a bundle back to a dataset directory (deterministic byte output)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    res = bundle.resolution
    paths = {}

    meta_path = out_dir / METADATA_FILE
    _write_json(
        meta_path,
        {
            "beta_mw": bundle.metadata.beta_mw,
            "day_ahead_minutes": res.day_ahead_minutes,
            "balancing_minutes": res.balancing_minutes,
            "timezone": bundle.metadata.timezone,
        },
    )
    paths[METADATA_FILE] = meta_path

    paths[FORECASTS_FILE] = _write_csv(
        out_dir / FORECASTS_FILE,
        FORECAST_HEADER,
        (
            [format_timestamp(ts), format_number(f.mean_mwh), format_number(f.variance_mwh2)]
            for ts, f in sorted(bundle.forecasts.items())
        ),
    )
    paths[DA_PRICES_FILE] = _write_csv(
        out_dir / DA_PRICES_FILE,
        PRICE_HEADER,
        ([format_timestamp(ts), format_number(p)] for ts, p in sorted(bundle.da_prices.items())),
    )
    paths[PRODUCTION_FILE] = _write_csv(
        out_dir / PRODUCTION_FILE,
        PRODUCTION_HEADER,
        ([format_timestamp(ts), format_number(e)] for ts, e in sorted(bundle.production.items())),
    )
    paths[SYSTEM_IMBALANCE_FILE] = _write_csv(
        out_dir / SYSTEM_IMBALANCE_FILE,
        SYSTEM_IMBALANCE_HEADER,
        (
            [format_timestamp(ts), format_number(si)]
            for ts, si in sorted(bundle.system_imbalance.items())
        ),
    )

    def bid_rows():
        for ts, bids in sorted(bundle.balancing_bids.items()):
            ordered = sorted(
                bids, key=lambda b: (b.direction, b.product, b.price_eur_mwh, b.volume_mw)
            )
            for b in ordered:
                yield [
                    format_timestamp(ts),
                    b.product,
                    b.direction,
                    format_number(b.volume_mw),
                    format_number(b.price_eur_mwh),
                ]

    paths[BALANCING_BIDS_FILE] = _write_csv(
        out_dir / BALANCING_BIDS_FILE, BIDS_HEADER, bid_rows()
    )
    return paths


LEDGER_COLUMNS = [
    "timestamp_utc",
    "alpha_tilde",
    "mode",
    "bid_mwh",
    "delta_mwh",
    "direction",
    "clamped",
    "infeasible",
    "da_price_eur_mwh",
    "da_revenue_eur",
    "balancing_payoff_eur",
    "total_profit_eur",
    "profit_eur_per_mw",
    "scarcity_quarters",
    "sign_flip",
]


def write_report(report: "BacktestReport", out_dir: str | Path) -> dict[str, Path]:
    """Emit ``cumulative.csv``, per-strategy histogram CSVs, ``ledger.csv`` and
    ``summary.json`` into ``out_dir``. Bit-stable given identical inputs."""
    from .backtest import summarize  # local import: backtest builds on this module

    tables = summarize(report)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}

    cumulative = tables["cumulative"]
    paths["cumulative.csv"] = _write_csv(
        out_dir / "cumulative.csv",
        cumulative["columns"],
        (
            [row[0]] + [format_number(v) for v in row[1:]]
            for row in cumulative["rows"]
        ),
    )

    for name, hist in tables["histograms"].items():
        filename = f"histogram_{name}.csv"
        paths[filename] = _write_csv(
            out_dir / filename,
            ["bin_left_eur_per_mw", "bin_right_eur_per_mw", "count"],
            (
                [format_number(left), format_number(right), str(count)]
                for left, right, count in hist
            ),
        )

    paths["ledger.csv"] = _write_csv(
        out_dir / "ledger.csv",
        LEDGER_COLUMNS,
        (
            [
                row["timestamp_utc"],
                format_number(row["alpha_tilde"]),
                row["mode"],
                format_number(row["bid_mwh"]),
                format_number(row["delta_mwh"]),
                row["direction"],
                str(int(row["clamped"])),
                str(int(row["infeasible"])),
                format_number(row["da_price_eur_mwh"]),
                format_number(row["da_revenue_eur"]),
                format_number(row["balancing_payoff_eur"]),
                format_number(row["total_profit_eur"]),
                format_number(row["profit_eur_per_mw"]),
                str(row["scarcity_quarters"]),
                str(int(row["sign_flip"])),
            ]
            for row in tables["ledger"]
        ),
    )

    summary_path = out_dir / "summary.json"
    _write_json(summary_path, tables["summary"])
    paths["summary.json"] = summary_path
    return paths


def read_ledger(path: str | Path) -> list[dict]:
    """Reload ``ledger.csv`` with full numeric fidelity (round-trip of write_report)."""
    path = Path(path)
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != LEDGER_COLUMNS:
            raise ParseError(f"{path}: unexpected ledger header {reader.fieldnames}")
        for raw in reader:
            rows.append(
                {
                    "timestamp_utc": raw["timestamp_utc"],
                    "alpha_tilde": float(raw["alpha_tilde"]),
                    "mode": raw["mode"],
                    "bid_mwh": float(raw["bid_mwh"]),
                    "delta_mwh": float(raw["delta_mwh"]),
                    "direction": raw["direction"],
                    "clamped": bool(int(raw["clamped"])),
                    "infeasible": bool(int(raw["infeasible"])),
                    "da_price_eur_mwh": float(raw["da_price_eur_mwh"]),
                    "da_revenue_eur": float(raw["da_revenue_eur"]),
                    "balancing_payoff_eur": float(raw["balancing_payoff_eur"]),
                    "total_profit_eur": float(raw["total_profit_eur"]),
                    "profit_eur_per_mw": float(raw["profit_eur_per_mw"]),
                    "scarcity_quarters": int(raw["scarcity_quarters"]),
                    "sign_flip": bool(int(raw["sign_flip"])),
                }
            )
    return rows


def _load_metadata(path: Path) -> BundleMetadata:
    if not path.exists():
        raise ParseError(f"{path}: metadata file missing")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    for key in ("beta_mw", "day_ahead_minutes", "balancing_minutes"):
        if key not in raw:
            raise ParseError(f"{path}: missing metadata key {key!r}")
    tz = raw.get("timezone", "UTC")
    if tz != "UTC":
        raise DataError(f"{path}: only UTC datasets are supported, got timezone {tz!r}")
    beta = float(raw["beta_mw"])
    if not math.isfinite(beta) or beta <= 0:
        raise DataError(f"{path}: beta_mw must be finite and > 0, got {beta}")
    return BundleMetadata(
        beta_mw=beta,
        resolution=MarketResolution(
            day_ahead_minutes=int(raw["day_ahead_minutes"]),
            balancing_minutes=int(raw["balancing_minutes"]),
        ),
        timezone=tz,
    )


def _read_rows(path: Path, expected: list[str], resolution_minutes: int, unique: bool = True):
    """Yield ``(timestamp, row_dict, location)`` with alignment/duplicate checks."""
    if not path.exists():
        raise ParseError(f"{path}: file missing")
    seen: set[datetime] = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}:1: empty file, expected header {expected}") from None
        if header != expected:
            raise ParseError(f"{path}:1: header {header} does not match contract {expected}")
        for lineno, row in enumerate(reader, start=2):
            loc = f"{path}:{lineno}"
            if len(row) != len(expected):
                raise ParseError(f"{loc}: expected {len(expected)} columns, got {len(row)}")
            ts = parse_timestamp_text(row[0], loc)
            if (ts.hour * 60 + ts.minute) % resolution_minutes != 0:
                raise AlignmentError(
                    f"{loc}: timestamp {row[0]} not aligned to {resolution_minutes}-minute grid"
                )
            if unique:
                if ts in seen:
                    raise DuplicateTimestampError(f"{loc}: duplicate timestamp {row[0]}")
                seen.add(ts)
            yield ts, dict(zip(expected, row)), loc


def parse_timestamp_text(text: str, loc: str = "timestamp") -> datetime:
    """Parse an ISO-8601 timestamp with a UTC offset into a UTC datetime."""
    try:
        ts = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise ParseError(f"{loc}: invalid timestamp {text!r}") from exc
    if ts.tzinfo is None:
        raise ParseError(f"{loc}: timestamp {text!r} lacks a UTC offset")
    ts = ts.astimezone(timezone.utc)
    if ts.second != 0 or ts.microsecond != 0:
        raise AlignmentError(f"{loc}: timestamp {text!r} has sub-minute precision")
    return ts


def _parse_float(text: str, loc: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise ParseError(f"{loc}: invalid number {text!r}") from exc
    if not math.isfinite(value):
        raise DataError(f"{loc}: non-finite value {text!r}")
    return value


def _write_csv(path: Path, header: list[str], rows) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _write_json(path: Path, payload: dict) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path
