"""Command-line entry point.

Subcommands:

* ``bid``       compute risk-constrained day-ahead bids for one day of hourly inputs
* ``backtest``  sweep risk certificates over a dataset directory and write report files
* ``price``     clear one settlement period's balancing price from a bids file
* ``generate``  write a seeded synthetic dataset directory

A config file (``--config``) uses ``key = value`` lines with ``#`` comments;
recognized keys: ``beta_mw``, ``day_ahead_minutes``, ``balancing_minutes``,
``alpha_tildes`` (comma-separated), ``modes`` (comma-separated), ``jobs``,
``data_dir``, ``out_dir``. Command-line flags override config values, which
override dataset metadata. ``WINDBID_DATA_DIR`` supplies the default data
directory. The effective configuration is echoed into ``summary.json``.

Exit codes: 0 success, 1 internal error, 2 input/validation error.
"""

from __future__ import annotations

import argparse
import os
import sys
from datetime import timedelta
from pathlib import Path

from . import io as dataio
from .backtest import DEFAULT_ALPHA_TILDES, SweepConfig, run_sweep, strategy_label
from .errors import DataError, DomainError, ParseError, WindbidError
from .market_model import ContractWindow, MarketResolution
from .merit_order import build_curve, clearing_price
from .settlement import MODES
from .strategy import compute_optimal_bid, normalized_delta, PriceExpectation
from .synthetic import PRESET_NAMES, preset_scenario, generate_synthetic

ENV_DATA_DIR = "WINDBID_DATA_DIR"


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except WindbidError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - keep the CLI's exit-code contract
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="windbid", description=__doc__.split("\n", 1)[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_bid = sub.add_parser("bid", help="compute one day of risk-constrained day-ahead bids")
    p_bid.add_argument("--forecasts", required=True, help="hourly forecast moments CSV")
    p_bid.add_argument("--da-expectation", required=True, help="hourly expected day-ahead price CSV")
    p_bid.add_argument(
        "--bal-expectation",
        required=True,
        help="hourly expected balancing price CSV (already at day-ahead resolution)",
    )
    p_bid.add_argument("--alpha-tilde", type=float, required=True, help="certificate in [0, 1]")
    p_bid.add_argument("--beta-mw", type=float, required=True, help="installed capacity, MW")
    p_bid.add_argument("--day-ahead-minutes", type=int, default=60)
    p_bid.add_argument("--balancing-minutes", type=int, default=15)
    p_bid.add_argument("--out", default=None, help="output CSV (default: stdout)")
    p_bid.set_defaults(handler=_cmd_bid)

    p_bt = sub.add_parser("backtest", help="sweep risk certificates over a dataset directory")
    p_bt.add_argument("--data-dir", default=None, help=f"dataset directory (default ${ENV_DATA_DIR})")
    p_bt.add_argument("--config", default=None, help="key = value config file")
    p_bt.add_argument("--out-dir", default=None, help="report output directory")
    p_bt.add_argument("--beta-mw", type=float, default=None, help="override installed capacity")
    p_bt.add_argument(
        "--alpha-tildes", default=None, help="comma-separated certificates, e.g. 0,0.25,0.5"
    )
    p_bt.add_argument("--modes", default=None, help=f"comma-separated subset of {','.join(MODES)}")
    p_bt.add_argument("--jobs", type=int, default=None, help="parallel hour evaluations")
    p_bt.set_defaults(handler=_cmd_backtest)

    p_price = sub.add_parser("price", help="clear a balancing price from a bids file")
    p_price.add_argument("--bids-file", required=True, help="balancing bids CSV")
    p_price.add_argument("--si", type=float, required=True, help="system imbalance, MW")
    p_price.add_argument(
        "--quarter", default=None, help="settlement period start (needed when the file has several)"
    )
    p_price.add_argument("--balancing-minutes", type=int, default=15)
    p_price.set_defaults(handler=_cmd_price)

    p_gen = sub.add_parser("generate", help="write a seeded synthetic dataset")
    p_gen.add_argument("--preset", required=True, choices=PRESET_NAMES)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--hours", type=int, default=2000)
    p_gen.add_argument("--out-dir", required=True)
    p_gen.set_defaults(handler=_cmd_generate)

    return parser


def _cmd_bid(args) -> int:
    res = MarketResolution(args.day_ahead_minutes, args.balancing_minutes)
    forecasts = dataio.load_forecast_series(Path(args.forecasts), res.day_ahead_minutes)
    da = dataio.load_price_series(Path(args.da_expectation), res.day_ahead_minutes)
    bal = dataio.load_price_series(Path(args.bal_expectation), res.day_ahead_minutes)

    if not forecasts:
        raise DataError(f"{args.forecasts}: no forecast rows")
    hours = sorted(forecasts)
    for name, series in (("da expectation", da), ("balancing expectation", bal)):
        for hour in hours:
            if hour not in series:
                raise DataError(f"{name} is missing hour {dataio.format_timestamp(hour)}")
        for hour in series:
            if hour not in forecasts:
                raise DataError(f"forecasts are missing hour {dataio.format_timestamp(hour)}")
    step = timedelta(minutes=res.day_ahead_minutes)
    for prev, cur in zip(hours, hours[1:]):
        if cur - prev != step:
            raise DataError(f"missing hour {dataio.format_timestamp(prev + step)} in inputs")

    lines = ["timestamp_utc,bid_mwh,direction,delta_mwh,clamped"]
    for hour in hours:
        forecast = forecasts[hour]
        prices = PriceExpectation(da_eur_mwh=da[hour], bal_eur_mwh=bal[hour])
        delta = normalized_delta(args.alpha_tilde, forecast, args.beta_mw, res)
        decision = compute_optimal_bid(prices, forecast, delta, args.beta_mw, res)
        lines.append(
            ",".join(
                [
                    dataio.format_timestamp(hour),
                    dataio.format_number(decision.bid_mwh),
                    decision.direction,
                    dataio.format_number(decision.delta_mwh),
                    str(int(decision.clamped)),
                ]
            )
        )
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return 0


def _cmd_backtest(args) -> int:
    file_config = _read_config_file(Path(args.config)) if args.config else {}

    data_dir = args.data_dir or file_config.get("data_dir") or os.environ.get(ENV_DATA_DIR)
    if not data_dir:
        raise DataError(f"no data directory: pass --data-dir, set it in --config, or ${ENV_DATA_DIR}")
    out_dir = args.out_dir or file_config.get("out_dir")
    if not out_dir:
        raise DataError("no output directory: pass --out-dir or set out_dir in --config")

    bundle, validation = dataio.load_bundle(data_dir)
    res = bundle.resolution
    for key, expected in (
        ("day_ahead_minutes", res.day_ahead_minutes),
        ("balancing_minutes", res.balancing_minutes),
    ):
        if key in file_config and int(file_config[key]) != expected:
            raise DataError(
                f"config {key}={file_config[key]} conflicts with dataset metadata {expected}"
            )

    beta = args.beta_mw
    if beta is None:
        beta = float(file_config["beta_mw"]) if "beta_mw" in file_config else bundle.metadata.beta_mw
    alphas = args.alpha_tildes or file_config.get("alpha_tildes")
    modes = args.modes or file_config.get("modes")
    jobs = args.jobs if args.jobs is not None else int(file_config.get("jobs", 1))

    config = SweepConfig(
        beta_mw=beta,
        resolution=res,
        alpha_tildes=_parse_float_list(alphas) if alphas else DEFAULT_ALPHA_TILDES,
        modes=tuple(_parse_str_list(modes)) if modes else MODES,
        jobs=jobs,
    )

    report = run_sweep(config, bundle)
    if not report.hours:
        raise DataError(f"no complete hours in {data_dir} (gaps: {len(report.gaps)})")
    report.invocation = {
        "data_dir": str(data_dir),
        "out_dir": str(out_dir),
        "config_file": str(args.config) if args.config else None,
        "validation": validation.to_dict(),
    }
    dataio.write_report(report, out_dir)

    print(f"settled {len(report.hours)} hours ({len(report.gaps)} gaps) -> {out_dir}")
    for alpha in config.alpha_tildes:
        for mode in config.modes:
            s = report.series[(alpha, mode)]
            print(
                f"  {strategy_label(alpha, mode):>22}: total "
                f"{s.total_profit_eur / config.beta_mw:12.2f} EUR/MW"
            )
    return 0


def _cmd_price(args) -> int:
    bids_by_quarter = dataio.load_bids_series(Path(args.bids_file), args.balancing_minutes)
    if not bids_by_quarter:
        raise DataError(f"{args.bids_file}: no bid rows")
    if args.quarter is not None:
        quarter_ts = dataio.parse_timestamp_text(args.quarter)
        if quarter_ts not in bids_by_quarter:
            raise DataError(f"{args.bids_file}: no bids for quarter {args.quarter}")
    elif len(bids_by_quarter) == 1:
        quarter_ts = next(iter(bids_by_quarter))
    else:
        raise DataError(
            f"{args.bids_file} holds {len(bids_by_quarter)} settlement periods; pass --quarter"
        )

    curve = build_curve(
        bids_by_quarter[quarter_ts], ContractWindow(quarter_ts, args.balancing_minutes)
    )
    cleared = clearing_price(curve, args.si)
    print(dataio.format_number(cleared.price_eur_mwh))
    if cleared.scarcity:
        print("scarcity")
    if cleared.zero_imbalance:
        print("zero_imbalance")
    return 0


def _cmd_generate(args) -> int:
    scenario = preset_scenario(args.preset, seed=args.seed, hours=args.hours)
    paths = generate_synthetic(scenario, args.out_dir)
    print(f"wrote {len(paths)} files to {args.out_dir}")
    return 0


def _read_config_file(path: Path) -> dict:
    if not path.exists():
        raise ParseError(f"{path}: config file missing")
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ParseError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        values[key] = value
    return values


def _parse_float_list(text) -> tuple[float, ...]:
    if isinstance(text, tuple):
        return text
    try:
        return tuple(float(part.strip()) for part in str(text).split(",") if part.strip())
    except ValueError as exc:
        raise DomainError(f"invalid number list {text!r}") from exc


def _parse_str_list(text) -> list[str]:
    return [part.strip() for part in str(text).split(",") if part.strip()]


if __name__ == "__main__":
    sys.exit(main())
