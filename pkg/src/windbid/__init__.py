"""Risk-constrained day-ahead bidding and merit-order backtesting for wind producers."""

from .backtest import (
    BacktestReport,
    StrategyResult,
    SweepConfig,
    run_sweep,
    strategy_label,
    summarize,
)
from .errors import (
    AlignmentError,
    DataError,
    DomainError,
    DuplicateTimestampError,
    ParseError,
    ShapeError,
    WindbidError,
)
from .io import DatasetBundle, ValidationReport, load_bundle, write_bundle, write_report
from .market_model import ContractWindow, MarketResolution, resample_mean, sub_windows
from .merit_order import (
    BalancingEnergyBid,
    ClearingResult,
    MeritOrderCurve,
    build_curve,
    clearing_price,
)
from .settlement import (
    MODE_NO_IMPACT,
    MODE_PRICE_IMPACT,
    MODES,
    HourLedgerEntry,
    QuarterOutcome,
    project_system_imbalance,
    settle_hour,
    split_obligation,
)
from .strategy import (
    BidDecision,
    ForecastMoments,
    PriceExpectation,
    RiskCertificate,
    brute_force_bid,
    compute_optimal_bid,
    contract_energy_cap_mwh,
    delta_from_alpha,
    normalized_delta,
)
from .synthetic import SyntheticScenario, build_bundle, generate_synthetic, preset_scenario

__version__ = "0.1.0"
