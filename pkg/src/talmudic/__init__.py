"""Weighted Talmudic rebalancing: utility, curves, depth budgets, backtests."""

from .core import (
    HALF,
    GrowthFigures,
    Holdings,
    Trade,
    UtilityContext,
    Weights,
    growth_figures,
    growth_ratio,
    optimal_alpha_scan,
    pct_du_exact,
    pct_du_quadratic,
    ratio_from_rel_diff,
    rebalance,
    rel_diff,
    target_holdings,
    utility_value,
)
from .curves import (
    CurveAnchor,
    OrderBookSnapshot,
    budget_from_depth,
    demand_area,
    demand_price,
    estimate_depth_slope,
    load_book_csv,
    marginal_slopes,
    sample_curves,
    supply_price,
)
from .errors import DomainError, InsufficientDepthError, ParseError
from .simulator import (
    BacktestReport,
    PricePath,
    TriggerPolicy,
    annualize,
    gen_gbm,
    gen_zigzag,
    load_path_csv,
    run_backtest,
    threshold_scan,
)

__version__ = "0.1.0"
