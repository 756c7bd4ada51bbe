"""Backtests of the rebalancing rule acting as a passive market maker.

The agent starts on target at the first price of a path and rebalances
whenever the price has moved at least ``threshold`` (symmetric relative
difference) away from the price of its last fill. Utility is always measured
against the path's first price, so each fill multiplies it by the growth
ratio of the move it covered.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, NamedTuple

import numpy as np

from . import _kernels
from .core import (
    HALF,
    Trade,
    UtilityContext,
    Weights,
    _finite,
    _positive,
    ratio_from_rel_diff,
    rel_diff,
    target_holdings,
    utility_value,
)
from .errors import DomainError, ParseError


@dataclass(frozen=True, eq=False)
class PricePath:
    prices: np.ndarray
    meta: str = ""

    def __post_init__(self):
        prices = np.array(self.prices, dtype=np.float64).ravel()
        if prices.size == 0:
            raise DomainError("price path is empty")
        if not np.all(np.isfinite(prices)) or not np.all(prices > 0):
            bad = int(np.flatnonzero(~(np.isfinite(prices) & (prices > 0)))[0])
            raise DomainError(f"price at position {bad} is not positive and finite: {prices[bad]!r}")
        prices.flags.writeable = False
        object.__setattr__(self, "prices", prices)

    def __len__(self):
        return self.prices.size


@dataclass(frozen=True)
class TriggerPolicy:
    threshold: float

    def __post_init__(self):
        _finite(self.threshold, "threshold")
        if not 0 < self.threshold < 2:
            raise DomainError(f"threshold must lie in (0, 2), got {self.threshold!r}")


@dataclass(frozen=True)
class BacktestReport:
    trades: tuple[Trade, ...]
    trade_indices: tuple[int, ...]
    utility_series: tuple[float, ...]
    initial_utility: float
    final_utility: float
    growth_ratio_total: float
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def trade_count(self) -> int:
        return len(self.trades)

    def mean_pct_du(self) -> float:
        """Per-fill relative utility growth, geometric mean over the run."""
        if not self.trades:
            return 0.0
        per_trade = self.growth_ratio_total ** (1 / self.trade_count)
        return rel_diff(1.0, per_trade)

    def to_dict(self) -> dict:
        return {
            "initial_utility": self.initial_utility,
            "final_utility": self.final_utility,
            "growth_ratio_total": self.growth_ratio_total,
            "trade_count": self.trade_count,
            "trades": [
                {
                    "index": i,
                    "exec_price": t.exec_price,
                    "delta_q": t.delta_q,
                    "delta_m": t.delta_m,
                    "fee_paid": t.fee_paid,
                    "utility_after": u,
                }
                for i, t, u in zip(self.trade_indices, self.trades, self.utility_series)
            ],
            "meta": dict(self.meta),
        }


def gen_zigzag(p0, pct_dp, n_legs: int) -> PricePath:
    """Alternate between ``p0`` and the price ``pct_dp`` above it."""
    _positive(p0, "p0")
    _finite(pct_dp, "pct_dp")
    if not 0 < pct_dp < 2:
        raise DomainError(f"pct_dp must lie in (0, 2), got {pct_dp!r}")
    if int(n_legs) != n_legs or n_legs < 1:
        raise DomainError(f"n_legs must be an integer >= 1, got {n_legs!r}")
    p1 = p0 * ratio_from_rel_diff(pct_dp)
    prices = np.where(np.arange(int(n_legs) + 1) % 2 == 0, p0, p1)
    return PricePath(prices, f"zigzag p0={p0!r} pct_dp={pct_dp!r} legs={n_legs}")


def gen_gbm(p0, mu, sigma, n: int, seed: int) -> PricePath:
    """Seeded geometric Brownian motion with per-step drift and volatility."""
    _positive(p0, "p0")
    _finite(mu, "mu")
    _finite(sigma, "sigma")
    if sigma < 0:
        raise DomainError(f"sigma must be >= 0, got {sigma!r}")
    if int(n) != n or n < 1:
        raise DomainError(f"n must be an integer >= 1, got {n!r}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(int(n))
    steps = (mu - sigma * sigma / 2) + sigma * z
    log_path = np.concatenate(([0.0], np.cumsum(steps)))
    return PricePath(p0 * np.exp(log_path),
                     f"gbm p0={p0!r} mu={mu!r} sigma={sigma!r} n={n} seed={seed}")


def load_path_csv(source: IO) -> PricePath:
    """Read a one-column ``price`` CSV, in file order."""
    text = source.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise ParseError("empty price file", 1)
    if [h.strip().lower() for h in header] != ["price"]:
        raise ParseError(f"expected header 'price', got {','.join(header)!r}", 1)
    prices = []
    for line, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 1:
            raise ParseError(f"expected 1 field, got {len(row)}", line)
        try:
            p = float(row[0])
        except ValueError:
            raise ParseError(f"price {row[0]!r} is not a number", line) from None
        if not math.isfinite(p) or p <= 0:
            raise ParseError(f"price must be positive and finite, got {row[0].strip()!r}", line)
        prices.append(p)
    if not prices:
        raise ParseError("price file has a header but no rows", 1)
    return PricePath(prices, f"csv rows={len(prices)}")


def run_backtest(
    path: PricePath,
    w: Weights = HALF,
    policy: TriggerPolicy = TriggerPolicy(0.02),
    fee_rate=0.0,
    initial_wealth=1.0,
    compiled: bool | None = None,
) -> BacktestReport:
    _finite(fee_rate, "fee_rate")
    if not 0 <= fee_rate < 1:
        raise DomainError(f"fee_rate must lie in [0, 1), got {fee_rate!r}")
    _positive(initial_wealth, "initial_wealth")

    start = float(path.prices[0])
    ctx = UtilityContext(start, w)
    h0 = target_holdings(initial_wealth, start, w)
    u0 = utility_value(h0, ctx)

    rows = _kernels.walk(path.prices, w.alpha, policy.threshold, fee_rate,
                         h0.m, h0.q, start, compiled=compiled)
    trades = tuple(Trade(float(r[1]), float(r[2]), float(r[3]), float(r[4])) for r in rows)
    utilities = tuple(float(u) for u in rows[:, 5])
    u_final = utilities[-1] if utilities else u0
    return BacktestReport(
        trades=trades,
        trade_indices=tuple(int(i) for i in rows[:, 0]),
        utility_series=utilities,
        initial_utility=u0,
        final_utility=u_final,
        growth_ratio_total=u_final / u0,
        meta={
            "path": path.meta,
            "alpha": w.alpha,
            "threshold": policy.threshold,
            "fee_rate": fee_rate,
            "initial_wealth": initial_wealth,
        },
    )


def annualize(per_trade_pct_du, trades_per_year):
    """Compound a per-trade relative utility gain over a year of fills."""
    _finite(trades_per_year, "trades_per_year")
    if trades_per_year < 0:
        raise DomainError(f"trades_per_year must be >= 0, got {trades_per_year!r}")
    return ratio_from_rel_diff(per_trade_pct_du) ** trades_per_year - 1


class ScanRow(NamedTuple):
    threshold: float
    trade_count: int
    growth_ratio_total: float


def threshold_scan(
    path: PricePath,
    w: Weights,
    thresholds: Iterable[float],
    fee_rate=0.0,
    initial_wealth=1.0,
) -> list[ScanRow]:
    policies = [TriggerPolicy(t) for t in thresholds]
    if not policies:
        raise DomainError("threshold list is empty")
    rows = []
    for policy in policies:
        r = run_backtest(path, w, policy, fee_rate, initial_wealth)
        rows.append(ScanRow(policy.threshold, r.trade_count, r.growth_ratio_total))
    return rows
