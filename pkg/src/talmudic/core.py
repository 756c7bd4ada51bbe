"""Utility and growth arithmetic of the weighted constant-proportion rule.

An agent following the rule keeps a fraction ``alpha`` of its wealth in
money and ``beta = 1 - alpha`` in goods, rebalancing at market price. Its
cardinal utility, measured in money, is the Cobb-Douglas form

    u(m, q) = p0**beta / (alpha**alpha * beta**beta) * m**alpha * q**beta

where ``p0`` is the reference price the utility scale is pinned to.

The scalar functions use only ``+ - * / **`` on their arguments, so they
accept ``mpmath.mpf`` as well as ``float``. The tests lean on that to run the
same code path at high precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import DomainError

__all__ = [
    "Weights",
    "Holdings",
    "UtilityContext",
    "Trade",
    "GrowthFigures",
    "HALF",
    "utility_value",
    "target_holdings",
    "rebalance",
    "growth_ratio",
    "growth_figures",
    "rel_diff",
    "ratio_from_rel_diff",
    "pct_du_exact",
    "pct_du_quadratic",
    "optimal_alpha_scan",
]


def _finite(x, name):
    try:
        ok = math.isfinite(x)
    except TypeError:
        raise DomainError(f"{name} must be a real number, got {x!r}") from None
    if not ok:
        raise DomainError(f"{name} must be finite, got {x!r}")


def _positive(x, name):
    _finite(x, name)
    if not x > 0:
        raise DomainError(f"{name} must be > 0, got {x!r}")


def _nonnegative(x, name):
    _finite(x, name)
    if x < 0:
        raise DomainError(f"{name} must be >= 0, got {x!r}")


@dataclass(frozen=True)
class Weights:
    """Money share ``alpha`` of the rule; the goods share is derived."""

    alpha: float

    def __post_init__(self):
        _finite(self.alpha, "alpha")
        if not 0 < self.alpha < 1:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")

    @property
    def beta(self):
        return 1 - self.alpha


HALF = Weights(0.5)


@dataclass(frozen=True)
class Holdings:
    m: float
    q: float

    def __post_init__(self):
        _nonnegative(self.m, "m")
        _nonnegative(self.q, "q")

    def value(self, price):
        return self.m + price * self.q


@dataclass(frozen=True)
class UtilityContext:
    p0: float
    weights: Weights = HALF

    def __post_init__(self):
        _positive(self.p0, "p0")

    @property
    def efficiency(self):
        """Cobb-Douglas scale ``p0**beta / (alpha**alpha * beta**beta)``."""
        a, b = self.weights.alpha, self.weights.beta
        return self.p0**b / (a**a * b**b)


@dataclass(frozen=True)
class Trade:
    """One rebalancing fill. ``delta_q > 0`` buys goods."""

    exec_price: float
    delta_q: float
    delta_m: float
    fee_paid: float = 0.0

    def __post_init__(self):
        _positive(self.exec_price, "exec_price")
        _nonnegative(self.fee_paid, "fee_paid")


@dataclass(frozen=True)
class GrowthFigures:
    ratio: float
    pct_du: float
    pct_dp: float


def utility_value(h: Holdings, ctx: UtilityContext):
    """Cardinal utility of ``h`` in money units; degree-1 homogeneous.

    Computed as ``x * (y / x)**beta`` with ``x = m / alpha`` and
    ``y = p0 * q / beta``, the two legs scaled to implied total wealth. This
    equals ``efficiency * m**alpha * q**beta`` and returns the wealth exactly
    when the holdings sit on target at ``p0``.
    """
    a, b = ctx.weights.alpha, ctx.weights.beta
    x = h.m / a
    y = ctx.p0 * h.q / b
    if x == 0 or y == 0:
        return 0 * x
    return x * (y / x) ** b


def target_holdings(wealth, price, w: Weights = HALF) -> Holdings:
    _nonnegative(wealth, "wealth")
    _positive(price, "price")
    return Holdings(w.alpha * wealth, w.beta * wealth / price)


def rebalance(h: Holdings, exec_price, w: Weights = HALF, fee_rate=0.0):
    """Trade ``h`` back onto the target proportion at ``exec_price``.

    The target is sized on pre-fee wealth; the fee is charged on traded
    notional and taken from the money leg afterwards. Returns
    ``(trade, new_holdings)``.
    """
    _positive(exec_price, "exec_price")
    _finite(fee_rate, "fee_rate")
    if not 0 <= fee_rate < 1:
        raise DomainError(f"fee_rate must lie in [0, 1), got {fee_rate!r}")
    wealth = h.m + exec_price * h.q
    q_new = w.beta * wealth / exec_price
    dq = q_new - h.q
    fee = fee_rate * exec_price * abs(dq)
    dm = -exec_price * dq - fee
    m_new = h.m + dm
    if m_new < 0:
        # only reachable with a fee larger than the money leg can carry
        raise DomainError(f"fee {fee!r} exceeds the money leg after rebalancing")
    return Trade(exec_price, dq, dm, fee), Holdings(m_new, q_new)


def growth_ratio(p0, p1, w: Weights = HALF):
    """Utility multiple earned by rebalancing once as price moves p0 -> p1.

    Weighted arithmetic over weighted geometric mean of the two prices, so
    never below one.
    """
    _positive(p0, "p0")
    _positive(p1, "p1")
    a, b = w.alpha, w.beta
    return (a * p0 + b * p1) / (p0**a * p1**b)


def rel_diff(a, b):
    """Symmetric relative difference ``2|a - b| / (a + b)``, in [0, 2)."""
    _positive(a, "a")
    _positive(b, "b")
    return 2 * abs(a - b) / (a + b)


def ratio_from_rel_diff(d):
    """Inverse of :func:`rel_diff` for the larger-over-smaller ratio."""
    _finite(d, "d")
    if not 0 <= d < 2:
        raise DomainError(f"relative difference must lie in [0, 2), got {d!r}")
    return (2 + d) / (2 - d)


def growth_figures(p0, p1, w: Weights = HALF) -> GrowthFigures:
    r = growth_ratio(p0, p1, w)
    return GrowthFigures(r, rel_diff(1, r), rel_diff(p0, p1))


def pct_du_exact(pct_dp):
    """Relative utility growth per trade for a relative price move, alpha=1/2.

    Evaluated as ``2 d**2 / (2 + sqrt(4 - d**2))**2``, which equals
    ``(16 - 8 sqrt(4 - d**2)) / d**2 - 2`` but has no cancellation near 0.
    """
    _finite(pct_dp, "pct_dp")
    if not 0 <= pct_dp < 2:
        raise DomainError(f"pct_dp must lie in [0, 2), got {pct_dp!r}")
    d2 = pct_dp * pct_dp
    s = 2 + (4 - d2) ** 0.5
    return 2 * d2 / (s * s)


def pct_du_quadratic(pct_dp, w: Weights = HALF):
    """Leading term ``alpha*beta/2 * d**2`` of the growth expansion."""
    _finite(pct_dp, "pct_dp")
    if not 0 <= pct_dp < 2:
        raise DomainError(f"pct_dp must lie in [0, 2), got {pct_dp!r}")
    return w.alpha * w.beta / 2 * pct_dp**2


def optimal_alpha_scan(grid: Iterable[float]) -> float:
    """Grid value with the largest small-move growth coefficient.

    Ties (alpha and 1 - alpha score the same) resolve to the smaller alpha.
    Scores within ``1e-12`` relative count as tied, since ``1 - alpha`` is
    rounded differently on either side of one half.
    """
    values = list(grid)
    if not values:
        raise DomainError("alpha grid is empty")
    best, best_score = None, -math.inf
    for a in sorted(values):
        w = Weights(a)
        score = w.alpha * w.beta / 2
        if score > best_score and not math.isclose(score, best_score, rel_tol=1e-12):
            best, best_score = a, score
    return best
