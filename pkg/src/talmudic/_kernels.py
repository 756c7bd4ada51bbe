"""Inner loop of the backtest, compiled with numba when available.

Set ``TALMUDIC_DISABLE_NUMBA=1`` to force the interpreted path, which calls
:func:`talmudic.core.rebalance` directly. The compiled kernel repeats the
same floating-point operations in the same order, so both paths agree to the
last bit on IEEE-754 platforms.
"""

from __future__ import annotations

import os

import numpy as np

from . import core
from .errors import DomainError

# Absolute slack on the trigger comparison: rel_diff of a pair built to sit
# exactly at the threshold can round a few ulps below it.
TRIGGER_SLACK = 1e-12

_FLAG = "TALMUDIC_DISABLE_NUMBA"


def _numba_requested() -> bool:
    return os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


try:
    if not _numba_requested():
        raise ImportError(f"disabled by {_FLAG}")
    from numba import njit
except ImportError:
    njit = None

HAVE_NUMBA = njit is not None


def _walk_python(prices, alpha, threshold, fee_rate, m, q, p0):
    w = core.Weights(alpha)
    ctx = core.UtilityContext(p0, w)
    h = core.Holdings(m, q)
    n = prices.shape[0]
    out = np.empty((n, 7))
    ref = prices[0]
    k = 0
    for i in range(1, n):
        p = float(prices[i])
        if core.rel_diff(ref, p) + TRIGGER_SLACK >= threshold:
            trade, h = core.rebalance(h, p, w, fee_rate)
            u = core.utility_value(h, ctx)
            out[k] = (i, p, trade.delta_q, trade.delta_m, trade.fee_paid, u, h.q)
            ref = p
            k += 1
    return out[:k]


def _walk_kernel(prices, alpha, threshold, fee_rate, m, q, p0):
    beta = 1 - alpha
    n = prices.shape[0]
    out = np.empty((n, 7))
    ref = prices[0]
    k = 0
    for i in range(1, n):
        p = prices[i]
        if 2 * abs(ref - p) / (ref + p) + TRIGGER_SLACK >= threshold:
            wealth = m + p * q
            q_new = beta * wealth / p
            dq = q_new - q
            fee = fee_rate * p * abs(dq)
            dm = -p * dq - fee
            m_new = m + dm
            if m_new < 0:
                raise ValueError("fee exceeds the money leg after rebalancing")
            m = m_new
            q = q_new
            out[k, 0] = i
            out[k, 1] = p
            out[k, 2] = dq
            out[k, 3] = dm
            out[k, 4] = fee
            x = m / alpha
            y = p0 * q / beta
            out[k, 5] = 0.0 if x == 0 or y == 0 else x * (y / x) ** beta
            out[k, 6] = q
            ref = p
            k += 1
    return out[:k]


if HAVE_NUMBA:
    _walk_compiled = njit(cache=True)(_walk_kernel)
else:
    _walk_compiled = None


def walk(prices, alpha, threshold, fee_rate, m, q, p0, compiled=None):
    """Run the trigger walk; one row per fill.

    Columns: tick index, price, delta_q, delta_m, fee, utility after, q after.
    ``compiled`` overrides the module default (numba when importable).
    """
    prices = np.ascontiguousarray(prices, dtype=np.float64)
    if compiled is None:
        compiled = HAVE_NUMBA
    if not compiled:
        return _walk_python(prices, alpha, threshold, fee_rate, m, q, p0)
    if not HAVE_NUMBA:
        raise RuntimeError(f"numba is unavailable or disabled via {_FLAG}")
    try:
        return _walk_compiled(prices, float(alpha), float(threshold), float(fee_rate),
                              float(m), float(q), float(p0))
    except ValueError as exc:
        raise DomainError(str(exc)) from None
