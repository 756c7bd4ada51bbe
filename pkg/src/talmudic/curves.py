"""Supply and demand induced by rebalancing, and the order-book comparison.

Starting on target at ``(p0, q0)``, a rising price makes the agent sell
``qs`` goods and a falling one makes it buy ``qd``. Holding utility fixed
gives

    p_supply(qs) = p0 * (q0 / (q0 - qs)) ** (1 / alpha)
    p_demand(qd) = p0 * (q0 / (q0 + qd)) ** (1 / alpha)

Supply has a vertical asymptote at ``qs = q0``; the area under demand is the
money leg ``m0 = alpha / beta * p0 * q0``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import IO, NamedTuple, Sequence

import numpy as np
from scipy import integrate

from .core import HALF, Weights, _finite, _nonnegative, _positive
from .errors import DomainError, InsufficientDepthError, ParseError

# Upper quadrature limit for the demand area, in units of q0.
AREA_HORIZON = 1e6


@dataclass(frozen=True)
class CurveAnchor:
    p0: float
    q0: float
    weights: Weights = HALF

    def __post_init__(self):
        _positive(self.p0, "p0")
        _positive(self.q0, "q0")

    @property
    def m0(self):
        """Money held at the anchor while on target."""
        w = self.weights
        return w.alpha / w.beta * self.p0 * self.q0


def supply_price(qs, a: CurveAnchor):
    _finite(qs, "qs")
    if qs < 0:
        raise DomainError(f"qs must be >= 0, got {qs!r}")
    if qs >= a.q0:
        raise DomainError(f"qs={qs!r} is at or beyond the supply asymptote q0={a.q0!r}")
    return a.p0 * (a.q0 / (a.q0 - qs)) ** (1 / a.weights.alpha)


def demand_price(qd, a: CurveAnchor):
    _nonnegative(qd, "qd")
    return a.p0 * (a.q0 / (a.q0 + qd)) ** (1 / a.weights.alpha)


class AreaEstimate(NamedTuple):
    analytic: float
    numeric: float
    quadrature: float
    tail: float


def demand_area(a: CurveAnchor) -> AreaEstimate:
    """Area under the demand curve, closed form and quadrature cross-check.

    The numeric value integrates over ``[0, AREA_HORIZON * q0]`` piecewise on
    decades and adds the exact tail beyond.
    """
    alpha, beta = a.weights.alpha, a.weights.beta
    p0, q0 = a.p0, a.q0
    horizon = AREA_HORIZON * q0

    def f(x):
        return p0 * (q0 / (q0 + x)) ** (1 / alpha)

    edges = [0.0, *(q0 * 10.0**k for k in range(int(math.log10(AREA_HORIZON)) + 1))]
    quad = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        part, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)
        quad += part
    tail = p0 * q0 ** (1 / alpha) * (q0 + horizon) ** (1 - 1 / alpha) * alpha / beta
    return AreaEstimate(a.m0, quad + tail, quad, tail)


def marginal_slopes(a: CurveAnchor) -> tuple[float, float]:
    """Slopes of supply and demand at the anchor, ``(+s, -s)``."""
    s = a.p0 / (a.weights.alpha * a.q0)
    return s, -s


def sample_curves(a: CurveAnchor, n: int, qmax_fraction: float, q_extent=None):
    """Tabulate both curves at ``n`` evenly spaced quantities.

    Quantities run from 0 to ``q_extent`` (default ``qmax_fraction * q0``).
    Supply is reported only up to ``qmax_fraction * q0`` inclusive and is
    ``None`` past that cutoff. Returns a list of ``(q, p_supply, p_demand)``.
    """
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    _finite(qmax_fraction, "qmax_fraction")
    if not 0 < qmax_fraction < 1:
        raise DomainError(f"qmax_fraction must lie in (0, 1), got {qmax_fraction!r}")
    cutoff = qmax_fraction * a.q0
    if q_extent is None:
        q_extent = cutoff
    _positive(q_extent, "q_extent")

    rows = []
    for q in np.linspace(0.0, q_extent, int(n)):
        q = float(q)
        ps = supply_price(q, a) if q <= cutoff else None
        rows.append((q, ps, demand_price(q, a)))
    return rows


def write_curves_csv(rows, fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["q", "p_supply", "p_demand"])
    for q, ps, pd in rows:
        w.writerow([fmt(q), "" if ps is None else fmt(ps), fmt(pd)])


def budget_from_depth(p0, abs_dq_dp):
    """Budget for the equal-weight agent to match a book's local depth.

    Only the ``alpha = 1/2`` relation ``u0 = 4 p0**2 |dq/dp|`` is supported.
    """
    _positive(p0, "p0")
    _nonnegative(abs_dq_dp, "abs_dq_dp")
    return 4 * p0 * p0 * abs_dq_dp


@dataclass(frozen=True)
class OrderBookSnapshot:
    """Aggregated price levels; bids high to low, asks low to high."""

    bids: tuple[tuple[float, float], ...]
    asks: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "bids", tuple((float(p), float(v)) for p, v in self.bids))
        object.__setattr__(self, "asks", tuple((float(p), float(v)) for p, v in self.asks))
        if not self.bids or not self.asks:
            raise InsufficientDepthError("order book needs at least one bid and one ask")
        for side in (self.bids, self.asks):
            for p, v in side:
                _positive(p, "level price")
                _positive(v, "level quantity")
        bp = [p for p, _ in self.bids]
        ap = [p for p, _ in self.asks]
        if any(x <= y for x, y in zip(bp, bp[1:])):
            raise DomainError("bid prices must be strictly decreasing")
        if any(x >= y for x, y in zip(ap, ap[1:])):
            raise DomainError("ask prices must be strictly increasing")
        if bp[0] >= ap[0]:
            raise DomainError(f"crossed book: best bid {bp[0]!r} >= best ask {ap[0]!r}")

    @classmethod
    def from_levels(cls, bids: Sequence[tuple[float, float]], asks: Sequence[tuple[float, float]]):
        """Build from unsorted levels."""
        return cls(
            tuple(sorted(bids, key=lambda lv: -lv[0])),
            tuple(sorted(asks, key=lambda lv: lv[0])),
        )

    @property
    def mid(self):
        return (self.bids[0][0] + self.asks[0][0]) / 2


class DepthEstimate(NamedTuple):
    mid: float
    slope: float
    bid_slope: float
    ask_slope: float


def estimate_depth_slope(book: OrderBookSnapshot, window) -> DepthEstimate:
    """Two-sided secant estimate of ``|dq/dp|`` around the mid price.

    Each side contributes its cumulative quantity within ``window`` of the
    mid divided by ``window``; the slope is the mean of the two sides.
    """
    _positive(window, "window")
    mid = book.mid
    # boundary slack so a level exactly one window away is not lost to rounding
    slack = 1e-12 * mid
    bid_q = sum(v for p, v in book.bids if p >= mid - window - slack)
    ask_q = sum(v for p, v in book.asks if p <= mid + window + slack)
    if bid_q == 0:
        raise InsufficientDepthError(f"no bid levels within {window!r} of mid {mid!r}")
    if ask_q == 0:
        raise InsufficientDepthError(f"no ask levels within {window!r} of mid {mid!r}")
    bid_slope = bid_q / window
    ask_slope = ask_q / window
    return DepthEstimate(mid, (bid_slope + ask_slope) / 2, bid_slope, ask_slope)


def _number(text, line, what):
    try:
        x = float(text)
    except ValueError:
        raise ParseError(f"{what} {text!r} is not a number", line) from None
    if not math.isfinite(x) or x <= 0:
        raise ParseError(f"{what} must be positive and finite, got {text!r}", line)
    return x


def load_book_csv(source: IO) -> OrderBookSnapshot:
    """Read ``side,price,quantity`` rows; sides may be interleaved."""
    text = source.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise ParseError("empty order book file", 1)
    if [h.strip().lower() for h in header] != ["side", "price", "quantity"]:
        raise ParseError(f"expected header side,price,quantity, got {','.join(header)!r}", 1)

    levels = {"bid": {}, "ask": {}}
    for line, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", line)
        side = row[0].strip().lower()
        if side not in levels:
            raise ParseError(f"side must be bid or ask, got {row[0]!r}", line)
        price = _number(row[1].strip(), line, "price")
        qty = _number(row[2].strip(), line, "quantity")
        if price in levels[side]:
            raise ParseError(f"duplicate {side} level at price {row[1].strip()}", line)
        levels[side][price] = qty
    return OrderBookSnapshot.from_levels(levels["bid"].items(), levels["ask"].items())


def fmt(x) -> str:
    """Shortest text that parses back to the identical float; ``2.0`` -> ``2``."""
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s
