import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from talmudic import (
    HALF,
    DomainError,
    ParseError,
    PricePath,
    TriggerPolicy,
    Weights,
    annualize,
    gen_gbm,
    gen_zigzag,
    growth_ratio,
    load_path_csv,
    pct_du_exact,
    ratio_from_rel_diff,
    rel_diff,
    run_backtest,
    threshold_scan,
)

PCT_DU_002 = 5.000250015626093832037695836225284471e-5
ANNUAL_002 = 0.01841847832253170769199697363094949830  # mpmath, 365 compounded fills


def zigzag_closed_form(p0, p1, n, w):
    """Product of per-leg ratios; legs alternate up and down."""
    up, down = growth_ratio(p0, p1, w), growth_ratio(p1, p0, w)
    return up ** ((n + 1) // 2) * down ** (n // 2)


class TestPaths:
    def test_zigzag(self):
        path = gen_zigzag(1.0, 0.02, 2)
        assert path.prices.tolist() == [1.0, 2.02 / 1.98, 1.0]
        assert rel_diff(*path.prices[:2]) == pytest.approx(0.02, abs=1e-15)

    def test_zigzag_single_leg(self):
        assert len(gen_zigzag(3.0, 0.1, 1)) == 2

    @given(p0=st.floats(1e-2, 1e3), d=st.floats(1e-3, 1.9), n=st.integers(1, 50))
    def test_zigzag_constant_moves(self, p0, d, n):
        p = gen_zigzag(p0, d, n).prices
        assert len(p) == n + 1
        diffs = [rel_diff(a, b) for a, b in zip(p, p[1:])]
        assert max(diffs) - min(diffs) == 0
        assert diffs[0] == pytest.approx(d, abs=1e-12)

    @pytest.mark.parametrize("args", [(0, 0.02, 2), (1, 0, 2), (1, 2, 2), (1, 0.02, 0), (1, 0.02, 1.5)])
    def test_zigzag_rejects(self, args):
        with pytest.raises(DomainError):
            gen_zigzag(*args)

    def test_gbm_constant(self):
        assert np.all(gen_gbm(5.0, 0.0, 0.0, 10, 1).prices == 5.0)

    def test_gbm_drift(self):
        p = gen_gbm(1.0, math.log(1.01), 0.0, 50, 0).prices
        np.testing.assert_allclose(p, 1.01 ** np.arange(51), rtol=1e-13)

    def test_gbm_seeded(self):
        a = gen_gbm(100.0, 0.0, 0.02, 1000, 42).prices
        b = gen_gbm(100.0, 0.0, 0.02, 1000, 42).prices
        c = gen_gbm(100.0, 0.0, 0.02, 1000, 43).prices
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)
        assert a[0] == 100.0 and len(a) == 1001

    def test_gbm_log_increments(self):
        sigma = 0.01
        p = gen_gbm(1.0, 0.0, sigma, 20000, 7).prices
        r = np.diff(np.log(p))
        assert r.std() == pytest.approx(sigma, rel=0.03)
        assert abs(r.mean() + sigma**2 / 2) < 4 * sigma / math.sqrt(len(r))

    @pytest.mark.parametrize("args", [(0, 0, 0.1, 5, 1), (1, 0, -0.1, 5, 1), (1, 0, 0.1, 0, 1)])
    def test_gbm_rejects(self, args):
        with pytest.raises(DomainError):
            gen_gbm(*args)

    def test_path_rejects(self):
        with pytest.raises(DomainError):
            PricePath([])
        with pytest.raises(DomainError):
            PricePath([1.0, 0.0])

    def test_path_readonly(self):
        p = gen_zigzag(1.0, 0.1, 3)
        with pytest.raises(ValueError):
            p.prices[0] = 2.0


class TestPathCsv:
    def test_reads(self):
        assert load_path_csv(io.StringIO("price\n1.0\n2.0\n")).prices.tolist() == [1.0, 2.0]

    def test_bytes(self):
        assert load_path_csv(io.BytesIO(b"price\n3\n")).prices.tolist() == [3.0]

    @pytest.mark.parametrize("text,line", [
        ("price\n1.0\n-1.0\n", 3),
        ("price\n1.0\nabc\n", 3),
        ("price\ninf\n", 2),
        ("price\n0\n", 2),
        ("price\n1,2\n", 2),
        ("prices\n1\n", 1),
        ("price\n", 1),
        ("", 1),
    ])
    def test_errors(self, text, line):
        with pytest.raises(ParseError) as info:
            load_path_csv(io.StringIO(text))
        assert info.value.line == line
        assert f"line {line}" in str(info.value)


class TestBacktest:
    def test_zigzag_two_legs(self):
        path = gen_zigzag(1.0, 0.02, 2)
        r = run_backtest(path, HALF, TriggerPolicy(0.02), 0.0, 2.0)
        assert r.trade_count == 2
        assert r.initial_utility == 2.0
        leg = ratio_from_rel_diff(PCT_DU_002)
        assert r.growth_ratio_total == pytest.approx(leg**2, rel=1e-13)
        assert r.trade_indices == (1, 2)

    def test_constant_path(self):
        r = run_backtest(PricePath([3.0] * 20), HALF, TriggerPolicy(0.01))
        assert r.trade_count == 0 and r.growth_ratio_total == 1
        assert r.final_utility == r.initial_utility

    def test_threshold_above_moves(self):
        r = run_backtest(gen_zigzag(1.0, 0.02, 50), HALF, TriggerPolicy(0.05))
        assert r.trade_count == 0

    def test_trade_fields(self):
        r = run_backtest(gen_zigzag(1.0, 0.1, 4), Weights(0.3), TriggerPolicy(0.1), 0.0, 10.0)
        for t in r.trades:
            assert t.delta_m == -t.exec_price * t.delta_q
            assert t.fee_paid == 0
        signs = [math.copysign(1, t.delta_q) for t in r.trades]
        assert signs == [-1, 1, -1, 1]

    @pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
    @pytest.mark.parametrize("n", [1, 2, 7, 100])
    def test_zigzag_law(self, alpha, n):
        w = Weights(alpha)
        path = gen_zigzag(2.0, 0.05, n)
        r = run_backtest(path, w, TriggerPolicy(0.05))
        p0, p1 = path.prices[:2]
        assert r.trade_count == n
        assert r.growth_ratio_total == pytest.approx(zigzag_closed_form(p0, p1, n, w), rel=1e-9)
        if alpha == 0.5:
            assert r.growth_ratio_total == pytest.approx(growth_ratio(p0, p1, w) ** n, rel=1e-9)

    @given(seed=st.integers(0, 2**32 - 1), alpha=st.floats(0.1, 0.9), th=st.floats(0.005, 0.2))
    def test_per_trade_ratio_law(self, seed, alpha, th):
        w = Weights(alpha)
        path = gen_gbm(50.0, 0.0, 0.02, 300, seed)
        r = run_backtest(path, w, TriggerPolicy(th))
        prev_price, prev_u = path.prices[0], r.initial_utility
        expected_total = 1.0
        for t, u in zip(r.trades, r.utility_series):
            g = growth_ratio(prev_price, t.exec_price, w)
            assert u / prev_u == pytest.approx(g, rel=1e-12)
            assert u >= prev_u * (1 - 1e-15)
            expected_total *= g
            prev_price, prev_u = t.exec_price, u
        assert r.growth_ratio_total == pytest.approx(expected_total, rel=1e-10)

    def test_trigger_uses_last_fill_price(self):
        # drifts of 1% per tick; threshold 0.025 fires every third tick
        path = PricePath(1.01 ** np.arange(10))
        r = run_backtest(path, HALF, TriggerPolicy(0.025))
        assert r.trade_indices == (3, 6, 9)

    def test_path_independence(self):
        d = 0.04
        base = gen_zigzag(1.0, d, 20)
        p0, p1 = base.prices[:2]
        noisy = [p0]
        rng = np.random.default_rng(3)
        for target in base.prices[1:]:
            ref = noisy[-1]
            # sub-threshold wiggles around the last fill price
            noisy.extend(ref * np.exp(rng.uniform(-d / 3, d / 3, size=4)))
            noisy.append(target)
        a = run_backtest(base, HALF, TriggerPolicy(d))
        b = run_backtest(PricePath(noisy), HALF, TriggerPolicy(d))
        assert a.trades == b.trades
        assert a.utility_series == b.utility_series
        assert a.growth_ratio_total == b.growth_ratio_total

    def test_fee_monotone(self):
        path = gen_gbm(100.0, 0.0, 0.01, 2000, 11)
        growth = [run_backtest(path, Weights(0.4), TriggerPolicy(0.01), fee).growth_ratio_total
                  for fee in (0.0, 1e-5, 1e-4, 1e-3, 5e-3, 2e-2)]
        assert all(x >= y for x, y in zip(growth, growth[1:]))
        assert growth[0] > 1

    def test_fees_recorded(self):
        r = run_backtest(gen_zigzag(1.0, 0.1, 3), HALF, TriggerPolicy(0.1), 0.001, 100.0)
        for t in r.trades:
            assert t.fee_paid == pytest.approx(0.001 * t.exec_price * abs(t.delta_q), rel=1e-15)
            assert t.delta_m == pytest.approx(-t.exec_price * t.delta_q - t.fee_paid, rel=1e-15)

    def test_deterministic(self):
        path = gen_gbm(10.0, 0.001, 0.03, 500, 99)
        a = run_backtest(path, Weights(0.35), TriggerPolicy(0.03), 0.002, 5.0)
        b = run_backtest(gen_gbm(10.0, 0.001, 0.03, 500, 99), Weights(0.35), TriggerPolicy(0.03), 0.002, 5.0)
        assert a == b

    @pytest.mark.parametrize("fee,wealth", [(-0.1, 1.0), (1.0, 1.0), (0.0, 0.0)])
    def test_rejects(self, fee, wealth):
        with pytest.raises(DomainError):
            run_backtest(gen_zigzag(1.0, 0.1, 2), HALF, TriggerPolicy(0.1), fee, wealth)

    @pytest.mark.parametrize("th", [0.0, 2.0, -1.0, math.nan])
    def test_policy_rejects(self, th):
        with pytest.raises(DomainError):
            TriggerPolicy(th)

    def test_report_dict(self):
        r = run_backtest(gen_zigzag(1.0, 0.02, 3), HALF, TriggerPolicy(0.02))
        d = r.to_dict()
        assert set(d) >= {"initial_utility", "final_utility", "growth_ratio_total", "trade_count", "trades"}
        assert d["trade_count"] == 3
        assert set(d["trades"][0]) == {"index", "exec_price", "delta_q", "delta_m", "fee_paid", "utility_after"}

    def test_mean_pct_du(self):
        r = run_backtest(gen_zigzag(1.0, 0.02, 10), HALF, TriggerPolicy(0.02))
        assert r.mean_pct_du() == pytest.approx(PCT_DU_002, rel=1e-9)


class TestAnnualize:
    def test_worked_example(self):
        assert annualize(pct_du_exact(0.02), 365) == pytest.approx(ANNUAL_002, rel=1e-10)

    def test_simple_sum_is_lower(self):
        assert 365 * pct_du_exact(0.02) < 0.01835

    def test_zero(self):
        assert annualize(0.0, 365) == 0
        assert annualize(0.01, 0) == 0

    def test_single_period(self):
        assert annualize(0.3, 1) == pytest.approx(ratio_from_rel_diff(0.3) - 1, rel=1e-15)

    def test_rejects(self):
        with pytest.raises(DomainError):
            annualize(0.01, -1)
        with pytest.raises(DomainError):
            annualize(2.5, 1)


class TestScan:
    def test_zigzag_rows(self):
        rows = threshold_scan(gen_zigzag(1.0, 0.02, 10), HALF, [0.02, 0.5])
        assert [r.threshold for r in rows] == [0.02, 0.5]
        assert rows[0].trade_count == 10
        assert rows[1].trade_count == 0 and rows[1].growth_ratio_total == 1

    def test_all_growth_at_least_one(self):
        path = gen_gbm(1.0, 0.0, 0.02, 1000, 5)
        rows = threshold_scan(path, Weights(0.6), [0.005, 0.01, 0.02, 0.05, 0.1])
        assert all(r.growth_ratio_total >= 1 for r in rows)
        counts = [r.trade_count for r in rows]
        assert counts == sorted(counts, reverse=True)

    def test_singleton_matches_backtest(self):
        path = gen_gbm(1.0, 0.0, 0.02, 500, 8)
        [row] = threshold_scan(path, HALF, [0.03], 0.001)
        r = run_backtest(path, HALF, TriggerPolicy(0.03), 0.001)
        assert (row.trade_count, row.growth_ratio_total) == (r.trade_count, r.growth_ratio_total)

    def test_rejects(self):
        with pytest.raises(DomainError):
            threshold_scan(gen_zigzag(1.0, 0.1, 2), HALF, [])
        with pytest.raises(DomainError):
            threshold_scan(gen_zigzag(1.0, 0.1, 2), HALF, [0.1, 2.5])
