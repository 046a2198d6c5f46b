import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bara.auction import (
    AuctionError,
    ClientQuote,
    budget_for_count,
    rank_clients,
    run_auction,
    spend_curve,
    winners_for_budget,
)


def quotes_from(pairs):
    return [ClientQuote(i, b, q) for i, (b, q) in enumerate(pairs)]


def brute_spend(ranked, n):
    # direct transcription of the payment sum, no shared helpers
    price = ranked[n].bid / ranked[n].quality
    total = 0.0
    for i in range(n):
        total += price * ranked[i].quality
    return total


def brute_max_n(ranked, limit):
    best = 0
    for n in range(1, len(ranked)):
        if brute_spend(ranked, n) <= limit:
            best = max(best, n)
    return best


class TestRanking:
    def test_equal_quality_orders_by_bid(self):
        ranked = rank_clients(quotes_from([(0.7, 1), (0.6, 1), (0.9, 1)]))
        assert ranked.ids == [1, 0, 2]

    def test_singleton(self):
        q = ClientQuote(7, 0.4, 1.0)
        assert rank_clients([q]).quotes == (q,)

    def test_ratio_beats_bid(self):
        ranked = rank_clients(quotes_from([(1.0, 2.0), (0.6, 1.0)]))
        assert ranked.ids == [0, 1]

    def test_ties_break_on_client_id(self):
        qs = [ClientQuote(5, 1.0, 1.0), ClientQuote(2, 2.0, 2.0), ClientQuote(9, 0.5, 0.5)]
        assert rank_clients(qs).ids == [2, 5, 9]

    def test_empty(self):
        with pytest.raises(AuctionError, match="no quotes"):
            rank_clients([])

    @pytest.mark.parametrize("bid,quality", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0)])
    def test_invalid_quote(self, bid, quality):
        with pytest.raises(AuctionError, match="invalid quote"):
            ClientQuote(0, bid, quality)

    @settings(max_examples=200)
    @given(st.lists(st.tuples(st.floats(0.01, 5), st.floats(0.01, 5)), min_size=1, max_size=30))
    def test_sorted_invariant(self, pairs):
        ranked = rank_clients(quotes_from(pairs))
        for a, b in zip(ranked.quotes, ranked.quotes[1:]):
            assert a.ratio > b.ratio or (a.ratio == b.ratio and a.client_id < b.client_id)

    def test_deterministic_under_input_order(self):
        rng = np.random.default_rng(3)
        qs = quotes_from(zip(rng.choice([0.5, 1.0], 12), rng.choice([1.0, 2.0], 12)))
        ids = rank_clients(qs).ids
        for _ in range(5):
            rng.shuffle(qs)
            assert rank_clients(qs).ids == ids


class TestBudgetForCount:
    def test_unit_quality(self):
        ranked = rank_clients(quotes_from([(b, 1) for b in [0.6, 0.7, 0.8, 0.9, 1.0]]))
        assert budget_for_count(ranked, 3) == pytest.approx(2.7, abs=1e-12)

    def test_second_price(self):
        ranked = rank_clients(quotes_from([(0.5, 1), (1.5, 1)]))
        assert budget_for_count(ranked, 1) == 1.5

    def test_mixed_quality(self):
        ranked = rank_clients(quotes_from([(0.5, 2), (0.6, 1), (1.0, 1)]))
        assert budget_for_count(ranked, 2) == pytest.approx(3.0, abs=1e-12)

    @pytest.mark.parametrize("n", [0, 5, -1])
    def test_out_of_range(self, n):
        ranked = rank_clients(quotes_from([(b, 1) for b in [0.6, 0.7, 0.8, 0.9, 1.0]]))
        with pytest.raises(AuctionError, match="count out of range"):
            budget_for_count(ranked, n)

    def test_monotone_in_n(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            ranked = rank_clients(quotes_from(zip(rng.uniform(0.5, 1.5, 20), rng.uniform(0.01, 2, 20))))
            spends = [budget_for_count(ranked, n) for n in range(1, 20)]
            assert all(s > 0 for s in spends)
            assert np.all(np.diff(spends) >= 0)

    def test_spend_curve_matches(self):
        rng = np.random.default_rng(1)
        ranked = rank_clients(quotes_from(zip(rng.uniform(0.5, 1.5, 20), rng.uniform(0.01, 2, 20))))
        expected = [brute_spend(ranked, n) for n in range(1, 20)]
        np.testing.assert_allclose(spend_curve(ranked), expected, rtol=1e-13)


class TestWinnersForBudget:
    def test_unit_quality(self):
        ranked = rank_clients(quotes_from([(b, 1) for b in [0.6, 0.7, 0.8, 0.9, 1.0]]))
        assert winners_for_budget(ranked, 2.5) == 2

    def test_unaffordable(self):
        ranked = rank_clients(quotes_from([(0.5, 1), (1.5, 1)]))
        assert winners_for_budget(ranked, 0.1) == 0

    def test_round_budget_bounded(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            ranked = rank_clients(quotes_from((b, 1.0) for b in rng.uniform(0.5, 1.5, 20)))
            assert 0 <= winners_for_budget(ranked, 7.5) <= 19

    def test_huge_budget_takes_all_but_one(self):
        ranked = rank_clients(quotes_from([(b, 1) for b in [0.6, 0.7, 0.8]]))
        assert winners_for_budget(ranked, 1e9) == 2

    def test_maximality_random(self):
        rng = np.random.default_rng(4)
        for _ in range(300):
            ranked = rank_clients(quotes_from(zip(rng.uniform(0.5, 1.5, 20), rng.uniform(0.01, 2, 20))))
            limit = rng.uniform(0.1, 40)
            n = winners_for_budget(ranked, limit)
            assert n == brute_max_n(ranked, limit)
            if n > 0:
                assert budget_for_count(ranked, n) <= limit
            if n < 19:
                assert budget_for_count(ranked, n + 1) > limit


class TestRunAuction:
    def test_payments(self):
        out = run_auction(quotes_from([(0.6, 1), (0.7, 1), (0.8, 1)]), 2)
        assert out.winner_ids == (0, 1)
        assert out.payments == pytest.approx((0.8, 0.8))
        assert out.total_spend == pytest.approx(1.6)
        assert out.n == 2

    def test_single_winner(self):
        out = run_auction(quotes_from([(0.5, 1), (1.5, 1)]), 1)
        assert out.payments == (1.5,)

    def test_out_of_range(self):
        with pytest.raises(AuctionError):
            run_auction(quotes_from([(0.5, 1), (1.5, 1)]), 2)

    def test_individual_rationality(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            qs = quotes_from(zip(rng.uniform(0.5, 1.5, 20), rng.uniform(0.01, 2, 20)))
            n = int(rng.integers(1, 20))
            out = run_auction(qs, n)
            bids = {q.client_id: q.bid for q in qs}
            for cid, pay in zip(out.winner_ids, out.payments):
                assert pay >= bids[cid]

    def test_total_matches_budget(self):
        qs = quotes_from([(0.9, 1.2), (0.55, 0.7), (1.3, 1.9), (0.8, 0.4)])
        ranked = rank_clients(qs)
        for n in range(1, 4):
            out = run_auction(qs, n)
            assert math.isclose(out.total_spend, budget_for_count(ranked, n), rel_tol=0, abs_tol=1e-15)
            assert len(out.payments) == n

    def test_deterministic(self):
        qs = quotes_from([(0.9, 1.0), (0.9, 1.0), (1.1, 1.0)])
        assert run_auction(qs, 1) == run_auction(list(reversed(qs)), 1)
