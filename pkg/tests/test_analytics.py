"""Behavioral statistics over hand-built ledgers with hand-computed answers."""

from fractions import Fraction

import pytest

from nftf.analytics import (
    Granularity,
    activity_series,
    auction_funnel_stats,
    detect_invite_purchases,
    first_settle_prices,
    resale_price_changes,
    transferred_sold_breakdown,
    unlist_relist_gaps,
)
from nftf.machine import build_ledger

from conftest import ALICE, BOB, CAROL, DAVE, DAY, HOUR, at, eth, sold_nft


def ledger_of(events):
    result = build_ledger(events, strict=True)
    assert result.errors == {}
    return result.ledger


class TestFunnel:
    def test_four_stage_counts(self, ef):
        events = []
        # n1: sold, relisted, sold again
        events += sold_nft(ef, "n1", ALICE, BOB, at(hours=1))
        events += [
            ef.list(at(days=3), BOB, "n1", "3"),
            ef.bid(at(days=3, hours=1), CAROL, "n1", "3"),
            ef.settle(at(days=5), BOB, "n1"),
        ]
        # n2: sold, relisted, second listing pulled
        events += sold_nft(ef, "n2", ALICE, BOB, at(hours=2))
        events += [
            ef.list(at(days=3), BOB, "n2", "9"),
            ef.unlist(at(days=4), BOB, "n2"),
        ]
        # n3: sold, never relisted
        events += sold_nft(ef, "n3", ALICE, CAROL, at(hours=3))
        # n4: listed, pulled, never sold
        events += [
            ef.mint(at(), DAVE, "n4"),
            ef.list(at(hours=4), DAVE, "n4", "1"),
            ef.unlist(at(days=2), DAVE, "n4"),
        ]
        # n5: never listed
        events += [ef.mint(at(), DAVE, "n5")]

        funnel = auction_funnel_stats(ledger_of(events))
        assert funnel.first_listed == 4
        assert funnel.first_sold == 3
        assert funnel.relisted_after_sale == 2
        assert funnel.second_sold == 1
        assert funnel.first_success_rate == Fraction(3, 4)
        assert funnel.relist_rate == Fraction(2, 3)
        assert funnel.second_success_rate == Fraction(1, 2)

    def test_unsettled_win_does_not_count_as_sold(self, ef):
        events = [
            ef.mint(at(), ALICE, "n1"),
            ef.list(at(hours=1), ALICE, "n1", "1"),
            ef.bid(at(hours=2), BOB, "n1", "2"),
            # never settled: outcome stays open
        ]
        funnel = auction_funnel_stats(ledger_of(events))
        assert funnel.first_listed == 1 and funnel.first_sold == 0

    def test_empty_ledger_rates_are_zero(self):
        funnel = auction_funnel_stats(ledger_of([]))
        assert funnel.first_listed == 0
        assert funnel.first_success_rate == 0
        assert funnel.second_success_rate == 0


class TestResale:
    def test_known_resale_percentage(self, ef):
        # bought for 0.666, relisted at 50: +7407.5075...% exactly
        events = sold_nft(ef, "n1", ALICE, BOB, at(hours=1),
                          reserve="0.5", hammer="0.666")
        events += [ef.list(at(days=10), BOB, "n1", "50")]
        (record,) = resale_price_changes(ledger_of(events))
        assert record.first_settle == eth("0.666")
        assert record.second_list == eth("50")
        assert record.pct_change == Fraction(2466700, 333)
        assert not record.second_sold and record.second_settle is None

    def test_negative_change_and_sort_order(self, ef):
        events = sold_nft(ef, "n1", ALICE, BOB, at(hours=1), "1", "4")
        events += [ef.list(at(days=10), BOB, "n1", "1")]  # -75%
        events += sold_nft(ef, "n2", ALICE, CAROL, at(hours=2), "1", "2")
        events += [
            ef.list(at(days=10), CAROL, "n2", "3"),  # +50%
            ef.bid(at(days=10, hours=1), DAVE, "n2", "3"),
            ef.settle(at(days=12), CAROL, "n2"),
        ]
        records = resale_price_changes(ledger_of(events))
        assert [r.nft for r in records] == ["n1", "n2"]
        assert records[0].pct_change == Fraction(-75)
        assert records[1].pct_change == Fraction(50)
        assert records[1].second_sold and records[1].second_settle == eth("3")

    def test_first_auction_need_not_be_first_listing(self, ef):
        # a pulled listing precedes the first real auction
        events = [
            ef.mint(at(), ALICE, "n1"),
            ef.list(at(hours=1), ALICE, "n1", "9"),
            ef.unlist(at(days=1, hours=2), ALICE, "n1"),
        ]
        events += [
            ef.list(at(days=2), ALICE, "n1", "1"),
            ef.bid(at(days=2, hours=1), BOB, "n1", "2"),
            ef.settle(at(days=4), ALICE, "n1"),
            ef.list(at(days=6), BOB, "n1", "4"),
        ]
        (record,) = resale_price_changes(ledger_of(events))
        assert record.first_settle == eth("2")
        assert record.second_list == eth("4")
        assert record.pct_change == Fraction(100)

    def test_unsold_first_auction_excluded(self, ef):
        events = [
            ef.mint(at(), ALICE, "n1"),
            ef.list(at(hours=1), ALICE, "n1", "1"),
            ef.bid(at(hours=2), BOB, "n1", "1"),
        ]
        assert resale_price_changes(ledger_of(events)) == []


class TestGaps:
    def test_boundaries_are_half_open(self, ef):
        nft_specs = [
            ("g1", 0),           # [0, 1h)
            ("g2", 3599),        # [0, 1h)
            ("g3", 3600),        # [1h, 1d)
            ("g4", 86399),       # [1h, 1d)
            ("g5", 86400),       # [1d, 5d)
            ("g6", 5 * 86400),   # [5d, 30d)
            ("g7", 30 * 86400),  # [30d, inf)
        ]
        events = []
        for nft, gap in nft_specs:
            unlist_ts = at(days=2)
            events += [
                ef.mint(at(), ALICE, nft),
                ef.list(at(hours=1), ALICE, nft, "1"),
                ef.unlist(unlist_ts, ALICE, nft),
                ef.list(unlist_ts + gap, ALICE, nft, "1"),
            ]
        hist = unlist_relist_gaps(ledger_of(events))
        assert hist.counts == [2, 2, 1, 1, 1]
        assert hist.fractions[0] == Fraction(2, 7)

    def test_unlist_without_relist_not_counted(self, ef):
        events = [
            ef.mint(at(), ALICE, "n1"),
            ef.list(at(hours=1), ALICE, "n1", "1"),
            ef.unlist(at(hours=2), ALICE, "n1"),
        ]
        hist = unlist_relist_gaps(ledger_of(events))
        assert sum(hist.counts) == 0
        assert hist.fractions == [0, 0, 0, 0, 0]

    def test_custom_edges_and_validation(self, ef):
        events = [
            ef.mint(at(), ALICE, "n1"),
            ef.list(at(hours=1), ALICE, "n1", "1"),
            ef.unlist(at(hours=2), ALICE, "n1"),
            ef.list(at(hours=2, minutes=30), ALICE, "n1", "1"),
        ]
        ledger = ledger_of(events)
        hist = unlist_relist_gaps(ledger, (60, 7200))
        assert hist.counts == [0, 1, 0]
        with pytest.raises(ValueError):
            unlist_relist_gaps(ledger, ())
        with pytest.raises(ValueError):
            unlist_relist_gaps(ledger, (100, 100))
        with pytest.raises(ValueError):
            unlist_relist_gaps(ledger, (0, 100))


class TestInvitePurchases:
    def _sale_with_invite(self, ef, invite_offset):
        """Sale settled at day 2; winning bid at hour 2; invite at given offset from the winning bid."""
        events = [
            ef.mint(at(), ALICE, "n1"),
            ef.list(at(hours=1), ALICE, "n1", "1"),
            ef.bid(at(hours=2), BOB, "n1", "1"),
            ef.settle(at(days=2), ALICE, "n1"),
            ef.invite(at(hours=2) + invite_offset, ALICE, to=BOB),
        ]
        return ledger_of(events)

    def test_invite_after_winning_bid_is_flagged(self, ef):
        scan = detect_invite_purchases(self._sale_with_invite(ef, 3 * DAY))
        (c,) = scan.candidates
        assert (c.seller, c.buyer, c.nft) == (ALICE, BOB, "n1")
        assert c.settle_price == eth("1")
        assert c.invite_ts == at(hours=2) + 3 * DAY
        assert not scan.empty
        assert scan.mean_price == eth("1")

    def test_invite_before_winning_bid_ignored(self, ef):
        scan = detect_invite_purchases(self._sale_with_invite(ef, -HOUR))
        assert scan.candidates == [] and scan.empty

    def test_invite_at_winning_bid_ts_ignored(self, ef):
        # "after" is strict
        scan = detect_invite_purchases(self._sale_with_invite(ef, 0))
        assert scan.candidates == []

    def test_max_gap_is_inclusive(self, ef):
        ledger = self._sale_with_invite(ef, 3 * DAY)
        assert detect_invite_purchases(ledger, max_invite_gap=3 * DAY).candidates
        assert not detect_invite_purchases(ledger, max_invite_gap=3 * DAY - 1).candidates

    def test_earliest_qualifying_invite_wins(self, ef):
        events = [
            ef.mint(at(), ALICE, "n1"),
            ef.list(at(hours=1), ALICE, "n1", "1"),
            ef.bid(at(hours=2), BOB, "n1", "1"),
            ef.settle(at(days=2), ALICE, "n1"),
            ef.invite(at(days=3), ALICE, to=BOB),
            ef.invite(at(days=4), ALICE, to=BOB),
        ]
        scan = detect_invite_purchases(ledger_of(events))
        (c,) = scan.candidates
        assert c.invite_ts == at(days=3)

    def test_unrelated_invite_ignored(self, ef):
        events = sold_nft(ef, "n1", ALICE, BOB, at(hours=1))
        events += [ef.invite(at(days=5), CAROL, to=DAVE)]
        assert detect_invite_purchases(ledger_of(events)).candidates == []

    def test_mean_price_rounds_half_even(self, ef):
        events = []
        events += sold_nft(ef, "n1", ALICE, BOB, at(hours=1), "1", "1.000000000000000001")
        events += [ef.invite(at(days=3), ALICE, to=BOB)]
        events += sold_nft(ef, "n2", CAROL, DAVE, at(hours=2), "1", "1.000000000000000002")
        events += [ef.invite(at(days=3, hours=1), CAROL, to=DAVE)]
        scan = detect_invite_purchases(ledger_of(events))
        # mean is 1 ETH + 1.5 atto; ties-to-even lands on +2
        assert scan.mean_price == eth("1") + 2


class TestBreakdownAndPrices:
    def test_transferred_sold_breakdown(self, ef):
        events = sold_nft(ef, "n1", ALICE, BOB, at(hours=1))
        events += [ef.transfer(at(days=5), BOB, "n1", to=CAROL)]
        events += [
            ef.mint(at(), DAVE, "n2"),
            ef.transfer(at(hours=1), DAVE, "n2", to=ALICE),
        ]
        events += sold_nft(ef, "n3", CAROL, DAVE, at(hours=3))  # sold, never moved
        b = transferred_sold_breakdown(ledger_of(events))
        assert b.transferred_total == 2
        assert b.transferred_ever_sold == 1
        assert b.fraction == Fraction(1, 2)

    def test_first_settle_prices(self, ef):
        events = sold_nft(ef, "n1", ALICE, BOB, at(hours=1), "1", "2.5")
        events += [
            ef.list(at(days=3), BOB, "n1", "9"),
            ef.bid(at(days=3, hours=1), CAROL, "n1", "9"),
            ef.settle(at(days=5), BOB, "n1"),
        ]
        events += [ef.mint(at(), DAVE, "n2")]
        prices = first_settle_prices(ledger_of(events))
        assert prices == {"n1": eth("2.5")}  # first settle, not the later one


class TestActivity:
    def test_monthly_and_hourly_buckets(self, ef):
        events = [
            ef.mint(at(), ALICE, "n1"),                      # 2021-03, hour 0
            ef.mint(at(days=40), ALICE, "n2"),               # 2021-04
            ef.list(at(days=40, hours=1), ALICE, "n2", "1"),
            ef.bid(at(days=40, hours=2), BOB, "n2", "1"),    # hour 2
        ]
        monthly = activity_series(ledger_of(events), Granularity.MONTHLY)
        assert monthly.mint_counts == {"2021-03": 1, "2021-04": 1}
        assert monthly.bid_counts == {"2021-04": 1}
        hourly = activity_series(ledger_of(events), Granularity.HOUR_OF_DAY)
        assert hourly.mint_counts == {0: 2}
        assert hourly.bid_counts == {2: 1}
