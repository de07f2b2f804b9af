"""Scalar conventions: exact money, canonical timestamps, ids."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from nftf.model import (
    ATTO_PER_ETH,
    MAX_ATTO,
    Event,
    Kind,
    eth_round,
    format_eth,
    format_timestamp,
    parse_account,
    parse_eth,
    parse_timestamp,
)


class TestParseEth:
    def test_fractional_is_exact(self):
        assert parse_eth("0.666") == 666 * 10**15

    def test_whole(self):
        assert parse_eth("1") == 10**18
        assert parse_eth("50") == 50 * 10**18

    def test_smallest_unit(self):
        assert parse_eth("0.000000000000000001") == 1

    def test_zero(self):
        assert parse_eth("0") == 0
        assert parse_eth("0.0") == 0

    def test_full_precision(self):
        assert parse_eth("1.234567890123456789") == 1234567890123456789

    @pytest.mark.parametrize(
        "bad",
        [
            "",
            ".5",
            "1.",
            "-1",
            "+1",
            "1e3",
            " 1",
            "1 ",
            "1.2345678901234567891",  # 19 fractional digits
            "0x10",
            "NaN",
            "1,5",
        ],
    )
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            parse_eth(bad)

    def test_range_cap(self):
        format_eth(MAX_ATTO)  # the cap itself is representable
        with pytest.raises(ValueError):
            parse_eth(str(2**128))  # whole ETH far beyond the cap


class TestFormatEth:
    def test_trims_trailing_zeros(self):
        assert format_eth(666 * 10**15) == "0.666"
        assert format_eth(10**18) == "1"
        assert format_eth(1500000000000000000) == "1.5"

    def test_smallest(self):
        assert format_eth(1) == "0.000000000000000001"

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            format_eth(-1)

    @given(st.integers(min_value=0, max_value=MAX_ATTO))
    def test_round_trip(self, atto):
        assert parse_eth(format_eth(atto)) == atto


class TestEthRound:
    def test_exact_passes_through(self):
        assert eth_round(Fraction(7)) == 7

    def test_half_goes_to_even(self):
        assert eth_round(Fraction(1, 2)) == 0
        assert eth_round(Fraction(3, 2)) == 2
        assert eth_round(Fraction(5, 2)) == 2

    def test_ordinary_rounding(self):
        assert eth_round(Fraction(10, 3)) == 3
        assert eth_round(Fraction(11, 3)) == 4


class TestTimestamps:
    def test_epoch_known_value(self):
        assert parse_timestamp("2021-01-01T00:00:00Z") == 1609459200

    def test_round_trip_string(self):
        s = "2021-03-14T15:09:26Z"
        assert format_timestamp(parse_timestamp(s)) == s

    @pytest.mark.parametrize(
        "bad",
        [
            "2021-1-01T00:00:00Z",
            "2021-01-01 00:00:00Z",
            "2021-01-01T00:00:00",
            "2021-01-01T00:00:00+00:00",
            "2021-02-30T00:00:00Z",  # not a real date
            "2021-01-01T24:00:00Z",
            "21-01-01T00:00:00Z",
            "",
        ],
    )
    def test_rejects_non_canonical(self, bad):
        with pytest.raises(ValueError):
            parse_timestamp(bad)

    @given(st.integers(min_value=0, max_value=4102444799))  # through 2099
    def test_round_trip_seconds(self, ts):
        assert parse_timestamp(format_timestamp(ts)) == ts


class TestAccounts:
    def test_canonical_passes(self):
        acct = "0x" + "ab" * 20
        assert parse_account(acct) == acct

    @pytest.mark.parametrize(
        "bad",
        [
            "0x" + "AB" * 20,  # uppercase
            "0x" + "ab" * 19,
            "0x" + "ab" * 21,
            "ab" * 20,
            "0x" + "zz" * 20,
            "",
        ],
    )
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            parse_account(bad)


class TestEvent:
    def test_sort_key_orders_by_ts_then_tx(self):
        a = Event(tx="0x02", ts=5, kind=Kind.MINT, actor="0x" + "aa" * 20, nft="n")
        b = Event(tx="0x01", ts=5, kind=Kind.MINT, actor="0x" + "aa" * 20, nft="m")
        c = Event(tx="0x03", ts=4, kind=Kind.MINT, actor="0x" + "aa" * 20, nft="o")
        assert sorted([a, b, c], key=Event.sort_key) == [c, b, a]

    def test_frozen(self):
        e = Event(tx="0x01", ts=0, kind=Kind.MINT, actor="0x" + "aa" * 20, nft="n")
        with pytest.raises(AttributeError):
            e.ts = 1
