"""Shared builders for event sequences used across the suite."""

import pytest

from nftf.model import Event, Kind, parse_eth, parse_timestamp

#: canonical test accounts (40 lowercase hex chars after 0x)
ALICE = "0x" + "a1" * 20
BOB = "0x" + "b2" * 20
CAROL = "0x" + "c3" * 20
DAVE = "0x" + "d4" * 20

T0 = parse_timestamp("2021-03-01T00:00:00Z")

HOUR = 3600
DAY = 86400


def at(days=0, hours=0, minutes=0, seconds=0):
    """Timestamp offset from T0."""
    return T0 + days * DAY + hours * HOUR + minutes * 60 + seconds


def eth(text: str) -> int:
    return parse_eth(text)


class EventFactory:
    """Builds events with unique sequential tx ids."""

    def __init__(self):
        self.counter = 0

    def _next_tx(self) -> str:
        self.counter += 1
        return f"0x{self.counter:06x}"

    def mint(self, ts, actor, nft):
        return Event(tx=self._next_tx(), ts=ts, kind=Kind.MINT, actor=actor, nft=nft)

    def list(self, ts, actor, nft, price):
        return Event(
            tx=self._next_tx(), ts=ts, kind=Kind.LIST, actor=actor, nft=nft,
            price=parse_eth(price) if isinstance(price, str) else price,
        )

    def unlist(self, ts, actor, nft):
        return Event(tx=self._next_tx(), ts=ts, kind=Kind.UNLIST, actor=actor, nft=nft)

    def bid(self, ts, actor, nft, price):
        return Event(
            tx=self._next_tx(), ts=ts, kind=Kind.BID, actor=actor, nft=nft,
            price=parse_eth(price) if isinstance(price, str) else price,
        )

    def settle(self, ts, actor, nft):
        return Event(tx=self._next_tx(), ts=ts, kind=Kind.SETTLE, actor=actor, nft=nft)

    def transfer(self, ts, actor, nft, to):
        return Event(
            tx=self._next_tx(), ts=ts, kind=Kind.TRANSFER, actor=actor, nft=nft, to=to
        )

    def invite(self, ts, actor, to):
        return Event(tx=self._next_tx(), ts=ts, kind=Kind.INVITE, actor=actor, to=to)


@pytest.fixture
def ef():
    return EventFactory()


def sold_nft(ef, nft, seller, buyer, list_ts, reserve="1", hammer="2"):
    """Mint, list, one reserve bid plus one higher bid, settle; returns events."""
    first_bid = list_ts + HOUR
    return [
        ef.mint(list_ts - DAY, seller, nft),
        ef.list(list_ts, seller, nft, reserve),
        ef.bid(first_bid, buyer, nft, reserve),
        ef.bid(first_bid + HOUR, buyer, nft, hammer),
        ef.settle(first_bid + DAY, seller, nft),
    ]
