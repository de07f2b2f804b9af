"""Domain types for Foundation-style marketplace event logs.

Scalar conventions, fixed once here and relied on everywhere else:

* accounts are lowercase ``0x`` + 40 hex chars, compared as plain strings
* amounts are integer attoether (1 ETH = 10**18 atto), never floats
* timestamps are integer UTC seconds, serialized as ISO-8601 with ``Z``
"""

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from fractions import Fraction

ATTO_PER_ETH = 10**18
MAX_ATTO = 2**128 - 1

_ACCOUNT_RE = re.compile(r"^0x[0-9a-f]{40}$")
_TIMESTAMP_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$")
_ETH_RE = re.compile(r"^(\d+)(?:\.(\d{1,18}))?$")

AccountId = str
TokenId = str
EthAmount = int  # attoether
Timestamp = int  # UTC seconds


def parse_account(value: str) -> AccountId:
    """Return the account id unchanged iff it is canonical, else ValueError."""
    if not isinstance(value, str) or not _ACCOUNT_RE.match(value):
        raise ValueError(f"non-canonical account {value!r}")
    return value


def parse_token(value: str) -> TokenId:
    if not isinstance(value, str) or not value:
        raise ValueError(f"invalid token id {value!r}")
    return value


def parse_eth(value: str) -> int:
    """Parse a decimal ETH string to integer attoether, exactly.

    "0.666" -> 666 * 10**15.  At most 18 fractional digits; no sign,
    exponent, or whitespace.
    """
    if not isinstance(value, str):
        raise ValueError(f"unparsable amount {value!r}")
    m = _ETH_RE.match(value)
    if not m:
        raise ValueError(f"unparsable amount {value!r}")
    whole, frac = m.group(1), m.group(2) or ""
    atto = int(whole) * ATTO_PER_ETH + int(frac.ljust(18, "0") or "0")
    if atto > MAX_ATTO:
        raise ValueError(f"amount out of range: {value!r}")
    return atto


def format_eth(atto: int) -> str:
    """Render attoether as a decimal ETH string, trailing zeros trimmed."""
    if atto < 0 or atto > MAX_ATTO:
        raise ValueError(f"attoether out of range: {atto!r}")
    whole, frac = divmod(atto, ATTO_PER_ETH)
    if frac == 0:
        return str(whole)
    return f"{whole}.{frac:018d}".rstrip("0")


def eth_round(amount: Fraction) -> int:
    """Round an exact attoether quantity to the nearest integer, ties to even."""
    return round(amount)


def parse_timestamp(value: str) -> int:
    """Parse canonical "YYYY-MM-DDTHH:MM:SSZ" to UTC seconds since epoch."""
    if not isinstance(value, str) or not _TIMESTAMP_RE.match(value):
        raise ValueError(f"unparsable timestamp {value!r}")
    try:
        dt = datetime.strptime(value, "%Y-%m-%dT%H:%M:%SZ")
    except ValueError:
        raise ValueError(f"unparsable timestamp {value!r}") from None
    return int(dt.replace(tzinfo=timezone.utc).timestamp())


def format_timestamp(utc_seconds: int) -> str:
    dt = datetime.fromtimestamp(utc_seconds, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


class Kind(Enum):
    MINT = "mint"
    LIST = "list"
    UNLIST = "unlist"
    BID = "bid"
    SETTLE = "settle"
    TRANSFER = "transfer"
    INVITE = "invite"


#: kinds whose records must carry a price / a counterparty
PRICED_KINDS = frozenset({Kind.LIST, Kind.BID})
COUNTERPARTY_KINDS = frozenset({Kind.TRANSFER, Kind.INVITE})


@dataclass(frozen=True)
class Event:
    """One timestamped marketplace action.

    Field presence depends on kind: list/bid carry ``price``,
    transfer/invite carry ``to``, and every kind except invite names an
    ``nft``.  ``tx`` is unique within a log.
    """

    tx: str
    ts: int
    kind: Kind
    actor: AccountId
    nft: TokenId | None = None
    price: int | None = None
    to: AccountId | None = None

    def sort_key(self) -> tuple[int, str]:
        # equal timestamps break ties by tx, ascending
        return (self.ts, self.tx)


@dataclass(frozen=True)
class Bid:
    ts: int
    bidder: AccountId
    amount: int


@dataclass
class AuctionRecord:
    """A reconstructed auction: one listing that received at least one bid.

    ``end`` is the computed close: 24 hours after the first bid,
    pushed out to bid+15min by any bid landing inside the final
    15 minutes.  ``index`` counts this NFT's bid-receiving auctions,
    1-based, in time order.
    """

    nft: TokenId
    seller: AccountId
    index: int
    reserve: int
    bids: list[Bid]
    start: int
    end: int
    winner: AccountId | None
    settle_price: int | None
    settled: bool


@dataclass
class NftHistory:
    """Validated, time-ordered event sequence of a single NFT."""

    nft: TokenId
    creator: AccountId
    events: list[Event]
    owner_timeline: list[tuple[int, AccountId]]

    def owner_at(self, ts: int) -> AccountId | None:
        """Owner in effect at time ts; None before the mint."""
        owner = None
        for change_ts, account in self.owner_timeline:
            if change_ts > ts:
                break
            owner = account
        return owner


@dataclass(frozen=True)
class Invite:
    ts: int
    inviter: AccountId
    invitee: AccountId


@dataclass
class Ledger:
    """Immutable view over a validated event log, grouped per NFT."""

    histories: dict[TokenId, NftHistory]
    invites: list[Invite]
    accounts: set[AccountId] = field(default_factory=set)

    def events_of_kind(self, kind: Kind):
        for history in self.histories.values():
            for event in history.events:
                if event.kind == kind:
                    yield event
