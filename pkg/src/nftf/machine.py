"""Per-NFT action semantics: validation, listing epochs, auction reconstruction.

The rules enforced here mirror the marketplace mechanics: a listing
opens at a reserve price, the first bid at or above the reserve starts a
24-hour auction, every later bid must beat the previous one and land
before the computed close, bids inside the final 15 minutes push the
close out to bid+15min, and only a settle (by seller or winner) finishes
the auction and moves ownership.  Everything from the first bid to the
settle is a live auction: no list, unlist, or transfer in between.
"""

from dataclasses import dataclass, field

from .model import (
    AccountId,
    AuctionRecord,
    Bid,
    Event,
    Invite,
    Kind,
    Ledger,
    NftHistory,
    TokenId,
)

AUCTION_SECONDS = 24 * 3600
EXTENSION_SECONDS = 15 * 60


class ValidationError(Exception):
    """First violated rule for one NFT's event sequence."""

    def __init__(self, nft: TokenId, rule: str, tx: str):
        self.nft = nft
        self.rule = rule
        self.tx = tx
        super().__init__(f"{nft}: {rule} at {tx}")


@dataclass
class ListingEpoch:
    """One listing and how it ended.

    ``outcome`` is "unlisted", "transferred" (listing cancelled by a
    transfer before any bid), "settled", or "open" (still pending at end
    of log, with or without bids).  ``auction`` is present iff the
    listing received at least one bid.
    """

    nft: TokenId
    list_ts: int
    seller: AccountId
    reserve: int
    auction: AuctionRecord | None
    outcome: str
    closed_ts: int | None


@dataclass
class _OpenListing:
    list_ts: int
    seller: AccountId
    reserve: int
    bids: list[Bid] = field(default_factory=list)
    end: int | None = None  # set when the first bid starts the auction


def _simulate(nft: TokenId, events: list[Event]):
    """Replay one NFT's events, raising ValidationError on the first violation.

    Returns (creator, owner_timeline, epochs).
    """
    creator: AccountId | None = None
    owner: AccountId | None = None
    timeline: list[tuple[int, AccountId]] = []
    epochs: list[ListingEpoch] = []
    auction_count = 0
    listing: _OpenListing | None = None

    def fail(rule: str, event: Event):
        raise ValidationError(nft, rule, event.tx)

    def close_listing(outcome: str, closed_ts: int | None):
        nonlocal listing, auction_count
        assert listing is not None
        record = None
        if listing.bids:
            auction_count += 1
            winning = listing.bids[-1]
            settled = outcome == "settled"
            record = AuctionRecord(
                nft=nft,
                seller=listing.seller,
                index=auction_count,
                reserve=listing.reserve,
                bids=list(listing.bids),
                start=listing.bids[0].ts,
                end=listing.end,
                winner=winning.bidder,
                settle_price=winning.amount if settled else None,
                settled=settled,
            )
        epochs.append(
            ListingEpoch(
                nft=nft,
                list_ts=listing.list_ts,
                seller=listing.seller,
                reserve=listing.reserve,
                auction=record,
                outcome=outcome,
                closed_ts=closed_ts,
            )
        )
        listing = None

    for event in events:
        kind = event.kind
        if creator is None:
            if kind is not Kind.MINT:
                fail("mint-not-first", event)
            creator = owner = event.actor
            timeline.append((event.ts, event.actor))
            continue

        if kind is Kind.MINT:
            fail("duplicate-mint", event)

        elif kind is Kind.LIST:
            if listing is not None:
                fail("list-during-auction" if listing.bids else "list-while-listed", event)
            if event.actor != owner:
                fail("list-not-owner", event)
            listing = _OpenListing(list_ts=event.ts, seller=owner, reserve=event.price)

        elif kind is Kind.UNLIST:
            if listing is None:
                fail("unlist-not-listed", event)
            if listing.bids:
                fail("unlist-after-bid", event)
            if event.actor != owner:
                fail("unlist-not-owner", event)
            close_listing("unlisted", event.ts)

        elif kind is Kind.BID:
            if listing is None:
                fail("bid-without-listing", event)
            if not listing.bids:
                if event.price < listing.reserve:
                    fail("bid-below-reserve", event)
                listing.end = event.ts + AUCTION_SECONDS
            else:
                prev = listing.bids[-1]
                if event.ts >= listing.end:
                    fail("bid-after-end", event)
                if event.ts <= prev.ts:
                    fail("bid-time-order", event)
                if event.price <= prev.amount:
                    fail("bid-not-increasing", event)
                if event.ts > listing.end - EXTENSION_SECONDS:
                    listing.end = event.ts + EXTENSION_SECONDS
            listing.bids.append(Bid(ts=event.ts, bidder=event.actor, amount=event.price))

        elif kind is Kind.SETTLE:
            if listing is None or not listing.bids:
                fail("settle-without-auction", event)
            if event.ts < listing.end:
                fail("settle-before-end", event)
            winner = listing.bids[-1].bidder
            if event.actor not in (listing.seller, winner):
                fail("settle-wrong-party", event)
            close_listing("settled", event.ts)
            owner = winner
            timeline.append((event.ts, winner))

        elif kind is Kind.TRANSFER:
            if listing is not None and listing.bids:
                fail("transfer-during-auction", event)
            if event.actor != owner:
                fail("transfer-not-owner", event)
            if listing is not None:
                close_listing("transferred", event.ts)
            owner = event.to
            timeline.append((event.ts, event.to))

        else:  # Kind.INVITE never reaches per-NFT validation
            raise ValueError(f"invite event {event.tx} in NFT history")

    if listing is not None:
        close_listing("open", None)
    return creator, timeline, epochs


def _check_preconditions(events: list[Event]):
    if not events:
        raise ValueError("empty event sequence")
    nft = events[0].nft
    if nft is None or any(e.nft != nft for e in events):
        raise ValueError("events do not share a single nft")
    keys = [e.sort_key() for e in events]
    if keys != sorted(keys):
        raise ValueError("events not sorted by (ts, tx)")
    return nft


def validate_history(events: list[Event]) -> NftHistory:
    """Validate one NFT's time-ordered events against the action semantics.

    Raises ValidationError carrying (nft, rule, offending tx) for the
    first violated rule; ValueError on precondition breaches.
    """
    nft = _check_preconditions(events)
    creator, timeline, _ = _simulate(nft, events)
    return NftHistory(nft=nft, creator=creator, events=list(events), owner_timeline=timeline)


def listing_epochs(history: NftHistory) -> list[ListingEpoch]:
    """All listing epochs of a validated history, in time order."""
    _, _, epochs = _simulate(history.nft, history.events)
    return epochs


def reconstruct_auctions(history: NftHistory) -> list[AuctionRecord]:
    """One AuctionRecord per listing that received at least one bid."""
    return [e.auction for e in listing_epochs(history) if e.auction is not None]


@dataclass
class BuildResult:
    """Outcome of building a Ledger from parsed events.

    In strict mode any invalid history leaves ``ledger`` as None.  In
    fail-soft mode the ledger keeps the valid histories and ``errors``
    reports the dropped ones, keyed by nft.
    """

    ledger: Ledger | None
    errors: dict[TokenId, ValidationError]


def build_ledger(events: list[Event], strict: bool = False) -> BuildResult:
    """Group events per NFT, validate each history, and collect invites.

    Result is independent of input order: grouping sorts by (ts, tx).
    """
    invites: list[Event] = []
    by_nft: dict[TokenId, list[Event]] = {}
    for event in events:
        if event.kind is Kind.INVITE:
            invites.append(event)
        else:
            by_nft.setdefault(event.nft, []).append(event)

    histories: dict[TokenId, NftHistory] = {}
    errors: dict[TokenId, ValidationError] = {}
    for nft in sorted(by_nft):
        ordered = sorted(by_nft[nft], key=Event.sort_key)
        try:
            histories[nft] = validate_history(ordered)
        except ValidationError as exc:
            errors[nft] = exc

    if strict and errors:
        return BuildResult(ledger=None, errors=errors)

    invites.sort(key=Event.sort_key)
    invite_rows = [Invite(ts=e.ts, inviter=e.actor, invitee=e.to) for e in invites]
    accounts: set[AccountId] = set()
    for history in histories.values():
        for event in history.events:
            accounts.add(event.actor)
            if event.to is not None:
                accounts.add(event.to)
    for row in invite_rows:
        accounts.add(row.inviter)
        accounts.add(row.invitee)
    ledger = Ledger(histories=histories, invites=invite_rows, accounts=accounts)
    return BuildResult(ledger=ledger, errors=errors)
