"""Marketplace behavior statistics over a validated Ledger.

Covers activity series, the first/second-auction funnel, resale price
changes, unlist-relist gap histograms, invite-for-purchase detection,
and the transferred-vs-sold breakdown.  "Sold" always means a settled
auction; a winning bid without a settle does not count.
"""

from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from fractions import Fraction

from .machine import ListingEpoch, listing_epochs
from .model import AccountId, Invite, Kind, Ledger, TokenId, eth_round

#: gap buckets: [0,1h), [1h,1d), [1d,5d), [5d,30d), [30d,inf)
DEFAULT_GAP_EDGES = (3600, 86400, 5 * 86400, 30 * 86400)


class Granularity(Enum):
    MONTHLY = "monthly"
    HOUR_OF_DAY = "hour_of_day"


@dataclass
class ActivitySeries:
    granularity: Granularity
    mint_counts: dict
    bid_counts: dict


@dataclass
class FunnelStats:
    """First/second listing funnel.

    A rate with a zero denominator is reported as 0.
    """

    first_listed: int
    first_sold: int
    relisted_after_sale: int
    second_sold: int
    first_success_rate: Fraction
    relist_rate: Fraction
    second_success_rate: Fraction


@dataclass
class ResaleRecord:
    nft: TokenId
    first_settle: int
    second_list: int
    pct_change: Fraction
    second_sold: bool
    second_settle: int | None


@dataclass
class GapHistogram:
    """Half-open buckets [0,e0), [e0,e1), ..., [e_last, inf)."""

    bucket_edges: tuple[int, ...]
    counts: list[int]
    fractions: list[Fraction]


@dataclass
class CollusionCandidate:
    seller: AccountId
    buyer: AccountId
    nft: TokenId
    settle_price: int
    settle_ts: int
    invite_ts: int


@dataclass
class InvitePurchaseScan:
    candidates: list[CollusionCandidate]
    mean_price: int
    empty: bool


@dataclass
class TransferSaleBreakdown:
    transferred_total: int
    transferred_ever_sold: int
    fraction: Fraction


def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


def _epochs_by_nft(ledger: Ledger) -> dict[TokenId, list[ListingEpoch]]:
    return {nft: listing_epochs(h) for nft, h in sorted(ledger.histories.items())}


def activity_series(ledger: Ledger, granularity: Granularity) -> ActivitySeries:
    """Count mint and bid events per month ("YYYY-MM") or per UTC hour (0-23)."""
    mint_counts: dict = {}
    bid_counts: dict = {}
    for kind, counts in ((Kind.MINT, mint_counts), (Kind.BID, bid_counts)):
        for event in ledger.events_of_kind(kind):
            dt = datetime.fromtimestamp(event.ts, tz=timezone.utc)
            if granularity is Granularity.MONTHLY:
                bucket = dt.strftime("%Y-%m")
            else:
                bucket = dt.hour
            counts[bucket] = counts.get(bucket, 0) + 1
    return ActivitySeries(granularity=granularity, mint_counts=mint_counts, bid_counts=bid_counts)


def auction_funnel_stats(ledger: Ledger) -> FunnelStats:
    """Listing funnel: first listing sold -> relisted -> sold again.

    "First sold" requires the NFT's first listing epoch to end in a
    settle; "second sold" requires the next listing after that sale to
    end in a settle.
    """
    first_listed = first_sold = relisted = second_sold = 0
    for epochs in _epochs_by_nft(ledger).values():
        if not epochs:
            continue
        first_listed += 1
        if epochs[0].outcome != "settled":
            continue
        first_sold += 1
        if len(epochs) < 2:
            continue
        relisted += 1
        if epochs[1].outcome == "settled":
            second_sold += 1
    return FunnelStats(
        first_listed=first_listed,
        first_sold=first_sold,
        relisted_after_sale=relisted,
        second_sold=second_sold,
        first_success_rate=_ratio(first_sold, first_listed),
        relist_rate=_ratio(relisted, first_sold),
        second_success_rate=_ratio(second_sold, relisted),
    )


def resale_price_changes(ledger: Ledger) -> list[ResaleRecord]:
    """Price change from an NFT's settled first auction to its next listing.

    The "second list" price is the reserve of the first listing opened
    after that settle, whether or not it drew bids.  Zero-priced first
    settles are skipped (percent change undefined).  Sorted by
    pct_change ascending, ties by nft.
    """
    records: list[ResaleRecord] = []
    for nft, epochs in _epochs_by_nft(ledger).items():
        idx = next((i for i, e in enumerate(epochs) if e.auction is not None), None)
        if idx is None:
            continue
        first = epochs[idx]
        if first.outcome != "settled" or first.auction.settle_price == 0:
            continue
        if idx + 1 >= len(epochs):
            continue
        second = epochs[idx + 1]
        first_settle = first.auction.settle_price
        second_sold = second.outcome == "settled"
        records.append(
            ResaleRecord(
                nft=nft,
                first_settle=first_settle,
                second_list=second.reserve,
                pct_change=Fraction(second.reserve - first_settle, first_settle) * 100,
                second_sold=second_sold,
                second_settle=second.auction.settle_price if second_sold else None,
            )
        )
    records.sort(key=lambda r: (r.pct_change, r.nft))
    return records


def unlist_relist_gaps(ledger: Ledger, bucket_edges=DEFAULT_GAP_EDGES) -> GapHistogram:
    """Histogram of t(next list) - t(unlist) per consecutive unlist/list pair."""
    edges = tuple(int(e) for e in bucket_edges)
    if not edges or edges[0] <= 0 or any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValueError("bucket edges must be positive and strictly increasing")

    gaps: list[int] = []
    for _, history in sorted(ledger.histories.items()):
        pending: int | None = None
        for event in history.events:
            if event.kind is Kind.UNLIST:
                pending = event.ts
            elif event.kind is Kind.LIST and pending is not None:
                gaps.append(event.ts - pending)
                pending = None

    counts = [0] * (len(edges) + 1)
    for gap in gaps:
        for i, edge in enumerate(edges):
            if gap < edge:
                counts[i] += 1
                break
        else:
            counts[-1] += 1
    total = len(gaps)
    fractions = [_ratio(c, total) for c in counts]
    return GapHistogram(bucket_edges=edges, counts=counts, fractions=fractions)


def detect_invite_purchases(
    ledger: Ledger, max_invite_gap: int | None = None
) -> InvitePurchaseScan:
    """Find settled auctions whose seller later invited the buyer.

    The ordering test anchors on the buyer's winning-bid timestamp: the
    invite must be strictly after it (and within ``max_invite_gap``
    seconds when given).  Each qualifying auction yields one candidate,
    stamped with the earliest qualifying invite.  ``mean_price`` is the
    arithmetic mean of candidate settle prices rounded to the nearest
    attoether, 0 when there are none.
    """
    invites_by_pair: dict[tuple[AccountId, AccountId], list[Invite]] = {}
    for invite in ledger.invites:
        invites_by_pair.setdefault((invite.inviter, invite.invitee), []).append(invite)

    candidates: list[CollusionCandidate] = []
    for nft, epochs in _epochs_by_nft(ledger).items():
        for epoch in epochs:
            if epoch.outcome != "settled":
                continue
            auction = epoch.auction
            winning_bid_ts = auction.bids[-1].ts
            for invite in invites_by_pair.get((auction.seller, auction.winner), ()):
                if invite.ts <= winning_bid_ts:
                    continue
                if max_invite_gap is not None and invite.ts - winning_bid_ts > max_invite_gap:
                    continue
                candidates.append(
                    CollusionCandidate(
                        seller=auction.seller,
                        buyer=auction.winner,
                        nft=nft,
                        settle_price=auction.settle_price,
                        settle_ts=epoch.closed_ts,
                        invite_ts=invite.ts,
                    )
                )
                break  # invites are time-sorted; first hit is earliest

    if not candidates:
        return InvitePurchaseScan(candidates=[], mean_price=0, empty=True)
    mean = Fraction(sum(c.settle_price for c in candidates), len(candidates))
    return InvitePurchaseScan(candidates=candidates, mean_price=eth_round(mean), empty=False)


def transferred_sold_breakdown(ledger: Ledger) -> TransferSaleBreakdown:
    """Of the NFTs ever transferred, how many were ever sold (any time)."""
    transferred = 0
    ever_sold = 0
    for nft, history in sorted(ledger.histories.items()):
        if not any(e.kind is Kind.TRANSFER for e in history.events):
            continue
        transferred += 1
        if any(e.outcome == "settled" for e in listing_epochs(history)):
            ever_sold += 1
    return TransferSaleBreakdown(
        transferred_total=transferred,
        transferred_ever_sold=ever_sold,
        fraction=_ratio(ever_sold, transferred),
    )


def first_settle_prices(ledger: Ledger) -> dict:
    """Settle price of each NFT's first settled auction, keyed by token.

    This is the price table the similarity-side coherence report runs
    against when analyzing historic sales.
    """
    out: dict = {}
    for nft, epochs in _epochs_by_nft(ledger).items():
        for epoch in epochs:
            if epoch.outcome == "settled":
                out[nft] = epoch.auction.settle_price
                break
    return out
