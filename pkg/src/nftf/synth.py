"""Seeded synthetic event logs with known planted patterns.

The generator produces a valid marketplace log (it replays cleanly
through the state machine) and reports exactly what it planted:
invite-after-purchase pairs, sub-hour unlist/relist flips, and dense
transfer clusters. Background noise is shaped to stay out of the
detectors' way: noise invites only occur between accounts that never
trade, and noise unlist/relist gaps are at least a day. Everything
derives from random.Random(seed), so a config is a complete recipe.
"""

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .analytics import FunnelStats, _ratio
from .model import AccountId, Event, Kind, TokenId, parse_eth, parse_timestamp

_HEX = "0123456789abcdef"

#: weights for the hour an action lands in; evenings (16-20 UTC) dominate
_HOUR_WEIGHTS = [1] * 16 + [5] * 5 + [1] * 3


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 7
    n_accounts: int = 40
    n_nfts: int = 120
    start: int = parse_timestamp("2021-01-01T00:00:00Z")
    days: int = 180
    planted_collusions: int = 3
    planted_quick_relists: int = 4
    cluster_sizes: tuple[int, ...] = (8, 8)
    cluster_transfers: int = 12  # per cluster, >= size - 1
    noise_invites: int = 15


@dataclass(frozen=True)
class PlantedCollusion:
    seller: AccountId
    buyer: AccountId
    nft: TokenId


@dataclass(frozen=True)
class PlantedRelist:
    nft: TokenId
    gap_seconds: int


@dataclass
class GroundTruth:
    collusions: list[PlantedCollusion]
    quick_relists: list[PlantedRelist]
    cluster_members: list[frozenset]
    expected_funnel: FunnelStats


@dataclass
class _Pending:
    """One event awaiting its tx id; txs are assigned in time order."""

    ts: int
    order: int
    kind: Kind
    actor: AccountId
    nft: TokenId | None = None
    price: int | None = None
    to: AccountId | None = None


class _Emitter:
    def __init__(self) -> None:
        self.pending: list[_Pending] = []

    def emit(self, ts, kind, actor, nft=None, price=None, to=None):
        self.pending.append(
            _Pending(ts, len(self.pending), kind, actor, nft, price, to)
        )

    def finish(self) -> list[Event]:
        events = []
        for i, p in enumerate(sorted(self.pending, key=lambda p: (p.ts, p.order))):
            events.append(
                Event(
                    tx=f"0x{i:064x}",
                    ts=p.ts,
                    kind=p.kind,
                    actor=p.actor,
                    nft=p.nft,
                    price=p.price,
                    to=p.to,
                )
            )
        return events


def _fresh_hex(rng: random.Random, length: int, seen: set) -> str:
    while True:
        value = "0x" + "".join(rng.choice(_HEX) for _ in range(length))
        if value not in seen:
            seen.add(value)
            return value


def _biased_ts(rng: random.Random, start: int, days: int) -> int:
    day = rng.randrange(days)
    hour = rng.choices(range(24), weights=_HOUR_WEIGHTS)[0]
    return start + day * 86400 + hour * 3600 + rng.randrange(3600)


def _price(rng: random.Random) -> int:
    """Log-uniform in [0.01, 10] ETH, rounded to 4 decimals."""
    eth = 10.0 ** rng.uniform(-2.0, 1.0)
    return parse_eth(f"{eth:.4f}")


def _bump(rng: random.Random, price: int) -> int:
    """A strictly higher follow-up bid (5%..50% over, re-rounded)."""
    eth = price / 10**18 * rng.uniform(1.05, 1.5)
    return max(parse_eth(f"{eth:.4f}"), price + 10**14)


@dataclass
class _Tally:
    first_listed: int = 0
    first_sold: int = 0
    relisted_after_sale: int = 0
    second_sold: int = 0
    sold_pairs: set = field(default_factory=set)


def _run_auction(em, rng, nft, seller, list_ts, bidders, winner, tally):
    """List, take 1-3 bids ending with `winner`, settle. Returns settle ts."""
    reserve = _price(rng)
    em.emit(list_ts, Kind.LIST, seller, nft=nft, price=reserve)
    first_bid_ts = list_ts + rng.randrange(600, 8 * 3600)
    others = [b for b in bidders if b not in (seller, winner)]
    n_bids = rng.randrange(1, 4)
    amount = reserve
    ts = first_bid_ts
    for i in range(n_bids):
        bidder = winner if i == n_bids - 1 else rng.choice(others)
        em.emit(ts, Kind.BID, bidder, nft=nft, price=amount)
        amount = _bump(rng, amount)
        ts += rng.randrange(300, 3600)  # stays far from the closing window
    end = first_bid_ts + 24 * 3600
    settle_ts = end + rng.randrange(0, 2 * 86400)
    settler = rng.choice([seller, winner])
    em.emit(settle_ts, Kind.SETTLE, settler, nft=nft)
    tally.sold_pairs.add((seller, winner))
    return settle_ts


def _noise_lifecycle(em, rng, nft, accounts, start, days, tally, forbidden_pairs):
    creator = rng.choice(accounts)
    mint_ts = _biased_ts(rng, start, max(days // 2, 1))
    em.emit(mint_ts, Kind.MINT, creator, nft=nft)
    owner = creator
    cursor = mint_ts + rng.randrange(60, 86400)

    if rng.random() < 0.15:  # gifted before any listing
        to = rng.choice([a for a in accounts if a != owner])
        em.emit(cursor, Kind.TRANSFER, owner, nft=nft, to=to)
        owner = to
        cursor += rng.randrange(3600, 86400)

    roll = rng.random()
    if roll < 0.10:
        return  # never listed
    tally.first_listed += 1
    if roll < 0.20:  # listed and left open
        em.emit(cursor, Kind.LIST, owner, nft=nft, price=_price(rng))
        return
    if roll < 0.40:  # listed, no takers, pulled; maybe relisted much later
        em.emit(cursor, Kind.LIST, owner, nft=nft, price=_price(rng))
        cursor += rng.randrange(3600, 10 * 86400)
        em.emit(cursor, Kind.UNLIST, owner, nft=nft)
        if rng.random() < 0.5:
            cursor += rng.randrange(86400 + 3600, 40 * 86400)  # >= a day later
            em.emit(cursor, Kind.LIST, owner, nft=nft, price=_price(rng))
        return

    # sold at auction
    allowed = [
        a for a in accounts if a != owner and (owner, a) not in forbidden_pairs
    ]
    if not allowed:
        em.emit(cursor, Kind.LIST, owner, nft=nft, price=_price(rng))
        return
    winner = rng.choice(allowed)
    settle_ts = _run_auction(em, rng, nft, owner, cursor, accounts, winner, tally)
    tally.first_sold += 1
    owner = winner

    if roll < 0.65 or rng.random() < 0.5:
        return
    # winner flips it
    tally.relisted_after_sale += 1
    relist_ts = settle_ts + rng.randrange(86400, 20 * 86400)
    allowed = [
        a for a in accounts if a != owner and (owner, a) not in forbidden_pairs
    ]
    if rng.random() < 0.5 or not allowed:
        em.emit(relist_ts, Kind.LIST, owner, nft=nft, price=_price(rng))
        return  # stays open
    _run_auction(em, rng, nft, owner, relist_ts, accounts, rng.choice(allowed), tally)
    tally.second_sold += 1


def generate(config: SynthConfig) -> tuple[list[Event], GroundTruth]:
    """Build the event list (time-ordered, txs sequential) and its truth."""
    planted = config.planted_collusions + config.planted_quick_relists
    if planted > config.n_nfts:
        raise ValueError(
            f"cannot plant {planted} patterns into {config.n_nfts} NFTs"
        )
    if config.n_accounts < 4:
        raise ValueError("need at least 4 accounts")
    for size in config.cluster_sizes:
        if size < 2:
            raise ValueError("cluster size must be >= 2")
        if config.cluster_transfers < size - 1:
            raise ValueError("cluster_transfers must cover every member")
    if config.days < 2:
        raise ValueError("need at least 2 days")

    rng = random.Random(config.seed)
    em = _Emitter()
    tally = _Tally()
    seen: set = set()
    accounts = [_fresh_hex(rng, 40, seen) for _ in range(config.n_accounts)]
    tokens = [_fresh_hex(rng, 64, seen) for _ in range(config.n_nfts)]

    # collusion pairs come first so noise sales can avoid them
    pairs: list[tuple[AccountId, AccountId]] = []
    while len(pairs) < config.planted_collusions:
        seller, buyer = rng.sample(accounts, 2)
        if (seller, buyer) not in pairs:
            pairs.append((seller, buyer))
    forbidden = set(pairs)

    collusions: list[PlantedCollusion] = []
    token_iter = iter(tokens)
    for seller, buyer in pairs:
        nft = next(token_iter)
        mint_ts = _biased_ts(rng, config.start, max(config.days // 2, 1))
        em.emit(mint_ts, Kind.MINT, seller, nft=nft)
        list_ts = mint_ts + rng.randrange(3600, 5 * 86400)
        settle_ts = _run_auction(em, rng, nft, seller, list_ts, accounts, buyer, tally)
        tally.first_listed += 1
        tally.first_sold += 1
        em.emit(
            settle_ts + rng.randrange(3600, 3 * 86400),
            Kind.INVITE,
            seller,
            to=buyer,
        )
        collusions.append(PlantedCollusion(seller=seller, buyer=buyer, nft=nft))

    quick_relists: list[PlantedRelist] = []
    for _ in range(config.planted_quick_relists):
        nft = next(token_iter)
        creator = rng.choice(accounts)
        mint_ts = _biased_ts(rng, config.start, max(config.days // 2, 1))
        em.emit(mint_ts, Kind.MINT, creator, nft=nft)
        list_ts = mint_ts + rng.randrange(3600, 5 * 86400)
        em.emit(list_ts, Kind.LIST, creator, nft=nft, price=_price(rng))
        unlist_ts = list_ts + rng.randrange(3600, 5 * 86400)
        em.emit(unlist_ts, Kind.UNLIST, creator, nft=nft)
        gap = rng.randrange(60, 3500)
        em.emit(unlist_ts + gap, Kind.LIST, creator, nft=nft, price=_price(rng))
        tally.first_listed += 1
        quick_relists.append(PlantedRelist(nft=nft, gap_seconds=gap))

    for nft in token_iter:
        _noise_lifecycle(
            em, rng, nft, accounts, config.start, config.days, tally, forbidden
        )

    # dense transfer clusters on their own dedicated accounts
    cluster_members: list[frozenset] = []
    for size in config.cluster_sizes:
        members = [_fresh_hex(rng, 40, seen) for _ in range(size)]
        nft = _fresh_hex(rng, 64, seen)
        mint_ts = _biased_ts(rng, config.start, max(config.days // 2, 1))
        em.emit(mint_ts, Kind.MINT, members[0], nft=nft)
        cursor = mint_ts
        owner = members[0]
        hops = members[1:] + [
            rng.choice(members) for _ in range(config.cluster_transfers - size + 1)
        ]
        for to in hops:
            if to == owner:
                to = members[(members.index(owner) + 1) % size]
            cursor += rng.randrange(3600, 3 * 86400)
            em.emit(cursor, Kind.TRANSFER, owner, nft=nft, to=to)
            owner = to
        cluster_members.append(frozenset(members))

    # noise invites between accounts that never traded with each other
    tradeless = [
        (a, b)
        for a in accounts
        for b in accounts
        if a != b and (a, b) not in tally.sold_pairs
    ]
    for a, b in rng.sample(tradeless, min(config.noise_invites, len(tradeless))):
        em.emit(_biased_ts(rng, config.start, config.days), Kind.INVITE, a, to=b)

    truth = GroundTruth(
        collusions=collusions,
        quick_relists=quick_relists,
        cluster_members=cluster_members,
        expected_funnel=FunnelStats(
            first_listed=tally.first_listed,
            first_sold=tally.first_sold,
            relisted_after_sale=tally.relisted_after_sale,
            second_sold=tally.second_sold,
            first_success_rate=_ratio(tally.first_sold, tally.first_listed),
            relist_rate=_ratio(tally.relisted_after_sale, tally.first_sold),
            second_success_rate=_ratio(tally.second_sold, tally.relisted_after_sale),
        ),
    )
    return em.finish(), truth


def truth_as_dict(truth: GroundTruth) -> dict:
    """JSON-ready view of a GroundTruth (Fractions become "p/q" strings)."""
    funnel = truth.expected_funnel
    return {
        "collusions": [
            {"seller": c.seller, "buyer": c.buyer, "nft": c.nft}
            for c in truth.collusions
        ],
        "quick_relists": [
            {"nft": r.nft, "gap_seconds": r.gap_seconds}
            for r in truth.quick_relists
        ],
        "cluster_members": [sorted(m) for m in truth.cluster_members],
        "expected_funnel": {
            "first_listed": funnel.first_listed,
            "first_sold": funnel.first_sold,
            "relisted_after_sale": funnel.relisted_after_sale,
            "second_sold": funnel.second_sold,
            "first_success_rate": str(Fraction(funnel.first_success_rate)),
            "relist_rate": str(Fraction(funnel.relist_rate)),
            "second_success_rate": str(Fraction(funnel.second_success_rate)),
        },
    }
