"""Event-log parsing and serialization.

The log format is UTF-8 newline-delimited JSON, one object per line with
fields exactly {tx, ts, kind, actor, nft?, price?, to?}.  Parsing is
total: bad lines become ParseErrors, good lines become Events, and the
stream is never aborted mid-way.
"""

import json
from dataclasses import dataclass
from typing import Iterable

from .model import (
    COUNTERPARTY_KINDS,
    PRICED_KINDS,
    Event,
    Kind,
    format_eth,
    format_timestamp,
    parse_account,
    parse_eth,
    parse_timestamp,
    parse_token,
)

_KNOWN_FIELDS = ("tx", "ts", "kind", "actor", "nft", "price", "to")


@dataclass(frozen=True)
class ParseError:
    line: int
    cause: str


def parse_event_log(lines: Iterable[str]) -> tuple[list[Event], list[ParseError]]:
    """Parse a line stream into Events plus per-line ParseErrors.

    Line numbers are 1-based.  Blank lines are skipped.  A tx seen twice
    errors on the later line (tx must be unique within a log).
    """
    events: list[Event] = []
    errors: list[ParseError] = []
    seen_tx: set[str] = set()
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            event = _parse_line(line)
            if event.tx in seen_tx:
                raise ValueError(f"duplicate tx {event.tx!r}")
            seen_tx.add(event.tx)
            events.append(event)
        except ValueError as exc:
            errors.append(ParseError(line=line_no, cause=str(exc)))
    return events, errors


def _parse_line(line: str) -> Event:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed JSON: {exc.msg}") from None
    if not isinstance(record, dict):
        raise ValueError("record is not a JSON object")

    unknown = set(record) - set(_KNOWN_FIELDS)
    if unknown:
        raise ValueError(f"unexpected field(s): {', '.join(sorted(unknown))}")

    tx = record.get("tx")
    if not isinstance(tx, str) or not tx:
        raise ValueError("missing or invalid tx")

    kind_raw = record.get("kind")
    if not isinstance(kind_raw, str):
        raise ValueError("missing kind")
    try:
        kind = Kind(kind_raw)
    except ValueError:
        raise ValueError(f"unknown kind {kind_raw!r}") from None

    if "ts" not in record:
        raise ValueError("missing ts")
    ts = parse_timestamp(record["ts"])

    if "actor" not in record:
        raise ValueError("missing actor")
    actor = parse_account(record["actor"])

    needs_nft = kind is not Kind.INVITE
    if needs_nft and "nft" not in record:
        raise ValueError(f"missing nft for kind {kind.value}")
    if not needs_nft and "nft" in record:
        raise ValueError("invite must not name an nft")
    nft = parse_token(record["nft"]) if needs_nft else None

    if kind in PRICED_KINDS:
        if "price" not in record:
            raise ValueError(f"missing price for kind {kind.value}")
        price = parse_eth(record["price"])
    else:
        if "price" in record:
            raise ValueError(f"price not allowed for kind {kind.value}")
        price = None

    if kind in COUNTERPARTY_KINDS:
        if "to" not in record:
            raise ValueError(f"missing to for kind {kind.value}")
        to = parse_account(record["to"])
    else:
        if "to" in record:
            raise ValueError(f"to not allowed for kind {kind.value}")
        to = None

    return Event(tx=tx, ts=ts, kind=kind, actor=actor, nft=nft, price=price, to=to)


def serialize_event(event: Event) -> str:
    """Canonical one-line JSON for an event; parse(serialize(e)) == e."""
    record: dict[str, str] = {
        "tx": event.tx,
        "ts": format_timestamp(event.ts),
        "kind": event.kind.value,
        "actor": event.actor,
    }
    if event.nft is not None:
        record["nft"] = event.nft
    if event.price is not None:
        record["price"] = format_eth(event.price)
    if event.to is not None:
        record["to"] = event.to
    return json.dumps(record, separators=(",", ":"))


def serialize_event_log(events: Iterable[Event]) -> str:
    return "".join(serialize_event(e) + "\n" for e in events)
