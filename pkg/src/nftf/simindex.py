"""Embedding storage, exact cosine kNN, and neighbor price coherence.

The on-disk embedding container is a little-endian binary file:

    magic   4 bytes   "NFTE"
    version u32       1
    count   u64
    dim     u64
    then per record: u16 id byte length, id (UTF-8), dim float32 values

Queries are a flat scan against the full matrix (float64, rows L2
normalized), so results are exact up to float rounding; ties in cosine
are broken by id ascending. Monetary quantities in the coherence report
are attoether ints or Fractions, never floats.
"""

import csv
import logging
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .model import EthAmount, eth_round, parse_eth

log = logging.getLogger(__name__)

NFTE_MAGIC = b"NFTE"
NFTE_VERSION = 1

PERCENTILE_LEVELS = (50, 80, 90, 95, 99)


class FormatError(ValueError):
    """Raised when an embedding file does not follow the container format."""


@dataclass
class EmbeddingSet:
    ids: list[str]
    vectors: np.ndarray  # (count, dim) float32, row i belongs to ids[i]


@dataclass
class SimIndex:
    ids: list[str]  # ascending; row order of `matrix` matches
    matrix: np.ndarray  # float64, rows L2-normalized
    row_of: dict[str, int]


def save_embeddings(path, ids: Sequence[str], vectors: np.ndarray) -> None:
    arr = np.asarray(vectors, dtype=np.float32)
    if arr.ndim != 2 or arr.shape[0] != len(ids):
        raise ValueError("vectors must be a (len(ids), dim) array")
    count, dim = arr.shape
    if dim < 1:
        raise ValueError("dim must be >= 1")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIQQ", NFTE_MAGIC, NFTE_VERSION, count, dim))
        for token, row in zip(ids, arr):
            raw = token.encode("utf-8")
            if not 1 <= len(raw) <= 0xFFFF:
                raise ValueError(f"id length out of range: {token!r}")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(row.astype("<f4").tobytes())


def _take(buf: bytes, offset: int, size: int) -> tuple[bytes, int]:
    if offset + size > len(buf):
        raise FormatError("truncated file")
    return buf[offset : offset + size], offset + size


def load_embeddings(path) -> EmbeddingSet:
    with open(path, "rb") as fh:
        buf = fh.read()
    chunk, offset = _take(buf, 0, 24)
    magic, version, count, dim = struct.unpack("<4sIQQ", chunk)
    if magic != NFTE_MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != NFTE_VERSION:
        raise FormatError(f"unsupported version {version}")
    if dim < 1:
        raise FormatError("dim must be >= 1")

    ids: list[str] = []
    rows = np.empty((count, dim), dtype=np.float32)
    seen: set[str] = set()
    for i in range(count):
        chunk, offset = _take(buf, offset, 2)
        (id_len,) = struct.unpack("<H", chunk)
        if id_len == 0:
            raise FormatError(f"record {i}: empty id")
        chunk, offset = _take(buf, offset, id_len)
        try:
            token = chunk.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"record {i}: id is not UTF-8") from exc
        if token in seen:
            raise FormatError(f"record {i}: duplicate id {token!r}")
        seen.add(token)
        chunk, offset = _take(buf, offset, 4 * dim)
        vec = np.frombuffer(chunk, dtype="<f4")
        if not np.isfinite(vec).all():
            raise FormatError(f"record {i}: non-finite value in {token!r}")
        ids.append(token)
        rows[i] = vec
    if offset != len(buf):
        raise FormatError(f"{len(buf) - offset} trailing bytes")
    return EmbeddingSet(ids=ids, vectors=rows)


def build_index(embeddings: EmbeddingSet) -> SimIndex:
    if len(embeddings.ids) != len(set(embeddings.ids)):
        raise ValueError("duplicate ids")
    order = sorted(range(len(embeddings.ids)), key=lambda i: embeddings.ids[i])
    ids = [embeddings.ids[i] for i in order]
    matrix = embeddings.vectors[order].astype(np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    for i, norm in enumerate(norms):
        if norm == 0.0:
            raise ValueError(f"zero vector for id {ids[i]!r}")
    matrix /= norms[:, None]
    return SimIndex(ids=ids, matrix=matrix, row_of={t: i for i, t in enumerate(ids)})


def _as_unit_vector(index: SimIndex, query) -> tuple[np.ndarray, int | None]:
    """Resolve a query (id or raw vector) to a unit vector and self row."""
    if isinstance(query, str):
        if query not in index.row_of:
            raise ValueError(f"unknown id {query!r}")
        row = index.row_of[query]
        return index.matrix[row], row
    vec = np.asarray(query, dtype=np.float64)
    if vec.shape != (index.matrix.shape[1],):
        raise ValueError(
            f"query has shape {vec.shape}, index dim is {index.matrix.shape[1]}"
        )
    if not np.isfinite(vec).all():
        raise ValueError("query vector has non-finite values")
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ValueError("query vector has zero norm")
    return vec / norm, None


def query_knn(index: SimIndex, query, k: int) -> list[tuple[str, float]]:
    """k nearest by cosine, descending; ties broken by id ascending.

    `query` may be an indexed id (excluded from its own result) or a raw
    vector of the index dimension. Asking for more neighbors than exist
    returns everything and logs a warning.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    unit, self_row = _as_unit_vector(index, query)
    scores = index.matrix @ unit
    # rows are in id order already, so a stable sort on score alone
    # yields the id-ascending tie break for free
    ranked = np.argsort(-scores, kind="stable")
    out: list[tuple[str, float]] = []
    for row in ranked:
        if row == self_row:
            continue
        out.append((index.ids[row], float(scores[row])))
        if len(out) == k:
            return out
    log.warning("asked for k=%d neighbors, only %d available", k, len(out))
    return out


@dataclass
class CoherenceItem:
    nft: str
    price: EthAmount
    neighbor_mean: Fraction  # attoether
    gap: Fraction  # attoether, absolute
    within: bool


@dataclass
class PriceCoherence:
    k: int
    threshold: EthAmount
    evaluated: int
    skipped: int
    fraction_within: Fraction
    baseline_fraction_within: Fraction
    mean_gap: Fraction  # attoether
    gap_percentiles: dict[int, Fraction]  # attoether, keys PERCENTILE_LEVELS
    per_item: list[CoherenceItem]


def _nearest_rank(sorted_values: list[Fraction], level: int) -> Fraction:
    n = len(sorted_values)
    rank = -(-level * n // 100)  # ceil(level/100 * n)
    return sorted_values[max(rank, 1) - 1]


def neighbor_price_report(
    index: SimIndex,
    prices: dict[str, EthAmount],
    k: int,
    threshold: EthAmount,
) -> PriceCoherence:
    """Gap between each item's price and its priced neighbors' mean price.

    Queries are the indexed ids that have a price. For each, the k
    nearest neighbors are looked up and the mean is taken over those
    that also have prices; items whose top-k contains no priced neighbor
    are skipped (and so excluded from the baseline as well, to keep the
    two fractions comparable). The baseline gap replaces the neighbor
    mean with the mean price of every other priced item.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    queries = [t for t in index.ids if t in prices]
    items: list[CoherenceItem] = []
    baseline_within = 0
    skipped = 0
    total_priced = sum(prices[t] for t in queries)
    for token in queries:
        neighbor_prices = [
            prices[nid] for nid, _ in query_knn(index, token, k) if nid in prices
        ]
        if not neighbor_prices:
            skipped += 1
            continue
        mean = Fraction(sum(neighbor_prices), len(neighbor_prices))
        gap = abs(prices[token] - mean)
        items.append(
            CoherenceItem(
                nft=token,
                price=prices[token],
                neighbor_mean=mean,
                gap=gap,
                within=gap <= threshold,
            )
        )
        if len(queries) > 1:
            others = Fraction(total_priced - prices[token], len(queries) - 1)
            if abs(prices[token] - others) <= threshold:
                baseline_within += 1

    evaluated = len(items)
    gaps = sorted(item.gap for item in items)
    if evaluated:
        fraction_within = Fraction(sum(1 for i in items if i.within), evaluated)
        baseline_fraction = Fraction(baseline_within, evaluated)
        mean_gap = sum(gaps, Fraction(0)) / evaluated
        percentiles = {lvl: _nearest_rank(gaps, lvl) for lvl in PERCENTILE_LEVELS}
    else:
        fraction_within = Fraction(0)
        baseline_fraction = Fraction(0)
        mean_gap = Fraction(0)
        percentiles = {lvl: Fraction(0) for lvl in PERCENTILE_LEVELS}
    return PriceCoherence(
        k=k,
        threshold=threshold,
        evaluated=evaluated,
        skipped=skipped,
        fraction_within=fraction_within,
        baseline_fraction_within=baseline_fraction,
        mean_gap=mean_gap,
        gap_percentiles=percentiles,
        per_item=items,
    )


def estimate_price(
    index: SimIndex, token: str, prices: dict[str, EthAmount], k: int
) -> EthAmount | None:
    """Mean price of the k nearest priced neighbors, rounded to attoether.

    None when no neighbor in the top k has a price.
    """
    neighbor_prices = [
        prices[nid] for nid, _ in query_knn(index, token, k) if nid in prices
    ]
    if not neighbor_prices:
        return None
    return eth_round(Fraction(sum(neighbor_prices), len(neighbor_prices)))


def load_prices(lines: Iterable[str]) -> dict[str, EthAmount]:
    """Read a token_id,price_eth CSV (header required) into attoether."""
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty price file") from None
    if header != ["token_id", "price_eth"]:
        raise ValueError(f"bad header {header!r}")
    prices: dict[str, EthAmount] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ValueError(f"line {lineno}: expected 2 columns, got {len(row)}")
        token, raw = row
        if not token:
            raise ValueError(f"line {lineno}: empty token id")
        if token in prices:
            raise ValueError(f"line {lineno}: duplicate token {token!r}")
        prices[token] = parse_eth(raw)
    return prices
