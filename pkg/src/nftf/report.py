"""Deterministic report serialization.

Reports are JSON (sorted keys, two-space indent, trailing newline) with
CSV companions for the tabular parts. Nothing here embeds wall-clock
time, hostnames, or iteration order of a set, so re-running a command
on the same inputs yields byte-identical files. Every report carries an
envelope naming the tool version, the sha256 of each input, and the
effective configuration including seeds.

Exact rationals are serialized as "p/q" strings (or a bare integer
string when the denominator is 1); floats appear only where the value
is genuinely a float, e.g. null-model summaries.
"""

import csv
import hashlib
import io
import json
from fractions import Fraction
from pathlib import Path

from .analytics import (
    FunnelStats,
    GapHistogram,
    InvitePurchaseScan,
    ResaleRecord,
    TransferSaleBreakdown,
)
from .graph import GraphMetrics, SmallWorldReport
from .model import format_eth, format_timestamp
from .simindex import PriceCoherence

TOOL_NAME = "nftf"
TOOL_VERSION = "0.1.0"

#: metric name -> GraphMetrics attribute, in presentation order
METRIC_ROWS = (
    ("Nodes", "nodes"),
    ("Edges", "edges"),
    ("Connected Components", "connected_components"),
    ("Average Degree", "average_degree"),
    ("Maximum Degree", "max_degree"),
    ("Diameter", "diameter"),
    ("Average Path Length", "average_path_length"),
    ("Density", "density"),
    ("Clustering Coefficient", "clustering_coefficient"),
    ("Degree Assortativity", "degree_assortativity"),
    ("Transitivity", "transitivity"),
)


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def envelope(inputs: dict, config: dict) -> dict:
    """Provenance header: tool, version, input digests, effective config."""
    return {
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "inputs": {
            name: {"path": str(path), "sha256": sha256_file(path)}
            for name, path in inputs.items()
        },
        "config": jsonable(config),
    }


def jsonable(value):
    """Map report values into JSON types; Fractions become "p/q" strings."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    raise TypeError(f"cannot serialize {type(value).__name__}")


def write_json(path, obj) -> None:
    text = json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def render_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_csv(path, header: list[str], rows: list[list]) -> None:
    Path(path).write_text(render_csv(header, rows), encoding="utf-8")


def _approx(value) -> str:
    """Float rendering for CSV companions; empty when absent."""
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return repr(float(value))
    return repr(value) if isinstance(value, float) else str(value)


def metrics_dict(metrics: GraphMetrics) -> dict:
    """Graph metrics keyed by their presentation row names."""
    return {name: getattr(metrics, attr) for name, attr in METRIC_ROWS}


def metrics_csv_rows(metrics: GraphMetrics) -> list[list]:
    rows = []
    for name, attr in METRIC_ROWS:
        value = getattr(metrics, attr)
        exact = "" if value is None else str(value)
        rows.append([name, exact, _approx(value)])
    return rows


def funnel_dict(funnel: FunnelStats) -> dict:
    return {
        "first_listed": funnel.first_listed,
        "first_sold": funnel.first_sold,
        "relisted_after_sale": funnel.relisted_after_sale,
        "second_sold": funnel.second_sold,
        "first_success_rate": funnel.first_success_rate,
        "relist_rate": funnel.relist_rate,
        "second_success_rate": funnel.second_success_rate,
    }


def resales_csv_rows(records: list[ResaleRecord]) -> list[list]:
    rows = []
    for r in records:
        rows.append(
            [
                r.nft,
                format_eth(r.first_settle),
                format_eth(r.second_list),
                str(r.pct_change),
                _approx(r.pct_change),
                "yes" if r.second_sold else "no",
                format_eth(r.second_settle) if r.second_settle is not None else "",
            ]
        )
    return rows


RESALE_HEADER = [
    "nft",
    "first_settle_eth",
    "second_list_eth",
    "pct_change_exact",
    "pct_change",
    "second_sold",
    "second_settle_eth",
]


def gaps_dict(hist: GapHistogram) -> dict:
    edges = list(hist.bucket_edges)
    labels = []
    lo = 0
    for edge in edges:
        labels.append(f"[{lo},{edge})")
        lo = edge
    labels.append(f"[{lo},inf)")
    return {
        "bucket_edges_seconds": edges,
        "buckets": [
            {"range_seconds": label, "count": count, "fraction": frac}
            for label, count, frac in zip(labels, hist.counts, hist.fractions)
        ],
    }


def collusion_dict(scan: InvitePurchaseScan) -> dict:
    return {
        "empty": scan.empty,
        "count": len(scan.candidates),
        "mean_settle_price_eth": format_eth(scan.mean_price),
        "candidates": [
            {
                "seller": c.seller,
                "buyer": c.buyer,
                "nft": c.nft,
                "settle_price_eth": format_eth(c.settle_price),
                "settle_ts": format_timestamp(c.settle_ts),
                "invite_ts": format_timestamp(c.invite_ts),
            }
            for c in scan.candidates
        ],
    }


def breakdown_dict(b: TransferSaleBreakdown) -> dict:
    return {
        "transferred_total": b.transferred_total,
        "transferred_ever_sold": b.transferred_ever_sold,
        "fraction": b.fraction,
    }


def coherence_dict(report: PriceCoherence) -> dict:
    return {
        "k": report.k,
        "threshold_eth": format_eth(report.threshold),
        "evaluated": report.evaluated,
        "skipped": report.skipped,
        "fraction_within": report.fraction_within,
        "baseline_fraction_within": report.baseline_fraction_within,
        "mean_gap_eth": _eth_fraction(report.mean_gap),
        "gap_percentiles_eth": {
            str(level): _eth_fraction(value)
            for level, value in report.gap_percentiles.items()
        },
    }


def _eth_fraction(atto: Fraction) -> str:
    """Exact ETH rendering of an attoether Fraction as p/q."""
    return str(Fraction(atto, 10**18))


COHERENCE_HEADER = ["nft", "price_eth", "neighbor_mean_eth", "gap_eth", "within"]


def coherence_csv_rows(report: PriceCoherence) -> list[list]:
    return [
        [
            item.nft,
            format_eth(item.price),
            _eth_fraction(item.neighbor_mean),
            _eth_fraction(item.gap),
            "yes" if item.within else "no",
        ]
        for item in report.per_item
    ]


def smallworld_dict(report: SmallWorldReport) -> dict:
    ratio = report.clustering_ratio
    return {
        "observed": metrics_dict(report.observed),
        "null": {
            "replicates": report.null.replicates,
            "seed": report.null.seed,
            "mean_clustering": report.null.mean_clustering,
            "std_clustering": report.null.std_clustering,
        },
        # inf (null clustering of 0) is not valid JSON, hence the string
        "clustering_ratio": ratio if ratio != float("inf") else "inf",
        "ratio_threshold": report.ratio_threshold,
        "verdict": report.verdict,
    }
