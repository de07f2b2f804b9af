"""Event-log forensics for a reserve-auction NFT marketplace.

Parse JSONL event logs, replay them through the auction state machine,
and run the behavioral, graph, and similarity analyses on the result.
All money is integer attoether, all ratios are exact Fractions, and
every seeded computation is reproducible bit-for-bit.
"""

from .analytics import (
    DEFAULT_GAP_EDGES,
    FunnelStats,
    Granularity,
    activity_series,
    auction_funnel_stats,
    detect_invite_purchases,
    first_settle_prices,
    resale_price_changes,
    transferred_sold_breakdown,
    unlist_relist_gaps,
)
from .graph import (
    TransferGraph,
    apl_progression,
    build_transfer_graph,
    chronological_order,
    er_null_model,
    graph_metrics,
    largest_component,
    small_world_report,
)
from .machine import (
    BuildResult,
    ValidationError,
    build_ledger,
    listing_epochs,
    reconstruct_auctions,
    validate_history,
)
from .model import (
    ATTO_PER_ETH,
    Event,
    Kind,
    Ledger,
    eth_round,
    format_eth,
    format_timestamp,
    parse_eth,
    parse_timestamp,
)
from .parsing import ParseError, parse_event_log, serialize_event, serialize_event_log
from .simindex import (
    EmbeddingSet,
    SimIndex,
    build_index,
    estimate_price,
    load_embeddings,
    load_prices,
    neighbor_price_report,
    query_knn,
    save_embeddings,
)
from .synth import GroundTruth, SynthConfig, generate
from .report import TOOL_VERSION as __version__

__all__ = [
    "ATTO_PER_ETH",
    "BuildResult",
    "DEFAULT_GAP_EDGES",
    "EmbeddingSet",
    "Event",
    "FunnelStats",
    "Granularity",
    "GroundTruth",
    "Kind",
    "Ledger",
    "ParseError",
    "SimIndex",
    "SynthConfig",
    "TransferGraph",
    "ValidationError",
    "activity_series",
    "apl_progression",
    "auction_funnel_stats",
    "build_index",
    "build_ledger",
    "build_transfer_graph",
    "chronological_order",
    "detect_invite_purchases",
    "er_null_model",
    "estimate_price",
    "eth_round",
    "first_settle_prices",
    "format_eth",
    "format_timestamp",
    "generate",
    "graph_metrics",
    "largest_component",
    "listing_epochs",
    "load_embeddings",
    "load_prices",
    "neighbor_price_report",
    "parse_eth",
    "parse_event_log",
    "parse_timestamp",
    "query_knn",
    "reconstruct_auctions",
    "resale_price_changes",
    "save_embeddings",
    "serialize_event",
    "serialize_event_log",
    "small_world_report",
    "transferred_sold_breakdown",
    "unlist_relist_gaps",
    "validate_history",
    "__version__",
]
