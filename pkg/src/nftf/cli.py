"""Command line front end.

Subcommands: validate, stats, graph, smallworld, simindex, synth.
Exit codes: 0 clean, 1 findings or bad input data, 2 usage/environment
problems. Reports are deterministic; NFTF_THREADS caps the worker pool
used for independent analyses (it never affects report bytes).
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import analytics, machine, parsing, report, simindex, synth
from . import graph as graphmod
from .analytics import DEFAULT_GAP_EDGES, Granularity
from .model import format_eth, format_timestamp, parse_eth

DEFAULT_SEED = 7
DEFAULT_REPLICATES = 1000
DEFAULT_RATIO_THRESHOLD = 5.0


class UsageError(Exception):
    pass


def _threads() -> int:
    raw = os.environ.get("NFTF_THREADS", "")
    if not raw:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"NFTF_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise UsageError("NFTF_THREADS must be >= 1")
    return n


def _read_lines(path: Path) -> list[str]:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load(path: Path):
    events, parse_errors = parsing.parse_event_log(_read_lines(path))
    return events, parse_errors


def _build(events):
    return machine.build_ledger(events, strict=False)


def _outdir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_validate(args) -> int:
    events, parse_errors = _load(args.input)
    result = machine.build_ledger(events, strict=args.strict)
    print(f"events parsed: {len(events)}")
    print(f"parse errors:  {len(parse_errors)}")
    for err in parse_errors[:20]:
        print(f"  line {err.line}: {err.cause}")
    if len(parse_errors) > 20:
        print(f"  ... and {len(parse_errors) - 20} more")
    n_nfts = 0 if result.ledger is None else len(result.ledger.histories)
    print(f"valid NFTs:    {n_nfts}")
    print(f"invalid NFTs:  {len(result.errors)}")
    for nft, err in sorted(result.errors.items())[:20]:
        print(f"  {nft}: {err.rule} at {err.tx}")
    if args.report:
        body = {
            "envelope": report.envelope({"events": args.input}, {"strict": args.strict}),
            "counts": {
                "events": len(events),
                "parse_errors": len(parse_errors),
                "valid_nfts": n_nfts,
                "invalid_nfts": len(result.errors),
            },
            "parse_errors": [
                {"line": e.line, "cause": e.cause} for e in parse_errors
            ],
            "validation_errors": {
                nft: {"rule": err.rule, "tx": err.tx}
                for nft, err in sorted(result.errors.items())
            },
        }
        report.write_json(args.report, body)
    return 1 if parse_errors or result.errors else 0


def cmd_stats(args) -> int:
    events, parse_errors = _load(args.input)
    result = _build(events)
    ledger = result.ledger
    if not ledger.histories:
        print("no valid NFT histories; nothing to analyze", file=sys.stderr)
        return 1
    edges = tuple(args.gap_edges)
    gap_cap = args.max_invite_gap

    jobs = {
        "activity_monthly": lambda: analytics.activity_series(ledger, Granularity.MONTHLY),
        "activity_hourly": lambda: analytics.activity_series(ledger, Granularity.HOUR_OF_DAY),
        "funnel": lambda: analytics.auction_funnel_stats(ledger),
        "resales": lambda: analytics.resale_price_changes(ledger),
        "gaps": lambda: analytics.unlist_relist_gaps(ledger, edges),
        "collusion": lambda: analytics.detect_invite_purchases(ledger, gap_cap),
        "breakdown": lambda: analytics.transferred_sold_breakdown(ledger),
    }
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        futures = {name: pool.submit(fn) for name, fn in jobs.items()}
        r = {name: future.result() for name, future in futures.items()}

    out = _outdir(args)
    body = {
        "envelope": report.envelope(
            {"events": args.input},
            {
                "gap_edges": list(edges),
                "max_invite_gap": gap_cap,
                "parse_errors": len(parse_errors),
                "invalid_nfts": len(result.errors),
            },
        ),
        "funnel": report.funnel_dict(r["funnel"]),
        "gaps": report.gaps_dict(r["gaps"]),
        "collusion": report.collusion_dict(r["collusion"]),
        "transferred_sold": report.breakdown_dict(r["breakdown"]),
        "resale_count": len(r["resales"]),
        "activity": {
            "monthly": {
                "mints": r["activity_monthly"].mint_counts,
                "bids": r["activity_monthly"].bid_counts,
            },
            "hour_of_day": {
                "mints": r["activity_hourly"].mint_counts,
                "bids": r["activity_hourly"].bid_counts,
            },
        },
    }
    report.write_json(out / "stats.json", body)
    report.write_csv(out / "resales.csv", report.RESALE_HEADER, report.resales_csv_rows(r["resales"]))

    gaps = r["gaps"]
    gap_rows = [
        [b["range_seconds"], b["count"], str(b["fraction"])]
        for b in report.gaps_dict(gaps)["buckets"]
    ]
    report.write_csv(out / "gaps.csv", ["range_seconds", "count", "fraction"], gap_rows)

    col_rows = [
        [c.seller, c.buyer, c.nft, format_eth(c.settle_price),
         format_timestamp(c.settle_ts), format_timestamp(c.invite_ts)]
        for c in r["collusion"].candidates
    ]
    report.write_csv(
        out / "collusion.csv",
        ["seller", "buyer", "nft", "settle_price_eth", "settle_ts", "invite_ts"],
        col_rows,
    )

    for name, series in (("monthly", r["activity_monthly"]), ("hourly", r["activity_hourly"])):
        keys = sorted(set(series.mint_counts) | set(series.bid_counts))
        rows = [
            [k, series.mint_counts.get(k, 0), series.bid_counts.get(k, 0)]
            for k in keys
        ]
        report.write_csv(out / f"activity_{name}.csv", ["bucket", "mints", "bids"], rows)

    funnel = r["funnel"]
    print(f"first listed {funnel.first_listed}, first sold {funnel.first_sold}, "
          f"relisted {funnel.relisted_after_sale}, second sold {funnel.second_sold}")
    print(f"collusion candidates: {len(r['collusion'].candidates)}")
    print(f"reports written to {out}")
    return 0


def cmd_graph(args) -> int:
    events, parse_errors = _load(args.input)
    result = _build(events)
    g = graphmod.build_transfer_graph(result.ledger)
    metrics = graphmod.graph_metrics(g)
    out = _outdir(args)

    body = {
        "envelope": report.envelope(
            {"events": args.input},
            {
                "parse_errors": len(parse_errors),
                "invalid_nfts": len(result.errors),
                "progression": args.progression,
            },
        ),
        "full": report.metrics_dict(metrics),
    }
    csv_header = ["metric", "exact", "approx"]
    report.write_csv(out / "metrics_full.csv", csv_header, report.metrics_csv_rows(metrics))
    if g.nodes:
        lcc = graphmod.largest_component(g)
        lcc_metrics = graphmod.graph_metrics(lcc)
        body["largest_component"] = report.metrics_dict(lcc_metrics)
        report.write_csv(out / "metrics_lcc.csv", csv_header, report.metrics_csv_rows(lcc_metrics))
    else:
        body["largest_component"] = None

    (out / "edges.txt").write_text(
        "".join(line + "\n" for line in graphmod.edgelist_lines(g)), encoding="utf-8"
    )
    if args.progression:
        order = graphmod.chronological_order(result.ledger)
        points = graphmod.apl_progression(g, order)
        rows = [[k, str(apl), repr(float(apl))] for k, apl in points]
        report.write_csv(out / "progression.csv", ["nodes", "apl_exact", "apl"], rows)

    report.write_json(out / "graph.json", body)
    print(f"graph: {metrics.nodes} nodes, {metrics.edges} edges, "
          f"{metrics.connected_components} components")
    print(f"reports written to {out}")
    return 0


def cmd_smallworld(args) -> int:
    events, parse_errors = _load(args.input)
    result = _build(events)
    g = graphmod.build_transfer_graph(result.ledger)
    if args.component == "largest":
        g = graphmod.largest_component(g) if g.nodes else g
    if not g.edges:
        print("graph has no transfer edges; nothing to test", file=sys.stderr)
        return 1
    sw = graphmod.small_world_report(
        g, replicates=args.replicates, seed=args.seed,
        ratio_threshold=args.ratio_threshold,
    )
    out = _outdir(args)
    body = {
        "envelope": report.envelope(
            {"events": args.input},
            {
                "component": args.component,
                "replicates": args.replicates,
                "seed": args.seed,
                "ratio_threshold": args.ratio_threshold,
                "parse_errors": len(parse_errors),
                "invalid_nfts": len(result.errors),
            },
        ),
        "smallworld": report.smallworld_dict(sw),
    }
    report.write_json(out / "smallworld.json", body)
    ratio = sw.clustering_ratio
    shown = f"{ratio:.3f}" if ratio != float("inf") else "inf"
    print(f"observed clustering {float(sw.observed.clustering_coefficient):.6f}, "
          f"null mean {sw.null.mean_clustering:.6f}, ratio {shown}")
    print(f"small-world verdict: {'yes' if sw.verdict else 'no'}")
    print(f"report written to {out}")
    return 0


def cmd_simindex(args) -> int:
    try:
        embeddings = simindex.load_embeddings(args.embeddings)
    except OSError as exc:
        raise UsageError(f"cannot read {args.embeddings}: {exc.strerror}") from None
    except simindex.FormatError as exc:
        print(f"bad embedding file: {exc}", file=sys.stderr)
        return 1
    try:
        index = simindex.build_index(embeddings)
    except ValueError as exc:
        print(f"cannot index embeddings: {exc}", file=sys.stderr)
        return 1

    out = _outdir(args)
    inputs = {"embeddings": args.embeddings}
    config = {"k": args.k, "threshold_eth": format_eth(args.threshold)}
    body = {
        "count": len(index.ids),
        "dim": index.matrix.shape[1],
    }

    if args.query:
        neighbors = {}
        for token in args.query:
            try:
                hits = simindex.query_knn(index, token, args.k)
            except ValueError as exc:
                print(str(exc), file=sys.stderr)
                return 1
            neighbors[token] = [{"id": nid, "cosine": c} for nid, c in hits]
        body["neighbors"] = neighbors

    if args.prices:
        try:
            prices = simindex.load_prices(_read_lines(args.prices))
        except ValueError as exc:
            print(f"bad price file: {exc}", file=sys.stderr)
            return 1
        inputs["prices"] = args.prices
        coherence = simindex.neighbor_price_report(
            index, prices, k=args.k, threshold=args.threshold
        )
        body["coherence"] = report.coherence_dict(coherence)
        report.write_csv(
            out / "coherence.csv",
            report.COHERENCE_HEADER,
            report.coherence_csv_rows(coherence),
        )
        if args.estimate:
            estimates = {}
            for token in args.estimate:
                try:
                    atto = simindex.estimate_price(index, token, prices, args.k)
                except ValueError as exc:
                    print(str(exc), file=sys.stderr)
                    return 1
                estimates[token] = None if atto is None else format_eth(atto)
            body["estimates"] = estimates
        print(f"coherence: {coherence.evaluated} evaluated, "
              f"fraction within {coherence.fraction_within}")
    elif args.estimate:
        raise UsageError("--estimate requires --prices")

    body["envelope"] = report.envelope(inputs, config)
    report.write_json(out / "simindex.json", body)
    print(f"report written to {out}")
    return 0


def cmd_synth(args) -> int:
    sizes = ()
    if args.clusters:
        try:
            sizes = tuple(int(s) for s in args.clusters.split(","))
        except ValueError:
            raise UsageError(f"bad cluster sizes {args.clusters!r}") from None
    config = synth.SynthConfig(
        seed=args.seed,
        n_accounts=args.accounts,
        n_nfts=args.nfts,
        days=args.days,
        planted_collusions=args.collusions,
        planted_quick_relists=args.quick_relists,
        cluster_sizes=sizes,
        cluster_transfers=args.cluster_transfers,
        noise_invites=args.invites,
    )
    try:
        events, truth = synth.generate(config)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(parsing.serialize_event_log(events), encoding="utf-8")
    if args.truth:
        body = {
            "config": {
                "seed": config.seed,
                "n_accounts": config.n_accounts,
                "n_nfts": config.n_nfts,
                "days": config.days,
                "planted_collusions": config.planted_collusions,
                "planted_quick_relists": config.planted_quick_relists,
                "cluster_sizes": list(config.cluster_sizes),
                "cluster_transfers": config.cluster_transfers,
                "noise_invites": config.noise_invites,
            },
            "truth": synth.truth_as_dict(truth),
        }
        report.write_json(args.truth, body)
    print(f"wrote {len(events)} events to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nftf", description="marketplace event log forensics"
    )
    p.add_argument(
        "--version", action="version",
        version=f"{report.TOOL_NAME} {report.TOOL_VERSION}",
    )
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="parse and replay an event log")
    v.add_argument("input", type=Path)
    v.add_argument("--strict", action="store_true",
                   help="refuse the whole log if any NFT is invalid")
    v.add_argument("--report", type=Path, help="write a JSON error report")
    v.set_defaults(fn=cmd_validate)

    s = sub.add_parser("stats", help="behavioral statistics and detectors")
    s.add_argument("input", type=Path)
    s.add_argument("--out-dir", type=Path, required=True)
    s.add_argument("--gap-edges", type=lambda t: [int(x) for x in t.split(",")],
                   default=list(DEFAULT_GAP_EDGES),
                   help="comma-separated bucket edges in seconds")
    s.add_argument("--max-invite-gap", type=int, default=None,
                   help="cap invite-after-purchase lag in seconds (default unbounded)")
    s.set_defaults(fn=cmd_stats)

    g = sub.add_parser("graph", help="transfer graph metrics")
    g.add_argument("input", type=Path)
    g.add_argument("--out-dir", type=Path, required=True)
    g.add_argument("--progression", action="store_true",
                   help="also write the APL-vs-size progression")
    g.set_defaults(fn=cmd_graph)

    w = sub.add_parser("smallworld", help="clustering vs a seeded random null")
    w.add_argument("input", type=Path)
    w.add_argument("--out-dir", type=Path, required=True)
    w.add_argument("--component", choices=["full", "largest"], default="full")
    w.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES)
    w.add_argument("--seed", type=int, default=DEFAULT_SEED)
    w.add_argument("--ratio-threshold", type=float, default=DEFAULT_RATIO_THRESHOLD)
    w.set_defaults(fn=cmd_smallworld)

    i = sub.add_parser("simindex", help="cosine kNN and price coherence")
    i.add_argument("embeddings", type=Path)
    i.add_argument("--out-dir", type=Path, required=True)
    i.add_argument("--prices", type=Path, help="token_id,price_eth CSV")
    i.add_argument("--k", type=int, default=5)
    i.add_argument("--threshold", type=parse_eth, default=parse_eth("1"),
                   metavar="ETH", help="coherence gap threshold (default 1 ETH)")
    i.add_argument("--query", action="append", metavar="TOKEN",
                   help="report neighbors of this token (repeatable)")
    i.add_argument("--estimate", action="append", metavar="TOKEN",
                   help="estimate a price from neighbors (repeatable)")
    i.set_defaults(fn=cmd_simindex)

    y = sub.add_parser("synth", help="generate a synthetic log with known truth")
    y.add_argument("--out", type=Path, required=True)
    y.add_argument("--truth", type=Path, help="write planted ground truth JSON")
    y.add_argument("--seed", type=int, default=DEFAULT_SEED)
    y.add_argument("--accounts", type=int, default=40)
    y.add_argument("--nfts", type=int, default=120)
    y.add_argument("--days", type=int, default=180)
    y.add_argument("--collusions", type=int, default=3)
    y.add_argument("--quick-relists", type=int, default=4)
    y.add_argument("--clusters", default="8,8",
                   help='comma-separated cluster sizes, e.g. "8,8" ("" for none)')
    y.add_argument("--cluster-transfers", type=int, default=12)
    y.add_argument("--invites", type=int, default=15)
    y.set_defaults(fn=cmd_synth)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
