"""Run the whole toolchain on one log: validate, stats, graph, smallworld,
then a similarity pass over synthetic embeddings priced from settle data.

By default a fresh synthetic log is generated; pass --events to analyze an
existing one instead.  Embeddings here are seeded random vectors, one per
NFT that ever settled, so the similarity report is a smoke test of the
container and index wiring rather than a claim about visual similarity.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from nftf import analytics, cli, machine, parsing, simindex
from nftf.model import format_eth

EMBED_DIM = 64


def synth_log(out_dir: Path, seed: int) -> Path:
    path = out_dir / "events.jsonl"
    rc = cli.main(["synth", "--out", str(path),
                   "--truth", str(out_dir / "truth.json"),
                   "--seed", str(seed)])
    if rc != 0:
        raise SystemExit(rc)
    return path


def write_embeddings(events_path: Path, out_dir: Path, seed: int) -> tuple[Path, Path]:
    with open(events_path, encoding="utf-8") as fh:
        events, _ = parsing.parse_event_log(fh.readlines())
    ledger = machine.build_ledger(events, strict=False).ledger
    prices = analytics.first_settle_prices(ledger)
    if not prices:
        raise SystemExit("no settled sales in the log; nothing to embed")

    ids = sorted(prices)
    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal((len(ids), EMBED_DIM)).astype(np.float32)
    emb = out_dir / "embeddings.nfte"
    simindex.save_embeddings(emb, ids, vectors)

    csv_path = out_dir / "prices.csv"
    lines = ["token_id,price_eth"]
    lines += [f"{nft},{format_eth(prices[nft])}" for nft in ids]
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return emb, csv_path


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path("runs/demo"))
    ap.add_argument("--events", type=Path,
                    help="analyze this log instead of generating one")
    ap.add_argument("--seed", type=int, default=cli.DEFAULT_SEED)
    ap.add_argument("--replicates", type=int, default=200)
    args = ap.parse_args()

    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    events_path = args.events or synth_log(out, args.seed)

    steps = [
        ["validate", str(events_path)],
        ["stats", str(events_path), "--out-dir", str(out / "stats")],
        ["graph", str(events_path), "--out-dir", str(out / "graph"),
         "--progression"],
        ["smallworld", str(events_path), "--out-dir", str(out / "smallworld"),
         "--replicates", str(args.replicates), "--seed", str(args.seed)],
    ]
    for step in steps:
        print(f"== nftf {' '.join(step)}")
        rc = cli.main(step)
        if rc != 0:
            return rc

    emb, prices_csv = write_embeddings(events_path, out, args.seed)
    step = ["simindex", str(emb), "--out-dir", str(out / "simindex"),
            "--prices", str(prices_csv), "--k", "5"]
    print(f"== nftf {' '.join(step)}")
    rc = cli.main(step)
    if rc != 0:
        return rc
    print(f"all reports under {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
