"""Command line front end.

Exit codes mirror the analysis tool: 0 success, 1 bad input data (broken
manifest, or no image could be embedded), 2 usage or environment
problems (unreadable manifest, missing or unloadable weights).
"""

import argparse
import sys
from pathlib import Path

from .extract import (
    TOOL_NAME,
    TOOL_VERSION,
    ExtractJob,
    ManifestError,
    extract,
    read_manifest,
)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="frozen ResNet101 image features into an NFTE file",
    )
    ap.add_argument("--version", action="version",
                    version=f"{TOOL_NAME} {TOOL_VERSION}")
    ap.add_argument("manifest", type=Path,
                    help='CSV "token_id,path"; relative paths resolve '
                         "against the manifest directory")
    ap.add_argument("--out", type=Path, required=True,
                    help="NFTE output path")
    ap.add_argument("--weights", default="pretrained",
                    help='"pretrained", "random", or a state-dict file')
    ap.add_argument("--seed", type=int, default=0,
                    help="initialization seed for --weights random")
    ap.add_argument("--batch-size", type=int, default=8)
    ap.add_argument("--sidecar", type=Path,
                    help="metadata and error report path (default: OUT.json)")
    args = ap.parse_args(argv)

    try:
        with open(args.manifest, encoding="utf-8") as fh:
            entries = read_manifest(fh, base=args.manifest.parent)
    except OSError as exc:
        print(f"error: cannot read {args.manifest}: {exc.strerror}",
              file=sys.stderr)
        return 2
    except ManifestError as exc:
        print(f"bad manifest: {exc}", file=sys.stderr)
        return 1

    job = ExtractJob(entries=entries, out=args.out, weights=args.weights,
                     seed=args.seed, batch_size=args.batch_size,
                     sidecar=args.sidecar)
    try:
        result = extract(job)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for skip in result.skipped:
        print(f"skipped {skip.token_id} ({skip.path}): {skip.reason}",
              file=sys.stderr)
    print(f"wrote {result.written} embeddings to {result.out}")
    print(f"sidecar at {result.sidecar}")
    return 0 if result.written else 1


if __name__ == "__main__":
    sys.exit(main())
