"""Regenerate the golden end-to-end fixture and its report digests.

Writes tests/fixtures/golden_events.jsonl plus the planted ground truth,
then replays the stats, graph, and smallworld reports in a scratch
directory and records the sha256 of every output file.  The acceptance
suite re-runs the same commands and compares against these digests, so
any nondeterminism or platform drift shows up as a digest mismatch.

All commands run with the fixture's bare file name as the input argument
(report envelopes embed the path as given, and absolute paths would tie
the bytes to one checkout).
"""

import hashlib
import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "tests" / "fixtures"

FIXTURE_NAME = "golden_events.jsonl"
SYNTH_ARGS = [
    "--seed", "23", "--accounts", "24", "--nfts", "60", "--days", "120",
    "--collusions", "2", "--quick-relists", "3", "--clusters", "6,5",
    "--cluster-transfers", "8", "--invites", "10",
]
REPORT_COMMANDS = {
    "stats": ["stats", FIXTURE_NAME, "--out-dir", "out_stats"],
    "graph": ["graph", FIXTURE_NAME, "--out-dir", "out_graph",
              "--progression"],
    "smallworld": ["smallworld", FIXTURE_NAME, "--out-dir", "out_smallworld",
                   "--replicates", "100", "--seed", "7"],
}


def run(args, cwd):
    subprocess.run([sys.executable, "-m", "nftf.cli", *args],
                   cwd=cwd, check=True)


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def main() -> int:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as scratch:
        work = Path(scratch)
        run(["synth", "--out", FIXTURE_NAME, "--truth", "golden_truth.json",
             *SYNTH_ARGS], cwd=work)

        digests = {
            "fixture": {
                FIXTURE_NAME: sha256(work / FIXTURE_NAME),
                "golden_truth.json": sha256(work / "golden_truth.json"),
            }
        }
        for name, args in REPORT_COMMANDS.items():
            run(args, cwd=work)
            out = work / f"out_{name}"
            digests[name] = {p.name: sha256(p) for p in sorted(out.iterdir())}

        shutil.copy(work / FIXTURE_NAME, FIXTURES / FIXTURE_NAME)
        shutil.copy(work / "golden_truth.json", FIXTURES / "golden_truth.json")

    with open(FIXTURES / "golden_digests.json", "w", encoding="utf-8") as fh:
        json.dump({"synth_args": SYNTH_ARGS,
                   "commands": REPORT_COMMANDS,
                   "digests": digests}, fh, indent=2, sort_keys=True)
        fh.write("\n")

    n_lines = sum(1 for _ in open(FIXTURES / FIXTURE_NAME, encoding="utf-8"))
    print(f"fixture: {n_lines} events, "
          f"{sum(len(v) for v in digests.values())} digests recorded")
    return 0


if __name__ == "__main__":
    sys.exit(main())
