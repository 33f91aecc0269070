#!/usr/bin/env python3
"""All algorithms on all rings, then a short table of the aggregate.

Equivalent to ``xrmarl compare --algo all --ring all`` followed by a look at
aggregate.csv. Extra arguments are passed through to the CLI.
"""
import csv
import sys
from pathlib import Path

from xrmarl.harness.cli import main as cli_main

COLUMNS = ("success_rate", "plr", "throughput_mbps", "goodput_mbps", "delay_ms", "xqi")


def main(argv: list[str]) -> int:
    out = Path("runs/sweep")
    if "--out" in argv:
        out = Path(argv[argv.index("--out") + 1])
    else:
        argv = argv + ["--out", str(out)]
    rc = cli_main(["compare", "--algo", "all", "--ring", "all", *argv])
    if rc:
        return rc
    with open(out / "aggregate.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    print(f"{'algo':7s} {'ring':8s} " + " ".join(f"{c:>16s}" for c in COLUMNS))
    for r in rows:
        cells = []
        for c in COLUMNS:
            m, h = r[f"{c}_mean"], r[f"{c}_ci95"]
            cells.append(f"{float(m):9.3f}+-{float(h):5.3f}" if m else f"{'-':>16s}")
        print(f"{r['algo']:7s} {r['ring']:8s} " + " ".join(cells))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
