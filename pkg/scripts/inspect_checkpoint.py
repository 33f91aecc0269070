#!/usr/bin/env python3
"""Print a checkpoint's metadata and its learned action-filter table."""
import json
import sys

import numpy as np

from xrmarl.marl import BUFFER_EDGES, load_checkpoint


def main(path: str) -> None:
    learner, table, meta = load_checkpoint(path)
    print(json.dumps(meta, indent=2, sort_keys=True))
    edges = (0.0,) + tuple(BUFFER_EDGES) + (1.0,)
    arr = table.as_array()
    for n in range(arr.shape[0]):
        print(f"agent {n}")
        for r in range(arr.shape[1]):
            off = np.flatnonzero(arr[n, r]).tolist()
            print(f"  buffer [{edges[r]:.2f}, {edges[r + 1]:.2f}): disabled {off}")
    n_params = sum(p.data.size for p in learner.parameters())
    print(f"{n_params} trainable parameters")


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit("usage: inspect_checkpoint.py RUN_DIR/checkpoint.npz")
    main(sys.argv[1])
