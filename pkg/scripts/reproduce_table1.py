#!/usr/bin/env python
"""Rebuild the speed/accuracy comparison (selection vs. backprop MLP).

Equivalent to `pairnet bench --table 1 --out results`; extra flags are
passed through to the CLI. The full run trains fifteen 500-epoch MLPs
and takes a while; use --epochs/--mlp-seeds/--functions to shrink it.
"""

import sys

from pairnet.cli import main

if __name__ == "__main__":
    args = sys.argv[1:]
    if not any(a.startswith("--out") for a in args):
        args = ["--out", "results", *args]
    sys.exit(main(["bench", "--table", "1", *args]))
