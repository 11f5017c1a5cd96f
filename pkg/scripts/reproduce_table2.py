#!/usr/bin/env python
"""Rebuild the partition-sweep table (8 partitions x 3 functions).

Equivalent to `pairnet bench --table 2 --out results`; extra flags are
passed through to the CLI.
"""

import sys

from pairnet.cli import main

if __name__ == "__main__":
    args = sys.argv[1:]
    if not any(a.startswith("--out") for a in args):
        args = ["--out", "results", *args]
    sys.exit(main(["bench", "--table", "2", *args]))
