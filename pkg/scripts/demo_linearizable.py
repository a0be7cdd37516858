#!/usr/bin/env python3
"""Run the synthetic linearizable-map KAM reduction and print the decay table.

Equivalent to `normkam demo linearizable`; kept as a script entry for
experiment workflows.  Outputs land in --out (default demo_out/).
"""

import argparse
import sys

from normkam.cli import main as cli_main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="demo_out")
    ap.add_argument("--steps", type=int, default=3)
    ap.add_argument("--obstruction", action="store_true",
                    help="plant a theta-independent r^3 term instead")
    args = ap.parse_args()
    name = "obstruction" if args.obstruction else "linearizable"
    sys.exit(cli_main(["demo", name, "--out", args.out, "--steps", str(args.steps)]))
