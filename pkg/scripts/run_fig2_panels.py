#!/usr/bin/env python3
"""Run the four discrete-model panels (coupling, drive, delay, width vs
temperature) and leave grid.csv + heatmap SVGs under <out>/<preset>/.

Desk-scale 9x9 grids by default (~7 min serial); --scale paper switches
to the dense 33x33 grids, which is an overnight job without --jobs.
"""

import argparse
import json
import sys
import tempfile

from thermostirap.cli import main as cli_main

PANELS = ("fig2a", "fig2b", "fig2c", "fig2d")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/fig2")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--scale", choices=("ci", "paper"), default="ci")
    ap.add_argument("--resume", action="store_true")
    args = ap.parse_args()

    rc = 0
    for name in PANELS:
        with tempfile.NamedTemporaryFile("w", suffix=".json") as cfg:
            json.dump({"command": "sweep", "preset": name, "scale": args.scale}, cfg)
            cfg.flush()
            argv = [
                "sweep", "--config", cfg.name,
                "--out", f"{args.out}/{name}",
                "--jobs", str(args.jobs),
            ]
            if args.resume:
                argv.append("--resume")
            rc = max(rc, cli_main(argv))
    return rc


if __name__ == "__main__":
    sys.exit(main())
