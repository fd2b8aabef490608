#!/usr/bin/env python3
"""Final transfer fidelity vs bath temperature for the continuum model
(chain-MPS engine), T in {0, 0.2, 0.4, 0.6, 0.8, 1.0}.

Default is the coarse CI discretization (delta=0.05, 20 chain sites,
chi<=64; about a minute).  --paper switches to the dense setting
(delta=0.01, 50 sites, chi<=400, dt=0.01) and runs for hours; combine
with --resume to survive interruptions.
"""

import argparse
import json
import sys
import tempfile

from thermostirap.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/fig3")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--paper", action="store_true", help="dense discretization")
    ap.add_argument("--resume", action="store_true")
    args = ap.parse_args()

    scale = "paper" if args.paper else "ci"
    with tempfile.NamedTemporaryFile("w", suffix=".json") as cfg:
        json.dump({"command": "sweep", "preset": "fig3", "scale": scale}, cfg)
        cfg.flush()
        argv = ["sweep", "--config", cfg.name, "--out", args.out,
                "--jobs", str(args.jobs)]
        if args.resume:
            argv.append("--resume")
        return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
