"""Generate a synthetic system, reenact every case, and print the rounded tables.

    python3 scripts/run_benchmark.py --out bench --seed 1 --classes 500 --requests 15
"""

import argparse
import sys
import time
from pathlib import Path

from iiasim.cli import main as iiasim


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("bench"))
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--classes", type=int, default=500)
    ap.add_argument("--requests", type=int, default=15)
    ap.add_argument("--jobs", type=int)
    ap.add_argument("--heuristics", help="comma list, default all")
    args = ap.parse_args(argv)

    data = args.out / "data"
    rc = iiasim(["synth", str(data), "--seed", str(args.seed), "--classes", str(args.classes),
                 "--requests", str(args.requests)])
    if rc:
        return rc
    cmd = ["reenact", "--config", str(data / "config.json"), "--output-dir", str(args.out / "results")]
    if args.jobs:
        cmd += ["--jobs", str(args.jobs)]
    if args.heuristics:
        cmd += ["--heuristics", args.heuristics]
    t0 = time.perf_counter()
    rc = iiasim(cmd)
    print(f"reenactment took {time.perf_counter() - t0:.1f}s")
    if rc == 0:
        print((args.out / "results" / "tables.md").read_text())
    return rc


if __name__ == "__main__":
    sys.exit(main())
