#!/usr/bin/env python3
"""Run every bundled experiment config and summarize the verdicts.

Usage: python scripts/run_suite.py [--output DIR] [--only SUBSTR] [--skip SUBSTR]

Exit code is the worst exit code seen across the suite (0 pass/diagnostic,
1 fail, 2 config error, 3 blow-up, 4 inconclusive).
"""

from __future__ import annotations

import argparse
import glob
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from bivirial.cli import main as cli_main

SEVERITY = {0: 0, 4: 1, 3: 2, 2: 3, 1: 4}  # worst-last ordering for aggregation


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--output", default="results")
    ap.add_argument("--only", default=None, help="run only configs whose name contains this")
    ap.add_argument("--skip", default=None, help="skip configs whose name contains this")
    args = ap.parse_args()

    config_dir = os.path.join(os.path.dirname(__file__), "..", "configs")
    paths = sorted(glob.glob(os.path.join(config_dir, "*.ini")))
    if args.only:
        paths = [p for p in paths if args.only in os.path.basename(p)]
    if args.skip:
        paths = [p for p in paths if args.skip not in os.path.basename(p)]
    if not paths:
        print("no configs matched", file=sys.stderr)
        return 2

    results = []
    for path in paths:
        name = os.path.splitext(os.path.basename(path))[0]
        t0 = time.perf_counter()
        code = cli_main(["run", path, "--output", args.output])
        results.append((name, code, time.perf_counter() - t0))

    print()
    width = max(len(n) for n, _, _ in results)
    for name, code, dt in results:
        status = {0: "ok", 1: "FAIL", 2: "CONFIG", 3: "BLOWUP", 4: "INCONCLUSIVE"}[code]
        print(f"{name:<{width}}  {status:<12} exit={code}  {dt:7.1f}s")
    worst = max(results, key=lambda r: SEVERITY[r[1]])[1]
    print(f"\nworst exit code: {worst}")
    return worst


if __name__ == "__main__":
    sys.exit(main())
