"""Monte Carlo check of the shot-noise law: PNC-shift stderr against t * tau.

Runs the Ramsey estimator over a grid of observation times and coherence times
(free time tau/2, shot count t / (tau/2)) and fits the log-log slope.

Usage: python scripts/scaling_study.py [--plan PATH] [--workers N] [--out DIR]
"""

import argparse
import csv
import time
from pathlib import Path

from apvsim.config import data_path
from apvsim.physics import TWO_PI
from apvsim.ramsey import load_plan, verify_scaling


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--plan", default=str(data_path("plans", "ra226_ramsey.yaml")))
    ap.add_argument("--obs-times", type=float, nargs="+", default=[1000.0, 4000.0, 16000.0])
    ap.add_argument("--coherence-times", type=float, nargs="+", default=[0.2, 0.6, 1.8])
    ap.add_argument("--blocks", type=int, default=40)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args(argv)

    plan, noise, _ = load_plan(args.plan)
    start = time.perf_counter()
    rows, exponent = verify_scaling(plan, noise, args.obs_times, args.coherence_times,
                                    blocks=args.blocks, workers=args.workers)
    elapsed = time.perf_counter() - start
    print(f"{'t (s)':>10} {'tau (s)':>8} {'trials':>9} {'stderr (Hz)':>12}")
    for r in rows:
        print(f"{r['t']:10g} {r['tau']:8g} {r['trials']:9d} {r['stderr'] / TWO_PI:12.4g}")
    print(f"fitted exponent {exponent:.3f} (shot-noise law: -0.5), {elapsed:.1f} s")
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        with open(args.out / "scaling.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)


if __name__ == "__main__":
    main()
