#!/usr/bin/env python3
"""Solver scaling sweep: per-iteration wall-clock across sample counts.

The solver's dominant kernels are all linear in the sample count, so each
doubling of N should roughly double the per-iteration time.  Prints the
measured times and consecutive ratios; optionally writes the JSON record.
"""

import argparse
import json

from mvtc import solver_scale_bench


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sweep", default="5000,10000,20000,40000", help="comma-separated N values")
    parser.add_argument("--anchors", type=int, default=200)
    parser.add_argument("--embed-dim", type=int, default=10)
    parser.add_argument("--views", type=int, default=3)
    parser.add_argument("--iters", type=int, default=3)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    n_values = [int(tok) for tok in args.sweep.split(",")]
    result = solver_scale_bench(
        n_values,
        n_anchors=args.anchors,
        embed_dim=args.embed_dim,
        n_views=args.views,
        iters=args.iters,
        seed=args.seed,
        repeats=args.repeats,
    )
    print(f"{'N':>8} {'per-iteration (ms)':>20}")
    for run in result["runs"]:
        print(f"{run['n_samples']:>8} {run['per_iteration_s'] * 1e3:>20.2f}")
    for ratio in result["ratios"]:
        print(
            f"ratio {ratio['n_from']} -> {ratio['n_to']}: "
            f"{ratio['per_iteration_ratio']:.2f}"
        )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(result, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
