"""Batches over worlds of egg-shaped obstacles for a range of orders k."""
import argparse
from pathlib import Path

from krnav import io
from krnav.experiments import ExperimentSpec, run_batch


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--k", type=float, nargs="+", default=[5, 10, 25])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=None)
    args = p.parse_args()

    rows = []
    for k in args.k:
        result = run_batch(ExperimentSpec(scenario="egg", k=k, trials=args.trials, seed=args.seed))
        s = result.summary
        print(f"k={k:g}: success {s.success_rate:.2f}, collisions {s.collisions}, "
              f"max final dist {s.max_final_dist:.3g}", flush=True)
        rows.append({"k": k, **s.to_dict()})
        if args.out_dir:
            d = Path(args.out_dir) / f"k{k:g}"
            d.mkdir(parents=True, exist_ok=True)
            for r in result.records[:5]:
                io.write_trajectory(d / f"trial_{r.trial:04d}.csv", r.trajectory)
    if args.out_dir:
        io.write_rows(Path(args.out_dir) / "summary.csv", rows)


if __name__ == "__main__":
    main()
