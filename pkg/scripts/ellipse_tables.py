"""Batches over ellipsoid worlds with shrinking obstacle spacing.

Prints one summary line per (d, k) pair and writes ``summary.csv`` under
``--out-dir``.  ``--violated`` swaps in objectives that break the ellipsoid
condition at every obstacle.

    python scripts/ellipse_tables.py --trials 100 --out-dir results/ellipses
"""
import argparse
from pathlib import Path

from krnav import io
from krnav.experiments import ExperimentSpec, run_batch, run_violated_batch

# (d, k) pairs: for each spacing the smallest order that is enough and the
# order just below it
DISTANCE_ROWS = [(10, 2), (9, 2), (9, 5), (6, 5), (6, 7), (5, 7), (5, 10), (3, 10), (3, 15)]
RATIO_ROWS = [(10, 2), (10, 15), (9, 5), (9, 15), (6, 7), (6, 15), (5, 10), (5, 15), (3, 15)]
VIOLATED_ROWS = [(10, 2), (9, 5), (6, 7), (5, 10), (3, 15)]


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=2, help="dimension (2 or 3)")
    p.add_argument("--rows", choices=["distance", "ratio", "all"], default="all")
    p.add_argument("--violated", action="store_true")
    p.add_argument("--out-dir", default=None)
    args = p.parse_args()

    if args.violated:
        rows = VIOLATED_ROWS
    else:
        rows = {"distance": DISTANCE_ROWS, "ratio": RATIO_ROWS}.get(
            args.rows, sorted(set(DISTANCE_ROWS) | set(RATIO_ROWS), key=lambda r: (-r[0], r[1])))
    run = run_violated_batch if args.violated else run_batch

    out = []
    print(f"{'d':>3} {'k':>3} {'success':>8} {'max_final':>10} {'min_init':>9} {'coll':>5} "
          f"{'ratio_mean':>11} {'ratio_var':>10}")
    for d, k in rows:
        s = run(ExperimentSpec(n=args.n, d=d, k=k, trials=args.trials, seed=args.seed)).summary
        print(f"{d:>3} {k:>3} {s.success_rate:>8.2f} {s.max_final_dist:>10.3g} {s.min_initial_dist:>9.2f} "
              f"{s.collisions:>5} {s.path_ratio_mean:>11.4f} {s.path_ratio_var:>10.3g}", flush=True)
        out.append({"d": d, "k": k, **s.to_dict()})
    if args.out_dir:
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
        io.write_rows(Path(args.out_dir) / "summary.csv", out)


if __name__ == "__main__":
    main()
