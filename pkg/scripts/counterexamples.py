"""Single-circle worlds where the objective's slow axis is aligned with, or
orthogonal to, the direction of the obstacle.

Writes both trajectories, sweeps k on the aligned world with a smaller
condition number, and runs adjustable-order descent on the aligned world.
"""
import argparse
import json
from pathlib import Path

from krnav import io
from krnav.experiments import (
    COUNTEREXAMPLE_STARTS,
    counterexample_objective,
    counterexample_world,
    run_counterexample,
)
from krnav.navigate import FlowConfig, adjustable_k


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--k", type=float, default=10.0)
    p.add_argument("--lambda-max", type=float, default=2.9, help="eigenvalue for the k sweep")
    p.add_argument("--sweep", type=float, nargs="+", default=[5, 10, 15, 20, 25, 30, 35, 40])
    p.add_argument("--kmax", type=float, default=20.0)
    p.add_argument("--out-dir", default="results/counterexamples")
    args = p.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    report = {}
    for which in COUNTEREXAMPLE_STARTS:
        traj = run_counterexample(which, args.k)
        io.write_trajectory(out / f"{which}.csv", traj)
        report[which] = {"verdict": traj.verdict.value, "final": traj.final.tolist()}

    report["sweep"] = {}
    for k in args.sweep:
        traj = run_counterexample("aligned", k, lambda_max=args.lambda_max)
        report["sweep"][str(k)] = {"verdict": traj.verdict.value, "final": traj.final.tolist()}

    res = adjustable_k(counterexample_world("aligned"), counterexample_objective(), args.k, args.kmax,
                       FlowConfig(max_iters=50000), COUNTEREXAMPLE_STARTS["aligned"])
    for i, seg in enumerate(res.segments):
        io.write_trajectory(out / f"adjust_k_segment_{i:02d}.csv", seg)
    report["adjust_k"] = {"verdict": res.verdict.value, "k_history": res.k_history,
                          "condition_flagged": res.condition_flagged}

    io.write_json(out / "summary.json", report)
    print(json.dumps(report, indent=2))


if __name__ == "__main__":
    main()
