"""Plants driven by the potential on the five-disc scene.

Double integrator: damping sweep, each run compared with the fine-step
gradient path.  Differential drive: kinematic and dynamic runs from the same
start, plus a sweep over the speed damping of the dynamic model.
"""
import argparse
import json
import math
from pathlib import Path

from krnav import io
from krnav.dynamics import (
    DiffDriveGains,
    DiffDriveState,
    SimConfig,
    diffdrive_dynamic_sim,
    diffdrive_kinematic_sim,
    double_integrator_sim,
    path_deviation,
    reference_path,
)
from krnav.experiments import DIFFDRIVE_SCENE, DOUBLE_INTEGRATOR_SCENE


def double_integrator(out: Path, gains) -> dict:
    sc = DOUBLE_INTEGRATOR_SCENE
    world, obj, cfg = sc.world(), sc.objective(), sc.potential()
    ref = reference_path(world, obj, cfg, sc.start(), 1e-3 * sc.scale)
    report = {}
    for K in gains:
        traj = double_integrator_sim(world, obj, cfg, K, SimConfig(dt=1e-4, max_steps=30000, record_every=5),
                                     sc.start())
        io.write_trajectory(out / f"double_integrator_K{K:g}.csv", traj)
        report[f"{K:g}"] = {"verdict": traj.verdict.value,
                            "deviation_over_scale": path_deviation(traj.x, ref) / sc.scale}
    return report


def diffdrive(out: Path, dampings) -> dict:
    sc = DIFFDRIVE_SCENE
    world, obj, cfg = sc.world(), sc.objective(), sc.potential()
    start = DiffDriveState(sc.start(), 0.0)
    kin = diffdrive_kinematic_sim(world, obj, cfg, DiffDriveGains(),
                                  SimConfig(dt=0.05, max_steps=40000, goal_tolerance=0.2, rest_speed=math.inf),
                                  start)
    io.write_trajectory(out / "diffdrive_kinematic.csv", kin)
    report = {"kinematic": {"verdict": kin.verdict.value, "final": kin.final.tolist()}}
    for k_vd in dampings:
        sim = SimConfig(dt=0.1, max_steps=int(15000 * k_vd), goal_tolerance=0.2, rest_speed=math.inf,
                        record_every=10)
        dyn = diffdrive_dynamic_sim(world, obj, cfg, DiffDriveGains(k_vd=k_vd), sim, start)
        io.write_trajectory(out / f"diffdrive_dynamic_kvd{k_vd:g}.csv", dyn)
        report[f"dynamic_kvd{k_vd:g}"] = {"verdict": dyn.verdict.value,
                                          "deviation": path_deviation(dyn.x, kin.x)}
    return report


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--K", type=float, nargs="+", default=[1e3, 4e3, 5e3])
    p.add_argument("--kvd", type=float, nargs="+", default=[2.0, 4.0, 8.0])
    p.add_argument("--out-dir", default="results/dynamics")
    args = p.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = {"double_integrator": double_integrator(out, args.K), "diffdrive": diffdrive(out, args.kvd)}
    io.write_json(out / "summary.json", report)
    print(json.dumps(report, indent=2))


if __name__ == "__main__":
    main()
