"""File formats: world descriptions (JSON) and trajectory tables (CSV).

A world file is a JSON object

    {"workspace": {"center": [...], "radius": R},
     "obstacles": [{"kind": "ellipsoid", "center": [...], "matrix": [...], "r": r},
                   {"kind": "egg", "center": [...], "r": r, "orientation": "vertical"}],
     "objective": {"matrix": [...], "x_star": [...]},      # optional
     "start": [...]}                                        # optional

Matrices are stored row-major as flat lists.  Trajectory tables hold one row
per recorded state with 17 significant digits so that values round-trip.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from krnav.errors import InputError
from krnav.navigate import Trajectory
from krnav.potential import QuadraticObjective
from krnav.world import WorldModel

FLOAT_FORMAT = "{:.17g}"


def world_to_dict(world: WorldModel, obj: QuadraticObjective | None = None, start=None) -> dict:
    data = world.to_dict()
    if obj is not None:
        data["objective"] = obj.to_dict()
    if start is not None:
        data["start"] = [float(v) for v in start]
    return data


def save_world(path, world: WorldModel, obj: QuadraticObjective | None = None, start=None) -> None:
    Path(path).write_text(json.dumps(world_to_dict(world, obj, start), indent=2) + "\n")


def load_scene(path, *, validate: bool = True) -> tuple[WorldModel, QuadraticObjective | None, np.ndarray | None]:
    """World, objective (if present) and start (if present) from a world file."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read world file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"world file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("world file must hold a JSON object")
    if "objective" in data and not isinstance(data["objective"], dict):
        raise InputError("objective must be a JSON object")
    world = WorldModel.from_dict(data, validate=validate)
    obj = QuadraticObjective.from_dict(data["objective"]) if "objective" in data else None
    start = np.asarray(data["start"], dtype=float) if "start" in data else None
    return world, obj, start


def load_world(path) -> WorldModel:
    return load_scene(path)[0]


def _fmt(v) -> str:
    v = float(v)
    return "nan" if math.isnan(v) else FLOAT_FORMAT.format(v)


def trajectory_columns(traj: Trajectory) -> list[str]:
    dim = traj.x.shape[1]
    return ["t", *[f"x{j}" for j in range(dim)], "phi", "grad_norm", *traj.extra.keys()]


def write_trajectory(path, traj: Trajectory) -> None:
    """CSV with columns ``t, x0.., phi, grad_norm`` plus any extra columns."""
    extra = list(traj.extra.values())
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(trajectory_columns(traj))
        for i in range(traj.x.shape[0]):
            w.writerow([
                _fmt(traj.t[i]), *[_fmt(v) for v in traj.x[i]], _fmt(traj.phi[i]),
                _fmt(traj.grad_norm[i]), *[_fmt(col[i]) for col in extra],
            ])


def write_discoveries(path, traj: Trajectory) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "obstacle_index"])
        for t, i in traj.discoveries:
            w.writerow([_fmt(t), int(i)])


def discoveries_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".discoveries.csv")


def read_table(path) -> dict[str, np.ndarray]:
    """Columns of a CSV written by this module, as float arrays."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InputError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    values = np.array([[float(v) for v in r] for r in body], dtype=float).reshape(len(body), len(header))
    return {name: values[:, j] for j, name in enumerate(header)}


def write_rows(path, rows: list[dict]) -> None:
    """Per-trial records; floats keep full precision, booleans are 0/1."""
    if not rows:
        raise InputError("no rows to write")
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        w.writeheader()
        for r in rows:
            w.writerow({
                k: (int(v) if isinstance(v, (bool, np.bool_)) else _fmt(v) if isinstance(v, float) else v)
                for k, v in r.items()
            })


def read_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        out = []
        for r in csv.DictReader(fh):
            row = {}
            for k, v in r.items():
                try:
                    row[k] = int(v)
                except ValueError:
                    try:
                        row[k] = float(v)
                    except ValueError:
                        row[k] = v
            out.append(row)
    return out


def write_json(path, data: dict) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
