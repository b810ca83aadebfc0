"""
CSV and JSON writers for a finished run.

Every CSV starts with a ``# <name> v<version>`` line followed by the column
header. Numbers are written with a fixed format so identical runs produce
identical bytes. Non-finite values are refused at write time.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .metrics import FrameMetrics
from .sim import Trajectory

TRAJECTORY_VERSION = 1
METRICS_VERSION = 1
PANEL_VERSION = 1
AXES = ("x", "y", "z")


class ExportError(RuntimeError):
    pass


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        raise ExportError(f"refusing to write non-finite value {x!r}")
    s = f"{x:.9f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _write_csv(path: Path, name: str, version: int, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    buf.write(f"# {name} v{version}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    width = len(header)
    for row in rows:
        out = ["" if v is None else fmt(v) for v in row]
        if len(out) != width:
            raise ExportError(f"{name}: row has {len(out)} fields, header has {width}")
        w.writerow(out)
    try:
        path.write_text(buf.getvalue(), encoding="utf-8")
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc.strerror or exc}") from None


def trajectory_header(dim: int) -> list[str]:
    ax = AXES[:dim]
    return ["t", "agent_id"] + [f"pos_{a}" for a in ax] + [f"vel_{a}" for a in ax] + [f"u_{a}" for a in ax]


def write_trajectory(traj: Trajectory, path) -> None:
    _, n, dim = traj.positions.shape

    def rows():
        for f, t in enumerate(traj.times):
            for k in range(n):
                yield (t, traj.ids[k], *traj.positions[f, k], *traj.velocities[f, k], *traj.controls[f, k])

    _write_csv(Path(path), "trajectory", TRAJECTORY_VERSION, trajectory_header(dim), rows())


def metrics_header(ids: Sequence[int]) -> list[str]:
    return (
        ["t", "dist_min", "dist_max", "dist_mean", "mean_speed", "max_speed", "max_u", "components",
         "mean_alignment_dev", "aliens_pursuing"]
        + [f"speed_{int(i)}" for i in ids]
        + [f"u_norm_{int(i)}" for i in ids]
    )


def write_metrics(m: FrameMetrics, ids: Sequence[int], path) -> None:
    def pair(x):
        # pairwise statistics do not exist for a single agent
        return None if np.isnan(x) else x

    def rows():
        for f, t in enumerate(m.t):
            yield (
                t, pair(m.dist_min[f]), pair(m.dist_max[f]), pair(m.dist_mean[f]), m.mean_speed[f], m.max_speed[f],
                m.max_u[f], m.components[f], m.mean_alignment_dev[f], m.aliens_pursuing[f],
                *m.speeds[f], *m.u_norms[f],
            )

    _write_csv(Path(path), "metrics", METRICS_VERSION, metrics_header(ids), rows())


def write_summary(summary: dict, path) -> None:
    def check(v):
        if isinstance(v, float) and not math.isfinite(v):
            raise ExportError(f"refusing to write non-finite summary value {v!r}")
        if isinstance(v, dict):
            for x in v.values():
                check(x)

    check(summary)
    try:
        Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc.strerror or exc}") from None


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and float matrix of an exported CSV (blank fields become NaN)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    body = [ln for ln in lines if not ln.startswith("#")]
    header = body[0].split(",")
    data = np.array(
        [[float(x) if x != "" else np.nan for x in ln.split(",")] for ln in body[1:]], dtype=float
    ).reshape(-1, len(header))
    return header, data


def write_panel(path, header: Sequence[str], rows: Iterable[Sequence], name: str) -> None:
    _write_csv(Path(path), name, PANEL_VERSION, header, rows)
