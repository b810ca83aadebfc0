"""
Figure panels for a finished run: inter-agent distance band, per-agent speed
traces, per-agent control norms and the agent paths. Each panel is written as
a CSV (for external plotting) and as a PNG rendered with matplotlib.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .export import ExportError, read_csv, write_panel


def _columns(header, data, prefix):
    idx = [k for k, h in enumerate(header) if h.startswith(prefix)]
    return [header[k] for k in idx], data[:, idx]


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})


def render_figures(run_dir, out_dir=None, png: bool = True) -> list[Path]:
    """Write panel CSVs (and PNGs unless ``png`` is false); returns the written paths."""
    run_dir = Path(run_dir)
    out = Path(out_dir) if out_dir is not None else run_dir
    m_path, t_path = run_dir / "metrics.csv", run_dir / "trajectory.csv"
    for p in (m_path, t_path):
        if not p.is_file():
            raise FileNotFoundError(f"missing {p.name} in {run_dir}")
    out.mkdir(parents=True, exist_ok=True)

    mh, md = read_csv(m_path)
    t = md[:, mh.index("t")]
    band_cols = ["dist_min", "dist_max", "dist_mean"]
    band = np.column_stack([md[:, mh.index(c)] for c in band_cols])
    speed_names, speeds = _columns(mh, md, "speed_")
    u_names, u_norms = _columns(mh, md, "u_norm_")

    written = []
    panels = {
        "distance_band": (["t"] + band_cols, band),
        "speed_traces": (["t"] + speed_names, speeds),
        "control_norms": (["t"] + u_names, u_norms),
    }
    for name, (header, values) in panels.items():
        path = out / f"{name}.csv"
        write_panel(path, header, ([ti, *(None if np.isnan(v) else v for v in row)] for ti, row in zip(t, values)), name)
        written.append(path)

    th, td = read_csv(t_path)
    ids = np.unique(td[:, th.index("agent_id")]).astype(int)
    pos_cols = [c for c in th if c.startswith("pos_")]
    paths = {i: td[td[:, th.index("agent_id")] == i][:, [th.index(c) for c in pos_cols]] for i in ids}
    path = out / "paths.csv"
    write_panel(
        path, ["agent_id", "t"] + pos_cols,
        ([i, ti, *p] for i in ids for ti, p in zip(td[td[:, th.index("agent_id")] == i][:, 0], paths[i])),
        "paths",
    )
    written.append(path)

    if not png:
        return written
    try:
        plt = _pyplot()
    except ImportError as exc:  # pragma: no cover - matplotlib is a declared dependency
        raise ExportError(f"matplotlib unavailable: {exc}") from None

    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.fill_between(t, band[:, 0], band[:, 1], alpha=0.3, label="min to max")
    ax.plot(t, band[:, 2], lw=1.2, label="mean")
    ax.plot(t, band[:, 0], lw=0.8)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("inter-agent distance [m]")
    ax.legend(loc="upper right")
    _save(fig, out / "distance_band.png")
    plt.close(fig)

    for name, values, label in (("speed_traces", speeds, "speed [m/s]"), ("control_norms", u_norms, "|u| [m/s²]")):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.plot(t, values, lw=0.7)
        ax.set_xlabel("t [s]")
        ax.set_ylabel(label)
        _save(fig, out / f"{name}.png")
        plt.close(fig)

    if len(pos_cols) == 3:
        fig = plt.figure(figsize=(5, 5))
        ax = fig.add_subplot(projection="3d")
        for i in ids:
            ax.plot(*paths[i].T, lw=0.7)
    else:
        fig, ax = plt.subplots(figsize=(5, 5))
        for i in ids:
            ax.plot(paths[i][:, 0], paths[i][:, 1], lw=0.7)
            ax.plot(*paths[i][-1], "k.", ms=3)
        ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    _save(fig, out / "paths.png")
    plt.close(fig)

    written += [out / f"{n}.png" for n in ("distance_band", "speed_traces", "control_norms", "paths")]
    return written
