"""Figure rendering from schema=1 run logs.

Five figure kinds:

    snapshot_o      formation snapshot in the rotating orbital frame
    snapshot_shat   snapshot in the normalized swarm frame (y-z projection)
    params_history  drift and periodic parameter histories per satellite
    tconn_history   connectable-time envelope (min/median/max) over time
    c1c4_plane      drift-parameter plane trajectories, optionally two runs

Rendering is read-only and deterministic: fixed canvas size, fixed dpi,
no timestamps. Re-rendering a given input reproduces the file byte for
byte under a fixed toolchain.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass

import matplotlib
matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SCHEMA_LINE = "schema=1"
KINDS = ("snapshot_o", "snapshot_shat", "params_history", "tconn_history", "c1c4_plane")

STATES_COLUMNS = ["t_s", "sat", "x_m", "y_m", "z_m", "vx_mps", "vy_mps", "vz_mps",
                  "ux_mps2", "uy_mps2", "uz_mps2"]
PARAMS_COLUMNS = ["t_s", "sat", "c1_m", "c2_m", "c3_m", "c4_m", "c5_m", "c6_m",
                  "r_xy_m", "theta_xy_deg", "r_z_m", "theta_z_deg", "tconn_s"]

FIGSIZE = (6.4, 4.8)
DPI = 110


class SchemaError(ValueError):
    """The input directory does not carry valid schema=1 logs."""


@dataclass(frozen=True)
class PlotSpec:
    """One figure request."""

    in_dir: str
    kind: str
    out_path: str
    time: float | None = None     # snapshot time; default: last record
    compare_dir: str | None = None  # second run overlaid in c1c4_plane


def _read_csv(path: str, expected) -> np.ndarray:
    if not os.path.exists(path):
        raise SchemaError(f"missing {path}")
    with open(path) as fh:
        if fh.readline().strip() != SCHEMA_LINE:
            raise SchemaError(f"{path}: missing '{SCHEMA_LINE}' preamble")
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected:
            raise SchemaError(f"{path}: unexpected columns {header}")
        try:
            rows = [[float(v) for v in row] for row in reader if row]
        except ValueError as exc:
            raise SchemaError(f"{path}: non-numeric cell ({exc})") from exc
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    arr = np.array(rows)
    if arr.shape[1] != len(expected):
        raise SchemaError(f"{path}: ragged rows")
    return arr


@dataclass(frozen=True)
class RunData:
    times: np.ndarray      # (T,)
    states: np.ndarray     # (T, N, 6)
    params: np.ndarray     # (T, N, 6) c1..c6 versus the reference
    tconn: np.ndarray      # (T, N)
    config: dict
    edges: list            # final grouping edges


def load_run(in_dir: str) -> RunData:
    states_raw = _read_csv(os.path.join(in_dir, "states.csv"), STATES_COLUMNS)
    params_raw = _read_csv(os.path.join(in_dir, "params.csv"), PARAMS_COLUMNS)
    try:
        with open(os.path.join(in_dir, "run_config.json")) as fh:
            config = json.load(fh)
        with open(os.path.join(in_dir, "groups.json")) as fh:
            groups = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(str(exc)) from exc
    n = int(config.get("n_sats", 0))
    if n < 1 or states_raw.shape[0] % n or params_raw.shape[0] % n:
        raise SchemaError("row count inconsistent with n_sats")
    t_count = states_raw.shape[0] // n
    times = states_raw[::n, 0]
    states = states_raw[:, 2:8].reshape(t_count, n, 6)
    params = params_raw[:, 2:8].reshape(t_count, n, 6)
    tconn = params_raw[:, 12].reshape(t_count, n)
    snapshots = groups.get("snapshots", [])
    edges = [tuple(e) for e in snapshots[-1]["edges"]] if snapshots else []
    return RunData(times, states, params, tconn, config, edges)


def _snapshot_index(data: RunData, time: float | None) -> int:
    if time is None:
        return len(data.times) - 1
    sel = np.nonzero(data.times <= time + 1e-9)[0]
    if sel.size == 0:
        raise SchemaError(f"no records at or before t={time}")
    return int(sel[-1])


def _shat_matrix(config: dict) -> np.ndarray:
    """Normalized-swarm-frame transform rebuilt from the logged constants."""
    mu = 3.986e14
    k_j2 = 2.633e25
    r_ref = float(config["r_ref_m"])
    i_ref = math.radians(float(config["i_ref_deg"]))
    tp = math.radians(float(config["theta_p_deg"]))
    tz = math.radians(float(config["theta_zxy_deg"]))
    s = k_j2 * (1.0 + 3.0 * math.cos(2.0 * i_ref)) / (4.0 * mu * r_ref**2)
    cp, cm = math.sqrt(1.0 + s), math.sqrt(1.0 - s)
    rot_y = np.array([[math.cos(tp), 0.0, -math.sin(tp)],
                      [0.0, 1.0, 0.0],
                      [math.sin(tp), 0.0, math.cos(tp)]])
    rot_z = np.array([[math.cos(tz), math.sin(tz), 0.0],
                      [-math.sin(tz), math.cos(tz), 0.0],
                      [0.0, 0.0, 1.0]])
    rot_x = np.array([[1.0, 0.0, 0.0],
                      [0.0, math.cos(tz), math.sin(tz)],
                      [0.0, -math.sin(tz), math.cos(tz)]])
    norm = np.diag([1.0, 1.0, 2.0]) @ rot_x @ np.diag([1.0, 1.0, math.sin(tp)])
    return norm @ rot_y @ rot_z @ np.diag([cp, cm, 1.0])


def _new_figure():
    return plt.figure(figsize=FIGSIZE, dpi=DPI)


def _render_snapshot(data: RunData, k: int, transform: np.ndarray | None,
                     title: str, xlabel: str, ylabel: str, out_path: str) -> None:
    pos = data.states[k][:, :3]
    if transform is not None:
        pos = pos @ transform.T
        yy, zz = pos[:, 1], pos[:, 2]
    else:
        yy, zz = pos[:, 1], pos[:, 0]
    fig = _new_figure()
    ax = fig.add_subplot(111)
    for a, b in data.edges:
        ax.plot([yy[a], yy[b]], [zz[a], zz[b]], color="0.6", lw=0.8, zorder=1)
    ax.scatter(yy, zz, s=28, color="tab:red", zorder=2)
    ax.set_title(f"{title} (t = {data.times[k]:.0f} s)")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_aspect("equal", adjustable="datalim")
    ax.grid(True, lw=0.3, alpha=0.5)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def _render_params_history(data: RunData, out_path: str) -> None:
    hours = data.times / 3600.0
    fig = _new_figure()
    axes = fig.subplots(2, 2, sharex=True)
    panels = [
        (0, "c1_m", "drift index c1 (m)"),
        (3, "c4_m", "along-track offset c4 (m)"),
        (None, "r_xy_m", "in-plane amplitude (m)"),
        (None, "r_z_m", "cross-track amplitude (m)"),
    ]
    for ax, (idx, _, label) in zip(axes.flat, panels):
        if idx is not None:
            series = data.params[:, :, idx]
        elif "in-plane" in label:
            series = np.hypot(data.params[:, :, 1], data.params[:, :, 2])
        else:
            series = np.hypot(data.params[:, :, 4], data.params[:, :, 5])
        ax.plot(hours, series, lw=0.6)
        ax.set_ylabel(label, fontsize=8)
        ax.grid(True, lw=0.3, alpha=0.5)
    for ax in axes[1]:
        ax.set_xlabel("time (h)")
    fig.suptitle("orbital parameters versus the reference satellite", fontsize=10)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def _render_tconn_history(data: RunData, out_path: str) -> None:
    hours = data.times / 3600.0
    finite = np.where(np.isfinite(data.tconn), data.tconn, np.nan)
    cap = np.nanmax(finite) if np.any(np.isfinite(finite)) else 1.0
    clipped = np.where(np.isfinite(data.tconn), data.tconn, cap * 1.5)
    lo = np.min(clipped, axis=1)
    med = np.median(clipped, axis=1)
    hi = np.max(clipped, axis=1)
    fig = _new_figure()
    ax = fig.add_subplot(111)
    ax.plot(hours, lo / 3600.0, label="min", color="tab:red")
    ax.plot(hours, med / 3600.0, label="median", color="tab:blue")
    ax.plot(hours, hi / 3600.0, label="max (clipped at plot cap)", color="tab:green")
    ax.set_yscale("log")
    ax.set_xlabel("time (h)")
    ax.set_ylabel("connectable time (h)")
    ax.legend(fontsize=8)
    ax.grid(True, lw=0.3, alpha=0.5)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def _render_c1c4(runs: list, labels: list, out_path: str) -> None:
    fig = _new_figure()
    ax = fig.add_subplot(111)
    colors = ("tab:blue", "tab:orange")
    for data, label, color in zip(runs, labels, colors):
        c1 = data.params[:, :, 0]
        c4 = data.params[:, :, 3]
        ax.plot(c4, c1, lw=0.5, color=color, alpha=0.65)
        ax.plot([], [], color=color, label=label)
        ax.scatter(c4[0], c1[0], s=8, color=color, marker="o")
    ax.set_xlabel("c4 (m)")
    ax.set_ylabel("c1 (m)")
    ax.legend(fontsize=8)
    ax.grid(True, lw=0.3, alpha=0.5)
    ax.set_title("drift-parameter plane")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def render(spec: PlotSpec) -> str:
    """Render one figure; returns the output path.

    Raises SchemaError on malformed inputs, unknown kinds, or an empty time
    selection.
    """
    if spec.kind not in KINDS:
        raise SchemaError(f"unknown figure kind {spec.kind!r}; expected one of {KINDS}")
    data = load_run(spec.in_dir)
    out_dir = os.path.dirname(os.path.abspath(spec.out_path))
    os.makedirs(out_dir, exist_ok=True)
    if spec.kind == "snapshot_o":
        k = _snapshot_index(data, spec.time)
        _render_snapshot(data, k, None, "orbital frame", "y (m)", "x (m)", spec.out_path)
    elif spec.kind == "snapshot_shat":
        k = _snapshot_index(data, spec.time)
        transform = _shat_matrix(data.config)
        _render_snapshot(data, k, transform, "normalized swarm frame",
                         "y_s (m)", "z_s (m)", spec.out_path)
    elif spec.kind == "params_history":
        _render_params_history(data, spec.out_path)
    elif spec.kind == "tconn_history":
        _render_tconn_history(data, spec.out_path)
    else:
        runs = [data]
        labels = [os.path.basename(os.path.normpath(spec.in_dir))]
        if spec.compare_dir:
            runs.append(load_run(spec.compare_dir))
            labels.append(os.path.basename(os.path.normpath(spec.compare_dir)))
        _render_c1c4(runs, labels, spec.out_path)
    return spec.out_path
