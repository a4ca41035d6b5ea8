"""Trajectory CSV files and static SVG plots."""

from __future__ import annotations

import json
from html import escape

import numpy as np

from .errors import InvalidArgumentError
from .integrator import Trajectory
from .kernels import to_dict as kernel_to_dict

_FLOAT = "%.17g"


def column_names(N: int, M: int, d: int) -> list:
    """``t,x_1..x_{N*d},y_1..y_{M*d}``; each agent's ``d`` coordinates are adjacent."""
    return (["t"] + [f"x_{i}" for i in range(1, N * d + 1)]
            + [f"y_{i}" for i in range(1, M * d + 1)])


def run_metadata(traj: Trajectory, scenario=None, backend=None) -> dict:
    """Every setting that affects the numbers in a trajectory file."""
    p = traj.params
    meta = {}
    if scenario is not None:
        meta.update(name=scenario.name, seed=scenario.seed,
                    x_range=list(scenario.init.x_range), y_range=list(scenario.init.y_range),
                    explicit_points=scenario.init.x is not None or scenario.init.y is not None,
                    sampled_histories=scenario.init.x_history is not None or scenario.init.y_history is not None)
    meta.update(N=p.N, M=p.M, k=p.k, h=p.h, tau=p.tau, d=p.d)
    for slot, kern in zip(("psi", "psi_star", "phi", "phi_star"), p.kernels):
        meta[slot] = kernel_to_dict(kern) if kern is not None else None
    meta.update(dt=traj.config.dt, t_end=float(traj.times[-1]),
                interpolation=traj.config.interpolation)
    if backend is not None:
        meta["backend"] = backend
    return meta


def write_csv(traj: Trajectory, path, meta: dict | None = None):
    meta = run_metadata(traj) if meta is None else meta
    p = traj.params
    flat = traj.states.reshape(len(traj.times), -1)
    with open(path, "w", newline="\n") as fh:
        for key, value in meta.items():
            fh.write(f"# {key} = {json.dumps(value)}\n")
        fh.write(",".join(column_names(p.N, p.M, p.d)) + "\n")
        for t, row in zip(traj.times, flat):
            fh.write(",".join(_FLOAT % v for v in (t, *row)) + "\n")


def read_csv(path):
    """Return ``(times, states, meta)``; ``states`` has shape ``(nodes, N+M, d)``."""
    meta = {}
    header = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                meta[key.strip()] = json.loads(value)
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append([float(v) for v in line.split(",")])
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    n_agents = meta.get("N", 0) + meta.get("M", 0)
    d = meta.get("d", 1)
    if n_agents * d != len(header) - 1:
        raise InvalidArgumentError("CSV header does not match the N, M, d comment lines")
    return data[:, 0], data[:, 1:].reshape(len(rows), n_agents, d), meta


# -- SVG ---------------------------------------------------------------------

_W, _H = 720, 440
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return [float(v) for v in np.arange(start, hi + step * 1e-9, step)]


def write_svg(traj: Trajectory, path, title=None, x_color="#1f77b4", y_color="#d62728",
              max_points=2000):
    """Opinion-versus-time plot: X solid, Y dashed, one polyline per agent."""
    p = traj.params
    if p.d != 1:
        raise InvalidArgumentError(
            f"SVG plots need scalar opinions (d=1), got d={p.d}; export CSV instead")
    t = traj.times
    z = traj.states[:, :, 0]
    stride = max(1, int(np.ceil(len(t) / max_points)))
    idx = np.r_[0:len(t):stride]
    if idx[-1] != len(t) - 1:
        idx = np.append(idx, len(t) - 1)
    t0, t1 = float(t[0]), float(t[-1])
    lo, hi = float(z.min()), float(z.max())
    pad = 0.05 * (hi - lo) if hi > lo else 0.5
    lo, hi = lo - pad, hi + pad
    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def sx(v):
        return _ML + (v - t0) / (t1 - t0) * pw

    def sy(v):
        return _MT + (hi - v) / (hi - lo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
           f'<rect width="{_W}" height="{_H}" fill="white"/>']
    if title:
        out.append(f'<text x="{_W / 2:.1f}" y="18" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="14">{escape(title)}</text>')
    out.append(f'<g class="axes" stroke="black" stroke-width="1">'
               f'<line x1="{_ML}" y1="{_MT + ph}" x2="{_ML + pw}" y2="{_MT + ph}"/>'
               f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_MT + ph}"/></g>')
    for v in _ticks(t0, t1):
        out.append(f'<text x="{sx(v):.2f}" y="{_MT + ph + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{v:g}</text>')
    for v in _ticks(lo, hi):
        out.append(f'<text x="{_ML - 8}" y="{sy(v) + 4:.2f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{v:g}</text>')
    out.append(f'<text x="{_ML + pw / 2:.1f}" y="{_H - 10}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12">time t</text>')
    out.append(f'<text x="16" y="{_MT + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="12" transform="rotate(-90 16 {_MT + ph / 2:.1f})">opinion</text>')
    for a in range(p.N + p.M):
        pts = " ".join(f"{sx(t[i]):.2f},{sy(z[i, a]):.2f}" for i in idx)
        if a < p.N:
            style = f'stroke="{x_color}" class="X"'
        else:
            style = f'stroke="{y_color}" stroke-dasharray="6,3" class="Y"'
        out.append(f'<polyline fill="none" stroke-width="1" {style} points="{pts}"/>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
