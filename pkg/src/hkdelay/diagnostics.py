"""Consensus diagnostics: diameters, projected window extrema, the theory's
constants and runtime checks of the hull, norm and contraction estimates.

Projections are taken along a unit vector ``v``. Window ``n >= 1`` is
``[(6n-1)tau, 6n*tau]``: leaders are scanned over every grid node in it,
non-leaders only at its right end. Window 0 is the initial data on
``[-tau, 0]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError, OutOfRangeError
from .integrator import Trajectory
from .kernels import inf_on_ball
from .model import InitialData, ModelParams, SystemState

CHECK_TOL = 1e-9


@dataclass
class DiameterSeries:
    times: np.ndarray
    d_X: np.ndarray
    d_Y: np.ndarray
    d_cross: np.ndarray
    d: np.ndarray


@dataclass
class WindowReport:
    n: int
    m_n: float
    M_n: float
    v: np.ndarray
    sigma_n: Optional[float] = None
    gamma_1n: Optional[float] = None
    log_gamma_1n: Optional[float] = None

    @property
    def D_n(self) -> float:
        return self.M_n - self.m_n


@dataclass
class TheoryConstants:
    Lambda: float
    Gamma: float
    C0: float
    sigma: float
    m0: float
    M0: float
    shift: float
    consensus_at_start: bool = False


@dataclass
class CheckReport:
    name: str
    passed: bool
    worst: float
    detail: str = ""
    windows: list = field(default_factory=list)


@dataclass
class DiagnosticsReport:
    diameters: DiameterSeries
    constants: TheoryConstants
    windows: list
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


# -- diameters ---------------------------------------------------------------

def _max_pair_distance(a, b):
    if len(a) == 0 or len(b) == 0:
        return 0.0
    diff = a[:, None, :] - b[None, :, :]
    return float(np.sqrt((diff * diff).sum(-1)).max())


def diameters(state: SystemState):
    """``(d_X, d_Y, d_cross, d)`` for one state."""
    dx = _max_pair_distance(state.x, state.x)
    dy = _max_pair_distance(state.y, state.y)
    dc = _max_pair_distance(state.x, state.y)
    return dx, dy, dc, max(dx, dy, dc)


def diameter_series(traj: Trajectory) -> DiameterSeries:
    N = traj.params.N
    out = np.empty((len(traj.times), 3))
    for i, z in enumerate(traj.states):
        out[i] = (_max_pair_distance(z[:N], z[:N]), _max_pair_distance(z[N:], z[N:]),
                  _max_pair_distance(z[:N], z[N:]))
    return DiameterSeries(traj.times, out[:, 0], out[:, 1], out[:, 2], out.max(axis=1))


# -- constants ---------------------------------------------------------------

def compute_c0(init: InitialData, tau: float) -> float:
    """Largest initial opinion norm (leader histories over ``[-tau, 0]``)."""
    ts = init.leader_sample_times(tau)
    norms = [np.linalg.norm(init.at(t), axis=1).max(initial=0.0) for t in ts]
    return float(max(norms, default=0.0))


def _unit(v, d) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (d,):
        raise InvalidArgumentError(f"direction must have {d} components, got shape {v.shape}")
    norm = np.linalg.norm(v)
    if not abs(norm - 1.0) <= 1e-9:
        raise InvalidArgumentError(f"direction must be a unit vector, |v| = {norm}")
    return v


def project(points, v) -> np.ndarray:
    """``<p, v>`` summed coordinate by coordinate, so results do not depend on array layout."""
    return (points * v).sum(axis=-1)


def _initial_extrema(init: InitialData, params: ModelParams, v):
    """Projected min and max of the initial data along ``v``."""
    lo, hi = math.inf, -math.inf
    for t in init.leader_sample_times(params.tau):
        z = init.at(t)
        rows = np.r_[0:params.k, params.N:params.N + params.h]
        if len(rows):
            p = project(z[rows], v)
            lo, hi = min(lo, p.min()), max(hi, p.max())
    p = project(init.initial_state(), v)
    return float(min(lo, p.min())), float(max(hi, p.max()))


def positivity_shift(m0: float) -> float:
    """Translation making every projection >= 1 (zero if already so)."""
    return 1.0 - m0 if m0 < 1.0 else 0.0


def sigma_value(tau, Lambda, D, M0_shifted) -> float:
    return min(tau, D / (4.0 * Lambda * M0_shifted))


def theory_constants(params: ModelParams, init: InitialData, v=None) -> TheoryConstants:
    """Lambda, Gamma, C0 and the first-window sigma along ``v`` (default e1)."""
    v = _unit(np.eye(params.d)[0] if v is None else v, params.d)
    c0 = compute_c0(init, params.tau)
    used = [k for k in params.kernels if k is not None]
    Lam = params.Lambda
    Gam = min(inf_on_ball(k, c0) for k in used)
    m0, M0 = _initial_extrema(init, params, v)
    shift = positivity_shift(m0)
    if M0 - m0 <= 0:
        return TheoryConstants(Lam, Gam, c0, params.tau, m0, M0, shift, consensus_at_start=True)
    sig = sigma_value(params.tau, Lam, M0 - m0, M0 + shift)
    return TheoryConstants(Lam, Gam, c0, sig, m0, M0, shift)


def log_gamma_1(params: ModelParams, Lambda: float, Gamma: float, sigma: float) -> float:
    """Natural log of the per-window contraction factor.

    Kept in log form because ``exp(-6*tau*Lambda)`` underflows for strong
    couplings with long delays.
    """
    if not (Lambda > 0 and Gamma > 0 and sigma >= 0):
        raise InvalidArgumentError("Lambda and Gamma must be > 0 and sigma >= 0")
    if sigma == 0:
        return -math.inf
    n = max(params.N, params.M)
    tau = params.tau
    return (-math.log(8.0) - 4.0 * math.log(n) + 4.0 * math.log(Gamma / Lambda)
            - 6.0 * tau * Lambda + 3.0 * math.log(-math.expm1(-Lambda * tau))
            + math.log(-math.expm1(-Lambda * sigma)))


def gamma_1(params: ModelParams, Lambda: float, Gamma: float, sigma: float) -> float:
    """``(Gamma/Lambda)^4 e^{-6 tau Lambda} (1-e^{-Lambda tau})^3 (1-e^{-Lambda sigma}) / (8 N^4)``.

    ``N`` is the larger population size.
    """
    return math.exp(log_gamma_1(params, Lambda, Gamma, sigma))


# -- windows -----------------------------------------------------------------

def window_extrema(traj: Trajectory, n: int, v) -> WindowReport:
    p = traj.params
    v = _unit(v, p.d)
    if n < 0:
        raise InvalidArgumentError("window index must be >= 0")
    if n == 0:
        lo, hi = _initial_extrema(traj.init, p, v)
        return WindowReport(0, lo, hi, v)
    m = traj.config.steps_per_delay(p.tau)
    end = 6 * n * m
    if end >= len(traj.times):
        raise OutOfRangeError(f"window {n} ends at t={6 * n * p.tau}, beyond t_end={traj.times[-1]}")
    proj = project(traj.states[end - m:end + 1], v)
    leaders = np.r_[0:p.k, p.N:p.N + p.h]
    vals = [proj[-1]]
    if len(leaders):
        vals.append(proj[:, leaders].ravel())
    vals = np.concatenate(vals)
    return WindowReport(n, float(vals.min()), float(vals.max()), v)


def default_vectors(d: int, n_random: int = 8, seed: int = 0) -> list:
    """Canonical basis followed by ``n_random`` seeded random unit vectors."""
    rng = np.random.default_rng(seed)
    out = list(np.eye(d))
    for _ in range(n_random):
        g = rng.normal(size=d)
        out.append(g / np.linalg.norm(g))
    return out


def max_windows(traj: Trajectory) -> int:
    """Largest ``n`` such that window ``n`` lies inside the trajectory."""
    return int(math.floor(traj.times[-1] / (6 * traj.params.tau) + 1e-9))


# -- checks ------------------------------------------------------------------

def check_hull_bounds(traj: Trajectory, v, tol: float = CHECK_TOL) -> CheckReport:
    v = _unit(v, traj.params.d)
    m0, M0 = _initial_extrema(traj.init, traj.params, v)
    proj = project(traj.states, v)
    worst = float(max(m0 - proj.min(), proj.max() - M0, 0.0))
    return CheckReport("hull_bounds", worst <= tol, worst,
                       f"m0={m0:.6g} M0={M0:.6g} v={np.round(v, 4).tolist()}")


def check_c0_bound(traj: Trajectory, tol: float = CHECK_TOL) -> CheckReport:
    c0 = compute_c0(traj.init, traj.params.tau)
    worst = float(max(np.linalg.norm(traj.states, axis=-1).max() - c0, 0.0))
    return CheckReport("c0_bound", worst <= tol, worst, f"C0={c0:.6g}")


def check_contraction(traj: Trajectory, v, n_max: Optional[int] = None,
                      tol: Optional[float] = None) -> CheckReport:
    """Check ``D_{n+1} <= (1 - Gamma_1n) D_n`` and ``D_{n+1} <= D_n`` for n < n_max."""
    p = traj.params
    v = _unit(v, p.d)
    if n_max is None:
        n_max = max_windows(traj)
    consts = theory_constants(p, traj.init, v)
    windows = [window_extrema(traj, n, v) for n in range(n_max + 1)]
    D0 = windows[0].D_n
    if tol is None:
        tol = 1e-8 * max(1.0, D0)
    M0s = consts.M0 + consts.shift
    worst = 0.0
    ok = True
    notes = []
    for w in windows:
        w.sigma_n = sigma_value(p.tau, consts.Lambda, max(w.D_n, 0.0), M0s)
        w.log_gamma_1n = log_gamma_1(p, consts.Lambda, consts.Gamma, w.sigma_n)
        w.gamma_1n = math.exp(w.log_gamma_1n)
        if w.D_n > 0 and not (math.isfinite(w.log_gamma_1n) and w.log_gamma_1n < 0):
            ok = False
            notes.append(f"Gamma_1{w.n} outside (0,1)")
    for a, b in zip(windows, windows[1:]):
        bound = (1.0 - a.gamma_1n) * a.D_n
        excess = max(b.D_n - bound, b.D_n - a.D_n)
        worst = max(worst, excess)
        if excess > tol:
            ok = False
            notes.append(f"D_{b.n}={b.D_n:.6g} exceeds bound {bound:.6g}")
    detail = f"n_max={n_max} shift={consts.shift:.6g} " + ("; ".join(notes) if notes else "ok")
    return CheckReport("contraction", ok, worst, detail, windows)


def _merge(name, reports: Sequence[CheckReport]) -> CheckReport:
    worst = max(reports, key=lambda r: r.worst)
    failed = [r for r in reports if not r.passed]
    first = failed[0] if failed else worst
    return CheckReport(name, not failed, worst.worst,
                       f"{len(reports)} directions, {len(failed)} failed; {first.detail}",
                       first.windows)


def run_checks(traj: Trajectory, vectors=None, n_windows: Optional[int] = None,
               tol: float = CHECK_TOL) -> list:
    if vectors is None:
        vectors = default_vectors(traj.params.d)
    hull = [check_hull_bounds(traj, v, tol) for v in vectors]
    checks = [_merge("hull_bounds", hull), check_c0_bound(traj, tol)]
    n = max_windows(traj) if n_windows is None else n_windows
    if n >= 1:
        checks.append(_merge("contraction", [check_contraction(traj, v, n) for v in vectors]))
    return checks


def diagnose(traj: Trajectory, vectors=None, n_windows: Optional[int] = None) -> DiagnosticsReport:
    p = traj.params
    e1 = np.eye(p.d)[0]
    checks = run_checks(traj, vectors, n_windows)
    n = max_windows(traj) if n_windows is None else n_windows
    windows = check_contraction(traj, e1, n).windows if n >= 1 else [window_extrema(traj, 0, e1)]
    return DiagnosticsReport(diameter_series(traj), theory_constants(p, traj.init, e1), windows, checks)
