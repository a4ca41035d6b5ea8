"""Preset experiments, scenario runner and one-axis parameter sweeps.

Cross couplings in the presets are constant kernels ``phi = K1``,
``phi_star = K2``; a zero strength switches that coupling off.
Initial opinions are drawn uniformly (X from ``[0, 1]^d``, Y from
``[2, 3]^d`` by default) and leaders hold their draw over ``[-tau, 0]``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import diagnostics
from .errors import InvalidArgumentError
from .integrator import IntegratorConfig, Trajectory, integrate
from .kernels import Kernel
from .model import ConstantHistory, InitialData, ModelParams

PRESET_NAMES = ("fig1a", "fig1b", "fig2a", "fig2b", "fig3_left", "fig3_right")
SWEEP_AXES = ("K1", "K2", "tau", "k", "h", "seed")
METRICS = ("time_to_threshold", "final_diameter", "consensus_value")

STEPS_PER_DELAY = 50
HORIZON_DELAYS = 40


@dataclass(frozen=True)
class InitSpec:
    """How to build initial data.

    Explicit ``x``/``y`` points (one row per agent) override the uniform
    ranges. ``x_history``/``y_history`` optionally give one
    ``SampledHistory`` per leader; otherwise leaders are constant.
    """

    x_range: tuple = (0.0, 1.0)
    y_range: tuple = (2.0, 3.0)
    x: Optional[tuple] = None
    y: Optional[tuple] = None
    x_history: Optional[tuple] = None
    y_history: Optional[tuple] = None

    def __post_init__(self):
        for name in ("x_range", "y_range"):
            lo, hi = map(float, getattr(self, name))
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise InvalidArgumentError(f"{name} must be a finite [low, high] pair")
            object.__setattr__(self, name, (lo, hi))
        for name in ("x", "y"):
            pts = getattr(self, name)
            if pts is not None:
                arr = np.asarray(pts, dtype=float)
                arr = arr[:, None] if arr.ndim == 1 else arr
                object.__setattr__(self, name, tuple(map(tuple, arr.tolist())))
        for name in ("x_history", "y_history"):
            hs = getattr(self, name)
            if hs is not None:
                object.__setattr__(self, name, tuple(hs))


@dataclass(frozen=True)
class Scenario:
    name: str
    params: ModelParams
    init: InitSpec = field(default_factory=InitSpec)
    T: float = 40.0
    dt: float = 0.02
    seed: int = 0
    interpolation: str = "cubic_hermite"

    @property
    def K1(self) -> float:
        return _strength(self.params.phi)

    @property
    def K2(self) -> float:
        return _strength(self.params.phi_star)

    @property
    def integrator_config(self) -> IntegratorConfig:
        return IntegratorConfig(self.dt, self.T, self.interpolation)

    def initial_data(self) -> InitialData:
        p = self.params
        rng = np.random.default_rng(self.seed)
        spec = self.init
        x = np.asarray(spec.x) if spec.x is not None else rng.uniform(*spec.x_range, size=(p.N, p.d))
        y = np.asarray(spec.y) if spec.y is not None else rng.uniform(*spec.y_range, size=(p.M, p.d))
        if x.shape != (p.N, p.d) or y.shape != (p.M, p.d):
            raise InvalidArgumentError(f"explicit points must have shapes ({p.N}, {p.d}) and ({p.M}, {p.d})")
        xh = spec.x_history or [ConstantHistory(pt) for pt in x[:p.k]]
        yh = spec.y_history or [ConstantHistory(pt) for pt in y[:p.h]]
        init = InitialData(xh, x[p.k:], yh, y[p.h:])
        init.validate(p)
        return init

    def with_value(self, axis: str, value) -> "Scenario":
        """Copy with one sweep axis changed.

        Changing ``tau`` rescales ``dt`` and ``T`` so the steps per delay and
        the horizon in delays stay fixed.
        """
        p = self.params
        if axis == "K1":
            return dataclasses.replace(self, params=dataclasses.replace(p, phi=constant_coupling(value)))
        if axis == "K2":
            return dataclasses.replace(self, params=dataclasses.replace(p, phi_star=constant_coupling(value)))
        if axis == "tau":
            scale = float(value) / p.tau
            return dataclasses.replace(self, params=dataclasses.replace(p, tau=float(value)),
                                       dt=self.dt * scale, T=self.T * scale)
        if axis in ("k", "h"):
            return dataclasses.replace(self, params=dataclasses.replace(p, **{axis: int(value)}))
        if axis == "seed":
            return dataclasses.replace(self, seed=int(value))
        raise InvalidArgumentError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


def _strength(kernel) -> float:
    if kernel is None:
        return 0.0
    if kernel.kind != "constant":
        raise InvalidArgumentError("coupling strength is only defined for constant cross kernels")
    return kernel.value


def constant_coupling(K: float) -> Optional[Kernel]:
    K = float(K)
    if K < 0 or not math.isfinite(K):
        raise InvalidArgumentError(f"coupling strength must be finite and >= 0, got {K}")
    return Kernel.constant(K) if K > 0 else None


def make_scenario(name, N, M, k, h, K1, K2, tau, seed=0, d=1, init=None,
                  steps_per_delay=STEPS_PER_DELAY, horizon=HORIZON_DELAYS) -> Scenario:
    params = ModelParams(N, M, k, h, tau, d, Kernel.shifted_gaussian(), Kernel.shifted_gaussian(),
                         constant_coupling(K1), constant_coupling(K2))
    return Scenario(name, params, init or InitSpec(), T=horizon * tau,
                    dt=tau / steps_per_delay, seed=seed)


_PRESETS = {
    # name: (N, M, k, h, K1, K2, default tau)
    "fig1a": (50, 5, 1, 1, 30.0, 0.3, 1.0),
    "fig1b": (50, 5, 1, 1, 1.0, 1.0, 1.0),
    "fig2a": (5, 5, 4, 1, 0.3, 30.0, 1.0),
    "fig2b": (5, 5, 4, 1, 1.0, 1.0, 1.0),
    "fig3_left": (20, 20, 20, 20, 0.3, 0.0, 5.0),
    "fig3_right": (20, 20, 4, 20, 30.0, 0.0, 5.0),
}


def preset(name: str, seed: int = 0, tau: Optional[float] = None) -> Scenario:
    key = name.replace("-", "_")
    if key not in _PRESETS:
        raise InvalidArgumentError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")
    N, M, k, h, K1, K2, tau0 = _PRESETS[key]
    return make_scenario(key, N, M, k, h, K1, K2, tau0 if tau is None else tau, seed)


def simulate(s: Scenario, backend=None) -> Trajectory:
    return integrate(s.params, s.initial_data(), s.integrator_config, backend)


def run_scenario(s: Scenario, backend=None, n_windows=None, vectors=None):
    """Integrate and diagnose; returns ``(trajectory, report)``."""
    traj = simulate(s, backend)
    return traj, diagnostics.diagnose(traj, vectors, n_windows)


# -- metrics and sweeps ------------------------------------------------------

def time_to_threshold(traj: Trajectory, eps: float) -> float:
    """First grid time with global diameter below ``eps`` (inf if never)."""
    if not eps > 0:
        raise InvalidArgumentError("threshold must be > 0")
    d = diagnostics.diameter_series(traj).d
    hit = np.flatnonzero(d < eps)
    return float(traj.times[hit[0]]) if len(hit) else math.inf


def final_diameter(traj: Trajectory) -> float:
    return diagnostics.diameters(traj.state(-1))[3]


def consensus_value(traj: Trajectory):
    """Mean of all opinions at the final node (a float when d = 1)."""
    mean = traj.states[-1].mean(axis=0)
    return float(mean[0]) if mean.shape == (1,) else mean


def metric_value(traj: Trajectory, metric: str, eps: float = 0.05):
    if metric == "time_to_threshold":
        return time_to_threshold(traj, eps)
    if metric == "final_diameter":
        return final_diameter(traj)
    if metric == "consensus_value":
        return consensus_value(traj)
    raise InvalidArgumentError(f"unknown metric {metric!r}; expected one of {METRICS}")


@dataclass(frozen=True)
class SweepSpec:
    base: Scenario
    axis: str
    values: tuple
    metric: str = "final_diameter"
    eps: float = 0.05

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise InvalidArgumentError(f"unknown sweep axis {self.axis!r}; expected one of {SWEEP_AXES}")
        if self.metric not in METRICS:
            raise InvalidArgumentError(f"unknown metric {self.metric!r}; expected one of {METRICS}")
        if not self.values:
            raise InvalidArgumentError("sweep needs at least one value")
        if not self.eps > 0:
            raise InvalidArgumentError("threshold must be > 0")
        object.__setattr__(self, "values", tuple(self.values))


def sweep(spec: SweepSpec, backend=None) -> list:
    """One run per value, in value order: ``[(value, metric), ...]``."""
    rows = []
    for value in spec.values:
        traj = simulate(spec.base.with_value(spec.axis, value), backend)
        rows.append((value, metric_value(traj, spec.metric, spec.eps)))
    return rows

