"""Fixed-step RK4 for the delayed system by the method of steps.

The step ``dt`` must divide the delay, so the delayed argument at the first
and last RK4 stage lands exactly on a stored node. Only the two midpoint
stages read an interpolated history value (cubic Hermite from the stored
states and derivatives, or linear).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _accel, _hot
from .errors import BlowUpError, InvalidArgumentError, OutOfRangeError
from .model import InitialData, ModelParams, SystemState

INTERPOLATIONS = ("cubic_hermite", "linear")


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    t_end: float
    interpolation: str = "cubic_hermite"

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidArgumentError(f"dt must be finite and > 0, got {self.dt}")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise InvalidArgumentError(f"t_end must be finite and > 0, got {self.t_end}")
        if self.interpolation not in INTERPOLATIONS:
            raise InvalidArgumentError(f"interpolation must be one of {INTERPOLATIONS}")

    def steps_per_delay(self, tau: float) -> int:
        """``tau / dt`` as an integer; raises if dt does not divide tau."""
        ratio = tau / self.dt
        m = round(ratio)
        if m < 1 or abs(ratio - m) > 1e-12 * ratio:
            raise InvalidArgumentError(f"dt={self.dt!r} must equal tau/m for a positive integer m (tau={tau!r})")
        return m

    def n_steps(self) -> int:
        return max(1, math.ceil(self.t_end / self.dt - 1e-9))


class HistoryBuffer:
    """Dense record of the solution on ``[-tau, t_last]``.

    Before ``t = 0`` queries go to the initial data; afterwards they are
    exact at nodes and interpolated in between.
    """

    def __init__(self, times, states, derivs, history: Callable, tau, interpolation="cubic_hermite",
                 n_x=None):
        self.times = times
        self.states = states
        self.derivs = derivs
        self.history = history
        self.tau = tau
        self.interpolation = interpolation
        # rows belonging to population X, for splitting queries into states
        self.n_x = n_x

    @property
    def current_time(self) -> float:
        return float(self.times[-1])

    def query(self, t: float) -> np.ndarray:
        if not (-self.tau * (1 + 1e-12) <= t <= self.current_time * (1 + 1e-12)):
            raise OutOfRangeError(f"t={t} outside covered range [{-self.tau}, {self.current_time}]")
        if t <= 0:
            return self.states[0].copy() if t == 0 else np.asarray(self.history(t), dtype=float)
        i = int(np.searchsorted(self.times, t))
        if i < len(self.times) and self.times[i] == t:
            return self.states[i].copy()
        i = min(i, len(self.times) - 1)
        t0, t1 = self.times[i - 1], self.times[i]
        s0, s1 = self.states[i - 1], self.states[i]
        h = t1 - t0
        u = (t - t0) / h
        if self.interpolation == "linear":
            return (1 - u) * s0 + u * s1
        f0, f1 = self.derivs[i - 1], self.derivs[i]
        h00 = 2 * u**3 - 3 * u**2 + 1
        h10 = u**3 - 2 * u**2 + u
        h01 = -2 * u**3 + 3 * u**2
        h11 = u**3 - u**2
        return h00 * s0 + h10 * h * f0 + h01 * s1 + h11 * h * f1


@dataclass
class Trajectory:
    """Solution on the uniform grid ``0, dt, ..., n*dt``.

    ``states`` and ``derivs`` have shape ``(nodes, N+M, d)``; the first
    ``N`` rows of each node belong to population X.
    """

    params: ModelParams
    init: InitialData
    config: IntegratorConfig
    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray

    def __post_init__(self):
        for a in (self.times, self.states, self.derivs):
            a.flags.writeable = False

    @property
    def x(self) -> np.ndarray:
        return self.states[:, :self.params.N]

    @property
    def y(self) -> np.ndarray:
        return self.states[:, self.params.N:]

    @property
    def dt(self) -> float:
        return self.config.dt

    def state(self, i: int) -> SystemState:
        return SystemState.from_stacked(self.states[i], self.params.N, float(self.times[i]))

    def node_index(self, t: float) -> int:
        """Index of the grid node at time ``t`` (must be a node)."""
        i = round(t / self.dt)
        if abs(i * self.dt - t) > 1e-9 * max(1.0, abs(t)) or not 0 <= i < len(self.times):
            raise OutOfRangeError(f"t={t} is not a grid node of this trajectory")
        return i

    @property
    def history(self) -> HistoryBuffer:
        return HistoryBuffer(self.times, self.states, self.derivs, self.init.at,
                             self.params.tau, self.config.interpolation, self.params.N)

    def query(self, t: float) -> SystemState:
        return query_history(self.history, t)


def query_history(buffer: HistoryBuffer, t: float):
    """State at ``t``: a ``SystemState`` when the buffer knows ``n_x``, else the stacked array."""
    z = buffer.query(t)
    return z if buffer.n_x is None else SystemState.from_stacked(z, buffer.n_x, t)


_CUSTOM_STEPPERS = {}


def _stepper(f, backend):
    if isinstance(f, str):
        return _hot.STEPPERS[f, backend]
    key = (f, backend)
    if key not in _CUSTOM_STEPPERS:
        g = f
        if backend == "numba" and not hasattr(g, "py_func"):
            g = _accel.njit(cache=False)(g)
        _CUSTOM_STEPPERS[key] = _hot.make_stepper(g, f"step_{getattr(f, '__name__', 'custom')}",
                                                  backend == "numba", cache=False)
    return _CUSTOM_STEPPERS[key]


def solve_dde(f, args, z0, history: Callable, tau: float, config: IntegratorConfig,
              backend=None):
    """Integrate ``z' = f(z, z(t - tau), args)`` from ``z(0) = z0``.

    ``f`` is a built-in right-hand side name (``"model"``, ``"linear"``) or a
    function of ``(z, zd, args)``; with the numba backend a plain function is
    compiled on the fly. ``history(t)`` supplies ``z`` on ``[-tau, 0]``.
    Returns ``(times, states, derivs)``.
    """
    backend = _accel.backend_name(backend)
    m = config.steps_per_delay(tau)
    dt = config.dt
    n = config.n_steps()
    z0 = np.ascontiguousarray(z0, dtype=float)
    shape = z0.shape
    hist_nodes = np.array([history(-tau + i * dt) for i in range(m + 1)], dtype=float).reshape((m + 1,) + shape)
    hist_mids = np.array([history(-tau + (i + 0.5) * dt) for i in range(m)], dtype=float).reshape((m,) + shape)
    states = np.empty((n + 1,) + shape)
    derivs = np.empty((n + 1,) + shape)
    states[0] = z0
    status = _stepper(f, backend)(states, derivs, hist_nodes, hist_mids, m, dt,
                                    config.interpolation == "cubic_hermite", args)
    times = np.arange(n + 1) * dt
    if status >= 0:
        raise BlowUpError(times[status])
    return times, states, derivs


def integrate(params: ModelParams, init: InitialData, config: IntegratorConfig,
              backend=None) -> Trajectory:
    init.validate(params)
    z0 = init.initial_state()
    if not np.all(np.isfinite(z0)):
        raise InvalidArgumentError("initial data must be finite")
    times, states, derivs = solve_dde("model", params.rhs_args, z0, init.at,
                                      params.tau, config, backend)
    return Trajectory(params, init, config, times, states, derivs)
