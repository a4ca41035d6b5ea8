"""Two-population Hegselmann-Krause system with delayed leader coupling.

Population X has ``N`` agents, the first ``k`` of which are leaders;
population Y has ``M`` agents with ``h`` leaders. Indices are 0-based, so
agent ``i`` of X is a leader iff ``i < k``. Leaders of X are attracted to the
Y leaders' opinions one delay ``tau`` in the past, and symmetrically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np

from . import _accel, _hot
from .errors import InvalidArgumentError
from .kernels import Kernel, evaluate, pack, sup_norm


@dataclass(frozen=True)
class ModelParams:
    N: int
    M: int
    k: int
    h: int
    tau: float
    d: int = 1
    psi: Kernel = field(default_factory=Kernel.shifted_gaussian)
    psi_star: Kernel = field(default_factory=Kernel.shifted_gaussian)
    # None switches the corresponding cross coupling off
    phi: Optional[Kernel] = None
    phi_star: Optional[Kernel] = None

    def __post_init__(self):
        for name in ("N", "M", "k", "h", "d"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise InvalidArgumentError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        object.__setattr__(self, "tau", float(self.tau))
        if self.N < 2 or self.M < 2:
            raise InvalidArgumentError("N and M must be >= 2")
        if not 0 <= self.k <= self.N:
            raise InvalidArgumentError(f"k must lie in [0, N={self.N}], got {self.k}")
        if not 0 <= self.h <= self.M:
            raise InvalidArgumentError(f"h must lie in [0, M={self.M}], got {self.h}")
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise InvalidArgumentError(f"tau must be finite and > 0, got {self.tau}")
        if self.d < 1:
            raise InvalidArgumentError("d must be >= 1")

    @property
    def kernels(self) -> tuple:
        return (self.psi, self.psi_star, self.phi, self.phi_star)

    @property
    def Lambda(self) -> float:
        """Largest sup-norm over the kernels in use."""
        return max(sup_norm(k) for k in self.kernels if k is not None)

    @property
    def n_agents(self) -> int:
        return self.N + self.M

    @cached_property
    def rhs_args(self) -> tuple:
        return (self.N, self.M, self.k, self.h) + pack(self.kernels)


@dataclass
class SystemState:
    x: np.ndarray
    y: np.ndarray
    t: Optional[float] = None

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        self.y = np.atleast_2d(np.asarray(self.y, dtype=float))
        if self.x.shape[1] != self.y.shape[1]:
            raise InvalidArgumentError("x and y must share the opinion dimension")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise InvalidArgumentError("opinions must be finite")

    @classmethod
    def from_stacked(cls, z, N, t=None):
        return cls(z[:N], z[N:], t)

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])


# -- initial histories -------------------------------------------------------

@dataclass(frozen=True)
class ConstantHistory:
    point: tuple

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(float(c) for c in np.atleast_1d(self.point)))

    def __call__(self, t):
        return np.array(self.point)

    def breakpoints(self, tau):
        return np.array([0.0])


@dataclass(frozen=True)
class SampledHistory:
    """Piecewise-linear history through ``(time, point)`` samples."""

    times: tuple
    values: tuple

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        values = tuple(tuple(float(c) for c in np.atleast_1d(v)) for v in self.values)
        if len(times) != len(values) or len(times) < 2:
            raise InvalidArgumentError("sampled history needs >= 2 (time, point) samples")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidArgumentError("history sample times must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("history samples must be finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        vals = np.asarray(self.values)
        return np.array([np.interp(t, self.times, vals[:, c]) for c in range(vals.shape[1])])

    def breakpoints(self, tau):
        inner = [t for t in self.times if -tau < t < 0]
        return np.union1d(np.linspace(-tau, 0.0, 65), inner)


History = Union[ConstantHistory, SampledHistory]


def _as_points(a) -> np.ndarray:
    # 1-D input means one scalar opinion per agent
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise InvalidArgumentError(f"points must be a (count, d) array, got shape {a.shape}")
    return a


def as_history(obj) -> History:
    if isinstance(obj, (ConstantHistory, SampledHistory)):
        return obj
    if callable(obj):
        raise InvalidArgumentError("histories must be constant or sampled; wrap samples in SampledHistory")
    return ConstantHistory(obj)


@dataclass
class InitialData:
    """Leader histories on ``[-tau, 0]`` plus non-leader points at ``t = 0``."""

    x_history: Sequence[History]
    x_point: np.ndarray
    y_history: Sequence[History]
    y_point: np.ndarray

    def __post_init__(self):
        self.x_history = tuple(as_history(f) for f in self.x_history)
        self.y_history = tuple(as_history(f) for f in self.y_history)
        self.x_point = _as_points(self.x_point)
        self.y_point = _as_points(self.y_point)
        dims = {len(f.point if isinstance(f, ConstantHistory) else f.values[0])
                for f in (*self.x_history, *self.y_history)}
        dims |= {p.shape[1] for p in (self.x_point, self.y_point) if len(p)}
        if len(dims) > 1:
            raise InvalidArgumentError(f"initial data mixes opinion dimensions {sorted(dims)}")
        d = dims.pop() if dims else 1
        self.x_point = self.x_point.reshape(-1, d)
        self.y_point = self.y_point.reshape(-1, d)

    @property
    def dim(self) -> int:
        for f in (*self.x_history, *self.y_history):
            return len(f(0.0))
        return self.x_point.shape[1]

    @classmethod
    def constant(cls, x0, y0, k, h):
        """Leaders hold their ``t = 0`` opinion over the whole history."""
        x0 = _as_points(x0)
        y0 = _as_points(y0)
        return cls([ConstantHistory(p) for p in x0[:k]], x0[k:],
                   [ConstantHistory(p) for p in y0[:h]], y0[h:])

    def validate(self, params: ModelParams):
        if len(self.x_history) != params.k or len(self.y_history) != params.h:
            raise InvalidArgumentError(
                f"expected {params.k} X and {params.h} Y leader histories, "
                f"got {len(self.x_history)} and {len(self.y_history)}")
        if len(self.x_point) != params.N - params.k or len(self.y_point) != params.M - params.h:
            raise InvalidArgumentError(
                f"expected {params.N - params.k} X and {params.M - params.h} Y initial points")
        if self.dim != params.d:
            raise InvalidArgumentError(f"initial data has dimension {self.dim}, params say d={params.d}")
        for f in (*self.x_history, *self.y_history):
            if isinstance(f, SampledHistory):
                if f.times[0] > -params.tau * (1 - 1e-12) or f.times[-1] < 0:
                    raise InvalidArgumentError("sampled histories must cover [-tau, 0]")

    def at(self, t: float) -> np.ndarray:
        """Stacked state at ``t <= 0``.

        Non-leaders have no role before ``t = 0``; their rows hold the
        ``t = 0`` point.
        """
        rows = [f(t) for f in self.x_history] + list(self.x_point)
        rows += [f(t) for f in self.y_history] + list(self.y_point)
        return np.asarray(rows, dtype=float).reshape(len(rows), self.dim)

    def initial_state(self) -> np.ndarray:
        return self.at(0.0)

    def leader_sample_times(self, tau: float) -> np.ndarray:
        """Times at which leader histories are scanned for extrema."""
        ts = [np.array([-tau, 0.0])]
        ts += [f.breakpoints(tau) for f in (*self.x_history, *self.y_history)]
        return np.unique(np.concatenate(ts))


# -- interaction weights -----------------------------------------------------

def _check_pair(i, j, n, what):
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidArgumentError(f"{what} indices ({i}, {j}) out of range for {n} agents")
    if i == j:
        raise InvalidArgumentError(f"{what} weight undefined for i == j")


def weight_a(params: ModelParams, state: SystemState, i: int, j: int) -> float:
    _check_pair(i, j, params.N, "a")
    norm = params.N + params.h - 1 if i < params.k else params.N - 1
    return evaluate(params.psi, state.x[i], state.x[j]) / norm


def weight_b(params: ModelParams, state: SystemState, i: int, j: int) -> float:
    _check_pair(i, j, params.M, "b")
    norm = params.M + params.k - 1 if i < params.h else params.M - 1
    return evaluate(params.psi_star, state.y[i], state.y[j]) / norm


def weight_eps(params: ModelParams, state: SystemState, delayed_y_j, i: int, j: int) -> float:
    """Pull of delayed Y leader ``j`` on X leader ``i``."""
    if not (0 <= i < params.k and 0 <= j < params.h):
        raise InvalidArgumentError(f"eps indices ({i}, {j}) outside leader ranges k={params.k}, h={params.h}")
    if params.phi is None:
        return 0.0
    return evaluate(params.phi, state.x[i], delayed_y_j) / (params.N + params.h - 1)


def weight_eta(params: ModelParams, state: SystemState, delayed_x_j, i: int, j: int) -> float:
    """Pull of delayed X leader ``j`` on Y leader ``i``."""
    if not (0 <= i < params.h and 0 <= j < params.k):
        raise InvalidArgumentError(f"eta indices ({i}, {j}) outside leader ranges h={params.h}, k={params.k}")
    if params.phi_star is None:
        return 0.0
    return evaluate(params.phi_star, state.y[i], delayed_x_j) / (params.M + params.k - 1)


def stacked_rhs(backend=None):
    """The compiled or vectorized right-hand side ``f(z, zd, args)``."""
    return _hot.nb_rhs if _accel.backend_name(backend) == "numba" else _hot.np_rhs


def rhs(params: ModelParams, state_now: SystemState, delayed: SystemState, backend=None) -> np.ndarray:
    """Time derivative of the stacked ``(N+M, d)`` opinion array."""
    for s in (state_now, delayed):
        if s.x.shape != (params.N, params.d) or s.y.shape != (params.M, params.d):
            raise InvalidArgumentError(
                f"state shapes {s.x.shape}, {s.y.shape} do not match N={params.N}, M={params.M}, d={params.d}")
    if state_now.t is not None and delayed.t is not None:
        if abs(state_now.t - params.tau - delayed.t) > 1e-9 * max(1.0, abs(state_now.t)):
            raise InvalidArgumentError("delayed state must sit one delay before the current state")
    return stacked_rhs(backend)(state_now.z, delayed.z, params.rhs_args)
