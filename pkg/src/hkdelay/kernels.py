"""Radial influence kernels and the bounds the consensus estimates need."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _hot
from .errors import DegenerateKernelError, InvalidArgumentError

KINDS = ("shifted_gaussian", "constant", "radial_table")

_GRID_NODES = 2049
_GOLDEN_TOL = 1e-10
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Kernel:
    """Influence function ``(p, q) -> profile(|p - q|)``.

    ``kind`` is one of ``shifted_gaussian`` (profile ``exp(-(r-1)^2)``),
    ``constant`` (needs ``value``) or ``radial_table`` (needs ``samples``,
    a sequence of ``(radius, value)`` pairs with increasing radii; linear in
    between, clamped outside).
    """

    kind: str = "shifted_gaussian"
    value: Optional[float] = None
    samples: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "constant":
            if self.value is None or not math.isfinite(self.value) or self.value <= 0:
                raise InvalidArgumentError("constant kernel needs a finite value > 0")
            object.__setattr__(self, "value", float(self.value))
        elif self.kind == "radial_table":
            if not self.samples:
                raise InvalidArgumentError("radial_table kernel needs samples")
            samples = tuple((float(r), float(v)) for r, v in self.samples)
            radii = [r for r, _ in samples]
            if any(b <= a for a, b in zip(radii, radii[1:])):
                raise InvalidArgumentError("radial_table radii must be strictly increasing")
            if any(not math.isfinite(v) or v <= 0 for _, v in samples):
                raise InvalidArgumentError("radial_table values must be finite and > 0")
            object.__setattr__(self, "samples", samples)

    @classmethod
    def shifted_gaussian(cls):
        return cls("shifted_gaussian")

    @classmethod
    def constant(cls, value):
        return cls("constant", value=value)

    @classmethod
    def radial_table(cls, samples):
        return cls("radial_table", samples=tuple(map(tuple, samples)))

    def profile(self, r):
        """Radial profile at distance(s) ``r`` (scalar or array)."""
        r = np.asarray(r, dtype=float)
        if self.kind == "constant":
            out = np.full(r.shape, self.value)
        elif self.kind == "shifted_gaussian":
            out = np.exp(-((r - 1.0) ** 2))
        else:
            rs, vs = zip(*self.samples)
            out = np.interp(r, rs, vs)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class KernelBounds:
    sup_norm: float
    inf_on_ball: float


def evaluate(kernel: Kernel, p, q) -> float:
    p = np.atleast_1d(np.asarray(p, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if p.shape != q.shape:
        raise InvalidArgumentError(f"point shapes differ: {p.shape} vs {q.shape}")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
        raise InvalidArgumentError("kernel arguments must be finite")
    return kernel.profile(float(np.linalg.norm(p - q)))


def sup_norm(kernel: Kernel) -> float:
    if kernel.kind == "constant":
        return kernel.value
    if kernel.kind == "shifted_gaussian":
        return 1.0
    return max(v for _, v in kernel.samples)


def _golden_min(f, a, b, tol=_GOLDEN_TOL):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return min(fc, fd)


def inf_on_ball(kernel: Kernel, c0: float) -> float:
    """Minimum of the kernel over pairs of points in the closed ``c0``-ball.

    Such pairs realise every distance in ``[0, 2*c0]``, so this is the
    minimum of the radial profile on that interval.
    """
    if not (c0 >= 0 and math.isfinite(c0)):
        raise InvalidArgumentError(f"c0 must be finite and >= 0, got {c0}")
    if kernel.kind == "constant":
        return kernel.value
    rmax = 2.0 * c0
    grid = np.linspace(0.0, rmax, _GRID_NODES)
    if kernel.kind == "radial_table":
        # piecewise linear: the minimum sits on a sample radius or an endpoint
        inner = [r for r, _ in kernel.samples if 0.0 < r < rmax]
        grid = np.union1d(grid, inner)
    vals = kernel.profile(grid)
    best = float(np.min(vals))
    i = int(np.argmin(vals))
    if rmax > 0:
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        best = min(best, _golden_min(lambda r: float(kernel.profile(r)), lo, hi),
                   float(kernel.profile(0.0)), float(kernel.profile(rmax)))
    if not best > 0:
        raise DegenerateKernelError(
            f"{kernel.kind} kernel reaches {best:g} on [0, {rmax:g}]; kernels must stay positive")
    return best


def bounds(kernel: Kernel, c0: float) -> KernelBounds:
    return KernelBounds(sup_norm(kernel), inf_on_ball(kernel, c0))


def pack(kernels: Sequence[Optional[Kernel]]):
    """Flatten kernel slots into arrays for the compiled right-hand side.

    A ``None`` slot becomes a zero constant, which switches that coupling off.
    """
    n = len(kernels)
    width = max([len(k.samples) for k in kernels if k is not None and k.samples] + [1])
    kinds = np.zeros(n, dtype=np.int64)
    consts = np.zeros(n)
    tab_r = np.zeros((n, width))
    tab_v = np.zeros((n, width))
    tab_len = np.ones(n, dtype=np.int64)
    for s, k in enumerate(kernels):
        if k is None:
            continue
        if k.kind == "constant":
            kinds[s], consts[s] = _hot.KIND_CONSTANT, k.value
        elif k.kind == "shifted_gaussian":
            kinds[s] = _hot.KIND_SHIFTED_GAUSSIAN
        else:
            kinds[s] = _hot.KIND_RADIAL_TABLE
            rs, vs = zip(*k.samples)
            tab_r[s, :len(rs)] = rs
            tab_v[s, :len(vs)] = vs
            tab_len[s] = len(rs)
    return kinds, consts, tab_r, tab_v, tab_len


def to_dict(kernel: Kernel) -> dict:
    out = {"kind": kernel.kind}
    if kernel.kind == "constant":
        out["value"] = kernel.value
    elif kernel.kind == "radial_table":
        out["samples"] = [list(s) for s in kernel.samples]
    return out


def from_dict(spec: dict) -> Kernel:
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind is None:
        raise InvalidArgumentError("kernel section needs a 'kind'")
    allowed = {"constant": {"value"}, "radial_table": {"samples"}}.get(kind, set())
    extra = set(spec) - allowed
    if extra:
        raise InvalidArgumentError(f"unknown kernel key(s) {sorted(extra)} for kind {kind!r}")
    if kind == "radial_table" and "samples" in spec:
        spec["samples"] = tuple(map(tuple, spec["samples"]))
    return Kernel(kind, **spec)
