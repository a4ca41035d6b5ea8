"""TOML run configuration.

Grammar (every section except ``[model]`` is optional)::

    name = "custom"            # label echoed into outputs
    seed = 7                   # overridden by the HKD_SEED environment variable

    [model]
    N = 5
    M = 5
    k = 4
    h = 1
    tau = 1.0
    d = 1

    [kernels.psi]              # likewise psi_star; default shifted_gaussian
    kind = "shifted_gaussian"
    [kernels.phi]              # likewise phi_star; omit to switch coupling off
    kind = "constant"
    value = 30.0
    [kernels.phi_star]
    kind = "radial_table"
    samples = [[0.0, 1.0], [2.0, 0.5]]

    [integrator]
    dt = 0.02                  # must divide tau
    t_end = 40.0
    interpolation = "cubic_hermite"   # or "linear"

    [init]
    x_range = [0.0, 1.0]       # uniform draws, used unless x / y are given
    y_range = [2.0, 3.0]
    x = [[0.1], [0.2]]         # explicit points, one row per agent
    y = [[2.5], [2.7]]
    x_history = [[[-1.0, 0.0], [0.0, 0.1]]]   # per leader: [t, p_1..p_d] rows

    [output]
    csv = "run.csv"
    svg = "run.svg"

Unknown keys are rejected with the offending key named.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass
from typing import Optional

import tomli_w

from . import kernels as _kernels
from .errors import InvalidArgumentError
from .model import ModelParams, SampledHistory
from .scenarios import HORIZON_DELAYS, STEPS_PER_DELAY, InitSpec, Scenario

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SEED_ENV = "HKD_SEED"

_TOP = {"name", "seed", "model", "kernels", "integrator", "init", "output"}
_SECTIONS = {
    "model": {"N", "M", "k", "h", "tau", "d"},
    "kernels": {"psi", "psi_star", "phi", "phi_star"},
    "integrator": {"dt", "t_end", "interpolation"},
    "init": {"x_range", "y_range", "x", "y", "x_history", "y_history"},
    "output": {"csv", "svg"},
}


class ConfigError(InvalidArgumentError):
    pass


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    csv: Optional[str] = None
    svg: Optional[str] = None


def _check_keys(table, allowed, where):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key {where}{key!r}")


def _history_from_rows(rows):
    return SampledHistory(tuple(r[0] for r in rows), tuple(tuple(r[1:]) for r in rows))


def _history_rows(hist: SampledHistory):
    return [[t, *p] for t, p in zip(hist.times, hist.values)]


def from_dict(data: dict, env_seed: bool = True) -> RunConfig:
    _check_keys(data, _TOP, "")
    for sec, allowed in _SECTIONS.items():
        if sec in data:
            if not isinstance(data[sec], dict):
                raise ConfigError(f"[{sec}] must be a table")
            _check_keys(data[sec], allowed, f"{sec}.")
    if "model" not in data:
        raise ConfigError("missing [model] section")
    model = data["model"]
    for key in ("N", "M", "k", "h", "tau"):
        if key not in model:
            raise ConfigError(f"missing key model.{key!r}")
    kern = {}
    for slot, spec in data.get("kernels", {}).items():
        try:
            kern[slot] = _kernels.from_dict(spec)
        except InvalidArgumentError as exc:
            raise ConfigError(f"kernels.{slot}: {exc}") from exc
    params = ModelParams(model["N"], model["M"], model["k"], model["h"], model["tau"],
                         model.get("d", 1),
                         kern.get("psi", _kernels.Kernel.shifted_gaussian()),
                         kern.get("psi_star", _kernels.Kernel.shifted_gaussian()),
                         kern.get("phi"), kern.get("phi_star"))
    integ = data.get("integrator", {})
    init = dict(data.get("init", {}))
    for key in ("x_history", "y_history"):
        if key in init:
            init[key] = tuple(_history_from_rows(rows) for rows in init[key])
    seed = data.get("seed", 0)
    if env_seed and os.environ.get(SEED_ENV):
        seed = os.environ[SEED_ENV]
    try:
        seed = int(seed)
    except ValueError as exc:
        raise ConfigError(f"seed must be an integer, got {seed!r}") from exc
    scenario = Scenario(
        name=str(data.get("name", "custom")),
        params=params,
        init=InitSpec(**init),
        T=float(integ.get("t_end", HORIZON_DELAYS * params.tau)),
        dt=float(integ.get("dt", params.tau / STEPS_PER_DELAY)),
        seed=seed,
        interpolation=integ.get("interpolation", "cubic_hermite"),
    )
    # surface dt / interpolation problems at load time
    scenario.integrator_config.steps_per_delay(params.tau)
    out = data.get("output", {})
    return RunConfig(scenario, out.get("csv"), out.get("svg"))


def to_dict(cfg: RunConfig) -> dict:
    s = cfg.scenario
    p = s.params
    kern = {slot: _kernels.to_dict(k) for slot, k in zip(("psi", "psi_star", "phi", "phi_star"), p.kernels)
            if k is not None}
    init = {"x_range": list(s.init.x_range), "y_range": list(s.init.y_range)}
    for key in ("x", "y"):
        pts = getattr(s.init, key)
        if pts is not None:
            init[key] = [list(r) for r in pts]
    for key in ("x_history", "y_history"):
        hs = getattr(s.init, key)
        if hs is not None:
            init[key] = [_history_rows(hh) for hh in hs]
    out = {"name": s.name, "seed": s.seed,
           "model": {"N": p.N, "M": p.M, "k": p.k, "h": p.h, "tau": p.tau, "d": p.d},
           "kernels": kern,
           "integrator": {"dt": s.dt, "t_end": s.T, "interpolation": s.interpolation},
           "init": init}
    output = {k: v for k, v in (("csv", cfg.csv), ("svg", cfg.svg)) if v is not None}
    if output:
        out["output"] = output
    return out


def parse(text: str, env_seed: bool = True) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    return from_dict(data, env_seed)


def render(cfg: RunConfig) -> str:
    return tomli_w.dumps(to_dict(cfg))


def load(path, env_seed: bool = True) -> RunConfig:
    with open(path, "rb") as fh:
        raw = fh.read()
    return parse(raw.decode("utf-8"), env_seed)
