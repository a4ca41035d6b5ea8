import re

import numpy as np
import pytest

from hkdelay import config, io, scenarios
from hkdelay.config import ConfigError, RunConfig
from hkdelay.errors import InvalidArgumentError
from hkdelay.integrator import IntegratorConfig, integrate
from hkdelay.kernels import Kernel
from hkdelay.model import InitialData, ModelParams, SampledHistory
from hkdelay.scenarios import InitSpec, Scenario

from oracles import random_config

FULL = """
name = "mixed"
seed = 4

[model]
N = 3
M = 2
k = 1
h = 1
tau = 1.0
d = 1

[kernels.psi]
kind = "constant"
value = 2.0

[kernels.phi_star]
kind = "radial_table"
samples = [[0.0, 1.0], [2.0, 0.5]]

[integrator]
dt = 0.1
t_end = 3.0
interpolation = "linear"

[init]
x = [[0.1], [0.2], [0.3]]
y = [[2.0], [2.5]]
x_history = [[[-1.0, 0.0], [0.0, 0.1]]]

[output]
csv = "run.csv"
"""


def test_parse_full_grammar(monkeypatch):
    monkeypatch.delenv(config.SEED_ENV, raising=False)
    cfg = config.parse(FULL)
    s = cfg.scenario
    assert s.name == "mixed" and s.seed == 4 and cfg.csv == "run.csv"
    assert s.params.psi == Kernel.constant(2.0) and s.params.phi is None
    assert s.params.phi_star.samples == ((0.0, 1.0), (2.0, 0.5))
    assert s.interpolation == "linear"
    assert isinstance(s.init.x_history[0], SampledHistory)
    init = s.initial_data()
    assert init.at(-1.0)[0, 0] == 0.0 and init.at(0.0)[0, 0] == 0.1


def test_round_trip(monkeypatch):
    monkeypatch.delenv(config.SEED_ENV, raising=False)
    for cfg in (config.parse(FULL), RunConfig(scenarios.preset("fig3_right", seed=9), svg="a.svg")):
        assert config.parse(config.render(cfg)) == cfg
    p, _ = random_config(5)
    cfg = RunConfig(Scenario("custom", p, InitSpec(), T=4 * p.tau, dt=p.tau / 8))
    assert config.parse(config.render(cfg)) == cfg


def test_defaults(monkeypatch):
    monkeypatch.delenv(config.SEED_ENV, raising=False)
    s = config.parse("[model]\nN = 4\nM = 3\nk = 1\nh = 1\ntau = 2.0\n").scenario
    assert s.dt == 2.0 / 50 and s.T == 80.0 and s.seed == 0
    assert s.params.psi.kind == "shifted_gaussian"


def test_seed_env_override(monkeypatch):
    monkeypatch.setenv(config.SEED_ENV, "123")
    assert config.parse(FULL).scenario.seed == 123
    assert config.parse(FULL, env_seed=False).scenario.seed == 4
    monkeypatch.setenv(config.SEED_ENV, "abc")
    with pytest.raises(ConfigError, match="seed"):
        config.parse(FULL)


@pytest.mark.parametrize("text, key", [
    (FULL.replace("d = 1", "d = 1\nbeta = 2"), "model.'beta'"),
    (FULL + "\ncolour = 'red'\n", "'colour'"),
    (FULL.replace('csv = "run.csv"', 'png = "x.png"'), "output.'png'"),
    (FULL.replace('kind = "constant"', 'kind = "constant"\nwidth = 1'), "width"),
])
def test_unknown_keys_named(text, key):
    with pytest.raises(ConfigError, match=re.escape(key)):
        config.parse(text)


def test_config_errors():
    with pytest.raises(ConfigError, match="model"):
        config.parse("seed = 1\n")
    with pytest.raises(ConfigError, match="tau"):
        config.parse("[model]\nN = 4\nM = 3\nk = 1\nh = 1\n")
    with pytest.raises(InvalidArgumentError, match="dt"):
        config.parse(FULL.replace("dt = 0.1", "dt = 0.3"))
    with pytest.raises(ConfigError, match="TOML"):
        config.parse("[model\n")


def _traj(d=1):
    p = ModelParams(3, 2, 1, 1, 1.0, d=d, phi=Kernel.constant(1.0))
    rng = np.random.default_rng(0)
    init = InitialData.constant(rng.uniform(0, 1, (3, d)), rng.uniform(2, 3, (2, d)), 1, 1)
    return integrate(p, init, IntegratorConfig(0.1, 2.0))


@pytest.mark.parametrize("d", [1, 3])
def test_csv_round_trip_exact(tmp_path, d):
    traj = _traj(d)
    path = tmp_path / "t.csv"
    io.write_csv(traj, path)
    times, states, meta = io.read_csv(path)
    assert np.array_equal(times, traj.times) and np.array_equal(states, traj.states)
    assert meta["N"] == 3 and meta["d"] == d and meta["phi"] == {"kind": "constant", "value": 1.0}
    lines = path.read_text().splitlines()
    header = next(line for line in lines if not line.startswith("#"))
    cols = header.split(",")
    assert cols[0] == "t" and cols[1] == "x_1" and cols[3 * d] == f"x_{3 * d}" and cols[-1] == f"y_{2 * d}"
    body = [line for line in lines if not line.startswith("#")][1:]
    assert len(body) == len(traj.times) and all(len(r.split(",")) == 1 + 5 * d for r in body)


def test_csv_header_echoes_run(tmp_path):
    s = scenarios.preset("fig2a", seed=3)
    traj = scenarios.simulate(s)
    path = tmp_path / "f.csv"
    io.write_csv(traj, path, io.run_metadata(traj, s, "numba"))
    _, _, meta = io.read_csv(path)
    for key in ("name", "seed", "N", "M", "k", "h", "tau", "d", "psi", "psi_star", "phi", "phi_star",
                "dt", "t_end", "interpolation", "x_range", "y_range", "backend"):
        assert key in meta
    assert meta["seed"] == 3 and meta["phi_star"]["value"] == 30.0


def _polylines(svg):
    return re.findall(r'<polyline [^>]*points="([^"]*)"', svg)


def test_svg_structure(tmp_path):
    s = scenarios.preset("fig1a", seed=7)
    traj = scenarios.simulate(s)
    path = tmp_path / "f.svg"
    io.write_svg(traj, path, title="fig1a")
    svg = path.read_text()
    assert svg.startswith("<svg") and "time t" in svg and "opinion" in svg
    assert len(_polylines(svg)) == 55
    assert svg.count('class="Y"') == 5 and svg.count("stroke-dasharray") == 5


def test_svg_constant_lines_are_horizontal(tmp_path):
    p = ModelParams(2, 2, 1, 1, 1.0)
    traj = integrate(p, InitialData.constant([1.0, 1.0], [1.0, 1.0], 1, 1), IntegratorConfig(0.1, 1.0))
    io.write_svg(traj, tmp_path / "c.svg")
    for pts in _polylines((tmp_path / "c.svg").read_text()):
        ys = {xy.split(",")[1] for xy in pts.split()}
        assert len(ys) == 1


def test_svg_two_agent_decay_meets_at_half(tmp_path):
    p = ModelParams(2, 2, 0, 0, 1.0, psi=Kernel.constant(1.0), psi_star=Kernel.constant(1.0))
    init = InitialData.constant([0.0, 1.0], [0.0, 1.0], 0, 0)
    traj = integrate(p, init, IntegratorConfig(0.05, 10.0))
    io.write_svg(traj, tmp_path / "d.svg")
    lines = _polylines((tmp_path / "d.svg").read_text())
    ends = {ln.split()[-1].split(",")[1] for ln in lines}
    assert len(ends) == 1  # all curves meet at the same pixel height (0.5 here)


def test_svg_rejects_multi_d(tmp_path):
    with pytest.raises(InvalidArgumentError, match="CSV"):
        io.write_svg(_traj(2), tmp_path / "x.svg")
