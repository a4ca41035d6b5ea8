import math

import numpy as np
import pytest

from hkdelay import diagnostics as dg
from hkdelay.errors import InvalidArgumentError, OutOfRangeError
from hkdelay.integrator import IntegratorConfig, integrate
from hkdelay.kernels import Kernel
from hkdelay.model import ConstantHistory, InitialData, ModelParams, SampledHistory, SystemState

from oracles import brute_window, random_config

ONE = Kernel.constant(1.0)
GAMMA_1_N2 = 3.0919e-6  # (1/128) e^-6 (1 - e^-1)^4, frozen from a hand evaluation


def test_diameters_examples():
    assert dg.diameters(SystemState([[1.0], [1.0]], [[1.0], [1.0]])) == (0, 0, 0, 0)
    assert dg.diameters(SystemState([[0.0], [1.0]], [[5.0], [5.0]])) == (1, 0, 5, 5)
    assert dg.diameters(SystemState([[0.0], [2.0]], [[1.0], [1.0]]))[3] == 2


def test_diameter_series_consistent():
    p, init = random_config(4)
    traj = integrate(p, init, IntegratorConfig(p.tau / 10, 2 * p.tau))
    ds = dg.diameter_series(traj)
    assert np.array_equal(ds.d, np.maximum.reduce([ds.d_X, ds.d_Y, ds.d_cross]))
    for i in (0, 5, len(traj.times) - 1):
        assert dg.diameters(traj.state(i))[3] == ds.d[i]


def test_compute_c0_examples():
    zero = InitialData.constant([0.0, 0.0], [0.0, 0.0], 1, 1)
    assert dg.compute_c0(zero, 1.0) == 0
    init = InitialData([ConstantHistory([1.0])], [[-3.0]], [ConstantHistory([1.0])], [[2.0]])
    assert dg.compute_c0(init, 1.0) == 3
    ramp = SampledHistory((-1.0, 0.0), ((-2.0,), (1.0,)))
    init = InitialData([ramp], [[0.0]], [], [[0.0], [0.0]])
    assert dg.compute_c0(init, 1.0) == 2


def test_theory_constants_examples():
    p = ModelParams(3, 3, 1, 1, 5.0, phi=Kernel.constant(0.3), phi_star=Kernel.constant(0.3))
    init = InitialData.constant([0.0, 1.0, 2.0], [0.5, 1.5, 2.0], 1, 1)
    tc = dg.theory_constants(p, init)
    assert tc.Lambda == 1.0
    assert tc.shift == 1.0 and tc.m0 == 0.0 and tc.M0 == 2.0
    # shifted projections m0 = 1, M0 = 3, Lambda = 1, tau = 5 -> sigma = 2/12
    assert tc.sigma == pytest.approx(1 / 6)
    ones = ModelParams(3, 3, 1, 1, 1.0, psi=ONE, psi_star=ONE, phi=ONE, phi_star=ONE)
    assert dg.theory_constants(ones, init).Gamma == 1.0
    flat = InitialData.constant([1.0] * 3, [1.0] * 3, 1, 1)
    tc = dg.theory_constants(ones, flat)
    assert tc.consensus_at_start and tc.sigma == 1.0


def test_gamma_1_examples():
    p2 = ModelParams(2, 2, 1, 1, 1.0)
    g = dg.gamma_1(p2, 1.0, 1.0, 1.0)
    assert g == pytest.approx(GAMMA_1_N2, rel=1e-4)
    assert g == pytest.approx(math.exp(-6) * (1 - math.exp(-1)) ** 4 / 128, rel=1e-12)
    p4 = ModelParams(4, 4, 1, 1, 1.0)
    assert dg.gamma_1(p4, 1.0, 1.0, 1.0) == pytest.approx(g / 16, rel=1e-12)
    assert dg.gamma_1(p2, 1.0, 1e-8, 1.0) < dg.gamma_1(p2, 1.0, 1e-4, 1.0) < g
    assert dg.gamma_1(p2, 1.0, 1.0, 0.0) == 0.0


def test_log_gamma_1_survives_underflow():
    p = ModelParams(20, 20, 4, 20, 5.0)
    lg = dg.log_gamma_1(p, 30.0, 1e-4, 0.01)
    assert math.isfinite(lg) and lg < -900
    assert dg.gamma_1(p, 30.0, 1e-4, 0.01) == 0.0


def test_window_zero_example():
    init = InitialData([ConstantHistory([0.0]), ConstantHistory([1.0])], [[2.0]], [], [[1.0], [1.0]])
    p = ModelParams(3, 2, 2, 0, 1.0)
    traj = integrate(p, init, IntegratorConfig(0.1, 1.0))
    w = dg.window_extrema(traj, 0, [1.0])
    assert (w.m_n, w.M_n, w.D_n) == (0.0, 2.0, 2.0)


def test_window_constant_trajectory():
    init = InitialData.constant([0.4] * 3, [0.4] * 3, 1, 1)
    traj = integrate(ModelParams(3, 3, 1, 1, 1.0, phi=ONE), init, IntegratorConfig(0.1, 12.0))
    for n in (0, 1, 2):
        w = dg.window_extrema(traj, n, [1.0])
        assert w.m_n == w.M_n == 0.4
    with pytest.raises(OutOfRangeError):
        dg.window_extrema(traj, 3, [1.0])


@pytest.mark.parametrize("seed", range(6))
def test_window_matches_brute_force(seed):
    p, init = random_config(seed)
    traj = integrate(p, init, IntegratorConfig(p.tau / 10, 12 * p.tau))
    for v in dg.default_vectors(p.d, 2, seed):
        for n in range(3):
            w = dg.window_extrema(traj, n, v)
            assert (w.m_n, w.M_n) == brute_window(traj, n, v)


def test_direction_validation():
    p, init = random_config(0)
    traj = integrate(p, init, IntegratorConfig(p.tau / 10, p.tau))
    with pytest.raises(InvalidArgumentError):
        dg.window_extrema(traj, 0, np.ones(p.d) * 2)
    with pytest.raises(InvalidArgumentError):
        dg.window_extrema(traj, 0, np.ones(p.d + 1) / math.sqrt(p.d + 1))


def test_checks_on_two_agent_decay():
    p = ModelParams(2, 2, 0, 0, 1.0, psi=ONE, psi_star=ONE)
    init = InitialData.constant([0.0, 1.0], [0.0, 1.0], 0, 0)
    traj = integrate(p, init, IntegratorConfig(0.05, 24.0))
    hull = dg.check_hull_bounds(traj, [1.0])
    assert hull.passed and hull.worst == 0.0
    c0 = dg.check_c0_bound(traj)
    assert c0.passed and "C0=1" in c0.detail
    con = dg.check_contraction(traj, [1.0], 4)
    assert con.passed
    D = [w.D_n for w in con.windows]
    assert all(b <= a for a, b in zip(D, D[1:]))
    assert all(0 < w.gamma_1n < 1 for w in con.windows)


def test_checks_flag_violations():
    # a trajectory whose states are edited to leave the hull must fail
    p, init = random_config(2)
    traj = integrate(p, init, IntegratorConfig(p.tau / 10, 12 * p.tau))
    states = traj.states.copy()
    states[-1, 0] += 10.0
    bad = type(traj)(traj.params, traj.init, traj.config, traj.times.copy(), states, traj.derivs.copy())
    assert not dg.check_hull_bounds(bad, np.eye(p.d)[0]).passed
    assert not dg.check_c0_bound(bad).passed
    assert not dg.check_contraction(bad, np.eye(p.d)[0], 2).passed


def test_diagnose_report():
    p = ModelParams(5, 5, 4, 1, 1.0, phi=Kernel.constant(0.3), phi_star=Kernel.constant(30.0))
    rng = np.random.default_rng(0)
    init = InitialData.constant(rng.uniform(0, 1, 5), rng.uniform(2, 3, 5), 4, 1)
    report = dg.diagnose(integrate(p, init, IntegratorConfig(0.02, 24.0)))
    assert report.passed
    assert [c.name for c in report.checks] == ["hull_bounds", "c0_bound", "contraction"]
    assert len(report.windows) == 5
    assert report.constants.shift > 0
