import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hkdelay import kernels as K
from hkdelay.errors import DegenerateKernelError, InvalidArgumentError
from hkdelay.kernels import Kernel

SG = Kernel.shifted_gaussian()
TABLE = Kernel.radial_table([(0.0, 0.5), (1.0, 0.8)])


def test_evaluate_examples():
    assert K.evaluate(SG, [0.3], [0.3]) == pytest.approx(math.exp(-1), abs=1e-15)
    assert K.evaluate(Kernel.constant(0.3), [1.0, 2.0], [-4.0, 7.0]) == 0.3
    assert K.evaluate(SG, [0.0, 0.0], [0.6, 0.8]) == pytest.approx(1.0, abs=1e-15)


def test_evaluate_rejects_non_finite():
    with pytest.raises(InvalidArgumentError):
        K.evaluate(SG, [np.nan], [0.0])
    with pytest.raises(InvalidArgumentError):
        K.evaluate(SG, [0.0], [np.inf])


def test_sup_norm_examples():
    assert K.sup_norm(SG) == 1.0
    assert K.sup_norm(Kernel.constant(30)) == 30
    assert K.sup_norm(TABLE) == 0.8


def test_table_interpolates_and_clamps():
    assert TABLE.profile(0.5) == pytest.approx(0.65)
    assert TABLE.profile(7.0) == 0.8
    t = Kernel.radial_table([(0.5, 2.0), (1.0, 1.0)])
    assert t.profile(0.0) == 2.0


def test_inf_on_ball_examples():
    assert K.inf_on_ball(Kernel.constant(0.3), 5.0) == 0.3
    assert K.inf_on_ball(SG, 0.25) == pytest.approx(math.exp(-1), abs=1e-10)
    assert K.inf_on_ball(SG, 2.0) == pytest.approx(math.exp(-9), abs=1e-10)


def test_inf_on_ball_matches_dense_grid():
    # a profile whose minimum sits strictly inside the range
    t = Kernel.radial_table([(0.0, 1.0), (0.7, 0.2), (2.0, 0.9)])
    r = np.linspace(0, 3, 300001)
    assert K.inf_on_ball(t, 1.5) == pytest.approx(t.profile(r).min(), abs=1e-10)


def test_inf_on_ball_degenerate():
    # a table cannot be built with zero values, so a tiny positive one stands in
    with pytest.raises(InvalidArgumentError):
        Kernel.radial_table([(0.0, 1.0), (1.0, 0.0)])
    assert K.inf_on_ball(Kernel.radial_table([(0.0, 1.0), (1.0, 1e-300)]), 1.0) > 0
    with pytest.raises(DegenerateKernelError):
        K.inf_on_ball(SG, 1e6)  # exp(-(2e6-1)^2) underflows to zero


def test_invalid_construction():
    with pytest.raises(InvalidArgumentError):
        Kernel("triangle")
    with pytest.raises(InvalidArgumentError):
        Kernel.constant(0.0)
    with pytest.raises(InvalidArgumentError):
        Kernel.radial_table([(1.0, 1.0), (0.5, 1.0)])


def test_dict_round_trip_and_unknown_keys():
    for k in (SG, Kernel.constant(2.5), TABLE):
        assert K.from_dict(K.to_dict(k)) == k
    with pytest.raises(InvalidArgumentError, match="width"):
        K.from_dict({"kind": "constant", "value": 1.0, "width": 2})


def test_pack_none_is_zero_constant():
    kinds, consts, *_ = K.pack([SG, Kernel.constant(2.0), None, TABLE])
    assert kinds.tolist() == [1, 0, 0, 2]
    assert consts.tolist() == [0.0, 2.0, 0.0, 0.0]


kernel_st = st.one_of(
    st.just(SG),
    st.floats(0.01, 50).map(Kernel.constant),
    st.lists(st.tuples(st.floats(0, 5), st.floats(0.01, 5)), min_size=2, max_size=6,
             unique_by=lambda s: s[0]).map(lambda s: Kernel.radial_table(sorted(s))),
)
point = st.lists(st.floats(-3, 3), min_size=2, max_size=2)


@settings(max_examples=200, deadline=None)
@given(kernel_st, point, point)
def test_symmetry_and_bounds(k, p, q):
    v = K.evaluate(k, p, q)
    assert v == K.evaluate(k, q, p)
    c0 = max(np.linalg.norm(p), np.linalg.norm(q))
    assert 0 < K.inf_on_ball(k, c0) <= v + 1e-10
    assert v <= K.sup_norm(k)


@settings(max_examples=100, deadline=None)
@given(kernel_st, st.floats(0, 3), st.floats(0, 3))
def test_inf_on_ball_monotone(k, a, b):
    lo, hi = sorted((a, b))
    assert K.inf_on_ball(k, hi) <= K.inf_on_ball(k, lo) + 1e-10
