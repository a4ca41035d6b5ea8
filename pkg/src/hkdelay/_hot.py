"""Hot numeric kernels: radial profiles, the coupled right-hand side and the
RK4 method-of-steps loop.

Each piece exists twice. The ``nb_*`` functions are explicit loops compiled
with numba; the ``np_*`` functions are vectorized numpy. The stepping loop is
written once (``_step_template``) and bound to each right-hand side; the
numba copies are compiled, the numpy copies run in the interpreter.

Kernel slots are packed into flat arrays so they can cross the numba
boundary: index 0 = psi, 1 = psi_star, 2 = phi, 3 = phi_star.
"""

import math
import types

import numpy as np

from ._accel import njit

KIND_CONSTANT = 0
KIND_SHIFTED_GAUSSIAN = 1
KIND_RADIAL_TABLE = 2

PSI, PSI_STAR, PHI, PHI_STAR = 0, 1, 2, 3

BLOWUP_LIMIT = 1e12


# -- radial profiles ---------------------------------------------------------

def np_profile(slot, r, kinds, consts, tab_r, tab_v, tab_len):
    kind = kinds[slot]
    if kind == KIND_CONSTANT:
        return np.full(np.shape(r), consts[slot])
    if kind == KIND_SHIFTED_GAUSSIAN:
        return np.exp(-((r - 1.0) ** 2))
    n = tab_len[slot]
    return np.interp(r, tab_r[slot, :n], tab_v[slot, :n])


@njit
def nb_profile(slot, r, kinds, consts, tab_r, tab_v, tab_len):
    kind = kinds[slot]
    if kind == KIND_CONSTANT:
        return consts[slot]
    if kind == KIND_SHIFTED_GAUSSIAN:
        return math.exp(-((r - 1.0) ** 2))
    n = tab_len[slot]
    if r <= tab_r[slot, 0]:
        return tab_v[slot, 0]
    if r >= tab_r[slot, n - 1]:
        return tab_v[slot, n - 1]
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tab_r[slot, mid] <= r:
            lo = mid
        else:
            hi = mid
    r0 = tab_r[slot, lo]
    r1 = tab_r[slot, hi]
    w = (r - r0) / (r1 - r0)
    return (1.0 - w) * tab_v[slot, lo] + w * tab_v[slot, hi]


# -- right-hand side ---------------------------------------------------------
#
# z holds the N opinions of X followed by the M opinions of Y, shape (N+M, d).
# zd holds the delayed state; only its leader rows are read.

def np_rhs(z, zd, args):
    N, M, k, h, kinds, consts, tab_r, tab_v, tab_len = args
    x = z[:N]
    y = z[N:]
    out = np.empty_like(z)

    norm_x = np.full(N, 1.0 / (N - 1))
    norm_x[:k] = 1.0 / (N + h - 1)
    diff = x[None, :, :] - x[:, None, :]
    w = np_profile(PSI, np.sqrt((diff * diff).sum(-1)), kinds, consts, tab_r, tab_v, tab_len)
    np.fill_diagonal(w, 0.0)
    out[:N] = np.einsum("ij,ijc->ic", w * norm_x[:, None], diff)

    norm_y = np.full(M, 1.0 / (M - 1))
    norm_y[:h] = 1.0 / (M + k - 1)
    diff = y[None, :, :] - y[:, None, :]
    w = np_profile(PSI_STAR, np.sqrt((diff * diff).sum(-1)), kinds, consts, tab_r, tab_v, tab_len)
    np.fill_diagonal(w, 0.0)
    out[N:] = np.einsum("ij,ijc->ic", w * norm_y[:, None], diff)

    if k > 0 and h > 0:
        yd = zd[N:N + h]
        xd = zd[:k]
        diff = yd[None, :, :] - x[:k, None, :]
        w = np_profile(PHI, np.sqrt((diff * diff).sum(-1)), kinds, consts, tab_r, tab_v, tab_len)
        out[:k] += np.einsum("ij,ijc->ic", w, diff) / (N + h - 1)
        diff = xd[None, :, :] - y[:h, None, :]
        w = np_profile(PHI_STAR, np.sqrt((diff * diff).sum(-1)), kinds, consts, tab_r, tab_v, tab_len)
        out[N:N + h] += np.einsum("ij,ijc->ic", w, diff) / (M + k - 1)
    return out


@njit
def nb_profile_inplace(slot, r, kinds, consts, tab_r, tab_v, tab_len):
    # branch on the kernel kind once, outside the element loop
    flat = r.ravel()
    kind = kinds[slot]
    if kind == KIND_CONSTANT:
        flat[:] = consts[slot]
    elif kind == KIND_SHIFTED_GAUSSIAN:
        for i in range(flat.size):
            u = flat[i] - 1.0
            flat[i] = math.exp(-u * u)
    else:
        for i in range(flat.size):
            flat[i] = nb_profile(slot, flat[i], kinds, consts, tab_r, tab_v, tab_len)


@njit
def _nb_block(out, src, tgt, n_src, n_tgt, skip_diag, slot, row_scale, args):
    # out[i] += row_scale[i] * sum_j profile(|tgt_j - src_i|) * (tgt_j - src_i)
    kinds, consts, tab_r, tab_v, tab_len = args
    d = src.shape[1]
    w = np.empty((n_src, n_tgt))
    for i in range(n_src):
        for j in range(n_tgt):
            r2 = 0.0
            for c in range(d):
                u = tgt[j, c] - src[i, c]
                r2 += u * u
            w[i, j] = math.sqrt(r2)
    nb_profile_inplace(slot, w, kinds, consts, tab_r, tab_v, tab_len)
    for i in range(n_src):
        for j in range(n_tgt):
            if skip_diag and i == j:
                continue
            wij = row_scale[i] * w[i, j]
            for c in range(d):
                out[i, c] += wij * (tgt[j, c] - src[i, c])


@njit
def nb_rhs(z, zd, args):
    N, M, k, h = args[0], args[1], args[2], args[3]
    kargs = (args[4], args[5], args[6], args[7], args[8])
    x = z[:N]
    y = z[N:]
    out = np.zeros_like(z)
    ox = out[:N]
    oy = out[N:]
    scale = np.empty(N)
    for i in range(N):
        scale[i] = 1.0 / (N + h - 1) if i < k else 1.0 / (N - 1)
    _nb_block(ox, x, x, N, N, True, PSI, scale, kargs)
    scale = np.empty(M)
    for i in range(M):
        scale[i] = 1.0 / (M + k - 1) if i < h else 1.0 / (M - 1)
    _nb_block(oy, y, y, M, M, True, PSI_STAR, scale, kargs)
    if k > 0 and h > 0:
        _nb_block(ox, x, zd[N:], k, h, False, PHI, np.full(k, 1.0 / (N + h - 1)), kargs)
        _nb_block(oy, y, zd, h, k, False, PHI_STAR, np.full(h, 1.0 / (M + k - 1)), kargs)
    return out


# -- RK4 method of steps -----------------------------------------------------

def _step_template(states, derivs, hist_nodes, hist_mids, m, dt, hermite, args):
    """Fill ``states[1:]`` and ``derivs`` in place.

    ``m`` is the number of steps per delay. ``hist_nodes[i]`` is the initial
    history at ``-tau + i*dt`` (i = 0..m) and ``hist_mids[i]`` at the midpoint
    of that history cell. Returns -1 on success, otherwise the index of the
    node where the state blew up. ``RHS`` is bound per copy by ``make_stepper``.
    """
    n_steps = states.shape[0] - 1
    for n in range(n_steps + 1):
        jd = n - m
        zd0 = states[jd] if jd >= 0 else hist_nodes[jd + m]
        k1 = RHS(states[n], zd0, args)  # noqa: F821
        derivs[n] = k1
        if n == n_steps:
            break
        zd1 = states[jd + 1] if jd + 1 >= 0 else hist_nodes[jd + 1 + m]
        if jd < 0:
            zmid = hist_mids[jd + m]
        elif hermite:
            zmid = 0.5 * (states[jd] + states[jd + 1]) + (dt / 8.0) * (derivs[jd] - derivs[jd + 1])
        else:
            zmid = 0.5 * (states[jd] + states[jd + 1])
        z = states[n]
        k2 = RHS(z + (0.5 * dt) * k1, zmid, args)  # noqa: F821
        k3 = RHS(z + (0.5 * dt) * k2, zmid, args)  # noqa: F821
        k4 = RHS(z + dt * k3, zd1, args)  # noqa: F821
        znew = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[n + 1] = znew
        worst = np.max(np.abs(znew))
        if not (worst <= BLOWUP_LIMIT):
            return n + 1
    return -1


def make_stepper(rhs, name, jit, cache=True):
    """Copy of the stepping loop with ``rhs`` bound as the global ``RHS``.

    Binding by global rather than passing the function as an argument keeps
    numba's on-disk cache usable; ``name`` keys that cache, so only the
    built-in right-hand sides should set ``cache``.
    """
    g = dict(_step_template.__globals__)
    g["RHS"] = rhs
    fn = types.FunctionType(_step_template.__code__, g, name)
    fn.__qualname__ = name
    fn.__doc__ = _step_template.__doc__
    return njit(fn, cache=cache) if jit else fn


def linear_delay_rhs(z, zd, args):
    """``z' = a*z + b*z(t - tau)``; used to check the stepper on closed forms."""
    a, b = args
    return a * z + b * zd


nb_linear_delay_rhs = njit(linear_delay_rhs)

STEPPERS = {
    ("model", "numba"): make_stepper(nb_rhs, "step_model_numba", True),
    ("model", "numpy"): make_stepper(np_rhs, "step_model_numpy", False),
    ("linear", "numba"): make_stepper(nb_linear_delay_rhs, "step_linear_numba", True),
    ("linear", "numpy"): make_stepper(linear_delay_rhs, "step_linear_numpy", False),
}
