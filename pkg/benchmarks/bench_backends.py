"""Compare the numba and numpy backends on the preset experiments.

    python benchmarks/bench_backends.py [--repeat 3] [--presets fig1a fig3_left]

The first numba call of a process loads (or compiles) the cached kernels;
it is timed separately and excluded from the per-run figures.
"""

import argparse
import time

import numpy as np

from hkdelay import model, scenarios
from hkdelay.scenarios import PRESET_NAMES


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_rhs(s, repeat):
    p = s.params
    init = s.initial_data()
    z, zd = init.initial_state(), init.at(-p.tau)
    args = p.rhs_args
    rows = {}
    for backend in ("numba", "numpy"):
        f = model.stacked_rhs(backend)
        f(z, zd, args)
        best, _ = _best(lambda: [f(z, zd, args) for _ in range(1000)], repeat)
        rows[backend] = best / 1000
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--presets", nargs="*", default=list(PRESET_NAMES))
    args = ap.parse_args()

    t0 = time.perf_counter()
    scenarios.simulate(scenarios.make_scenario("warm", 2, 2, 1, 1, 1.0, 1.0, 1.0, horizon=1), "numba")
    print(f"numba warm-up (cache load or compile): {time.perf_counter() - t0:.2f}s\n")

    print(f"{'preset':<11} {'agents':>6} {'steps':>6} {'numba s':>9} {'numpy s':>9} {'speedup':>8} "
          f"{'rhs nb us':>10} {'rhs np us':>10} {'max diff':>9}")
    for name in args.presets:
        s = scenarios.preset(name, seed=7)
        t_nb, a = _best(lambda: scenarios.simulate(s, "numba"), args.repeat)
        t_np, b = _best(lambda: scenarios.simulate(s, "numpy"), args.repeat)
        rhs = bench_rhs(s, args.repeat)
        diff = float(np.abs(a.states - b.states).max())
        print(f"{name:<11} {s.params.n_agents:>6} {len(a.times) - 1:>6} {t_nb:>9.3f} {t_np:>9.3f} "
              f"{t_np / t_nb:>7.1f}x {rhs['numba'] * 1e6:>10.1f} {rhs['numpy'] * 1e6:>10.1f} {diff:>9.1e}")


if __name__ == "__main__":
    main()
