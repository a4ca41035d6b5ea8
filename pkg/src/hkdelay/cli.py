"""Command line: ``hkdelay simulate|figure|check|sweep``.

Exit codes: 0 success, 1 a check failed, 2 usage or configuration error,
3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys

from . import _accel, config, diagnostics, io, scenarios
from .errors import BlowUpError, InvalidArgumentError, OutOfRangeError

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_BLOWUP = 0, 1, 2, 3

FIGURES = ("fig1a", "fig1b", "fig2a", "fig2b", "fig3-left", "fig3-right")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InvalidArgumentError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hkdelay", description="Two-population opinion dynamics with delayed leader coupling.")
    ap.add_argument("--backend", choices=_accel.BACKENDS, default=None,
                    help="numerical backend (default: $HKD_BACKEND, else numba when installed)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="integrate a configured run")
    p.add_argument("--config", required=True)
    p.add_argument("--csv")
    p.add_argument("--svg")

    p = sub.add_parser("figure", help="run one of the preset experiments")
    p.add_argument("name", choices=FIGURES + tuple(n for n in scenarios.PRESET_NAMES if n not in FIGURES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau", type=float)
    p.add_argument("--csv")
    p.add_argument("--svg")

    p = sub.add_parser("check", help="run hull, norm and contraction checks")
    p.add_argument("--config", required=True)
    p.add_argument("--windows", type=int, help="windows to check (default: min(4, what fits the horizon))")

    p = sub.add_parser("sweep", help="vary one parameter and report a metric")
    p.add_argument("--config", required=True)
    p.add_argument("--axis", required=True, choices=scenarios.SWEEP_AXES)
    p.add_argument("--values", required=True, help="comma separated, e.g. 0.3,1,30")
    p.add_argument("--metric", required=True, choices=scenarios.METRICS)
    p.add_argument("--eps", type=float, default=0.05, help="threshold for time_to_threshold")
    return ap


def _write_outputs(traj, scenario, backend, csv_path, svg_path):
    if csv_path:
        io.write_csv(traj, csv_path, io.run_metadata(traj, scenario, backend))
    if svg_path:
        io.write_svg(traj, svg_path, title=f"{scenario.name} (seed {scenario.seed})")


def _summary(traj):
    d = scenarios.final_diameter(traj)
    c = scenarios.consensus_value(traj)
    c = f"{c:.10g}" if isinstance(c, float) else str(c.round(10).tolist())
    print(f"t_end={traj.times[-1]:.6g} nodes={len(traj.times)} final_diameter={d:.6e} mean_opinion={c}")


def _cmd_simulate(args, backend):
    cfg = config.load(args.config)
    traj = scenarios.simulate(cfg.scenario, backend)
    _write_outputs(traj, cfg.scenario, backend, args.csv or cfg.csv, args.svg or cfg.svg)
    _summary(traj)
    return EXIT_OK


def _cmd_figure(args, backend):
    s = scenarios.preset(args.name, seed=args.seed, tau=args.tau)
    traj = scenarios.simulate(s, backend)
    _write_outputs(traj, s, backend, args.csv, args.svg)
    _summary(traj)
    return EXIT_OK


def _cmd_check(args, backend):
    s = config.load(args.config).scenario
    tau = s.params.tau
    if args.windows is None:
        n = min(4, int(math.floor(s.T / (6 * tau) + 1e-9)))
    else:
        if args.windows < 0:
            raise InvalidArgumentError("--windows must be >= 0")
        n = args.windows
        if 6 * n * tau > s.T:
            s = dataclasses.replace(s, T=6 * n * tau)
    traj = scenarios.simulate(s, backend)
    checks = diagnostics.run_checks(traj, n_windows=n)
    print(f"{'check':<14} {'result':<6} {'worst':>12}  detail")
    for c in checks:
        print(f"{c.name:<14} {'PASS' if c.passed else 'FAIL':<6} {c.worst:>12.3e}  {c.detail}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK


def _parse_values(text, axis):
    conv = int if axis in ("k", "h", "seed") else float
    try:
        values = [conv(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InvalidArgumentError(f"--values: {exc}") from exc
    if not values:
        raise InvalidArgumentError("--values needs at least one value")
    return values


def _cmd_sweep(args, backend):
    base = config.load(args.config).scenario
    spec = scenarios.SweepSpec(base, args.axis, _parse_values(args.values, args.axis), args.metric, args.eps)
    print(f"{args.axis},{args.metric}")
    for value, metric in scenarios.sweep(spec, backend):
        shown = f"{metric:.10g}" if isinstance(metric, float) else " ".join(f"{v:.10g}" for v in metric)
        print(f"{value},{shown}")
    return EXIT_OK


_COMMANDS = {"simulate": _cmd_simulate, "figure": _cmd_figure, "check": _cmd_check, "sweep": _cmd_sweep}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        backend = _accel.backend_name(args.backend)
        return _COMMANDS[args.command](args, backend)
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except BlowUpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (InvalidArgumentError, OutOfRangeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
