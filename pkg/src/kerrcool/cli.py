"""Command-line surface: point solutions, spectra, sweeps, and the
figure/number reproduction harness.

Exit codes: 0 success (including partial sweeps with per-row errors),
1 usage, 2 configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import re
import sys

import numpy as np

from . import cavity, cooling, io, oracle, squeezing, steady, sweeps
from .errors import ConfigError, KerrcoolError
from .params import (TAU, CRITICAL_POWER_FRACTION, SystemParams,
                     default_params, params_from_config)
from .sweeps import AxisRange, Mode, SweepKind, SweepSpec


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # accept scientific notation in negative option values (-2.598e6)
        self._negative_number_matcher = re.compile(r"^-\d*\.?\d+([eE][-+]?\d+)?$")

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _load_params(args) -> SystemParams:
    if getattr(args, "config", None):
        return params_from_config(io.read_config_file(args.config))
    return default_params()


def _drive(p: SystemParams, args) -> float:
    if getattr(args, "n_in", None) is not None:
        return args.n_in
    frac = getattr(args, "n_in_frac", None)
    if frac is None:
        frac = CRITICAL_POWER_FRACTION
    return frac * steady.bifurcation(p).n_in_bi


def _detuning(p: SystemParams, args) -> float:
    if getattr(args, "detuning_hz", None) is not None:
        return TAU * args.detuning_hz
    return steady.bifurcation(p).delta_bi


def _emit_rows(rows, args, columns=None):
    if args.format == "json":
        io.emit(io.to_json(rows), args.out)
    else:
        io.emit(io.rows_to_csv(rows, columns), args.out)


# ----------------------------------------------------------------------
# subcommands

def _cmd_steady(args) -> int:
    p = _load_params(args)
    bi = steady.bifurcation(p)
    delta = _detuning(p, args)
    n_in = _drive(p, args)
    branches = steady.photon_branches(p, delta, n_in)
    ss = steady.steady_at(p, delta, n_in)
    payload = {
        "bifurcation": {"delta_bi_rad_s": bi.delta_bi, "n_bi": bi.n_bi,
                        "n_in_bi_per_s": bi.n_in_bi},
        "detuning_rad_s": delta,
        "n_in_per_s": n_in,
        "branches": [{"n_c": r, "stable": s} for r, s in branches],
        "steady_state": {
            "n_c": ss.n_c, "phi_c_rad": ss.phi_c, "k_eff_rad_s": ss.k_eff,
            "delta_tilde_rad_s": ss.delta_tilde, "lambda_abs_rad_s": ss.lambda_abs,
            "g_abs_rad_s": ss.g_abs, "q_static": ss.q_static,
            "branch": ss.branch.value, "delta_eff_rad_s": ss.delta_eff,
        },
    }
    io.emit(io.to_json(payload), args.out)
    return 0


def _spectrum_grid(p: SystemParams, args) -> np.ndarray:
    span = args.omega_span_hz if args.omega_span_hz else 10.0 * p.kappa / TAU
    return np.linspace(-TAU * span, TAU * span, args.points)


def _cmd_spectrum(args) -> int:
    p = _load_params(args)
    ss = steady.steady_at(p, _detuning(p, args), _drive(p, args))
    grid = _spectrum_grid(p, args)
    if args.kind == "nn":
        spec = cavity.photon_spectrum(ss, p, grid)
    elif args.kind == "bb":
        spec = cooling.mech_noise_spectrum(ss, p, grid)
    else:
        sq = _squeeze_from_args(ss, p, args)
        spec = cavity.Spectrum(grid=grid,
                               values=squeezing.squeezed_force_spectrum(ss, p, sq, grid))
    rows = [{"omega_rad_s": w, f"s_{args.kind}": v}
            for w, v in zip(spec.grid, spec.values)]
    if args.oracle:
        sq = _squeeze_from_args(ss, p, args) if args.kind == "ff" else None
        dm = oracle.build_matrix(ss, p)
        corr = oracle.input_correlators(p, sq, ss.phi_c)
        num = oracle.numeric_spectrum(dm, corr, args.kind, grid)
        for row, v in zip(rows, num.values):
            row["oracle"] = v
    _emit_rows(rows, args, None)
    return 0


def _cmd_poles(args) -> int:
    p = _load_params(args)
    n_in = _drive(p, args)
    ss = steady.steady_at(p, _detuning(p, args), n_in)
    ps = cavity.cavity_poles(ss, p)
    ep_minus, ep_plus = cavity.exceptional_points(p, n_in)
    payload = {
        "poles_rad_s": [{"re": w.real, "im": w.imag} for w in ps.poles],
        "region": ps.region.value,
        "radicand": ps.radicand,
        "decay_extremum_residual": ps.decay_extremum_residual,
        "at_decay_extremum": ps.at_decay_extremum,
        "ep_delta_minus_rad_s": ep_minus,
        "ep_delta_plus_rad_s": ep_plus,
    }
    io.emit(io.to_json(payload), args.out)
    return 0


def _cmd_cool(args) -> int:
    p = _load_params(args)
    n_in = _drive(p, args)
    if args.detuning_hz is None:
        delta, _ = sweeps.optimal_detuning(p, n_in)
    else:
        delta = TAU * args.detuning_hz
    ss = steady.steady_at(p, delta, n_in)
    rep = cooling.occupation(ss, p)
    payload = rep.to_dict()
    payload["detuning_rad_s"] = delta
    payload["n_in_per_s"] = n_in
    if args.oracle:
        dm = oracle.build_matrix(ss, p)
        value, err = oracle.numeric_occupation(dm, oracle.input_correlators(p))
        payload["n_oracle"] = value
        payload["n_oracle_err"] = err
        payload["oracle_rel_gap"] = abs(value - rep.n_rate) / rep.n_rate
    if args.format == "csv":
        io.emit(io.rows_to_csv([payload]), args.out)
    else:
        io.emit(io.to_json(payload), args.out)
    return 0


def _squeeze_from_args(ss, p, args) -> squeezing.SqueezeSpec:
    xi = getattr(args, "xi", None)
    if xi is None:
        return squeezing.SqueezeSpec.vacuum()
    db = getattr(args, "squeeze_db", None)
    if db is not None:
        sq = squeezing.SqueezeSpec.from_db(xi, db)
        return sq.with_phase(squeezing.optimal_phase(ss, p))
    n_s = getattr(args, "n_s", None)
    if n_s is not None:
        return squeezing.SqueezeSpec.from_n_s(xi, n_s, squeezing.optimal_phase(ss, p))
    return squeezing.matched_squeeze(ss, p, xi)


def _cmd_squeeze(args) -> int:
    p = _load_params(args)
    n_in = _drive(p, args)
    if args.detuning_hz is None:
        delta, _ = sweeps.optimal_detuning(p, n_in, xi=args.xi)
    else:
        delta = TAU * args.detuning_hz
    ss = steady.steady_at(p, delta, n_in)
    n_ba_s, wp, n_s, r, db = squeezing.squeezed_backaction(ss, p, args.xi)
    sq = squeezing.matched_squeeze(ss, p, args.xi)
    payload = sq.to_dict()
    payload.update({
        "detuning_rad_s": delta,
        "n_in_per_s": n_in,
        "optimal_phase_rad": squeezing.optimal_phase(ss, p),
        "wp": wp,
        "n_ba_vacuum": cooling.backaction_limit(p, ss.delta_eff),
        "n_ba_squeezed": n_ba_s,
        "n_m_squeezed": squeezing.occupation_with_squeezing(ss, p, sq),
    })
    io.emit(io.to_json(payload), args.out)
    return 0


def _parse_axis(raw: str) -> AxisRange:
    parts = [s.strip() for s in raw.split(",")]
    if len(parts) not in (3, 4):
        raise ConfigError(f"axis must be start,stop,count[,scale]: {raw!r}")
    scale = parts[3] if len(parts) == 4 else "linear"
    return AxisRange(float(parts[0]), float(parts[1]), int(parts[2]), scale)


def spec_from_document(doc: dict) -> SweepSpec:
    """Build a SweepSpec from a flat key-value document."""
    if "kind" not in doc:
        raise ConfigError("sweep spec needs a 'kind' key")
    try:
        kind = SweepKind(doc["kind"].strip())
    except ValueError:
        raise ConfigError(f"unknown sweep kind {doc['kind']!r}") from None
    mode = Mode(doc.get("mode", "nonlinear").strip())
    ranges = {}
    for axis in ("detuning_hz", "g0_hz", "omega_frac"):
        if axis in doc:
            ranges[axis] = _parse_axis(doc[axis])
    xi = float(doc["xi"]) if "xi" in doc else None
    cap = float(doc.get("cap_fraction", CRITICAL_POWER_FRACTION))
    return SweepSpec(kind=kind, ranges=ranges, mode=mode, cap_fraction=cap,
                     squeeze_xi=xi)


def _cmd_sweep(args) -> int:
    p = _load_params(args)
    spec = spec_from_document(io.read_config_file(args.specfile))
    rows = sweeps.run_sweep(spec, p, jobs=args.jobs)
    _emit_rows(rows, args)
    return 0


# ----------------------------------------------------------------------
# reproduction harness

def _merge_modes(nl_rows, lin_rows, key):
    merged = []
    for a, b in zip(nl_rows, lin_rows):
        row = dict(a)
        for col, val in b.items():
            if col != key:
                row[f"linear_{col}"] = val
        merged.append(row)
    return merged


def _reproduce(target: str, p: SystemParams, jobs: int, points: int | None):
    n = points or sweeps.OUTER_AXIS_POINTS
    prof_pts = points or sweeps.PROFILE_POINTS
    cap = CRITICAL_POWER_FRACTION
    if target in ("fig2", "fig3", "fig5"):
        ax = AxisRange(-12.0 * p.omega_m / TAU, -0.01 * p.omega_m / TAU, prof_pts)
        n_in = sweeps.equal_drive(p, cap)
        return sweeps.detuning_profile(p, n_in, TAU * ax.grid(),
                                       include_skewness=False)
    if target == "fig4":
        ax = AxisRange(-12.0 * p.omega_m / TAU, -0.01 * p.omega_m / TAU,
                       points or 1201)
        n_in = sweeps.equal_drive(p, cap)
        return sweeps.detuning_profile(p, n_in, TAU * ax.grid(),
                                       include_skewness=True,
                                       linear_reference=False)
    if target == "fig6":
        spec = SweepSpec(SweepKind.COUPLING_SWEEP,
                         {"g0_hz": AxisRange(1.7e3, 35e3, n)})
        return sweeps.run_sweep(spec, p, jobs)
    if target in ("fig7", "fig9"):
        xi = 0.9 if target == "fig9" else None
        kind = SweepKind.SIDEBAND_SWEEP_SQUEEZED if xi else SweepKind.SIDEBAND_SWEEP
        ax = {"omega_frac": AxisRange(0.02, 2.0, n, "log")}
        p15 = p.replace(g0=TAU * 15e3)
        nl = sweeps.run_sweep(SweepSpec(kind, ax, Mode.NONLINEAR, squeeze_xi=xi), p15, jobs)
        lin = sweeps.run_sweep(SweepSpec(kind, ax, Mode.LINEAR_COMPARISON, squeeze_xi=xi), p15, jobs)
        return _merge_modes(nl, lin, "omega_frac")
    if target == "fig8":
        ax = {"omega_frac": AxisRange(0.02, 1.0, n, "log")}
        p15 = p.replace(g0=TAU * 15e3)
        nl = sweeps.run_sweep(SweepSpec(SweepKind.OPTIMAL_POWER_CURVE, ax), p15, jobs)
        lin = sweeps.run_sweep(SweepSpec(SweepKind.OPTIMAL_POWER_CURVE, ax,
                                         Mode.LINEAR_COMPARISON), p15, jobs)
        return _merge_modes(nl, lin, "omega_frac")
    if target == "fig10":
        ax = {"omega_frac": AxisRange(0.02, 0.5, n, "log")}
        p15 = p.replace(g0=TAU * 15e3)
        nl = sweeps.run_sweep(SweepSpec(SweepKind.SIDEBAND_SWEEP_SQUEEZED, ax,
                                        Mode.NONLINEAR, squeeze_xi=0.44), p15, jobs)
        lin = sweeps.run_sweep(SweepSpec(SweepKind.SIDEBAND_SWEEP_SQUEEZED, ax,
                                         Mode.LINEAR_COMPARISON, squeeze_xi=0.99), p15, jobs)
        return _merge_modes(nl, lin, "omega_frac")
    if target == "appF":
        m = points or sweeps.MAP_POINTS
        axes = {"g0_hz": AxisRange(2e3, 5e4, m, "log"),
                "omega_frac": AxisRange(0.05, 0.35, m)}
        rows = []
        for mode in (Mode.NONLINEAR, Mode.LINEAR_COMPARISON):
            for row in sweeps.run_sweep(SweepSpec(SweepKind.GROUND_STATE_MAP, axes, mode), p, jobs):
                row["mode"] = mode.value
                rows.append(row)
        return rows
    if target == "table-values":
        n_in = sweeps.equal_drive(p, cap)
        _, c_nl = sweeps.max_damping_point(p, n_in)
        d_nl, nm_nl = sweeps.optimal_detuning(p, n_in)
        rep = cooling.occupation(steady.steady_at(p, d_nl, n_in), p)
        pl = p.without_kerr()
        _, c_lin = sweeps.max_damping_point(pl, n_in)
        _, nm_lin = sweeps.optimal_detuning(pl, n_in)
        return {
            "c_eff_nl": c_nl, "c_eff_lin": c_lin,
            "n_m_nl": nm_nl, "n_m_lin": nm_lin,
            "n_ba_share": rep.backaction_share,
            "n_th": p.n_th,
        }
    raise ConfigError(f"unknown reproduce target {target!r}")


REPRODUCE_TARGETS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8",
                     "fig9", "fig10", "appF", "table-values")


def _cmd_reproduce(args) -> int:
    p = _load_params(args)
    result = _reproduce(args.target, p, args.jobs, args.points)
    if isinstance(result, dict):
        io.emit(io.to_json(result), args.out)
    else:
        _emit_rows(result, args)
    return 0


# ----------------------------------------------------------------------

def _add_common(sub):
    sub.add_argument("--config", help="key-value parameter file (cyclic Hz)")
    sub.add_argument("--out", help="output path (default stdout)")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--oracle", action="store_true",
                     help="attach brute-force cross-checks")
    sub.add_argument("--jobs", type=int, default=1)


def _add_point(sub):
    sub.add_argument("--detuning-hz", type=float, default=None,
                     help="drive detuning in cyclic Hz (default: bifurcation"
                          " detuning, or the cooling optimum for cool/squeeze)")
    sub.add_argument("--n-in", type=float, default=None,
                     help="input photon flux (photons/s)")
    sub.add_argument("--n-in-frac", type=float, default=None,
                     help="input flux as a fraction of the bifurcation drive")


def build_parser() -> _Parser:
    parser = _Parser(prog="kerrcool",
                     description="Kerr-cavity enhanced backaction cooling toolkit")
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("steady", help="classical branches and bifurcation data")
    _add_common(s); _add_point(s)
    s.set_defaults(func=_cmd_steady)

    s = subs.add_parser("spectrum", help="photon / force / mechanical spectrum to CSV")
    _add_common(s); _add_point(s)
    s.add_argument("--kind", choices=("nn", "ff", "bb"), default="nn")
    s.add_argument("--points", type=int, default=2001)
    s.add_argument("--omega-span-hz", type=float, default=None)
    s.add_argument("--xi", type=float, default=None)
    s.add_argument("--n-s", type=float, default=None)
    s.add_argument("--squeeze-db", type=float, default=None)
    s.set_defaults(func=_cmd_spectrum)

    s = subs.add_parser("poles", help="spectrum poles and exceptional points")
    _add_common(s); _add_point(s)
    s.set_defaults(func=_cmd_poles)

    s = subs.add_parser("cool", help="cooling report at an operating point")
    _add_common(s); _add_point(s)
    s.set_defaults(func=_cmd_cool)

    s = subs.add_parser("squeeze", help="matched squeezed drive and suppressed backaction")
    _add_common(s); _add_point(s)
    s.add_argument("--xi", type=float, required=True)
    s.set_defaults(func=_cmd_squeeze)

    s = subs.add_parser("sweep", help="run a sweep spec file")
    _add_common(s)
    s.add_argument("specfile")
    s.set_defaults(func=_cmd_sweep)

    s = subs.add_parser("reproduce", help="emit a figure/table dataset")
    _add_common(s)
    s.add_argument("target", choices=REPRODUCE_TARGETS)
    s.add_argument("--points", type=int, default=None)
    s.set_defaults(func=_cmd_reproduce)
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except KerrcoolError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 3


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
