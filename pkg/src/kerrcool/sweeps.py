"""Parameter sweeps, constrained optimizers, and figure-style datasets.

Conventions shared by the sweep kinds:

* The drive never exceeds a fixed fraction (default 0.9999999) of the
  bifurcation flux of the nonlinear system, keeping every operating point
  monostable.
* Linear-comparison curves switch the intrinsic Kerr off but keep the
  mechanical Kerr in the classical cubic; equal-drive comparisons
  (sideband sweeps, ground-state maps) drive the linear cavity at the
  nonlinear system's critical power, while power-optimizing comparisons
  cap the linear drive at its own mechanical-Kerr bifurcation.
* Sweeps that vary the mechanical frequency hold the bath temperature
  fixed at the value implied by the base parameters and recompute the
  thermal occupation per point through the Bose-Einstein law.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import cavity, cooling, squeezing, steady
from .errors import ConfigError, KerrcoolError
from .params import (TAU, SystemParams, bath_temperature, bose_occupation,
                     CRITICAL_POWER_FRACTION)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

#: Default resolutions: dense enough to bracket the near-critical spike in
#: the occupation landscape (width ~1e-3 kappa at the standard drive).
PROFILE_POINTS = 4001
OUTER_AXIS_POINTS = 41
POWER_GRID_POINTS = 64
MAP_POINTS = 120


class SweepKind(enum.Enum):
    DETUNING_PROFILE = "detuning_profile"
    COUPLING_SWEEP = "coupling_sweep"
    SIDEBAND_SWEEP = "sideband_sweep"
    SIDEBAND_SWEEP_SQUEEZED = "sideband_sweep_squeezed"
    OPTIMAL_POWER_CURVE = "optimal_power_curve"
    GROUND_STATE_MAP = "ground_state_map"


class Mode(enum.Enum):
    NONLINEAR = "nonlinear"
    LINEAR_COMPARISON = "linear_comparison"


@dataclass(frozen=True)
class AxisRange:
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.count < 2:
            raise ConfigError(f"axis count must be >= 2, got {self.count}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ConfigError("axis range must be finite")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"axis scale must be linear or log, got {self.scale!r}")

    def grid(self) -> np.ndarray:
        if self.scale == "log":
            if self.start <= 0 or self.stop <= 0:
                raise ConfigError("log axis requires positive bounds")
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepSpec:
    kind: SweepKind
    ranges: dict = field(default_factory=dict)   # axis name -> AxisRange
    mode: Mode = Mode.NONLINEAR
    cap_fraction: float = CRITICAL_POWER_FRACTION
    squeeze_xi: float | None = None

    def __post_init__(self):
        if not 0.0 < self.cap_fraction <= 1.0:
            raise ConfigError(f"cap_fraction must be in (0, 1], got {self.cap_fraction}")
        if self.squeeze_xi is not None and not 0.0 <= self.squeeze_xi <= 1.0:
            raise ConfigError(f"xi must be in [0, 1], got {self.squeeze_xi}")


# ----------------------------------------------------------------------
# vectorized occupation kernel

def _rate_arrays(p: SystemParams, deltas: np.ndarray, n_c: np.ndarray):
    """(Gamma_S, Gamma_opt) over arrays; intrinsic-Kerr parametric strength."""
    lam = p.kerr * n_c
    dt = deltas + 2.0 * lam
    d_eff = lam - dt
    den = (dt ** 2 - p.omega_m ** 2 + p.kappa ** 2 / 4.0 - lam ** 2) ** 2 \
        + p.kappa ** 2 * p.omega_m ** 2
    g_s = p.g0 ** 2 * n_c * p.kappa * ((d_eff - p.omega_m) ** 2 + p.kappa ** 2 / 4.0) / den
    g_opt = 4.0 * p.g0 ** 2 * n_c * d_eff * p.kappa * p.omega_m / den
    return g_s, g_opt


def _occupation_profile(p: SystemParams, deltas: np.ndarray, n_in: float,
                        xi: float = 0.0):
    """Rate-form occupation along the lower branch, +inf where infeasible."""
    n_c = steady.lower_branch_array(p, deltas, n_in)
    g_s, g_opt = _rate_arrays(p, deltas, n_c)
    denom = p.gamma_m + g_opt
    with np.errstate(all="ignore"):
        n_m = (p.gamma_m * p.n_th + (1.0 - xi) * g_s) / denom
    bad = (denom <= 0.0) | ~np.isfinite(n_m) | (n_m <= 0.0)
    return np.where(bad, np.inf, n_m), n_c, g_s, g_opt


def _occupation_scalar(p: SystemParams, delta: float, n_in: float, xi: float = 0.0) -> float:
    v, _, _, _ = _occupation_profile(p, np.array([delta]), n_in, xi)
    return float(v[0])


def _cooperativity_profile(p: SystemParams, deltas: np.ndarray, n_in: float):
    n_c = steady.lower_branch_array(p, deltas, n_in)
    _, g_opt = _rate_arrays(p, deltas, n_c)
    return g_opt / p.gamma_m


# ----------------------------------------------------------------------
# 1-D minimization: coarse grid bracket + golden-section refinement

def golden_min(f, a: float, b: float, value_rtol: float = 1e-10,
               max_iter: int = 300):
    """Golden-section minimum of f on [a, b]; returns (x, f(x))."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
        lo, hi = (fc, fd) if fc < fd else (fd, fc)
        if math.isfinite(lo) and hi - lo <= value_rtol * max(abs(lo), 1e-300):
            if abs(b - a) <= 1e-12 * max(abs(a), abs(b)):
                break
    x = c if fc < fd else d
    return (x, min(fc, fd))


def _grid_golden_min(f_grid, f_scalar, grid: np.ndarray, value_rtol: float = 1e-10):
    """Minimize using a vectorized coarse pass then golden refinement."""
    vals = f_grid(grid)
    i = int(np.argmin(vals))
    if not math.isfinite(vals[i]):
        return math.nan, math.inf
    a = grid[max(0, i - 1)]
    b = grid[min(len(grid) - 1, i + 1)]
    x, fx = golden_min(f_scalar, a, b, value_rtol)
    if vals[i] < fx:
        return float(grid[i]), float(vals[i])
    return float(x), float(fx)


def detuning_window(p: SystemParams) -> tuple:
    """Detuning search window for cooling optima: generous on the red side,
    stopping just short of resonance."""
    lo = -(2.5 * p.kappa + 2.0 * p.omega_m)
    return lo, -0.005 * p.kappa


def optimal_detuning(p: SystemParams, n_in: float, xi: float = 0.0,
                     window: tuple | None = None,
                     grid_points: int = PROFILE_POINTS):
    """Detuning minimizing the (possibly squeezed) rate-form occupation at
    fixed drive; returns (delta, occupation)."""
    lo, hi = window or detuning_window(p)
    grid = np.linspace(lo, hi, grid_points)
    return _grid_golden_min(
        lambda g: _occupation_profile(p, g, n_in, xi)[0],
        lambda d: _occupation_scalar(p, d, n_in, xi),
        grid,
    )


def max_damping_point(p: SystemParams, n_in: float,
                      window: tuple | None = None,
                      grid_points: int = PROFILE_POINTS):
    """Detuning maximizing the effective cooperativity at fixed drive;
    returns (delta, C_eff)."""
    lo, hi = window or detuning_window(p)
    grid = np.linspace(lo, hi, grid_points)
    d, negc = _grid_golden_min(
        lambda g: -_cooperativity_profile(p, g, n_in),
        lambda x: -float(_cooperativity_profile(p, np.array([x]), n_in)[0]),
        grid,
    )
    return d, -negc


def optimize_operating_point(p: SystemParams,
                             power_cap: float = CRITICAL_POWER_FRACTION,
                             xi: float = 0.0,
                             n_in_bi: float | None = None,
                             value_rtol: float = 1e-4,
                             max_rounds: int = 4):
    """Minimize the rate-form occupation over (detuning, input flux).

    Coarse stage: a 64-point log grid over n_in in [1e-3, cap] * n_in_bi
    crossed with the standard detuning grid; refinement: golden sections
    alternating between the two axes until the occupation improves by less
    than value_rtol relative.  Returns (delta, n_in, CoolingReport,
    converged).
    """
    if not 0.0 < power_cap <= 1.0:
        raise ConfigError(f"power_cap must be in (0, 1], got {power_cap}")
    if n_in_bi is None:
        n_in_bi = steady.bifurcation(p).n_in_bi
    fractions = np.geomspace(1e-3, power_cap, POWER_GRID_POINTS)
    best = (math.inf, math.nan, math.nan)
    for f in fractions:
        d, v = optimal_detuning(p, f * n_in_bi, xi)
        if v < best[0]:
            best = (v, d, f * n_in_bi)
    value, delta, n_in = best
    converged = False
    for _ in range(max_rounds):
        prev = value
        delta, value = optimal_detuning(p, n_in, xi)
        lo = max(n_in / 3.0, 1e-3 * n_in_bi)
        hi = min(n_in * 3.0, power_cap * n_in_bi)
        n_in, value = golden_min(
            lambda flux: _occupation_scalar(p, delta, flux, xi), lo, hi,
            value_rtol=1e-12,
        )
        if abs(prev - value) <= value_rtol * abs(value):
            converged = True
            break
    ss = steady.steady_at(p, delta, n_in)
    return delta, n_in, cooling.occupation(ss, p), converged


# ----------------------------------------------------------------------
# sweep-parameter plumbing

def sideband_variant(p: SystemParams, omega_frac: float) -> SystemParams:
    """Parameters with omega_m = omega_frac * kappa and the bath occupation
    recomputed at the fixed base temperature."""
    omega_m = omega_frac * p.kappa
    temp = bath_temperature(p.omega_m, p.n_th)
    return p.replace(omega_m=omega_m, n_th=bose_occupation(omega_m, temp))


def equal_drive(p: SystemParams, cap_fraction: float) -> float:
    """The shared drive of equal-power comparisons: cap_fraction times the
    bifurcation flux of the full nonlinear system."""
    return cap_fraction * steady.bifurcation(p).n_in_bi


def _min_occupation_row(p: SystemParams, n_in: float, xi: float) -> dict:
    delta, n_m = optimal_detuning(p, n_in, xi)
    row = {"delta_rad_s": delta, "n_m": n_m, "n_in_per_s": n_in}
    if math.isfinite(n_m):
        ss = steady.steady_at(p, delta, n_in)
        row["delta_eff_rad_s"] = ss.delta_eff
        row["n_c"] = ss.n_c
        if xi > 0.0:
            _, wp, n_s, r, db = squeezing.squeezed_backaction(ss, p, xi)
            row.update({"wp": wp, "n_s_matched": n_s, "r": r, "squeeze_db": db})
    return row


# ----------------------------------------------------------------------
# sweep kinds

def detuning_profile(p: SystemParams, n_in: float, deltas,
                     include_skewness: bool = True,
                     linear_reference: bool = True) -> list:
    """Per-detuning dataset: branches, poles, rates, occupation, skewness."""
    deltas = np.asarray(deltas, dtype=float)
    p_lin = p.without_kerr()
    if include_skewness:
        grid = cavity.skewness_grid(p)
        base_ss = steady.steady_at(p_lin, float(deltas[len(deltas) // 2]), n_in)
        g1_lin_const = cavity.skewness(cavity.photon_spectrum(base_ss, p_lin, grid))
    rows = []
    for d in deltas:
        row = {"detuning_rad_s": float(d), "error": ""}
        try:
            roots = steady.photon_branches(p, d, n_in)
            row["n_roots"] = len(roots)
            row["n_c_lower"] = roots[0][0]
            row["n_c_upper"] = roots[-1][0]
            ss = steady.steady_at(p, d, n_in)
            poles = cavity.cavity_poles(ss, p)
            row["pole_re_rad_s"] = abs(poles.poles[0].real)
            row["pole_im_plus_rad_s"] = poles.poles[0].imag
            row["pole_im_minus_rad_s"] = poles.poles[1].imag
            row["pole_region"] = poles.region.value
            rates = cavity.scattering_rates(ss, p)
            row["gamma_stokes_rad_s"] = rates.gamma_stokes
            row["gamma_antistokes_rad_s"] = rates.gamma_antistokes
            row["c_eff"] = rates.c_eff
            try:
                rep = cooling.occupation(ss, p)
                row["n_m"] = rep.n_rate
                row["backaction_share"] = rep.backaction_share
            except KerrcoolError as exc:
                row["n_m"] = math.nan
                row["error"] = str(exc)
            if include_skewness:
                g1 = cavity.skewness(cavity.photon_spectrum(ss, p, grid))
                row["skewness"] = g1
                row["skewness_effective"] = g1 - g1_lin_const
            if linear_reference:
                row["n_c_linear"] = float(steady.lower_branch_array(p_lin, np.array([d]), n_in)[0])
                ss_lin = steady.steady_at(p_lin, d, n_in)
                row["c_eff_linear"] = cavity.scattering_rates(ss_lin, p_lin).c_eff
                try:
                    row["n_m_linear"] = cooling.occupation(ss_lin, p_lin).n_rate
                except KerrcoolError:
                    row["n_m_linear"] = math.nan
        except KerrcoolError as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows


def _coupling_row(p: SystemParams, g0: float, cap_fraction: float) -> dict:
    """One coupling-strength point: occupation at the max-damping detuning
    of the capped drive, the full two-axis optimizer result, and the
    equal-power linear comparison."""
    pg = p.replace(g0=g0)
    bi = steady.bifurcation(pg)
    n_in = cap_fraction * bi.n_in_bi
    row = {"g0_hz": g0 / TAU, "n_in_crit_per_s": n_in, "error": ""}
    try:
        d_damp, c_max = max_damping_point(pg, n_in)
        ss = steady.steady_at(pg, d_damp, n_in)
        rep = cooling.occupation(ss, pg)
        row.update({
            "delta_maxdamp_rad_s": d_damp, "c_eff_max": c_max,
            "n_m_maxdamp": rep.n_rate, "backaction_share_maxdamp": rep.backaction_share,
        })
        d_opt, n_in_opt, rep_opt, converged = optimize_operating_point(
            pg, power_cap=cap_fraction)
        row.update({
            "delta_opt_rad_s": d_opt, "n_in_opt_per_s": n_in_opt,
            "n_in_opt_fraction": n_in_opt / bi.n_in_bi,
            "n_m_opt": rep_opt.n_rate, "converged": converged,
        })
        # linear cavity at the same (optimal) drive
        pl = pg.without_kerr()
        d_lin, n_m_lin = optimal_detuning(pl, n_in_opt)
        ss_lin = steady.steady_at(pl, d_lin, n_in_opt)
        row.update({
            "n_m_linear_same_power": n_m_lin,
            "delta_linear_rad_s": d_lin,
            "c_eff_linear": cavity.scattering_rates(ss_lin, pl).c_eff,
            "n_in_bi_linear_per_s": steady.bifurcation(pl).n_in_bi,
        })
    except KerrcoolError as exc:
        row["error"] = str(exc)
    return row


def _sideband_row(p: SystemParams, omega_frac: float, mode: Mode,
                  cap_fraction: float, xi: float) -> dict:
    pv = sideband_variant(p, omega_frac)
    row = {"omega_frac": omega_frac, "omega_m_hz": pv.omega_m / TAU,
           "n_th": pv.n_th, "error": ""}
    try:
        n_in = equal_drive(pv, cap_fraction)
        target = pv.without_kerr() if mode is Mode.LINEAR_COMPARISON else pv
        row.update(_min_occupation_row(target, n_in, xi))
        _, n_ba_min = cooling.min_backaction(pv)
        row["n_ba_min"] = n_ba_min
        if xi > 0.0:
            row["n_ba_min_squeezed"] = (1.0 - xi) * n_ba_min
    except KerrcoolError as exc:
        row["error"] = str(exc)
    return row


def _power_row(p: SystemParams, omega_frac: float, mode: Mode,
               cap_fraction: float) -> dict:
    pv = sideband_variant(p, omega_frac)
    row = {"omega_frac": omega_frac, "n_th": pv.n_th, "error": ""}
    try:
        bi_nl = steady.bifurcation(pv)
        if mode is Mode.LINEAR_COMPARISON:
            # power optimized below the mechanical-Kerr bifurcation
            pl = pv.without_kerr()
            bi_lin = steady.bifurcation(pl)
            delta, n_in, rep, converged = optimize_operating_point(
                pl, power_cap=cap_fraction, n_in_bi=bi_lin.n_in_bi)
            row.update({
                "n_in_per_s": n_in,
                "n_in_over_own_bi": n_in / bi_lin.n_in_bi,
                "n_in_over_nl_bi": n_in / bi_nl.n_in_bi,
                "delta_rad_s": delta, "n_m": rep.n_rate, "converged": converged,
            })
        else:
            n_in = cap_fraction * bi_nl.n_in_bi
            delta, n_m = optimal_detuning(pv, n_in)
            row.update({
                "n_in_per_s": n_in, "n_in_over_own_bi": cap_fraction,
                "n_in_over_nl_bi": cap_fraction,
                "delta_rad_s": delta, "n_m": n_m, "converged": True,
            })
    except KerrcoolError as exc:
        row["error"] = str(exc)
    return row


def _map_row(p: SystemParams, g0: float, omega_frac: float, mode: Mode,
             cap_fraction: float, xi: float = 0.0) -> dict:
    pv = sideband_variant(p.replace(g0=g0), omega_frac)
    row = {"kind": "map", "g0_hz": g0 / TAU, "g0_over_kappa": g0 / pv.kappa,
           "omega_frac": omega_frac, "error": ""}
    try:
        n_in = equal_drive(pv, cap_fraction)
        target = pv.without_kerr() if mode is Mode.LINEAR_COMPARISON else pv
        _, n_m = optimal_detuning(target, n_in, xi,
                                  grid_points=PROFILE_POINTS // 2)
        row["n_m"] = n_m
        row["ground_state"] = bool(n_m < 1.0)
    except KerrcoolError as exc:
        row["error"] = str(exc)
    return row


def _boundary_row(p: SystemParams, g0: float, omega_bracket: tuple, mode: Mode,
                  cap_fraction: float, xi: float = 0.0) -> dict:
    row = {"kind": "boundary", "g0_hz": g0 / TAU,
           "g0_over_kappa": g0 / p.kappa, "error": ""}
    try:
        row["omega_frac"] = ground_state_onset_omega(
            p, g0, mode, cap_fraction, xi, bracket=omega_bracket)
    except KerrcoolError as exc:
        row["error"] = str(exc)
    return row


def ground_state_onset_omega(p: SystemParams, g0: float, mode: Mode,
                             cap_fraction: float = CRITICAL_POWER_FRACTION,
                             xi: float = 0.0,
                             bracket=(0.01, 0.8), iterations: int = 40) -> float:
    """Resolved-sideband parameter where the minimum occupation crosses one
    phonon at fixed coupling, by bisection."""
    lo, hi = bracket
    pb = p.replace(g0=g0)

    def n_m_at(frac):
        pv = sideband_variant(pb, frac)
        n_in = equal_drive(pv, cap_fraction)
        target = pv.without_kerr() if mode is Mode.LINEAR_COMPARISON else pv
        return optimal_detuning(target, n_in, xi, grid_points=2001)[1]

    if not (n_m_at(lo) > 1.0 and n_m_at(hi) < 1.0):
        raise KerrcoolError(
            f"occupation does not cross one phonon inside bracket {bracket}")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if n_m_at(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ----------------------------------------------------------------------
# sweep driver

def _row_worker(args):
    spec, p, value = args
    kind = spec.kind
    xi = spec.squeeze_xi or 0.0
    if kind is SweepKind.COUPLING_SWEEP:
        return _coupling_row(p, value, spec.cap_fraction)
    if kind is SweepKind.SIDEBAND_SWEEP:
        return _sideband_row(p, value, spec.mode, spec.cap_fraction, 0.0)
    if kind is SweepKind.SIDEBAND_SWEEP_SQUEEZED:
        return _sideband_row(p, value, spec.mode, spec.cap_fraction, xi)
    if kind is SweepKind.OPTIMAL_POWER_CURVE:
        return _power_row(p, value, spec.mode, spec.cap_fraction)
    if kind is SweepKind.GROUND_STATE_MAP:
        if value[0] == "boundary":
            return _boundary_row(p, value[1], value[2], spec.mode,
                                 spec.cap_fraction, xi)
        return _map_row(p, value[0], value[1], spec.mode, spec.cap_fraction, xi)
    raise ConfigError(f"unsupported sweep kind {kind}")


def _axis(spec: SweepSpec, name: str) -> AxisRange:
    try:
        return spec.ranges[name]
    except KeyError:
        raise ConfigError(f"sweep kind {spec.kind.value} needs axis {name!r}") from None


def run_sweep(spec: SweepSpec, p: SystemParams, jobs: int = 1) -> list:
    """Execute a sweep; returns rows in deterministic input order.

    Per-row failures are recorded in the row's error column and do not
    abort the sweep.
    """
    if spec.kind is SweepKind.DETUNING_PROFILE:
        ax = _axis(spec, "detuning_hz")
        deltas = TAU * ax.grid()
        n_in = equal_drive(p, spec.cap_fraction)
        target = p.without_kerr() if spec.mode is Mode.LINEAR_COMPARISON else p
        return detuning_profile(target, n_in, deltas)

    if spec.kind is SweepKind.COUPLING_SWEEP:
        values = [TAU * g for g in _axis(spec, "g0_hz").grid()]
    elif spec.kind in (SweepKind.SIDEBAND_SWEEP, SweepKind.SIDEBAND_SWEEP_SQUEEZED,
                       SweepKind.OPTIMAL_POWER_CURVE):
        values = list(_axis(spec, "omega_frac").grid())
    elif spec.kind is SweepKind.GROUND_STATE_MAP:
        g_axis = [TAU * g for g in _axis(spec, "g0_hz").grid()]
        o_axis = list(_axis(spec, "omega_frac").grid())
        values = [(g, o) for g in g_axis for o in o_axis]
    else:
        raise ConfigError(f"unsupported sweep kind {spec.kind}")

    tasks = [(spec, p, v) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_row_worker, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        rows = [_row_worker(t) for t in tasks]

    if spec.kind is SweepKind.GROUND_STATE_MAP:
        # append the one-phonon boundary: per coupling, the crossing
        # frequency bisected inside the swept window
        o_lo, o_hi = min(o_axis), max(o_axis)
        xi = spec.squeeze_xi or 0.0
        btasks = [(spec, p, ("boundary", g, (o_lo, o_hi))) for g in g_axis]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                rows += list(pool.map(_row_worker, btasks))
        else:
            rows += [_row_worker(t) for t in btasks]
    return rows
