"""Classical mean-field solution of the driven Kerr cavity.

The intracavity photon number obeys the cubic

    n_c [ (Delta + K_eff n_c)^2 + (kappa/2)^2 ] = kappa n_in,

where K_eff adds the static optomechanical back-shift (the "mechanical
Kerr") to the intrinsic Kerr constant.  Roots are computed from the
explicit closed forms of the depressed cubic in complex arithmetic and
polished with Newton steps in extended precision: the interesting drives
sit a fraction 1e-7 below the bifurcation, where the cubic is nearly
degenerate and naive root finding loses digits.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchPolicyError, LinearCavityError
from .params import BranchPolicy, OperatingPoint, SystemParams

#: Imaginary dust tolerance for accepting a closed-form root as real.
REAL_ROOT_IMAG_TOL = 1e-9

#: Target relative residual of every returned root in the cubic.
ROOT_RESIDUAL_TOL = 1e-10


class Branch(enum.Enum):
    MONOSTABLE = "monostable"
    BISTABLE_LOWER = "bistable_lower"
    BISTABLE_MIDDLE = "bistable_middle"
    BISTABLE_UPPER = "bistable_upper"


@dataclass(frozen=True)
class SteadyState:
    """Classical operating point plus the linearized-fluctuation parameters
    derived from it (all rates angular)."""

    n_c: float           # mean intracavity photon number
    phi_c: float         # phase of the coherent amplitude (rad)
    k_eff: float         # effective Kerr constant (intrinsic + mechanical)
    delta_tilde: float   # shifted detuning Delta + 2|Lambda|
    lambda_abs: float    # parametric (single-mode squeezing) strength K n_c
    g_abs: float         # photon-enhanced coupling g0 sqrt(n_c)
    q_static: float      # static mechanical displacement <q>
    branch: Branch
    detuning: float      # bare detuning the point was solved at
    n_in: float          # input photon flux the point was solved at

    @property
    def delta_eff(self) -> float:
        """Effective cooling detuning |Lambda| - Delta~ = -Delta - |Lambda|."""
        return self.lambda_abs - self.delta_tilde


@dataclass(frozen=True)
class BifurcationData:
    """Universal bifurcation locus of the driven Kerr cavity."""

    delta_bi: float   # rad/s, always negative
    n_bi: float       # photon number at the cusp
    n_in_bi: float    # critical input flux (photons/s)


def effective_kerr(p: SystemParams) -> float:
    """Intrinsic Kerr plus the optomechanically induced (mechanical) Kerr:
    K + 2 g0^2 omega_m / (omega_m^2 + gamma_m^2/4)."""
    return p.kerr + 2.0 * p.g0 ** 2 * p.omega_m / (p.omega_m ** 2 + p.gamma_m ** 2 / 4.0)


def mechanical_kerr(p: SystemParams) -> float:
    """The g0-induced part of the effective Kerr constant."""
    return effective_kerr(p) - p.kerr


def cubic_coeffs(k_eff: float, delta: float, kappa: float, n_in: float):
    """Coefficients (a, b, c, d) of a n^3 + b n^2 + c n + d = 0."""
    return (
        k_eff * k_eff,
        2.0 * delta * k_eff,
        delta * delta + kappa * kappa / 4.0,
        -kappa * n_in,
    )


def cubic_residual(k_eff: float, delta: float, kappa: float, n_in: float, n):
    """Residual of the photon cubic normalized by kappa*n_in."""
    n = np.asarray(n, dtype=float)
    lhs = n * ((delta + k_eff * n) ** 2 + kappa * kappa / 4.0)
    return (lhs - kappa * n_in) / (kappa * n_in)


def _closed_form_roots(k_eff, delta, kappa, n_in):
    """The three complex roots of the photon cubic, vectorized over delta.

    Uses the explicit resolvent: Sigma = cbrt(sqrt(L0^3 + L1^2) + L1) with
    L0 = 3 kappa^2/4 - Delta^2 and L1 = -(9 kappa^2/4 + Delta^2) Delta
    - 27 kappa K_eff n_in / 2.
    """
    delta = np.asarray(delta, dtype=float)
    l0 = 0.75 * kappa * kappa - delta * delta
    l1 = -(2.25 * kappa * kappa + delta * delta) * delta - 13.5 * kappa * k_eff * n_in
    s = np.sqrt(l0.astype(complex) ** 3 + np.asarray(l1, dtype=complex) ** 2)
    arg = s + l1
    # near-cancellation: the opposite square-root branch is equally valid
    alt = l1 - s
    swap = np.abs(arg) < 1e-3 * np.abs(alt)
    arg = np.where(swap, alt, arg)
    tiny = np.abs(arg) == 0.0
    sigma = np.where(tiny, 1.0, arg) ** (1.0 / 3.0)

    w_plus = cmath.exp(1j * math.pi / 3.0)
    w_minus = cmath.exp(-1j * math.pi / 3.0)
    inv3k = 1.0 / (3.0 * k_eff)
    ratio = l0 / sigma
    r1 = inv3k * (-2.0 * delta - sigma + ratio)
    r2 = inv3k * (-2.0 * delta + w_minus * sigma - w_plus * ratio)
    r3 = inv3k * (-2.0 * delta + w_plus * sigma - w_minus * ratio)
    if np.any(tiny):
        # triple root at the cusp
        triple = -2.0 * delta * inv3k + 0j
        r1 = np.where(tiny, triple, r1)
        r2 = np.where(tiny, triple, r2)
        r3 = np.where(tiny, triple, r3)
    return np.stack([r1, r2, r3])


def _newton_polish(k_eff, delta, kappa, n_in, roots, iterations=3):
    """Backtracking Newton steps on the photon cubic in extended precision.

    A step is only kept while it reduces |f|; at a (near-)multiple root the
    raw Newton step is noise over noise and must not move the root.
    """
    ld = np.longdouble
    n = roots.astype(ld)
    d, ka, K, flux = ld(delta), ld(kappa), ld(k_eff), ld(n_in)
    quarter = ka * ka / ld(4.0)

    def f_of(x):
        shift = d + K * x
        return x * (shift * shift + quarter) - ka * flux

    for _ in range(iterations):
        f = f_of(n)
        shift = d + K * n
        fp = shift * shift + quarter + ld(2.0) * n * K * shift
        step = np.where(fp != 0.0, f / np.where(fp != 0.0, fp, ld(1.0)), ld(0.0))
        for _ in range(8):
            candidate = n - step
            better = np.abs(f_of(candidate)) <= np.abs(f)
            if np.all(better):
                break
            step = np.where(better, step, step * ld(0.5))
        n = np.where(np.abs(f_of(n - step)) <= np.abs(f), n - step, n)
    return np.asarray(n, dtype=float)


def branch_slope(k_eff: float, delta: float, kappa: float, n):
    """d(kappa n_in)/d n_c along the cubic; negative slope marks the
    classically unstable middle branch.  Equals
    (Delta + 3 K n)(Delta + K n) + kappa^2/4."""
    n = np.asarray(n, dtype=float)
    return (delta + 3.0 * k_eff * n) * (delta + k_eff * n) + kappa * kappa / 4.0


def photon_branches(p: SystemParams, delta: float, n_in: float):
    """All real non-negative photon-number roots at (delta, n_in), sorted
    ascending, each tagged with its classical stability."""
    if n_in == 0.0:
        return [(0.0, True)]
    if n_in < 0.0:
        raise ValueError(f"n_in must be >= 0, got {n_in!r}")
    k_eff = effective_kerr(p)
    if k_eff == 0.0:
        return [(p.kappa * n_in / (delta * delta + p.kappa * p.kappa / 4.0), True)]

    roots = [complex(r) for r in _closed_form_roots(k_eff, delta, p.kappa, n_in)]
    real = [r.real for r in roots if abs(r.imag) <= REAL_ROOT_IMAG_TOL * max(1.0, abs(r))]
    if not real:
        # dust filter rejected everything; a real cubic always has one
        real = [min(roots, key=lambda r: abs(r.imag)).real]
    real = _newton_polish(k_eff, delta, p.kappa, n_in, np.asarray(real))
    real = sorted(float(r) for r in real if r > -1e-12)
    # collapse numerically duplicated roots (exact degeneracy)
    merged = []
    for r in real:
        if merged and abs(r - merged[-1]) <= 1e-9 * max(1.0, abs(r)):
            continue
        merged.append(max(r, 0.0))
    out = []
    for r in merged:
        # marginal (bifurcation) roots count as stable: the slope vanishes
        # exactly there and rounding must not flip the label
        scale = (abs(delta) + 3.0 * k_eff * r) * (abs(delta) + k_eff * r) \
            + p.kappa * p.kappa / 4.0
        stable = branch_slope(k_eff, delta, p.kappa, r) > -1e-9 * scale
        out.append((r, bool(stable)))
    if len(out) == 3:
        assert not out[1][1], "middle root of a triple must be unstable"
    return out


def lower_branch_array(p: SystemParams, deltas, n_in: float):
    """Smallest non-negative real root for every detuning in `deltas`.

    Vectorized fast path used by sweeps; agrees with photon_branches.
    """
    deltas = np.asarray(deltas, dtype=float)
    if n_in == 0.0:
        return np.zeros_like(deltas)
    k_eff = effective_kerr(p)
    if k_eff == 0.0:
        return p.kappa * n_in / (deltas * deltas + p.kappa * p.kappa / 4.0)
    roots = _closed_form_roots(k_eff, deltas, p.kappa, n_in)
    scale = np.maximum(1.0, np.abs(roots))
    real = np.where(np.abs(roots.imag) <= REAL_ROOT_IMAG_TOL * scale, roots.real, np.inf)
    real = np.where(real < -1e-12, np.inf, real)
    lower = np.min(real, axis=0)
    # dust filter can reject everything at a degenerate point; fall back to
    # the root with the least imaginary part (the cubic always has one real)
    missed = ~np.isfinite(lower)
    if np.any(missed):
        least = np.take_along_axis(
            roots, np.argmin(np.abs(roots.imag), axis=0)[None, ...], axis=0
        )[0]
        lower = np.where(missed, least.real, lower)
    lower = _newton_polish(k_eff, deltas, p.kappa, n_in, np.maximum(lower, 0.0))
    return np.maximum(lower, 0.0)


def bifurcation(p: SystemParams) -> BifurcationData:
    """Universal bifurcation point: Delta_bi = -sqrt(3) kappa / 2,
    n_bi = kappa / (sqrt(3) K_eff), n_in_bi = kappa^2 / (3 sqrt(3) K_eff)."""
    k_eff = effective_kerr(p)
    if k_eff == 0.0:
        raise LinearCavityError("a strictly linear cavity (K_eff = 0) has no bifurcation")
    s3 = math.sqrt(3.0)
    return BifurcationData(
        delta_bi=-s3 * p.kappa / 2.0,
        n_bi=p.kappa / (s3 * k_eff),
        n_in_bi=p.kappa ** 2 / (3.0 * s3 * k_eff),
    )


def critical_power(p: SystemParams, fraction: float = 0.9999999) -> float:
    """Input flux a fixed fraction below the bifurcation drive."""
    return fraction * bifurcation(p).n_in_bi


def _coherent_phase(p: SystemParams, k_eff: float, delta: float, n_c: float) -> float:
    """Phase of alpha from the steady-state equation with a real positive
    drive amplitude: alpha = sqrt(kappa) a_in / (i(Delta + K_eff n_c) - kappa/2)."""
    if n_c == 0.0:
        return 0.0
    denom = complex(-p.kappa / 2.0, delta + k_eff * n_c)
    return cmath.phase(1.0 / denom) % (2.0 * math.pi)


def solve_steady(p: SystemParams, op: OperatingPoint) -> SteadyState:
    """Solve the classical steady state and package the linearization inputs.

    Branch selection follows op.branch_policy; the parametric strength uses
    the intrinsic Kerr only (|Lambda| = K n_c) while the cubic itself runs
    on the full effective Kerr.
    """
    roots = photon_branches(p, op.detuning, op.n_in)
    stable = [(r, s) for r, s in roots if s]
    if not stable:
        raise AssertionError("photon cubic produced no stable root")

    if len(roots) == 3:
        if op.branch_policy is BranchPolicy.REQUIRE_MONOSTABLE:
            raise BranchPolicyError(
                f"three coexisting roots at detuning={op.detuning!r}, n_in={op.n_in!r}"
            )
        if op.branch_policy is BranchPolicy.UPPER_BRANCH:
            n_c = stable[-1][0]
            branch = Branch.BISTABLE_UPPER
        else:
            n_c = stable[0][0]
            branch = Branch.BISTABLE_LOWER
    else:
        n_c = stable[-1][0] if op.branch_policy is BranchPolicy.UPPER_BRANCH else stable[0][0]
        branch = Branch.MONOSTABLE

    k_eff = effective_kerr(p)
    lam = p.kerr * n_c
    return SteadyState(
        n_c=n_c,
        phi_c=_coherent_phase(p, k_eff, op.detuning, n_c),
        k_eff=k_eff,
        delta_tilde=op.detuning + 2.0 * lam,
        lambda_abs=lam,
        g_abs=p.g0 * math.sqrt(n_c),
        q_static=-math.sqrt(2.0) * p.g0 * p.omega_m * n_c / (p.omega_m ** 2 + p.gamma_m ** 2 / 4.0),
        branch=branch,
        detuning=op.detuning,
        n_in=op.n_in,
    )


def steady_at(p: SystemParams, delta: float, n_in: float,
              policy: BranchPolicy = BranchPolicy.LOWER_BRANCH) -> SteadyState:
    """Shorthand for solve_steady at explicit (delta, n_in)."""
    return solve_steady(p, OperatingPoint(detuning=delta, n_in=n_in, branch_policy=policy))


def state_for_root(p: SystemParams, delta: float, n_in: float, n_c: float,
                   branch: Branch = Branch.BISTABLE_MIDDLE) -> SteadyState:
    """SteadyState built on an explicitly chosen photon-number root, e.g.
    the classically unstable middle branch."""
    k_eff = effective_kerr(p)
    lam = p.kerr * n_c
    return SteadyState(
        n_c=n_c,
        phi_c=_coherent_phase(p, k_eff, delta, n_c),
        k_eff=k_eff,
        delta_tilde=delta + 2.0 * lam,
        lambda_abs=lam,
        g_abs=p.g0 * math.sqrt(n_c),
        q_static=-math.sqrt(2.0) * p.g0 * p.omega_m * n_c / (p.omega_m ** 2 + p.gamma_m ** 2 / 4.0),
        branch=branch,
        detuning=delta,
        n_in=n_in,
    )


def cubic_discriminant_rel(p: SystemParams, delta: float, n_in: float) -> float:
    """Resolvent discriminant L0^3 + L1^2 of the photon cubic, normalized
    by its no-cancellation scale; vanishes at the bifurcation cusp and is
    negative exactly where three real roots coexist."""
    k_eff = effective_kerr(p)
    l0 = 0.75 * p.kappa ** 2 - delta * delta
    l1 = -(2.25 * p.kappa ** 2 + delta * delta) * delta - 13.5 * p.kappa * k_eff * n_in
    num = l0 ** 3 + l1 ** 2
    scale = ((0.75 * p.kappa ** 2 + delta * delta) ** 3
             + ((2.25 * p.kappa ** 2 + delta * delta) * abs(delta)
                + 13.5 * p.kappa * k_eff * n_in) ** 2)
    return num / scale
