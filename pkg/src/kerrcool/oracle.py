"""Brute-force verification layer.

Assembles the full 4x4 linearized dynamical matrix over (d, d+, b, b+),
solves the frequency-domain response by direct dense inversion at every
grid point, contracts with the input noise correlators to build spectra
numerically, and integrates occupations by adaptive quadrature.  Nothing
here reuses the closed forms it is meant to audit.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .cavity import Spectrum
from .errors import ConvergenceError, InstabilityError
from .params import SystemParams
from .squeezing import SqueezeSpec
from .steady import SteadyState

_IDENT = np.eye(4, dtype=complex)


@dataclass(frozen=True)
class DynamicalMatrix:
    """Linearized drift matrix M and sqrt-decay matrix K of one operating
    point, with the scalars needed to scale derived spectra."""

    m: np.ndarray            # 4x4 complex
    k: np.ndarray            # 4x4 diagonal real
    ss: SteadyState = field(repr=False)
    p: SystemParams = field(repr=False)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.m)

    def is_stable(self) -> bool:
        return bool(np.all(self.eigenvalues().real < 0.0))


def build_matrix(ss: SteadyState, p: SystemParams) -> DynamicalMatrix:
    """Drift matrix of d/dt A = M A - K A_in with A = (d, d+, b, b+)."""
    lam = ss.lambda_abs * cmath.exp(2j * ss.phi_c)
    g = ss.g_abs * cmath.exp(1j * ss.phi_c)
    dt = ss.delta_tilde
    m = np.array([
        [1j * dt - p.kappa / 2.0, 1j * lam, -1j * g, -1j * g],
        [-1j * lam.conjugate(), -1j * dt - p.kappa / 2.0, 1j * g.conjugate(), 1j * g.conjugate()],
        [-1j * g.conjugate(), -1j * g, -1j * p.omega_m - p.gamma_m / 2.0, 0.0],
        [1j * g.conjugate(), 1j * g, 0.0, 1j * p.omega_m - p.gamma_m / 2.0],
    ], dtype=complex)
    k = np.diag([math.sqrt(p.kappa), math.sqrt(p.kappa),
                 math.sqrt(p.gamma_m), math.sqrt(p.gamma_m)]).astype(float)
    return DynamicalMatrix(m=m, k=k, ss=ss, p=p)


def input_correlators(p: SystemParams, sq: SqueezeSpec | None = None,
                      phi_c: float = 0.0) -> np.ndarray:
    """Correlator matrix C with <A_in,i(t) A_in,j(t')> = C_ij delta(t - t')
    over (d_in, d_in+, b_in, b_in+): vacuum plus optional squeezing on the
    cavity port, thermal occupation n_th on the mechanical port.

    The squeezing angle of a SqueezeSpec is measured in the frame where the
    cavity amplitude is real; pass the steady state's phi_c so the noise
    phase lands in the same gauge as the drift matrix.
    """
    c = np.zeros((4, 4), dtype=complex)
    c[0, 1] = 1.0
    c[2, 3] = p.n_th + 1.0
    c[3, 2] = p.n_th
    if sq is not None and sq.xi > 0.0:
        c[0, 1] += sq.xi * sq.n_s
        c[1, 0] = sq.xi * sq.n_s
        anomalous = -sq.xi * sq.m_s * cmath.exp(2j * (sq.phase + phi_c))
        c[0, 0] = anomalous
        c[1, 1] = anomalous.conjugate()
    return c


def transfer(dm: DynamicalMatrix, omega) -> np.ndarray:
    """Response matrix T(w) = (M + i w I)^(-1) K mapping input noise
    amplitudes to mode amplitudes, batched over a frequency array."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    lhs = dm.m[None, :, :] + 1j * omega[:, None, None] * _IDENT[None, :, :]
    try:
        return np.linalg.solve(lhs, np.broadcast_to(dm.k.astype(complex),
                                                    lhs.shape).copy())
    except np.linalg.LinAlgError as exc:
        raise InstabilityError(f"singular response at some frequency: {exc}") from exc


def _contract(row_pos: np.ndarray, row_neg: np.ndarray, corr: np.ndarray) -> np.ndarray:
    """S(w) = sum_ij c_i(w) c_j(-w) C_ij for row coefficient arrays of
    shape (n, 4) evaluated at +w and -w."""
    return np.einsum("ni,nj,ij->n", row_pos, row_neg, corr)


def numeric_spectrum(dm: DynamicalMatrix, correlators: np.ndarray,
                     pair: str, grid) -> Spectrum:
    """Numerically assembled spectrum on a grid.

    pair selects the observable: "nn" photon number, "ff" radiation
    pressure force, "bb" mechanical occupation spectrum.
    """
    if not dm.is_stable():
        raise InstabilityError("dynamical matrix has an eigenvalue with Re >= 0")
    grid = np.asarray(grid, dtype=float)
    t_pos = transfer(dm, grid)
    t_neg = transfer(dm, -grid)
    if pair in ("nn", "ff"):
        ph = cmath.exp(-1j * dm.ss.phi_c)
        w_pos = ph * t_pos[:, 0, :] + np.conj(ph) * t_pos[:, 1, :]
        w_neg = ph * t_neg[:, 0, :] + np.conj(ph) * t_neg[:, 1, :]
        values = dm.ss.n_c * _contract(w_pos, w_neg, correlators)
        if pair == "ff":
            values = dm.p.g0 ** 2 * values
    elif pair == "bb":
        values = _contract(t_neg[:, 3, :], t_pos[:, 2, :], correlators)
    else:
        raise ValueError(f"unknown spectrum pair {pair!r}")
    values = np.real_if_close(values, tol=1e6)
    return Spectrum(grid=grid, values=np.real(values),
                    meta={"kind": f"numeric_{pair}"})


def numeric_occupation(dm: DynamicalMatrix, correlators: np.ndarray,
                       rtol: float = 1e-6):
    """Occupation from adaptive quadrature of the numeric mechanical
    spectrum; returns (value, error_estimate).

    The integration windows mirror the closed-form quadrature so that any
    gap against the analytic occupation measures physics approximations
    rather than integration domains.
    """
    from .cavity import scattering_rates
    from .cooling import QUAD_WINDOW_LINEWIDTHS, cavity_self_energy, quadrature_segments

    if not dm.is_stable():
        raise InstabilityError("dynamical matrix has an eigenvalue with Re >= 0")
    p, ss = dm.p, dm.ss
    width = p.gamma_m + abs(scattering_rates(ss, p).gamma_opt)
    center = p.omega_m - complex(cavity_self_energy(ss, p, p.omega_m)).real

    def f(w):
        t_pos = transfer(dm, w)[0]
        t_neg = transfer(dm, -w)[0]
        val = np.einsum("i,j,ij->", t_neg[3, :], t_pos[2, :], correlators)
        return float(val.real)

    total, err = 0.0, 0.0
    segments, edge = quadrature_segments(center, QUAD_WINDOW_LINEWIDTHS * width)
    for lo, hi, pts in segments:
        with np.errstate(all="ignore"):
            val, e = quad(f, lo, hi, points=pts, limit=400, epsrel=rtol)
        if not math.isfinite(val):
            raise ConvergenceError("numeric occupation quadrature diverged")
        total += val
        err += e
    tail = np.geomspace(edge, 20.0 * p.kappa + edge, 200)
    for sgn in (1.0, -1.0):
        g = np.sort(sgn * tail)
        vals = np.array([f(w) for w in g])
        total += np.trapezoid(vals, g)
    return total / (2.0 * math.pi), err / (2.0 * math.pi)
