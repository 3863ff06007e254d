"""Photon-free effective description: the cavity enters as a mass enhancement.

The adiabatic substitution of the field fluctuations by the paramagnetic
current turns the coupled problem into a matter-only one.  Statically (real
ground states, vanishing mean current) only the polarization-projected kinetic
correction survives: the kinetic coefficient along the polarization becomes
(1 - sum_beta omega_d^2/omega_tilde^2)/2, strictly positive for any coupling.
Time-dependently the mean current drives per-mode harmonic memory variables
M_beta with  M'' + omega_tilde^2 M = omega_tilde^2 <J_p>(t), entering the
Hamiltonian alongside the instantaneous fluctuation term.

Photon observables remain accessible through the same substitution; for the
bare-mode photon number the normal-mode squeeze of the vacuum contributes the
constant (omega_tilde - omega)^2 / (4 omega omega_tilde) on top of the
current-fluctuation part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .grid import Grid1D, Potential1D, first_derivative, laplacian
from .modes import ModeSet
from .exact import matter_hamiltonian_k


@dataclass(frozen=True)
class PhotonFreeConfig:
    modeset: ModeSet
    include_zero_point: bool = False
    history_mode: str = "auxiliary_ode"

    def __post_init__(self):
        if self.history_mode not in ("auxiliary_ode", "memory_integral"):
            raise ValueError(f"unknown history mode {self.history_mode!r}")


def kinetic_coefficient(modeset: ModeSet) -> float:
    """Mass-enhancement factor multiplying -1/2 d^2/dx^2; asserted positive."""
    c_kin = modeset.mass_factor()
    if c_kin <= 0.0:
        raise AssertionError(
            f"photon-free kinetic coefficient {c_kin} not positive; "
            "the Hamiltonian would be unbounded from below")
    return c_kin


def build_static_pf_free_hamiltonian(grid: Grid1D, v: Potential1D, modeset: ModeSet,
                                     include_zero_point: bool = False,
                                     fd_order: int = 4):
    """Matter-space ground-state Hamiltonian with the adiabatic correction.

    Valid for real ground states where the mean current and the memory term
    vanish.  Dirichlet grids yield a sparse finite-difference matrix, periodic
    grids a plane-wave matrix with diagonal kinetic part.
    """
    c_kin = kinetic_coefficient(modeset)
    const = modeset.zero_point(dressed=True) if include_zero_point \
        else modeset.zero_point_offset()
    if grid.is_dirichlet():
        h = -0.5 * c_kin * laplacian(grid, fd_order) + sp.diags(v.values + const)
        return h.tocsr()
    h = matter_hamiltonian_k(grid, v)
    h = h + np.diag((c_kin - 1.0) * 0.5 * grid.k_points**2 + const)
    return h


def reconstruct_photon_observables(psi: np.ndarray, modeset: ModeSet, grid: Grid1D,
                                   fd_order: int = 4) -> dict:
    """Photon observables of a matter state via the current substitution.

    Returns per-mode ``photon_number_dressed`` (occupation of the normal
    modes), ``a_mean`` (mean field amplitude, zero for real states) and, for a
    single mode, the bare-mode ``photon_number`` including the squeezed-vacuum
    constant -- the quantity comparable with the exact solvers.
    """
    psi = np.asarray(psi)
    nrm = np.vdot(psi, psi).real
    if grid.is_dirichlet():
        dmat = first_derivative(grid, fd_order)
        lap = laplacian(grid, fd_order)
        jp = np.real(np.vdot(psi, -1j * (dmat @ psi))) / nrm
        jp_sq = np.real(np.vdot(psi, -(lap @ psi))) / nrm
    else:
        k = grid.k_points
        jp = np.real(np.vdot(psi, k * psi)) / nrm
        jp_sq = np.real(np.vdot(psi, k**2 * psi)) / nrm

    n_e = modeset.n_electrons
    wd2 = modeset.diamagnetic_freqs_sq
    wt = modeset.dressed_omegas
    pol = modeset.dressed_polarizations
    n_dressed = wd2 / (2.0 * n_e * wt**3) * jp_sq
    a_mean = -np.sqrt(wd2 / (2.0 * n_e * wt**3)) * pol * jp

    out = {
        "photon_number_dressed": n_dressed.tolist(),
        "a_mean": a_mean.tolist(),
    }
    if modeset.n_modes == 1:
        omega = modeset.omegas[0]
        omega_t = wt[0]
        squeeze = (omega_t - omega) ** 2 / (4.0 * omega * omega_t)
        out["photon_number"] = [float(omega / omega_t * n_dressed[0] + squeeze)]
    else:
        out["photon_number"] = n_dressed.tolist()
    return out


# ---------------------------------------------------------------------------
# memory kernel: auxiliary ODE vs direct sine-kernel quadrature

def memory_term_ode(times: np.ndarray, jp_of_t, omega_t: float) -> np.ndarray:
    """Integrate M'' + omega_t^2 M = omega_t^2 jp(t) with RK4, M(0)=M'(0)=0.

    ``jp_of_t`` is a callable; ``times`` must be uniformly spaced.
    """
    times = np.asarray(times)
    dt = times[1] - times[0]
    m_val = 0.0
    mdot = 0.0
    out = np.empty(len(times))
    out[0] = 0.0
    w2 = omega_t**2

    def rhs(t, m, md):
        return md, w2 * (jp_of_t(t) - m)

    for i in range(1, len(times)):
        t = times[i - 1]
        k1m, k1d = rhs(t, m_val, mdot)
        k2m, k2d = rhs(t + dt / 2, m_val + dt / 2 * k1m, mdot + dt / 2 * k1d)
        k3m, k3d = rhs(t + dt / 2, m_val + dt / 2 * k2m, mdot + dt / 2 * k2d)
        k4m, k4d = rhs(t + dt, m_val + dt * k3m, mdot + dt * k3d)
        m_val += dt / 6 * (k1m + 2 * k2m + 2 * k3m + k4m)
        mdot += dt / 6 * (k1d + 2 * k2d + 2 * k3d + k4d)
        out[i] = m_val
    return out


def memory_term_quadrature(times: np.ndarray, jp_samples: np.ndarray,
                           omega_t: float) -> np.ndarray:
    """Trapezoidal sine-kernel integral  omega_t * int_0^t sin(omega_t (t-t')) jp dt'.

    Evaluated via a running complex accumulator, O(1) per sample.
    """
    times = np.asarray(times)
    jp_samples = np.asarray(jp_samples)
    dt = times[1] - times[0]
    phase = np.exp(-1j * omega_t * times) * jp_samples
    acc = np.concatenate([[0.0], np.cumsum((phase[1:] + phase[:-1]) * (dt / 2.0))])
    return omega_t * np.imag(np.exp(1j * omega_t * times) * acc)


def propagate_pf_free(psi0: np.ndarray, grid: Grid1D, v: Potential1D,
                      config: PhotonFreeConfig, dt: float, t_end: float,
                      kick=None, record_stride: int = 1):
    """RK4 propagation under the time-dependent photon-free Hamiltonian.

    The mean current enters the fluctuation term evaluated from each RK4
    stage's input vector; the memory variables are co-integrated with the same
    stages.  Returns a ``dynamics.Trajectory`` with the dipole, current, mode
    amplitudes and conservation diagnostics.
    """
    from . import dynamics  # runtime import; dynamics builds on this module

    system = dynamics.PhotonFreeSystem(grid, v, config.modeset, kick=kick,
                                       include_zero_point=config.include_zero_point,
                                       history_mode=config.history_mode)
    return dynamics.propagate_system(system, psi0, dt, t_end,
                                     record_stride=record_stride)
