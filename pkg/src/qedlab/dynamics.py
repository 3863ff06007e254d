"""Time propagation and delta-kick linear-response spectroscopy.

A classic 4th-order Runge-Kutta stepper drives four kinds of systems: the
exact coupled Hamiltonians, the photon-free effective Hamiltonian with its
memory variables, the semi-classical Maxwell mean field, and the latter with
an adiabatic local-density photon-exchange potential.  The impulsive
perturbation is a narrow Lorentzian in time multiplying the dipole operator;
spectra are damped Fourier transforms of the dipole trace.

State-dependent terms (mean current, adiabatic density functional) are
evaluated from each RK4 stage's input vector; classical mode variables are
co-integrated with the same stages.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.signal import find_peaks as _scipy_find_peaks

from .grid import Grid1D, Potential1D, laplacian, first_derivative
from .modes import ModeSet, C_LIGHT, coupling_from_g_ratio, single_mode
from . import exact
from .photon_free import build_static_pf_free_hamiltonian, kinetic_coefficient
from . import qedft


@dataclass(frozen=True)
class KickProtocol:
    """Impulsive dipole perturbation v(x,t) = amplitude(t) * x.

    The Lorentzian amplitude integrates to ``-strength`` over all times; with
    the default center at t=1 and width 1e-2 the truncated tail before t=0 is
    below 1e-5 of the integral.
    """

    strength: float = 1e-4
    center: float = 1.0
    width: float = 1e-2

    def amplitude(self, t: float) -> float:
        return -(self.strength / np.pi) * self.width / ((t - self.center) ** 2
                                                        + self.width**2)

    @property
    def effectively_over(self) -> float:
        """Time after which the pulse is negligible (500 widths past center)."""
        return self.center + 500.0 * self.width


@dataclass(frozen=True)
class SpectrumRun:
    """Propagation and windowing parameters of a spectrum run."""

    dt: float = 5e-4
    t_end: float = 1000.0
    damping: float = 5e-3
    omega_max: float = 1.5
    record_stride: int = 20


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    dipole: np.ndarray
    norm: np.ndarray
    energy: np.ndarray
    jp: np.ndarray | None = None
    mode_amplitude: np.ndarray | None = None      # memory variables M_beta(t)
    vector_potential: np.ndarray | None = None    # A_beta(t) per Maxwell solution
    final_state: np.ndarray | None = field(default=None, repr=False)
    norm_drift: float = 0.0
    energy_drift: float = 0.0


# ---------------------------------------------------------------------------
# systems

class ExactSystem:
    """Linear propagation of a prebuilt coupled (or matter-only) Hamiltonian."""

    def __init__(self, h0, x_diag: np.ndarray, kick: KickProtocol | None = None):
        self.h0 = sp.csr_matrix(h0, dtype=complex)
        self.x_diag = np.asarray(x_diag, dtype=float)
        self.kick = kick
        self.n_wf = h0.shape[0]

    def pack(self, psi0: np.ndarray) -> np.ndarray:
        return np.asarray(psi0, dtype=complex).copy()

    def wf(self, y: np.ndarray) -> np.ndarray:
        return y

    def deriv(self, t: float, y: np.ndarray) -> np.ndarray:
        hy = self.h0 @ y
        if self.kick is not None:
            hy = hy + self.kick.amplitude(t) * (self.x_diag * y)
        return -1j * hy

    def dipole(self, y: np.ndarray) -> float:
        dens = np.abs(y) ** 2
        return float(np.dot(self.x_diag, dens) / dens.sum())

    def conserved_energy(self, t: float, y: np.ndarray, k1: np.ndarray) -> float:
        nrm = np.vdot(y, y).real
        e_full = np.real(1j * np.vdot(y, k1))
        if self.kick is not None:
            e_full -= self.kick.amplitude(t) * np.dot(self.x_diag, np.abs(y) ** 2)
        return float(e_full / nrm)

    def extras(self, t: float, y: np.ndarray) -> dict:
        return {}

    def step_hook(self, t: float, y: np.ndarray) -> None:
        pass


class PhotonFreeSystem:
    """Photon-free Hamiltonian with mean-current fluctuation and memory terms.

    The state vector carries the wavefunction followed by (M, M') per mode.
    The kinetic part including the static fluctuation correction is the same
    matrix as the static photon-free builder, so an unkicked ground state is
    stationary.
    """

    def __init__(self, grid: Grid1D, v: Potential1D, modeset: ModeSet,
                 kick: KickProtocol | None = None, include_zero_point: bool = False,
                 fd_order: int = 4, history_mode: str = "auxiliary_ode"):
        if not grid.is_dirichlet():
            raise ValueError("time-dependent photon-free runs use dirichlet grids")
        if history_mode not in ("auxiliary_ode", "memory_integral"):
            raise ValueError(f"unknown history mode {history_mode!r}")
        kinetic_coefficient(modeset)  # boundedness assertion
        self.grid = grid
        self.modeset = modeset
        self.kick = kick
        self.history_mode = history_mode
        self.hstat = sp.csr_matrix(
            build_static_pf_free_hamiltonian(grid, v, modeset,
                                             include_zero_point, fd_order),
            dtype=complex)
        self.dmat = sp.csr_matrix(first_derivative(grid, fd_order), dtype=complex)
        self.x = grid.coords
        self.n_wf = grid.n_points
        self.n_modes = modeset.n_modes
        self.coeff = modeset.diamagnetic_freqs_sq / (
            modeset.n_electrons * modeset.dressed_omegas**2)
        self.omega_t = modeset.dressed_omegas
        # memory-integral mode: frozen-per-step trapezoidal accumulator
        self._acc = np.zeros(self.n_modes, dtype=complex)
        self._prev = None  # (t, jp)

    def pack(self, psi0: np.ndarray) -> np.ndarray:
        y = np.zeros(self.n_wf + 2 * self.n_modes, dtype=complex)
        y[:self.n_wf] = psi0
        self._acc[:] = 0.0
        self._prev = (0.0, self._jp(np.asarray(psi0, dtype=complex)))
        return y

    def wf(self, y: np.ndarray) -> np.ndarray:
        return y[:self.n_wf]

    def _jp(self, psi: np.ndarray) -> float:
        nrm = np.vdot(psi, psi).real
        return float(np.real(np.vdot(psi, -1j * (self.dmat @ psi))) / nrm)

    def _memory(self, t: float, y: np.ndarray) -> np.ndarray:
        if self.history_mode == "auxiliary_ode":
            return y[self.n_wf:self.n_wf + self.n_modes].real
        return self.omega_t * np.imag(np.exp(1j * self.omega_t * t) * self._acc)

    def deriv(self, t: float, y: np.ndarray) -> np.ndarray:
        n = self.n_wf
        psi = y[:n]
        mem = self._memory(t, y)
        dpsi = self.dmat @ psi
        jp = float(np.imag(np.vdot(psi, dpsi)) / np.vdot(psi, psi).real)
        c_lin = float(np.sum(self.coeff * (0.5 * jp - mem)))
        hpsi = self.hstat @ psi
        if self.kick is not None:
            hpsi += self.kick.amplitude(t) * (self.x * psi)
        out = np.empty_like(y)
        np.multiply(hpsi, -1j, out=out[:n])
        out[:n] -= c_lin * dpsi     # -i * c_lin * (-i d/dx) psi
        m_val = y[n:n + self.n_modes]
        out[n:n + self.n_modes] = y[n + self.n_modes:]
        out[n + self.n_modes:] = self.omega_t**2 * (jp - m_val)
        return out

    def step_hook(self, t: float, y: np.ndarray) -> None:
        if self.history_mode != "memory_integral":
            return
        t_prev, jp_prev = self._prev
        jp_new = self._jp(y[:self.n_wf])
        dt = t - t_prev
        self._acc += 0.5 * dt * (np.exp(-1j * self.omega_t * t_prev) * jp_prev
                                 + np.exp(-1j * self.omega_t * t) * jp_new)
        self._prev = (t, jp_new)

    def dipole(self, y: np.ndarray) -> float:
        psi = y[:self.n_wf]
        dens = np.abs(psi) ** 2
        return float(np.dot(self.x, dens) / dens.sum())

    def conserved_energy(self, t: float, y: np.ndarray, k1: np.ndarray) -> float:
        n = self.n_wf
        psi = y[:n]
        nrm = np.vdot(psi, psi).real
        mem = self._memory(t, y)
        jp = self._jp(psi)
        c_lin = float(np.sum(self.coeff * (0.5 * jp - mem)))
        e_matter = np.real(1j * np.vdot(psi, k1[:n])) / nrm
        if self.kick is not None:
            e_matter -= self.kick.amplitude(t) * np.dot(self.x, np.abs(psi) ** 2) / nrm
        e_matter -= c_lin * jp
        m_val = y[n:n + self.n_modes].real
        m_dot = y[n + self.n_modes:].real
        e_field = np.sum(self.coeff * (0.25 * jp**2
                                       + 0.5 * (m_dot**2 / self.omega_t**2 + m_val**2)
                                       - m_val * jp))
        return float(e_matter + e_field)

    def extras(self, t: float, y: np.ndarray) -> dict:
        n = self.n_wf
        m_val = self._memory(t, y) if self.history_mode == "memory_integral" \
            else y[n:n + self.n_modes].real
        return {
            "jp": self._jp(y[:n]),
            "mode_amplitude": m_val.copy(),
            "vector_potential": -C_LIGHT * self.coeff * m_val,
        }


class MaxwellSystem:
    """Bare matter coupled to classical mode amplitudes (mean-field Maxwell).

    With ``xc`` set, the adiabatic local-density photon-exchange potential of
    the instantaneous density is added to the matter Hamiltonian (the
    time-dependent Kohn-Sham variant).  Mode polarizations are folded into the
    amplitude variables.
    """

    def __init__(self, grid: Grid1D, v: Potential1D, modeset: ModeSet,
                 kick: KickProtocol | None = None, xc: qedft.XcConfig | None = None,
                 fd_order: int = 4):
        if not grid.is_dirichlet():
            raise ValueError("Maxwell mean-field runs use dirichlet grids")
        self.grid = grid
        self.modeset = modeset
        self.kick = kick
        self.xc = xc
        self.h0 = sp.csr_matrix(exact.matter_hamiltonian(grid, v, fd_order),
                                dtype=complex)
        self.dmat = sp.csr_matrix(first_derivative(grid, fd_order), dtype=complex)
        self.x = grid.coords
        self.n_wf = grid.n_points
        self.n_modes = modeset.n_modes
        self.coeff = modeset.diamagnetic_freqs_sq / (
            modeset.n_electrons * modeset.dressed_omegas**2)
        self.omega_t = modeset.dressed_omegas
        if xc is not None and xc.functional != "pxlda":
            raise ValueError("adiabatic propagation supports the pxlda functional")

    def pack(self, psi0: np.ndarray) -> np.ndarray:
        y = np.zeros(self.n_wf + 2 * self.n_modes, dtype=complex)
        y[:self.n_wf] = psi0
        return y

    def wf(self, y: np.ndarray) -> np.ndarray:
        return y[:self.n_wf]

    def _density(self, psi: np.ndarray) -> np.ndarray:
        dens = np.abs(psi) ** 2 / self.grid.spacing
        return self.modeset.n_electrons * dens / (dens.sum() * self.grid.spacing)

    def deriv(self, t: float, y: np.ndarray) -> np.ndarray:
        n = self.n_wf
        psi = y[:n]
        m_val = y[n:n + self.n_modes].real
        dpsi = self.dmat @ psi
        jp = float(np.imag(np.vdot(psi, dpsi)) / np.vdot(psi, psi).real)
        hpsi = self.h0 @ psi
        if self.kick is not None:
            hpsi += self.kick.amplitude(t) * (self.x * psi)
        if self.xc is not None:
            vxc = qedft.v_pxlda(self._density(psi), self.grid, self.modeset, self.xc)
            hpsi += vxc * psi
        c_lin = -float(np.sum(self.coeff * m_val))
        out = np.empty_like(y)
        np.multiply(hpsi, -1j, out=out[:n])
        out[:n] -= c_lin * dpsi
        out[n:n + self.n_modes] = y[n + self.n_modes:]
        out[n + self.n_modes:] = self.omega_t**2 * (jp - y[n:n + self.n_modes])
        return out

    def step_hook(self, t: float, y: np.ndarray) -> None:
        pass

    def dipole(self, y: np.ndarray) -> float:
        psi = y[:self.n_wf]
        dens = np.abs(psi) ** 2
        return float(np.dot(self.x, dens) / dens.sum())

    def conserved_energy(self, t: float, y: np.ndarray, k1: np.ndarray) -> float:
        n = self.n_wf
        psi = y[:n]
        nrm = np.vdot(psi, psi).real
        m_val = y[n:n + self.n_modes].real
        m_dot = y[n + self.n_modes:].real
        dpsi = self.dmat @ psi
        jp = float(np.real(np.vdot(psi, -1j * dpsi)) / nrm)
        e_matter = np.real(np.vdot(psi, self.h0 @ psi)) / nrm
        e_xc = 0.0
        if self.xc is not None:
            rho = self._density(psi)
            spin_mult = 2.0 if self.xc.spin_factor == "single_electron_x2" else 1.0
            pref = spin_mult * 2.0 * self.xc.kappa * np.pi**2 * float(np.sum(
                self.modeset.diamagnetic_freqs_sq / self.modeset.dressed_omegas**2)
            ) / self.modeset.n_electrons
            e_xc = -(pref / 48.0) * float(np.sum(rho**3)) * self.grid.spacing
        e_field = np.sum(self.coeff * (0.5 * (m_dot**2 / self.omega_t**2 + m_val**2)
                                       - m_val * jp))
        return float(e_matter + e_xc + e_field)

    def extras(self, t: float, y: np.ndarray) -> dict:
        n = self.n_wf
        m_val = y[n:n + self.n_modes].real
        return {
            "jp": self._jp_of(y),
            "mode_amplitude": m_val.copy(),
            "vector_potential": -C_LIGHT * self.coeff * m_val,
        }

    def _jp_of(self, y: np.ndarray) -> float:
        psi = y[:self.n_wf]
        return float(np.real(np.vdot(psi, -1j * (self.dmat @ psi)))
                     / np.vdot(psi, psi).real)


# ---------------------------------------------------------------------------
# RK4 driver

def propagate_system(system, psi0: np.ndarray, dt: float, t_end: float,
                     record_stride: int = 1, norm_tol: float = 1e-6,
                     kick_end: float | None = None) -> Trajectory:
    """RK4 propagation with per-step norm monitoring.

    Recorders sample the dipole, norm, conserved energy and system extras
    every ``record_stride`` steps.  Aborts if the wavefunction norm drifts
    further than ``norm_tol`` from its initial value.  The reported energy
    drift is the relative spread over samples after the kick window.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    y = system.pack(psi0)
    n_steps = int(round(t_end / dt))
    norm0 = np.linalg.norm(system.wf(y))

    rec_idx = list(range(0, n_steps + 1, record_stride))
    if rec_idx[-1] != n_steps:
        rec_idx.append(n_steps)
    n_rec = len(rec_idx)
    times = np.empty(n_rec)
    dip = np.empty(n_rec)
    norms = np.empty(n_rec)
    energies = np.empty(n_rec)
    jp_rec = np.full(n_rec, np.nan)
    m_rec = np.full((n_rec, getattr(system, "n_modes", 0)), np.nan)
    a_rec = np.full_like(m_rec, np.nan)
    has_extras = False

    max_drift = 0.0
    pos = 0
    stage = np.empty_like(y)
    accum = np.empty_like(y)
    for step in range(n_steps + 1):
        t = step * dt
        k1 = system.deriv(t, y)
        if pos < n_rec and step == rec_idx[pos]:
            times[pos] = t
            dip[pos] = system.dipole(y)
            norms[pos] = np.linalg.norm(system.wf(y))
            energies[pos] = system.conserved_energy(t, y, k1)
            ext = system.extras(t, y)
            if ext:
                has_extras = True
                jp_rec[pos] = ext["jp"]
                m_rec[pos] = ext["mode_amplitude"]
                a_rec[pos] = ext["vector_potential"]
            pos += 1
        if step == n_steps:
            break
        np.multiply(k1, dt / 2, out=stage)
        stage += y
        k2 = system.deriv(t + dt / 2, stage)
        np.multiply(k2, dt / 2, out=stage)
        stage += y
        k3 = system.deriv(t + dt / 2, stage)
        np.multiply(k3, dt, out=stage)
        stage += y
        k4 = system.deriv(t + dt, stage)
        np.add(k2, k3, out=accum)
        accum *= 2.0
        accum += k1
        accum += k4
        accum *= dt / 6
        y = y + accum
        system.step_hook(t + dt, y)
        drift = abs(np.linalg.norm(system.wf(y)) - norm0)
        if drift > max_drift:
            max_drift = drift
        if drift > norm_tol:
            raise RuntimeError(
                f"norm drift {drift:.3e} exceeded {norm_tol:.1e} at step {step + 1} "
                f"(t = {(step + 1) * dt:.4f})")

    if kick_end is None:
        kick_end = system.kick.effectively_over if getattr(system, "kick", None) else 0.0
    tail = energies[times >= kick_end]
    e_drift = 0.0
    if len(tail) > 1:
        e_drift = float((tail.max() - tail.min()) / max(abs(tail.mean()), 1e-300))

    return Trajectory(
        times, dip, norms, energies,
        jp=jp_rec if has_extras else None,
        mode_amplitude=m_rec if has_extras else None,
        vector_potential=a_rec if has_extras else None,
        final_state=y, norm_drift=float(max_drift), energy_drift=e_drift)


# ---------------------------------------------------------------------------
# spectra

def dipole_spectrum(times: np.ndarray, dipole: np.ndarray, damping: float = 5e-3,
                    omega_max: float = 1.5):
    """Damped Fourier transform |d(omega)| of the dipole trace on a uniform grid."""
    times = np.asarray(times)
    dipole = np.asarray(dipole)
    dt = times[1] - times[0]
    signal = (dipole - dipole[0]) * np.exp(-damping * times)
    amp = np.abs(np.fft.rfft(signal)) * dt
    omega = 2.0 * np.pi * np.fft.rfftfreq(len(signal), dt)
    keep = omega <= omega_max
    return omega[keep], amp[keep]


def spectrum_peaks(omega: np.ndarray, amp: np.ndarray, min_rel_height: float = 0.02,
                   max_peaks: int | None = None) -> list[tuple[float, float]]:
    """Local maxima refined by parabolic interpolation, strongest first."""
    if len(amp) < 3:
        return []
    idx, _ = _scipy_find_peaks(amp, height=min_rel_height * amp.max())
    peaks = []
    domega = omega[1] - omega[0]
    for i in idx:
        if 0 < i < len(amp) - 1:
            denom = amp[i - 1] - 2.0 * amp[i] + amp[i + 1]
            shift = 0.5 * (amp[i - 1] - amp[i + 1]) / denom if denom != 0 else 0.0
            peaks.append((float(omega[i] + shift * domega), float(amp[i])))
        else:
            peaks.append((float(omega[i]), float(amp[i])))
    peaks.sort(key=lambda p: -p[1])
    return peaks[:max_peaks] if max_peaks else peaks


# ---------------------------------------------------------------------------
# protocol drivers

SYSTEMS = ("exact_pzw", "exact_pf", "photon_free", "maxwell_classical",
           "pxlda_maxwell")


def prepare_system(name: str, grid: Grid1D, v: Potential1D, modeset: ModeSet,
                   trunc: exact.FockTruncation | None = None,
                   kick: KickProtocol | None = None, fd_order: int = 4,
                   xc: qedft.XcConfig | None = None):
    """Ground state + propagation system for one of the supported methods."""
    if name not in SYSTEMS:
        raise ValueError(f"unknown system {name!r}; expected one of {SYSTEMS}")
    if name in ("exact_pzw", "exact_pf"):
        if trunc is None:
            raise ValueError("exact systems need a Fock truncation")
        if name == "exact_pzw":
            h = exact.build_pzw_hamiltonian(grid, v, modeset, trunc, fd_order=fd_order)
        else:
            h = exact.build_pf_hamiltonian(grid, v, modeset, trunc,
                                           form="dressed_bilinear", fd_order=fd_order)
        _, psi0 = exact.ground_state(h)
        x_ext = exact.dipole_diagonal(grid, [trunc.states_per_mode] * modeset.n_modes)
        return ExactSystem(h, x_ext, kick), psi0
    if name == "photon_free":
        h = build_static_pf_free_hamiltonian(grid, v, modeset, fd_order=fd_order)
        _, psi0 = exact.ground_state(h)
        return PhotonFreeSystem(grid, v, modeset, kick, fd_order=fd_order), psi0
    if name == "maxwell_classical":
        h = exact.matter_hamiltonian(grid, v, fd_order)
        _, psi0 = exact.ground_state(h)
        return MaxwellSystem(grid, v, modeset, kick, fd_order=fd_order), psi0
    # pxlda_maxwell
    xc = xc or qedft.XcConfig(functional="pxlda")
    ks = qedft.scf_solve(grid, v, modeset, xc, fd_order=fd_order)
    psi0 = ks.orbital * np.sqrt(grid.spacing)
    return MaxwellSystem(grid, v, modeset, kick, xc=xc, fd_order=fd_order), psi0


def kick_and_spectrum(name: str, grid: Grid1D, v: Potential1D, modeset: ModeSet,
                      trunc: exact.FockTruncation | None = None,
                      kick: KickProtocol | None = None,
                      run: SpectrumRun | None = None, fd_order: int = 4,
                      xc: qedft.XcConfig | None = None) -> dict:
    """Prepare the ground state, kick it, propagate, Fourier-transform the dipole."""
    kick = kick or KickProtocol()
    run = run or SpectrumRun()
    system, psi0 = prepare_system(name, grid, v, modeset, trunc, kick,
                                  fd_order, xc)
    traj = propagate_system(system, psi0, run.dt, run.t_end,
                            record_stride=run.record_stride)
    omega, amp = dipole_spectrum(traj.times, traj.dipole, run.damping, run.omega_max)
    return {
        "omega": omega,
        "amplitude": amp,
        "norm_drift": traj.norm_drift,
        "energy_drift": traj.energy_drift,
        "trajectory": traj,
    }


def spectrum_sweep(name: str, omega_list, g_ratio: float, grid: Grid1D,
                   v: Potential1D, max_n: int | None = None,
                   kick: KickProtocol | None = None, run: SpectrumRun | None = None,
                   fd_order: int = 4, xc: qedft.XcConfig | None = None) -> dict:
    """One kick-and-spectrum run per cavity frequency at fixed g/omega ratio.

    Failures of individual points are captured per point; the map keeps the
    successful columns.
    """
    omega_list = list(omega_list)
    if sorted(omega_list) != omega_list:
        raise ValueError("omega_list must be sorted ascending")
    run = run or SpectrumRun()
    columns = []
    status = []
    omega_axis = None
    for om in omega_list:
        ms = single_mode(om, coupling_from_g_ratio(om, g_ratio))
        trunc = exact.FockTruncation(max_n) if max_n is not None else None
        try:
            result = kick_and_spectrum(name, grid, v, ms, trunc, kick, run,
                                       fd_order, xc)
            omega_axis = result["omega"]
            columns.append(result["amplitude"])
            status.append((om, "ok", result["norm_drift"], result["energy_drift"]))
        except Exception as err:  # noqa: BLE001 - per-point isolation
            columns.append(None)
            status.append((om, f"failed: {err}", np.nan, np.nan))
    if omega_axis is None and omega_list:
        raise RuntimeError("every sweep point failed: " + "; ".join(
            s[1] for s in status))
    n_bins = len(omega_axis) if omega_axis is not None else 0
    mat = np.full((n_bins, len(omega_list)), np.nan)
    for j, col in enumerate(columns):
        if col is not None:
            mat[:, j] = col
    return {
        "cavity_omegas": np.array(omega_list),
        "omega": omega_axis if omega_axis is not None else np.array([]),
        "map": mat,
        "status": status,
    }
