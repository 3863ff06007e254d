"""Cavity modes and the normal-mode (Bogoliubov) dressing of their frequencies.

The squared-frequency matrix W = diag(omega^2) + N_e * v v^T (with v the vector
of signed couplings lambda * eps) absorbs the diamagnetic self-interaction of
the vector potential.  Its eigendecomposition yields dressed frequencies and
polarizations with a purely bilinear residual coupling.  For a single mode this
reduces to the closed form  omega_tilde^2 = omega^2 + N_e lambda^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

C_LIGHT = 137.035999  # speed of light in atomic units


@dataclass(frozen=True)
class CavityMode:
    """A single lossless cavity mode in the long-wavelength limit.

    ``lam`` is the fundamental coupling strength (sqrt(4 pi) times the mode
    function at the molecular center of charge); ``polarization`` is the 1D
    projection of the polarization vector, restricted to +/-1.
    """

    omega: float
    lam: float
    polarization: float = 1.0

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError(f"mode frequency must be positive, got {self.omega}")
        if self.lam < 0:
            raise ValueError(f"coupling strength must be non-negative, got {self.lam}")
        if self.polarization not in (-1.0, 1.0, -1, 1):
            raise ValueError("1D polarization projection must be +1 or -1")


def coupling_from_g_ratio(omega: float, ratio: float) -> float:
    """Coupling lambda for a prescribed g/omega with g = sqrt(omega/2) lambda."""
    return ratio * np.sqrt(2.0 * omega)


@dataclass(frozen=True, eq=False)
class ModeSet:
    """Modes together with their dressed (normal-mode) quantities.

    The dressed arrays are indexed by normal mode.  ``diamagnetic_freqs_sq``
    holds omega_d^2 = N_e * dressed_coupling^2 per normal mode, the quantity
    entering every effective-Hamiltonian prefactor.
    """

    modes: tuple[CavityMode, ...]
    n_electrons: int
    omegas: np.ndarray = field(repr=False)                 # bare, input order
    dressed_omegas: np.ndarray = field(repr=False)
    dressed_couplings: np.ndarray = field(repr=False)      # lambda_tilde >= 0
    dressed_polarizations: np.ndarray = field(repr=False)  # +/-1 per normal mode
    diamagnetic_freqs_sq: np.ndarray = field(repr=False)
    bogoliubov_matrix: np.ndarray = field(repr=False)      # rows = normal modes

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def zero_point(self, dressed: bool) -> float:
        """Sum of half-frequencies, dressed or bare."""
        return 0.5 * float(np.sum(self.dressed_omegas if dressed else self.omegas))

    def zero_point_offset(self) -> float:
        """Energy left after removing the trivial bare-cavity shift sum(omega)/2."""
        return self.zero_point(dressed=True) - self.zero_point(dressed=False)

    def mass_factor(self) -> float:
        """Kinetic coefficient 1 - sum(omega_d^2/omega_tilde^2) along polarization."""
        return 1.0 - float(np.sum(self.diamagnetic_freqs_sq / self.dressed_omegas**2))

    def beta_shift_sigma(self) -> np.ndarray:
        """Coherent-shift slope omega_d/sqrt(2 N_e omega_tilde^3) per normal mode.

        beta_alpha(k) = sigma_alpha * eps_tilde_alpha * k; the same quantity is
        the Gaussian width of the mollifier m^{0,0}.
        """
        return np.sqrt(
            self.diamagnetic_freqs_sq / (2.0 * self.n_electrons * self.dressed_omegas**3)
        )


def dress_modes(modes, n_electrons: int = 1) -> ModeSet:
    """Diagonalize the diamagnetically shifted frequency matrix.

    Returns a ModeSet whose bilinear coupling is exact in the dressed frame
    (no residual quadratic vector-potential term).  With all couplings zero
    the transformation is the identity and the mode order is preserved.
    """
    modes = tuple(modes)
    if n_electrons < 1:
        raise ValueError("n_electrons must be a positive integer")
    if not modes:
        raise ValueError("need at least one cavity mode")
    omegas = np.array([m.omega for m in modes])
    v = np.array([m.lam * m.polarization for m in modes])

    if np.all(v == 0.0):
        m_p = len(modes)
        return ModeSet(
            modes, n_electrons, omegas, omegas.copy(),
            np.zeros(m_p), np.ones(m_p), np.zeros(m_p), np.eye(m_p),
        )

    w_mat = np.diag(omegas**2) + n_electrons * np.outer(v, v)
    if not np.array_equal(w_mat, w_mat.T):
        raise AssertionError("frequency matrix assembled non-symmetric (internal bug)")
    evals, evecs = np.linalg.eigh(w_mat)
    if np.any(evals <= 0):
        raise AssertionError("dressed squared frequencies must be positive")
    u = evecs.T  # rows are normal modes: W = U^T diag(evals) U
    # deterministic eigenvector signs: largest-magnitude component positive
    for row in u:
        pivot = np.argmax(np.abs(row))
        if row[pivot] < 0:
            row *= -1.0
    v_dressed = u @ v
    lam_dressed = np.abs(v_dressed)
    pol_dressed = np.where(v_dressed >= 0, 1.0, -1.0)
    return ModeSet(
        modes, n_electrons, omegas, np.sqrt(evals),
        lam_dressed, pol_dressed, n_electrons * lam_dressed**2, u,
    )


def single_mode(omega: float, lam: float, n_electrons: int = 1,
                polarization: float = 1.0) -> ModeSet:
    """Convenience constructor for the single-mode setups used everywhere."""
    return dress_modes([CavityMode(omega, lam, polarization)], n_electrons)
