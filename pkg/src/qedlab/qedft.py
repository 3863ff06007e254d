"""Kohn-Sham density-functional treatment of the transverse coupling.

Two exchange-level potentials for the photon part are provided: the
orbital-dependent photon-exchange potential (for one particle in 1D it is
proportional to lap(sqrt(rho))/sqrt(rho), reproducing the mass-enhanced
matter Hamiltonian at the SCF fixed point) and its local-density form
v ~ -rho^2 with the full frequency and polarization dependence.  The external
potential can optionally be smoothed with the displaced-basis Gaussian, which
makes the minimization variational.

All SCF work happens on dirichlet grids with a single occupied orbital
(one electron, or two spin-paired electrons).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import Grid1D, Potential1D, first_derivative, integrate, laplacian, \
    poisson_solve_1d, tabulated_potential
from .modes import ModeSet

log = logging.getLogger(__name__)

_UNIT_SPHERE_VOLUME = {1: 2.0, 2: np.pi, 3: 4.0 * np.pi / 3.0}


class ScfError(RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or []


@dataclass(frozen=True)
class XcConfig:
    functional: str = "px_orbital"      # or "pxlda"
    kappa: float = 1.0
    dimension: int = 1
    spin_factor: str = "closed_shell"   # or "single_electron_x2"
    mollify_external: bool = False

    def __post_init__(self):
        if self.functional not in ("px_orbital", "pxlda"):
            raise ValueError(f"unknown functional {self.functional!r}")
        if self.kappa < 0:
            raise ValueError("kappa must be non-negative")
        if self.dimension not in _UNIT_SPHERE_VOLUME:
            raise ValueError("dimension must be 1, 2 or 3")
        if self.spin_factor not in ("closed_shell", "single_electron_x2"):
            raise ValueError(f"unknown spin factor {self.spin_factor!r}")


@dataclass(eq=False)
class KsState:
    orbital: np.ndarray
    density: np.ndarray
    eigenvalue: float
    energy: float
    occupation: int
    potentials: dict = field(repr=False, default_factory=dict)
    iterations: int = 0
    residual_history: list = field(repr=False, default_factory=list)


def _positive_orbital(vec: np.ndarray, spacing: float) -> np.ndarray:
    """Continuum-normalize and fix the (nodeless) global sign."""
    phi = np.real(vec) / np.sqrt(spacing)
    if phi[np.argmax(np.abs(phi))] < 0:
        phi = -phi
    return phi


def _trust_region(rho: np.ndarray, floor: float) -> tuple[int, int]:
    mask = rho > floor * rho.max()
    idx = np.nonzero(mask)[0]
    return int(idx[0]), int(idx[-1])


def v_px_orbital(orbital: np.ndarray, grid: Grid1D, modeset: ModeSet,
                 fd_order: int = 4, route: str = "sqrt_density",
                 rho_floor: float = 1e-12) -> np.ndarray:
    """Orbital photon-exchange potential, 1D one-particle form, zero-edge gauge.

    ``sqrt_density`` evaluates C * lap(sqrt(rho))/sqrt(rho) directly;
    ``current`` assembles the current-current force expression and solves the
    Poisson problem.  The two are algebraically identical and serve as mutual
    cross-checks.  Outside the density trust region (rho above ``rho_floor``
    relative to its maximum) the potential continues linearly to zero at the
    box edges.
    """
    if not grid.is_dirichlet():
        raise ValueError("the orbital px potential is defined on dirichlet grids")
    phi = np.asarray(orbital, dtype=float)
    rho = phi**2
    if rho.max() <= 0.0:
        raise ValueError("empty orbital: density underflows everywhere")
    if phi[np.argmax(rho)] < 0:
        phi = -phi
    coeff = float(np.sum(modeset.diamagnetic_freqs_sq
                         / (2.0 * modeset.dressed_omegas**2)))
    if coeff == 0.0:
        return np.zeros(grid.n_points)
    i0, i1 = _trust_region(rho, rho_floor)
    lap = laplacian(grid, fd_order)
    x = grid.coords

    if route == "sqrt_density":
        raw = coeff * (lap @ phi)[i0:i1 + 1] / phi[i0:i1 + 1]
    elif route == "current":
        dmat = first_derivative(grid, fd_order)
        dphi = dmat @ phi
        f1 = dphi**2 - (lap @ phi) * phi
        inner = np.zeros(grid.n_points)
        inner[i0:i1 + 1] = (dmat @ f1)[i0:i1 + 1] / rho[i0:i1 + 1]
        # lap v = -coeff * d/dx(inner) on the trust interval, zero gauge at
        # its edges; poisson_solve_1d expects lap v = -source
        source = coeff * (dmat @ inner)
        sub = Grid1D(i1 - i0 + 1, grid.spacing, grid.boundary,
                     x[i0:i1 + 1])
        raw = poisson_solve_1d(source[i0:i1 + 1], sub, order=fd_order)
    else:
        raise ValueError(f"unknown route {route!r}")

    # zero-edge gauge anchored at the trust interval; the potential continues
    # as zero through the exponential tails to the box edges
    line = raw[0] + (raw[-1] - raw[0]) * (x[i0:i1 + 1] - x[i0]) / (x[i1] - x[i0])
    v = np.zeros(grid.n_points)
    v[i0:i1 + 1] = raw - line
    return v


def v_pxlda(density: np.ndarray, grid: Grid1D, modeset: ModeSet, config: XcConfig,
            route: str = "direct", fd_order: int = 4) -> np.ndarray:
    """Local-density photon-exchange potential.

    Direct (isotropic) route: v = -sum_beta 2 kappa pi^2 omega_d^2/(d N
    omega_tilde^2) * (rho/2V_d)^(2/d); the Poisson route solves the
    polarization-projected form and agrees up to the edge gauge.
    """
    rho = np.asarray(density, dtype=float)
    if np.any(rho < -1e-12):
        raise ValueError("density must be non-negative")
    d = config.dimension
    v_d = _UNIT_SPHERE_VOLUME[d]
    spin_mult = 2.0 if config.spin_factor == "single_electron_x2" else 1.0
    base = (np.clip(rho, 0.0, None) / (2.0 * v_d)) ** (2.0 / d)
    pref = spin_mult * 2.0 * config.kappa * np.pi**2 * float(np.sum(
        modeset.diamagnetic_freqs_sq / modeset.dressed_omegas**2)) / modeset.n_electrons
    if route == "direct":
        return -(pref / d) * base
    if route == "poisson":
        lap = laplacian(grid, fd_order)
        return poisson_solve_1d(pref * (lap @ base), grid, order=fd_order)
    raise ValueError(f"unknown route {route!r}")


def soft_coulomb_interaction(xi: float = 1.0):
    """Repulsive softened electron-electron kernel w(x, x')."""
    def w(x, x_prime):
        return 1.0 / np.sqrt(np.subtract.outer(x, x_prime) ** 2 + xi**2)
    return w


def v_hx(orbital: np.ndarray, grid: Grid1D, w, occupation: int = 2,
         fd_order: int = 4) -> np.ndarray:
    """Hartree-exchange potential of a doubly occupied orbital.

    The interaction-force route reduces exactly to half the Hartree potential
    of the total density; it is solved through the Poisson problem with the
    zero-edge gauge.  With one electron the force expression vanishes
    identically: a zero potential is returned and flagged in the logs.
    """
    if occupation == 1 or w is None:
        log.warning("v_hx called with a single electron: exchange force is "
                    "identically zero, returning a zero potential")
        return np.zeros(grid.n_points)
    if occupation != 2:
        raise ValueError("v_hx supports one doubly occupied orbital")
    phi = np.asarray(orbital, dtype=float)
    rho = occupation * phi**2
    kernel = w(grid.coords, grid.coords)
    hartree = kernel @ rho * grid.spacing
    lap = laplacian(grid, fd_order)
    # F_W/rho = -1/2 d(hartree)/dx exactly; lap v = -div(F_W/rho) = +lap(hartree)/2
    return poisson_solve_1d(-0.5 * (lap @ hartree), grid, order=fd_order)


def mollify_external(v: Potential1D, grid: Grid1D, modeset: ModeSet) -> np.ndarray:
    """Convolve the external potential with the displaced-basis Gaussians.

    One Gaussian per mode (width omega_d/sqrt(2 N omega_tilde^3)), tails
    truncated at 10 sigma and weights renormalized; analytic potentials are
    evaluated off-grid, tabulated ones interpolated.
    """
    if not grid.is_dirichlet():
        raise ValueError("mollification by direct quadrature needs a dirichlet grid")
    current = v
    values = v.values.copy()
    for sigma in modeset.beta_shift_sigma():
        if sigma == 0.0:
            continue
        reach = int(np.ceil(10.0 * sigma / grid.spacing))
        offsets = np.arange(-reach, reach + 1) * grid.spacing
        weights = np.exp(-offsets**2 / (2.0 * sigma**2))
        weights /= weights.sum()
        values = np.zeros(grid.n_points)
        for off, wgt in zip(offsets, weights):
            values += wgt * current.evaluate(grid.coords - off, grid)
        current = tabulated_potential(values)
    return values


def total_energy_mx(orbital: np.ndarray, grid: Grid1D, modeset: ModeSet,
                    v_values: np.ndarray, occupation: int,
                    include_zero_point: bool = False, fd_order: int = 4,
                    w=None) -> float:
    """Total energy from the explicit expression (never from eigenvalue sums).

    E = <T> + int v rho - sum_beta omega_d^2/(2 N omega_tilde^2) <(eps.J_p)^2>
    (+ interaction term for two electrons, + the vacuum offset).  The
    polarization-projected squared current of a real orbital is discretized
    with the same grid Laplacian as the kinetic term.
    """
    phi = np.asarray(orbital, dtype=float)
    lap = laplacian(grid, fd_order)
    rho = occupation * phi**2
    kin_density = phi @ (-(lap @ phi)) * grid.spacing  # <phi| -d^2/dx^2 |phi>
    t_exp = 0.5 * occupation * kin_density
    pot = integrate(v_values * rho, grid)
    px_coeff = float(np.sum(modeset.diamagnetic_freqs_sq
                            / (2.0 * modeset.n_electrons * modeset.dressed_omegas**2)))
    px = -px_coeff * occupation * kin_density
    e_w = 0.0
    if occupation == 2 and w is not None:
        kernel = w(grid.coords, grid.coords)
        e_w = 0.25 * grid.spacing**2 * rho @ kernel @ rho
    zp = modeset.zero_point(dressed=True) if include_zero_point \
        else modeset.zero_point_offset()
    return float(t_exp + pot + px + e_w + zp)


def _lowest_orbital(h: sp.csr_matrix, v0: np.ndarray | None):
    dim = h.shape[0]
    try:
        vals, vecs = spla.eigsh(h, k=1, which="SA", v0=v0, tol=1e-12,
                                ncv=min(dim, 48))
        return float(vals[0]), vecs[:, 0]
    except spla.ArpackNoConvergence:
        dense = h.toarray()
        evals, evecs = np.linalg.eigh(dense)
        return float(evals[0]), evecs[:, 0]


def scf_solve(grid: Grid1D, v_ext: Potential1D, modeset: ModeSet, config: XcConfig,
              occupation: int | None = None, w=None, mixing: float = 0.3,
              tol_rho: float = 1e-9, tol_energy: float = 1e-10,
              max_iter: int = 400, fd_order: int = 4) -> KsState:
    """Self-consistent field loop with linear density mixing.

    Converged when both the density residual max|rho_new - rho_old| and the
    total-energy change drop below their tolerances.  Raises ``ScfError`` with
    the residual history otherwise.
    """
    if not grid.is_dirichlet():
        raise ValueError("the SCF loop runs on dirichlet grids")
    occupation = occupation if occupation is not None else modeset.n_electrons
    if occupation not in (1, 2):
        raise ValueError("one occupied orbital: occupation must be 1 or 2")
    if occupation != modeset.n_electrons:
        raise ValueError("occupation must match the mode dressing's electron number")

    v_base = mollify_external(v_ext, grid, modeset) if config.mollify_external \
        else v_ext.values.copy()
    kin = (-0.5 * laplacian(grid, fd_order)).tocsr()
    dx = grid.spacing

    vec = None
    rho = None
    energy_prev = None
    energy = np.nan
    v_xc = np.zeros(grid.n_points)
    v_hartree_x = np.zeros(grid.n_points)
    residuals = []
    eig = np.nan

    for it in range(1, max_iter + 1):
        h = (kin + sp.diags(v_base + v_xc + v_hartree_x)).tocsr()
        eig, vec = _lowest_orbital(h, vec)
        phi = _positive_orbital(vec, dx)
        rho_out = occupation * phi**2
        energy = total_energy_mx(phi, grid, modeset, v_base, occupation,
                                 fd_order=fd_order, w=w)

        if rho is None:
            res_rho = np.inf
            rho = rho_out
        else:
            res_rho = float(np.max(np.abs(rho_out - rho)))
            rho = (1.0 - mixing) * rho + mixing * rho_out
        res_e = np.inf if energy_prev is None else abs(energy - energy_prev)
        residuals.append((res_rho, res_e))
        if res_rho <= tol_rho and res_e <= tol_energy:
            pots = {"v_ext": v_base, "v_xc": v_xc, "v_hx": v_hartree_x}
            return KsState(phi, rho_out, eig, energy, occupation, pots, it, residuals)
        energy_prev = energy

        phi_mix = np.sqrt(np.clip(rho, 0.0, None) / occupation)
        if config.functional == "px_orbital":
            v_xc = v_px_orbital(phi_mix, grid, modeset, fd_order=fd_order)
        else:
            v_xc = v_pxlda(rho, grid, modeset, config, fd_order=fd_order)
        if occupation == 2 and w is not None:
            v_hartree_x = v_hx(phi_mix, grid, w, occupation, fd_order=fd_order)

    raise ScfError(
        f"SCF did not converge in {max_iter} iterations "
        f"(last residuals rho={residuals[-1][0]:.3e}, E={residuals[-1][1]:.3e})",
        residuals)
