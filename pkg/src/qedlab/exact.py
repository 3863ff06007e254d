"""Exact coupled light-matter solvers on (grid or plane-wave) x Fock spaces.

Three Hamiltonian builders are provided for a single electron:

* velocity-gauge minimal coupling with the explicit quadratic vector-potential
  term (``form="bare_with_A2"``),
* the same Hamiltonian after the normal-mode dressing, leaving a purely
  bilinear coupling (``form="dressed_bilinear"``),
* the length-gauge form with dipole self-polarization (``build_pzw_hamiltonian``),
  plus its photon-discarded self-polarization-only reduction.

Dirichlet grids are assembled in position space with finite differences;
periodic grids are assembled in the plane-wave basis where the momentum
operator is diagonal.  On dirichlet grids the velocity-gauge couplings involve
-i d/dx; a per-mode phase rotation |n> -> i^n |n> makes every matrix real
symmetric, which is what the assemblers produce (photon_phase = "rotated").
Number-diagonal observables are unaffected; quadrature observables undo the
rotation internally.

Reported energies exclude the bare-cavity zero-point sum(omega_alpha)/2 unless
``include_zero_point=True``; the dressing-induced vacuum shift
sum(omega_tilde - omega)/2 is physical and always kept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import Grid1D, Potential1D, first_derivative, laplacian
from .modes import ModeSet

DENSE_CUTOFF = 4000
_EIGSH_TOL = 1e-10
_RESIDUAL_SCALE = 1e-9
_V0_SEED = 20210907


class EigensolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class FockTruncation:
    """Per-mode photon-number cap (inclusive)."""

    max_n: int

    def __post_init__(self):
        if self.max_n < 0:
            raise ValueError("max_n must be non-negative")

    @property
    def states_per_mode(self) -> int:
        return self.max_n + 1


@dataclass(eq=False)
class CoupledState:
    """Amplitude vector over |x or k> (x) prod_alpha |n_alpha> with metadata."""

    amplitudes: np.ndarray
    shape: tuple
    grid: Grid1D
    modeset: ModeSet
    truncation: FockTruncation
    gauge: str          # "pf_dressed" | "pf_bare" | "pzw"
    photon_phase: str   # "rotated" | "plain"
    space: str          # "position" | "momentum"
    energy: float | None = None

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.shape)

    def matter_density(self) -> np.ndarray:
        """Marginal |psi|^2 over the matter index (unit sum)."""
        t = np.abs(self.tensor()) ** 2
        return t.reshape(self.shape[0], -1).sum(axis=1)

    def photon_marginal(self, mode: int) -> np.ndarray:
        t = np.abs(self.tensor()) ** 2
        axes = tuple(ax for ax in range(len(self.shape)) if ax != mode + 1)
        return t.sum(axis=axes)


# ---------------------------------------------------------------------------
# photon-space operator factory (exact truncated matrix elements)

def ladder_plus(m: int) -> np.ndarray:
    """a_dagger + a on m number states."""
    s = np.sqrt(np.arange(1, m))
    return np.diag(s, 1) + np.diag(s, -1)


def ladder_minus(m: int) -> np.ndarray:
    """a_dagger - a (real antisymmetric)."""
    s = np.sqrt(np.arange(1, m))
    return np.diag(s, -1) - np.diag(s, 1)


def number_op(m: int) -> np.ndarray:
    return np.diag(np.arange(m, dtype=float))


def quad_pair_sq(m: int, sign: float) -> np.ndarray:
    """Exact truncated (a_dagger + a)^2-type matrix: diag(2n+1) + sign * two-quanta part."""
    n = np.arange(m, dtype=float)
    s2 = np.sqrt((n[:-2] + 1.0) * (n[:-2] + 2.0)) if m > 2 else np.zeros(0)
    mat = np.diag(2.0 * n + 1.0)
    if m > 2:
        mat += sign * (np.diag(s2, 2) + np.diag(s2, -2))
    return mat


def _mode_op(op: np.ndarray, mode: int, dims: list[int]) -> sp.csr_matrix:
    """Embed a single-mode operator into the photon tensor product."""
    result = sp.identity(1, format="csr")
    for beta, m in enumerate(dims):
        factor = sp.csr_matrix(op) if beta == mode else sp.identity(m, format="csr")
        result = sp.kron(result, factor, format="csr")
    return result


def _photon_identity(dims: list[int]) -> sp.csr_matrix:
    return sp.identity(int(np.prod(dims)), format="csr")


# ---------------------------------------------------------------------------
# matter-space pieces

def matter_hamiltonian(grid: Grid1D, v: Potential1D, fd_order: int = 4) -> sp.csr_matrix:
    """-1/2 d^2/dx^2 + v on a dirichlet grid (finite differences)."""
    return (-0.5 * laplacian(grid, fd_order) + sp.diags(v.values)).tocsr()


def potential_k_matrix(grid: Grid1D, values: np.ndarray) -> np.ndarray:
    """Plane-wave matrix <k_j|v|k_j'> of a grid-sampled potential (odd periodic grid)."""
    if not grid.is_periodic():
        raise ValueError("plane-wave matrix requires a periodic grid")
    n = grid.n_points
    if n % 2 == 0:
        raise ValueError("plane-wave solvers require an odd number of k-points")
    center = (n - 1) / 2.0
    q = np.arange(n)
    vq = np.fft.fft(np.asarray(values)) / n * np.exp(2j * np.pi * q * center / n)
    diff = (np.subtract.outer(np.arange(n), np.arange(n))) % n
    mat = vq[diff]
    mat = 0.5 * (mat + mat.conj().T)  # FFT roundoff breaks hermiticity at ~1e-17
    if np.max(np.abs(mat.imag)) < 1e-14 * max(1.0, np.max(np.abs(mat.real))):
        mat = mat.real.copy()
    return mat


def matter_hamiltonian_k(grid: Grid1D, v: Potential1D) -> np.ndarray:
    """Plane-wave matter Hamiltonian diag(k^2/2) + <k|v|k'>."""
    return np.diag(0.5 * grid.k_points**2) + potential_k_matrix(grid, v.values)


def dipole_diagonal(grid: Grid1D, photon_dims: list[int]) -> np.ndarray:
    """Diagonal of the matter coordinate on the coupled space (position rep)."""
    return np.repeat(grid.coords, int(np.prod(photon_dims)))


# ---------------------------------------------------------------------------
# Hamiltonian builders

def build_pf_hamiltonian(grid: Grid1D, v: Potential1D, modeset: ModeSet,
                         trunc: FockTruncation, form: str = "dressed_bilinear",
                         include_zero_point: bool = False,
                         fd_order: int = 4) -> sp.csr_matrix:
    """Velocity-gauge Hamiltonian on the coupled space (single electron).

    ``dressed_bilinear`` couples the momentum to the normal modes (frequencies
    omega_tilde, no quadratic field term); ``bare_with_A2`` uses the bare modes
    with the explicit quadratic term.  Both have identical spectra once the
    Fock space is converged.
    """
    if modeset.n_electrons != 1:
        raise ValueError("grid-based exact solves support a single electron only")
    if form not in ("dressed_bilinear", "bare_with_A2"):
        raise ValueError(f"unknown Pauli-Fierz form {form!r}")

    m_states = trunc.states_per_mode
    dims = [m_states] * modeset.n_modes
    ident_ph = _photon_identity(dims)

    if grid.is_dirichlet():
        h_mat = matter_hamiltonian(grid, v, fd_order)
        jp_factor = first_derivative(grid, fd_order)  # J_p = -i * jp_factor
        dirichlet = True
    else:
        h_mat = sp.csr_matrix(matter_hamiltonian_k(grid, v))
        jp_factor = sp.diags(grid.k_points).tocsr()   # J_p itself (diagonal)
        dirichlet = False

    h = sp.kron(h_mat, ident_ph, format="csr").astype(
        np.result_type(h_mat.dtype, float))

    if form == "dressed_bilinear":
        omegas = modeset.dressed_omegas
        couplings = modeset.dressed_couplings * modeset.dressed_polarizations
        a2_pairs = None
    else:
        omegas = modeset.omegas
        couplings = np.array([m.lam * m.polarization for m in modeset.modes])
        a2_pairs = True

    for beta, omega in enumerate(omegas):
        h = h + omega * sp.kron(
            sp.identity(grid.n_points), _mode_op(number_op(m_states), beta, dims),
            format="csr")

    shift = _zero_point_diag_for(form, modeset, include_zero_point)
    if shift != 0.0:
        h = h + shift * sp.identity(h.shape[0], format="csr")

    # bilinear coupling  lambda_beta * q_beta * (eps_beta . J_p)
    for beta, omega in enumerate(omegas):
        c0 = couplings[beta] / np.sqrt(2.0 * omega)
        if c0 == 0.0:
            continue
        if dirichlet:
            # rotated phase: q -> -i(a+ - a), J_p = -i d/dx; the product is real
            h = h - c0 * sp.kron(jp_factor, _mode_op(ladder_minus(m_states), beta, dims),
                                 format="csr")
        else:
            h = h + c0 * sp.kron(jp_factor, _mode_op(ladder_plus(m_states), beta, dims),
                                 format="csr")

    if a2_pairs:
        # 1/2 (sum_alpha lambda_alpha q_alpha eps_alpha)^2, exact truncated elements
        sign = -1.0 if dirichlet else 1.0
        for a_idx in range(modeset.n_modes):
            la = couplings[a_idx]
            if la == 0.0:
                continue
            qa_sq = quad_pair_sq(m_states, sign) / (2.0 * omegas[a_idx])
            h = h + 0.5 * la**2 * sp.kron(
                sp.identity(grid.n_points), _mode_op(qa_sq, a_idx, dims), format="csr")
            for b_idx in range(a_idx + 1, modeset.n_modes):
                lb = couplings[b_idx]
                if lb == 0.0:
                    continue
                pref = sign * la * lb / np.sqrt(4.0 * omegas[a_idx] * omegas[b_idx])
                ladder = ladder_minus(m_states) if dirichlet else ladder_plus(m_states)
                cross = _mode_op(ladder, a_idx, dims) @ _mode_op(ladder, b_idx, dims)
                h = h + pref * sp.kron(sp.identity(grid.n_points), cross, format="csr")

    _assert_hermitian(h)
    return h.tocsr()


def _zero_point_diag_for(form: str, modeset: ModeSet, include_zero_point: bool) -> float:
    """Constant completing the assembled omega*n photon term to the reporting
    convention: the full dressed vacuum term sum(omega_tilde)/2 is excluded by
    default (toggling it shifts every energy by exactly that constant)."""
    if form in ("dressed_bilinear",):
        const = modeset.zero_point(dressed=True)
    else:  # bare_with_A2, pzw: explicit oscillators at bare frequencies
        const = modeset.zero_point(dressed=False)
    return const - (0.0 if include_zero_point else modeset.zero_point(dressed=True))


def build_pzw_hamiltonian(grid: Grid1D, v: Potential1D, modeset: ModeSet,
                          trunc: FockTruncation, include_zero_point: bool = False,
                          fd_order: int = 4) -> sp.csr_matrix:
    """Length-gauge Hamiltonian with dipole self-polarization (dirichlet only).

    Photon coordinates sit on number states of the bare frequencies; the
    coupling omega*lambda*p*(eps.x) and the self-polarization
    (lambda eps.x)^2/2 make the matrix real symmetric without any phase
    rotation.
    """
    if not grid.is_dirichlet():
        raise ValueError("the length-gauge form breaks matter periodicity; "
                         "dirichlet grid required")
    if modeset.n_electrons != 1:
        raise ValueError("grid-based exact solves support a single electron only")
    m_states = trunc.states_per_mode
    dims = [m_states] * modeset.n_modes

    lams = np.array([m.lam for m in modeset.modes])
    pols = modeset.dressed_polarizations if modeset.n_modes > 1 else np.array(
        [modeset.modes[0].polarization])
    selfpol = 0.5 * np.sum(lams**2) * grid.coords**2  # (eps.x)^2 = x^2 in 1D
    h_mat = matter_hamiltonian(grid, v, fd_order) + sp.diags(selfpol)

    h = sp.kron(h_mat, _photon_identity(dims), format="csr")
    for alpha, mode in enumerate(modeset.modes):
        h = h + mode.omega * sp.kron(
            sp.identity(grid.n_points), _mode_op(number_op(m_states), alpha, dims),
            format="csr")
        c0 = mode.omega * mode.lam / np.sqrt(2.0 * mode.omega)
        if c0 != 0.0:
            h = h + c0 * sp.kron(
                sp.diags(pols[alpha] * grid.coords),
                _mode_op(ladder_plus(m_states), alpha, dims), format="csr")

    shift = _zero_point_diag_for("pzw", modeset, include_zero_point)
    if shift != 0.0:
        h = h + shift * sp.identity(h.shape[0], format="csr")
    _assert_hermitian(h)
    return h.tocsr()


def build_pzw_selfpol_hamiltonian(grid: Grid1D, v: Potential1D, modeset: ModeSet,
                                  fd_order: int = 4) -> sp.csr_matrix:
    """Length-gauge Hamiltonian with the photons discarded: matter + (lambda eps.x)^2/2."""
    if not grid.is_dirichlet():
        raise ValueError("dirichlet grid required")
    lams = np.array([m.lam for m in modeset.modes])
    selfpol = 0.5 * np.sum(lams**2) * grid.coords**2
    return (matter_hamiltonian(grid, v, fd_order) + sp.diags(selfpol)).tocsr()


def _assert_hermitian(h) -> None:
    if sp.issparse(h):
        delta = abs(h - h.getH())
        worst = delta.max() if delta.nnz else 0.0
        scale = abs(h).max()
    else:
        worst = np.abs(h - h.conj().T).max()
        scale = np.abs(h).max()
    if worst > 1e-13 * max(1.0, scale):
        raise AssertionError(f"Hamiltonian assembled non-Hermitian (max dev {worst:.3e})")


# ---------------------------------------------------------------------------
# eigensolver

def ground_state(h, dense_cutoff: int = DENSE_CUTOFF):
    """Lowest eigenpair: dense below `dense_cutoff`, Lanczos (ARPACK) above.

    The Lanczos start vector is seeded deterministically so repeated runs are
    bitwise reproducible.  The residual ||H psi - E psi|| is checked against
    1e-9 times the operator scale.
    """
    dim = h.shape[0]
    if dim <= dense_cutoff:
        dense = h.toarray() if sp.issparse(h) else np.asarray(h)
        evals, evecs = np.linalg.eigh(dense)
        return float(evals[0]), np.ascontiguousarray(evecs[:, 0])

    rng = np.random.default_rng(_V0_SEED)
    v0 = rng.standard_normal(dim)
    try:
        vals, vecs = spla.eigsh(h, k=1, which="SA", v0=v0, tol=_EIGSH_TOL,
                                ncv=min(dim, 64))
    except spla.ArpackNoConvergence as exc:
        raise EigensolverError(
            f"Lanczos did not converge (dim={dim}): {exc}; "
            f"partial eigenvalues {getattr(exc, 'eigenvalues', None)}") from exc
    energy, vec = float(vals[0]), vecs[:, 0]
    scale = max(1.0, _operator_scale(h))
    residual = np.linalg.norm(h @ vec - energy * vec)
    if residual > _RESIDUAL_SCALE * scale:
        raise EigensolverError(
            f"eigenpair residual {residual:.3e} exceeds {_RESIDUAL_SCALE:.1e} * "
            f"scale {scale:.3e} (dim={dim})")
    return energy, np.ascontiguousarray(vec)


def _operator_scale(h) -> float:
    if sp.issparse(h):
        return float(abs(h).sum(axis=1).max())
    return float(np.abs(h).sum(axis=1).max())


def matter_eigenvalues(grid: Grid1D, v: Potential1D, n_levels: int = 3,
                       fd_order: int = 4) -> np.ndarray:
    """Lowest eigenvalues of the bare matter problem (for resonance lookups)."""
    if grid.is_periodic():
        evals = np.linalg.eigvalsh(matter_hamiltonian_k(grid, v))
        return evals[:n_levels]
    h = matter_hamiltonian(grid, v, fd_order)
    if h.shape[0] <= DENSE_CUTOFF:
        return np.linalg.eigvalsh(h.toarray())[:n_levels]
    vals = spla.eigsh(h, k=n_levels, which="SA", return_eigenvectors=False,
                      v0=np.random.default_rng(_V0_SEED).standard_normal(h.shape[0]))
    return np.sort(vals)


def resonance_frequency(grid: Grid1D, v: Potential1D, fd_order: int = 4) -> float:
    """First bare matter excitation energy E1 - E0."""
    evals = matter_eigenvalues(grid, v, 2, fd_order)
    return float(evals[1] - evals[0])


def solve_coupled_ground_state(h, grid: Grid1D, modeset: ModeSet,
                               trunc: FockTruncation, gauge: str) -> CoupledState:
    """Ground state packaged with its basis metadata."""
    energy, vec = ground_state(h)
    dirichlet = grid.is_dirichlet()
    shape = (grid.n_points,) + (trunc.states_per_mode,) * modeset.n_modes
    phase = "rotated" if (gauge.startswith("pf") and dirichlet) else "plain"
    return CoupledState(vec, shape, grid, modeset, trunc, gauge, phase,
                        "position" if dirichlet else "momentum", energy)


# ---------------------------------------------------------------------------
# observables

def observables(state: CoupledState, modeset: ModeSet | None = None,
                trunc: FockTruncation | None = None) -> dict:
    """Energy, per-mode photon numbers, dipole moment/variance, sector weights.

    Photon numbers refer to the bare modes.  In the dressed representation the
    back transformation (a Bogoliubov squeeze between omega and omega_tilde)
    is applied; it is exact for a single mode, which covers every benchmark.
    In the length-gauge representation the number operator of the gauge's own
    bare-frequency oscillators is reported (photon number is gauge dependent).
    """
    modeset = modeset or state.modeset
    trunc = trunc or state.truncation
    tens = state.tensor()
    m_p = modeset.n_modes

    out = {"energy": state.energy}
    dist = [state.photon_marginal(b) for b in range(m_p)]
    out["excitation_distribution"] = dist

    occ = [float(np.dot(np.arange(len(d)), d)) for d in dist]
    if state.gauge == "pf_dressed":
        out["photon_number_dressed"] = occ
        if m_p == 1:
            omega = modeset.omegas[0]
            omega_t = modeset.dressed_omegas[0]
            u = (omega + omega_t) / (2.0 * np.sqrt(omega * omega_t))
            w = (omega - omega_t) / (2.0 * np.sqrt(omega * omega_t))
            two_quanta = _expect_mode_op(tens, quad_pair_sq(trunc.states_per_mode, 1.0)
                                         - np.diag(2.0 * np.arange(trunc.states_per_mode)
                                                   + 1.0), 0)
            if state.photon_phase == "rotated":
                two_quanta = -two_quanta
            n_bare = (u**2 + w**2) * occ[0] + w**2 + u * w * two_quanta
            out["photon_number"] = [float(n_bare)]
        else:
            out["photon_number"] = occ  # dressed-frame occupancies (multimode)
    else:
        out["photon_number"] = occ

    if state.space == "position":
        rho = state.matter_density()
        x = state.grid.coords
        dip = float(np.dot(rho, x))
        out["dipole"] = dip
        out["dipole_variance"] = float(np.dot(rho, x**2) - dip**2)
    else:
        out["dipole"] = None
        out["dipole_variance"] = None
    return out


def _expect_mode_op(tens: np.ndarray, op: np.ndarray, mode: int) -> float:
    """<psi| O_mode |psi> for an operator acting on one photon factor."""
    moved = np.moveaxis(tens, mode + 1, -1)
    applied = moved @ op.T
    return float(np.real(np.sum(np.conj(moved) * applied)))
