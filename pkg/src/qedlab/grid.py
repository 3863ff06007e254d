"""Uniform 1D grids, finite-difference operators, model potentials and Poisson solves.

Everything downstream (coupled solvers, effective Hamiltonians, the SCF loop)
is built on the objects in this module.  Grids come in two flavours:

* ``dirichlet`` -- box grids with the wavefunction implicitly zero outside the
  box, used for bound-state problems,
* ``periodic`` -- ring grids identifying ``x_min`` with ``x_max + spacing``,
  used for the plane-wave/pHEG benchmarks.

All quantities are in Hartree atomic units.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DIRICHLET = "dirichlet"
PERIODIC = "periodic"

# Interior stencil weights for d^2/dx^2 and d/dx (central differences).
_LAPLACIAN_WEIGHTS = {
    2: np.array([1.0, -2.0, 1.0]),
    4: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
}
_GRADIENT_WEIGHTS = {
    2: np.array([-0.5, 0.0, 0.5]),
    4: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
}


@dataclass(frozen=True)
class FdStencil:
    """Central finite-difference stencil weights of a given order."""

    order: int
    coefficients: np.ndarray

    @property
    def half_width(self) -> int:
        return len(self.coefficients) // 2


def laplacian_stencil(order: int) -> FdStencil:
    if order not in _LAPLACIAN_WEIGHTS:
        raise ValueError(f"finite-difference order must be 2 or 4, got {order}")
    return FdStencil(order, _LAPLACIAN_WEIGHTS[order].copy())


def gradient_stencil(order: int) -> FdStencil:
    if order not in _GRADIENT_WEIGHTS:
        raise ValueError(f"finite-difference order must be 2 or 4, got {order}")
    return FdStencil(order, _GRADIENT_WEIGHTS[order].copy())


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Uniform 1D grid centered on x = 0.

    Attributes
    ----------
    n_points : int
        Number of grid points (>= 3).
    spacing : float
        Grid spacing in Bohr.
    boundary : str
        Either ``"dirichlet"`` or ``"periodic"``.
    coords : numpy.ndarray
        Grid coordinates, symmetric about the origin.
    """

    n_points: int
    spacing: float
    boundary: str
    coords: np.ndarray = field(repr=False)

    @property
    def length(self) -> float:
        """Box length: span for dirichlet, ring circumference for periodic."""
        if self.boundary == PERIODIC:
            return self.n_points * self.spacing
        return (self.n_points - 1) * self.spacing

    @property
    def k_points(self) -> np.ndarray:
        """Reciprocal points 2*pi*j/(n*dx) with j centered around 0 (periodic only)."""
        if self.boundary != PERIODIC:
            raise ValueError("k_points are only defined for periodic grids")
        n = self.n_points
        j = np.arange(n) - (n - 1) // 2 if n % 2 == 1 else np.arange(n) - n // 2
        return 2.0 * np.pi * j / (n * self.spacing)

    def is_dirichlet(self) -> bool:
        return self.boundary == DIRICHLET

    def is_periodic(self) -> bool:
        return self.boundary == PERIODIC


def build_grid(n_points: int, spacing: float, boundary: str = DIRICHLET) -> Grid1D:
    """Construct a grid with coordinates symmetric about x = 0."""
    if n_points < 3:
        raise ValueError(f"need at least 3 grid points, got {n_points}")
    if spacing <= 0:
        raise ValueError(f"grid spacing must be positive, got {spacing}")
    if boundary not in (DIRICHLET, PERIODIC):
        raise ValueError(f"unknown boundary type {boundary!r}")
    x = (np.arange(n_points) - (n_points - 1) / 2.0) * spacing
    return Grid1D(n_points, float(spacing), boundary, x)


@dataclass(frozen=True, eq=False)
class Potential1D:
    """External single-particle potential sampled on a grid.

    ``kind`` keeps enough metadata to evaluate analytic potentials off-grid
    (needed by the Gaussian mollification, which shifts the argument).
    """

    values: np.ndarray
    kind: str
    xi: float | None = None

    def evaluate(self, x: np.ndarray, grid: Grid1D | None = None) -> np.ndarray:
        """Evaluate at arbitrary coordinates; tabulated data is interpolated."""
        x = np.asarray(x, dtype=float)
        if self.kind == "soft_coulomb":
            return -1.0 / np.sqrt(x**2 + self.xi**2)
        if self.kind == "zero":
            return np.zeros_like(x)
        if grid is None:
            raise ValueError("tabulated potential needs its grid for off-grid evaluation")
        return np.interp(x, grid.coords, self.values)


def soft_coulomb(grid: Grid1D, xi: float = 1.0) -> Potential1D:
    """Softened attractive Coulomb well -1/sqrt(x^2 + xi^2)."""
    if xi <= 0:
        raise ValueError(f"softening length must be positive, got {xi}")
    return Potential1D(-1.0 / np.sqrt(grid.coords**2 + xi**2), "soft_coulomb", float(xi))


def zero_potential(grid: Grid1D) -> Potential1D:
    return Potential1D(np.zeros(grid.n_points), "zero")


def tabulated_potential(values: np.ndarray) -> Potential1D:
    return Potential1D(np.asarray(values, dtype=float), "tabulated")


def _banded_operator(grid: Grid1D, weights: np.ndarray, scale: float) -> sp.csr_matrix:
    n = grid.n_points
    hw = len(weights) // 2
    offsets = range(-hw, hw + 1)
    mat = sp.diags(
        [np.full(n - abs(o), weights[o + hw]) for o in offsets],
        offsets,
        shape=(n, n),
        format="lil",
    )
    if grid.is_periodic():
        for o in range(1, hw + 1):
            for i in range(o):
                mat[i, n - o + i] = weights[hw - o]
                mat[n - o + i, i] = weights[hw + o]
    # dirichlet: rows near the edge simply drop the out-of-box neighbours
    # (implicit zero wavefunction outside the box).
    return (scale * mat.tocsr()).tocsr()


def laplacian(grid: Grid1D, order: int = 4) -> sp.csr_matrix:
    """Discrete d^2/dx^2 with the grid's boundary treatment. Symmetric."""
    st = laplacian_stencil(order)
    return _banded_operator(grid, st.coefficients, 1.0 / grid.spacing**2)


def first_derivative(grid: Grid1D, order: int = 4) -> sp.csr_matrix:
    """Discrete d/dx (central, antisymmetric). -i * first_derivative is Hermitian."""
    st = gradient_stencil(order)
    return _banded_operator(grid, st.coefficients, 1.0 / grid.spacing)


def poisson_solve_1d(source: np.ndarray, grid: Grid1D, order: int = 2) -> np.ndarray:
    """Solve lap(v) = -source with v = 0 at both box edges.

    The linear part of v (the 1D gauge freedom) is fixed by the two boundary
    values.  Periodic grids are rejected: with periodic boundary conditions
    the problem is only solvable for zero-mean sources.
    """
    if not grid.is_dirichlet():
        raise ValueError("poisson_solve_1d requires a dirichlet grid")
    source = np.asarray(source, dtype=float)
    if source.shape != (grid.n_points,):
        raise ValueError("source must be sampled on the grid")
    lap = laplacian(grid, order)
    v = np.zeros(grid.n_points)
    # pin the first and last point to zero, solve the interior rows
    interior = lap[1:-1, 1:-1].tocsc()
    v[1:-1] = spla.spsolve(interior, -source[1:-1])
    return v


def integrate(values: np.ndarray, grid: Grid1D) -> float:
    """Riemann sum consistent with the grid inner product."""
    return float(np.sum(values) * grid.spacing)
