import numpy as np
import pytest
import scipy.sparse as sp

from qedlab import exact, grid, modes, pheg
from qedlab.exact import FockTruncation


def _ground(h):
    return exact.ground_state(h)[0]


def test_decoupled_limit_block_diagonal(dgrid, dpot, bare_energy):
    ms = modes.single_mode(0.4, 0.0)
    tr = FockTruncation(3)
    e = _ground(exact.build_pf_hamiltonian(dgrid, dpot, ms, tr))
    assert e == pytest.approx(bare_energy, abs=1e-12)
    e_zp = _ground(exact.build_pf_hamiltonian(dgrid, dpot, ms, tr,
                                              include_zero_point=True))
    assert e_zp == pytest.approx(bare_energy + 0.2, abs=1e-12)


def test_pf_forms_are_mutual_oracles(dgrid, dpot):
    ms = modes.single_mode(0.4, 0.05)
    tr = FockTruncation(20)
    e_dressed = _ground(exact.build_pf_hamiltonian(dgrid, dpot, ms, tr,
                                                   "dressed_bilinear"))
    e_bare = _ground(exact.build_pf_hamiltonian(dgrid, dpot, ms, tr,
                                                "bare_with_A2"))
    assert abs(e_dressed - e_bare) < 1e-8


def test_pf_forms_agree_on_periodic_grid(pgrid, ppot):
    ms = modes.single_mode(0.3, 0.3)
    e_dressed = _ground(exact.build_pf_hamiltonian(pgrid, ppot, ms, FockTruncation(40)))
    e_bare = _ground(exact.build_pf_hamiltonian(pgrid, ppot, ms, FockTruncation(60),
                                                "bare_with_A2"))
    assert abs(e_dressed - e_bare) < 1e-8


def test_pzw_matches_pf_when_converged(dgrid, dpot):
    ms = modes.single_mode(0.4, 0.1)
    tr = FockTruncation(25)
    e_pf = _ground(exact.build_pf_hamiltonian(dgrid, dpot, ms, tr))
    e_pzw = _ground(exact.build_pzw_hamiltonian(dgrid, dpot, ms, tr))
    assert abs(e_pf - e_pzw) < 1e-6


def test_pzw_decoupled_spectrum_matches_pf(dgrid, dpot):
    ms = modes.single_mode(0.7, 0.0)
    tr = FockTruncation(2)
    h_pf = exact.build_pf_hamiltonian(dgrid, dpot, ms, tr).toarray()
    h_pzw = exact.build_pzw_hamiltonian(dgrid, dpot, ms, tr).toarray()
    e_pf = np.linalg.eigvalsh(h_pf)[:8]
    e_pzw = np.linalg.eigvalsh(h_pzw)[:8]
    assert np.allclose(e_pf, e_pzw, atol=1e-10)


def test_pzw_rejects_periodic(pgrid, ppot):
    ms = modes.single_mode(0.4, 0.1)
    with pytest.raises(ValueError):
        exact.build_pzw_hamiltonian(pgrid, ppot, ms, FockTruncation(4))


def test_selfpol_limits(dgrid, dpot, bare_energy):
    ms0 = modes.single_mode(0.4, 0.0)
    assert _ground(exact.build_pzw_selfpol_hamiltonian(dgrid, dpot, ms0)) == \
        pytest.approx(bare_energy, abs=1e-12)
    # omega never enters: identical matrices for different frequencies
    h1 = exact.build_pzw_selfpol_hamiltonian(dgrid, dpot, modes.single_mode(0.2, 0.3))
    h2 = exact.build_pzw_selfpol_hamiltonian(dgrid, dpot, modes.single_mode(1.9, 0.3))
    assert (h1 - h2).nnz == 0
    # variance shrinks monotonically with coupling (sweep oracle)
    variances = []
    for lam in (0.0, 0.5, 1.0, 2.0, 4.0):
        h = exact.build_pzw_selfpol_hamiltonian(dgrid, dpot,
                                                modes.single_mode(0.4, lam))
        _, vec = exact.ground_state(h)
        rho = np.abs(vec) ** 2
        variances.append(float(rho @ dgrid.coords**2 - (rho @ dgrid.coords) ** 2))
    assert all(b < a for a, b in zip(variances, variances[1:]))


def test_fock_truncation_monotonicity(dgrid, dpot):
    ms = modes.single_mode(0.4, 0.3)
    energies = [
        _ground(exact.build_pf_hamiltonian(dgrid, dpot, ms, FockTruncation(n)))
        for n in (1, 2, 4, 8, 16)
    ]
    assert all(b <= a + 1e-13 for a, b in zip(energies, energies[1:]))


def test_zero_point_toggle_is_constant_shift(dgrid, dpot):
    ms = modes.single_mode(0.37, 0.21)
    tr = FockTruncation(6)
    shift = ms.zero_point(dressed=False)
    builders = [
        lambda z: exact.build_pf_hamiltonian(dgrid, dpot, ms, tr, include_zero_point=z),
        lambda z: exact.build_pf_hamiltonian(dgrid, dpot, ms, tr, "bare_with_A2",
                                             include_zero_point=z),
        lambda z: exact.build_pzw_hamiltonian(dgrid, dpot, ms, tr, include_zero_point=z),
    ]
    for build in builders:
        delta = build(True) - build(False)
        mism = delta - shift * sp.identity(delta.shape[0])
        assert (np.max(np.abs(mism.data)) if mism.nnz else 0.0) < 1e-13


def test_ground_state_harmonic_oscillator():
    g = grid.build_grid(301, 0.05, "dirichlet")
    omega = 0.8
    v = grid.tabulated_potential(0.5 * omega**2 * g.coords**2)
    e, vec = exact.ground_state(exact.matter_hamiltonian(g, v))
    assert e == pytest.approx(omega / 2, abs=5e-7)  # O(dx^4) discretization
    assert np.max(np.abs(vec.imag)) == 0.0  # real ground state for real H


def test_ground_state_lanczos_matches_dense(dgrid, dpot):
    ms = modes.single_mode(0.4, 0.15)
    h = exact.build_pzw_hamiltonian(dgrid, dpot, ms, FockTruncation(40))
    assert h.shape[0] > exact.DENSE_CUTOFF
    e_sparse, vec = exact.ground_state(h)
    e_dense = np.linalg.eigvalsh(h.toarray())[0]
    assert e_sparse == pytest.approx(e_dense, abs=1e-9)
    residual = np.linalg.norm(h @ vec - e_sparse * vec)
    assert residual < 1e-9 * exact._operator_scale(h)


def test_observables_decoupled_and_parity(dgrid, dpot):
    ms = modes.single_mode(0.4, 0.0)
    tr = FockTruncation(4)
    h = exact.build_pf_hamiltonian(dgrid, dpot, ms, tr)
    state = exact.solve_coupled_ground_state(h, dgrid, ms, tr, "pf_dressed")
    obs = exact.observables(state)
    assert obs["photon_number"][0] == pytest.approx(0.0, abs=1e-20)
    assert abs(obs["dipole"]) < 1e-10  # symmetric potential
    assert obs["excitation_distribution"][0][0] == pytest.approx(1.0, abs=1e-12)


def test_observables_homogeneous_photon_number(pgrid):
    v0 = grid.zero_potential(pgrid)
    ms = modes.single_mode(0.4, 0.5)
    tr = FockTruncation(6)
    h = exact.build_pf_hamiltonian(pgrid, v0, ms, tr)
    state = exact.solve_coupled_ground_state(h, pgrid, ms, tr, "pf_dressed")
    obs = exact.observables(state)
    analytic = pheg.homogeneous_photon_number(ms)[0]
    assert obs["photon_number"][0] == pytest.approx(analytic, rel=1e-12)
    assert obs["dipole"] is None  # undefined in the plane-wave representation


def test_bare_representation_photon_number_consistent(dgrid, dpot):
    # <a+a> from the dressed representation's back transform equals the direct
    # count in the bare-with-A2 representation
    ms = modes.single_mode(0.4, 0.25)
    tr = FockTruncation(30)
    h_d = exact.build_pf_hamiltonian(dgrid, dpot, ms, tr)
    st_d = exact.solve_coupled_ground_state(h_d, dgrid, ms, tr, "pf_dressed")
    n_d = exact.observables(st_d)["photon_number"][0]
    h_b = exact.build_pf_hamiltonian(dgrid, dpot, ms, tr, "bare_with_A2")
    st_b = exact.solve_coupled_ground_state(h_b, dgrid, ms, tr, "pf_bare")
    n_b = exact.observables(st_b)["photon_number"][0]
    assert n_d == pytest.approx(n_b, rel=1e-6)


def test_hamiltonians_hermitian_by_construction(dgrid, dpot, pgrid, ppot):
    ms = modes.dress_modes([modes.CavityMode(0.3, 0.1),
                            modes.CavityMode(0.8, 0.2, -1.0)], 1)
    tr = FockTruncation(3)
    for h in (exact.build_pf_hamiltonian(dgrid, dpot, ms, tr),
              exact.build_pf_hamiltonian(dgrid, dpot, ms, tr, "bare_with_A2"),
              exact.build_pzw_hamiltonian(dgrid, dpot, ms, tr),
              exact.build_pf_hamiltonian(pgrid, ppot, ms, tr)):
        delta = abs(h - h.getH())
        assert (delta.max() if delta.nnz else 0.0) < 1e-13


def test_multimode_decoupled_mode_does_not_shift(dgrid, dpot):
    # two equal parallel modes: one dressed mode carries all coupling, the
    # other stays at the bare frequency; energies match an equivalent
    # single-mode problem with lambda*sqrt(2)
    tr = FockTruncation(8)
    two = modes.dress_modes([modes.CavityMode(0.4, 0.1),
                             modes.CavityMode(0.4, 0.1)], 1)
    one = modes.single_mode(0.4, 0.1 * np.sqrt(2))
    e_two = _ground(exact.build_pf_hamiltonian(dgrid, dpot, two, tr))
    e_one = _ground(exact.build_pf_hamiltonian(dgrid, dpot, one, tr))
    assert e_two == pytest.approx(e_one, abs=1e-10)


def test_rejects_multiple_electrons(dgrid, dpot):
    ms = modes.single_mode(0.4, 0.1, n_electrons=2)
    with pytest.raises(ValueError):
        exact.build_pf_hamiltonian(dgrid, dpot, ms, FockTruncation(3))


def test_eigensolver_error_reporting():
    class BadOp(sp.linalg.LinearOperator):
        def __init__(self):
            super().__init__(float, (6000, 6000))

        def _matvec(self, x):
            return np.random.default_rng().standard_normal(6000)  # not symmetric

    with pytest.raises(Exception):
        exact.ground_state(BadOp())


def test_resonance_frequency(dgrid, dpot, resonance):
    evals = exact.matter_eigenvalues(dgrid, dpot, 2)
    assert resonance == pytest.approx(evals[1] - evals[0])
    assert 0.3 < resonance < 0.5  # soft-Coulomb first gap near 0.395
