import numpy as np
import pytest

from qedlab.modes import CavityMode, coupling_from_g_ratio, dress_modes, single_mode


def test_single_mode_closed_form():
    ms = single_mode(0.5, 0.2)
    assert ms.dressed_omegas[0] == pytest.approx(np.sqrt(0.29), abs=1e-14)
    assert ms.dressed_polarizations[0] == 1.0
    assert ms.diamagnetic_freqs_sq[0] == pytest.approx(0.04)


def test_single_mode_many_electrons():
    ms = single_mode(0.5, 0.2, n_electrons=3)
    assert ms.dressed_omegas[0] == pytest.approx(np.sqrt(0.25 + 3 * 0.04))


def test_zero_coupling_is_identity():
    mset = dress_modes([CavityMode(0.9, 0.0), CavityMode(0.3, 0.0)], 2)
    assert np.allclose(mset.dressed_omegas, [0.9, 0.3])
    assert np.allclose(mset.bogoliubov_matrix, np.eye(2))
    assert np.allclose(mset.diamagnetic_freqs_sq, 0.0)


def test_two_equal_modes_hand_oracle():
    # hand 2x2 eigenproblem: W = omega^2 I + N lam^2 [[1,1],[1,1]]
    omega, lam, n_e = 0.4, 0.15, 2
    mset = dress_modes([CavityMode(omega, lam), CavityMode(omega, lam)], n_e)
    expected = sorted([omega, np.sqrt(omega**2 + 2 * n_e * lam**2)])
    assert np.allclose(sorted(mset.dressed_omegas), expected, atol=1e-14)
    # all coupling collects in the shifted mode
    shifted = np.argmax(mset.dressed_omegas)
    assert mset.dressed_couplings[1 - shifted] == pytest.approx(0.0, abs=1e-14)
    assert mset.dressed_couplings[shifted] == pytest.approx(np.sqrt(2) * lam)


def test_bogoliubov_diagonalizes_frequency_matrix():
    modes = [CavityMode(0.3, 0.05), CavityMode(0.7, 0.2, -1.0), CavityMode(1.1, 0.1)]
    n_e = 1
    mset = dress_modes(modes, n_e)
    v = np.array([m.lam * m.polarization for m in modes])
    w = np.diag(mset.omegas**2) + n_e * np.outer(v, v)
    u = mset.bogoliubov_matrix
    assert np.allclose(u @ u.T, np.eye(3), atol=1e-13)
    assert np.allclose(u @ w @ u.T, np.diag(mset.dressed_omegas**2), atol=1e-13)
    # dressed couplings preserve the total coupling weight
    assert np.sum(mset.dressed_couplings**2) == pytest.approx(np.sum(v**2))


def test_mass_factor_strictly_positive():
    # sum(omega_d^2/omega_tilde^2) < 1 for any couplings (Sherman-Morrison bound)
    for lam in (0.01, 0.5, 5.0, 50.0):
        mset = dress_modes([CavityMode(0.2, lam), CavityMode(0.9, 2 * lam)], 3)
        assert 0.0 < mset.mass_factor() <= 1.0


def test_coupling_from_g_ratio():
    omega = 0.4
    lam = coupling_from_g_ratio(omega, 0.136)
    assert np.sqrt(omega / 2) * lam == pytest.approx(0.136 * omega)


def test_mode_validation():
    with pytest.raises(ValueError):
        CavityMode(-0.1, 0.1)
    with pytest.raises(ValueError):
        CavityMode(0.1, -0.1)
    with pytest.raises(ValueError):
        CavityMode(0.1, 0.1, 0.5)
    with pytest.raises(ValueError):
        dress_modes([], 1)


def test_zero_point_bookkeeping():
    ms = single_mode(0.4, 0.3)
    assert ms.zero_point(dressed=False) == pytest.approx(0.2)
    assert ms.zero_point(dressed=True) == pytest.approx(0.5 * np.sqrt(0.16 + 0.09))
    assert ms.zero_point_offset() == pytest.approx(
        0.5 * (np.sqrt(0.25) - 0.4))
