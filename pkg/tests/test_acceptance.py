"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
summary lines as they complete.  Heavy propagations execute once in a small
process pool and are shared across criteria 8-10.  Criteria 1-7 use the
301 x 0.1 box (and the 31-point periodic grid) so every point runs in
seconds; criterion 8 uses the reduced 151-point grid with the full
T = 1000, dt = 5e-4 protocol.
"""

import itertools
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest
from scipy.linalg import expm

from qedlab import dynamics, exact, grid, modes, pheg, photon_free, qedft
from qedlab.exact import FockTruncation

from tests.acceptance_jobs import run_dynamics_job

LAMBDA_GRID = np.linspace(0.0, 0.5, 11)
PERIODIC_OMEGA = 0.2  # documented fig4-family cavity frequency


def _report(num, name, ok, detail):
    print(f"\nACCEPTANCE {num:>2} [{name}]: {'PASS' if ok else 'FAIL'} -- {detail}")
    return ok


# ---------------------------------------------------------------------------
# shared data

@pytest.fixture(scope="module")
def box():
    g = grid.build_grid(301, 0.1, "dirichlet")
    v = grid.soft_coulomb(g, 1.0)
    return g, v, exact.resonance_frequency(g, v)


@pytest.fixture(scope="module")
def ring():
    g = grid.build_grid(31, 1.5, "periodic")
    return g, grid.soft_coulomb(g, 1.0)


@pytest.fixture(scope="module")
def fig5_data(box):
    """Exact / photon-free / px / px-mollified / pxLDA energies on the
    lambda in [0, 0.5] grid at resonance."""
    g, v, omega = box
    bare = float(np.linalg.eigvalsh(exact.matter_hamiltonian(g, v).toarray())[0])
    data = {"bare": bare, "omega": omega, "lambda": LAMBDA_GRID,
            "exact": [], "pf": [], "px": [], "pxm": [], "pxlda": []}
    for lam in LAMBDA_GRID:
        ms = modes.single_mode(omega, lam)
        data["exact"].append(exact.ground_state(
            exact.build_pzw_hamiltonian(g, v, ms, FockTruncation(40)))[0])
        data["pf"].append(exact.ground_state(
            photon_free.build_static_pf_free_hamiltonian(g, v, ms))[0])
        data["px"].append(qedft.scf_solve(
            g, v, ms, qedft.XcConfig(functional="px_orbital")).energy)
        data["pxm"].append(qedft.scf_solve(
            g, v, ms, qedft.XcConfig(functional="px_orbital",
                                     mollify_external=True)).energy)
        data["pxlda"].append(qedft.scf_solve(
            g, v, ms, qedft.XcConfig(functional="pxlda")).energy)
    for key in ("exact", "pf", "px", "pxm", "pxlda"):
        data[key] = np.array(data[key])
    return data


@pytest.fixture(scope="module")
def dynamics_runs():
    """Pooled kick-and-spectrum runs shared by criteria 8-10."""
    jobs = [
        {"system": "exact_pzw", "omega_cav": "resonance", "t_end": 1000.0},
        {"system": "photon_free", "omega_cav": "resonance", "t_end": 1000.0},
        {"system": "pxlda_maxwell", "omega_cav": 0.1, "t_end": 400.0},
        {"system": "photon_free", "omega_cav": 0.1, "t_end": 400.0},
        {"system": "photon_free", "omega_cav": 0.2, "t_end": 400.0},
        {"system": "photon_free", "omega_cav": 0.7, "t_end": 400.0},
        {"system": "photon_free", "omega_cav": 1.0, "t_end": 400.0},
    ]
    with ProcessPoolExecutor(max_workers=2) as pool:
        results = list(pool.map(run_dynamics_job, jobs))
    out = {}
    for job, res in zip(jobs, results):
        key = (job["system"], job["omega_cav"])
        out[key] = res
    return out


def _peaks(res, min_rel_height=0.01, max_peaks=None):
    return dynamics.spectrum_peaks(res["omega"], res["amplitude"],
                                   min_rel_height=min_rel_height,
                                   max_peaks=max_peaks)


def _peak_in(res, lo, hi):
    """Strongest refined peak inside [lo, hi], or None."""
    cands = [p for p in _peaks(res) if lo <= p[0] <= hi]
    return max(cands, key=lambda p: p[1])[0] if cands else None


# ---------------------------------------------------------------------------
# criteria

def test_criterion_1_gauge_invariance(box):
    g, v, _ = box
    trunc = FockTruncation(40)
    worst = 0.0
    for lam, omega in itertools.product((0.05, 0.1, 0.2), (0.2, 0.4, 0.8)):
        ms = modes.single_mode(omega, lam)
        e_pf = exact.ground_state(exact.build_pf_hamiltonian(g, v, ms, trunc))[0]
        e_pzw = exact.ground_state(exact.build_pzw_hamiltonian(g, v, ms, trunc))[0]
        worst = max(worst, abs(e_pf - e_pzw))
    ok = worst <= 1e-6
    assert _report(1, "gauge invariance PF vs PZW", ok,
                   f"max |E_PF - E_PZW| = {worst:.2e} (tol 1e-6)"), worst


def test_criterion_2_decoupled_limit(box, ring):
    g, v, _ = box
    bare = float(np.linalg.eigvalsh(exact.matter_hamiltonian(g, v).toarray())[0])
    ms0 = modes.single_mode(0.4, 0.0)
    energies = {
        "exact-pzw": exact.ground_state(
            exact.build_pzw_hamiltonian(g, v, ms0, FockTruncation(2)))[0],
        "exact-pf": exact.ground_state(
            exact.build_pf_hamiltonian(g, v, ms0, FockTruncation(2)))[0],
        "photon-free": exact.ground_state(
            photon_free.build_static_pf_free_hamiltonian(g, v, ms0))[0],
        "qedft-px": qedft.scf_solve(
            g, v, ms0, qedft.XcConfig(functional="px_orbital")).energy,
        "qedft-pxlda": qedft.scf_solve(
            g, v, ms0, qedft.XcConfig(functional="pxlda")).energy,
    }
    gp, vp = ring
    bare_p = float(np.linalg.eigvalsh(exact.matter_hamiltonian_k(gp, vp))[0])
    energies_p = {
        "exact-pf(periodic)": exact.ground_state(
            exact.build_pf_hamiltonian(gp, vp, ms0, FockTruncation(2)))[0],
        "photon-free(periodic)": exact.ground_state(
            photon_free.build_static_pf_free_hamiltonian(gp, vp, ms0))[0],
        "pheg": pheg.pheg_ground_state(
            pheg.build_pheg_hamiltonian(gp, vp, ms0, max_n=2))[0],
    }
    devs = {k: abs(e - bare) for k, e in energies.items()}
    devs.update({k: abs(e - bare_p) for k, e in energies_p.items()})
    worst = max(devs.values())
    ok = worst <= 1e-9
    assert _report(2, "decoupled limit vs dense oracle", ok,
                   f"max deviation {worst:.2e} over {sorted(devs)} (tol 1e-9)")


def test_criterion_3_homogeneous_photon_number(ring):
    gp, _ = ring
    v0 = grid.zero_potential(gp)
    ms = modes.single_mode(0.4, 0.5)
    analytic = pheg.homogeneous_photon_number(ms)[0]
    trunc = FockTruncation(6)
    h = exact.build_pf_hamiltonian(gp, v0, ms, trunc)
    state = exact.solve_coupled_ground_state(h, gp, ms, trunc, "pf_dressed")
    n_exact = exact.observables(state)["photon_number"][0]
    psi_k = np.zeros(gp.n_points)
    psi_k[(gp.n_points - 1) // 2] = 1.0
    n_recon = photon_free.reconstruct_photon_observables(psi_k, ms, gp)[
        "photon_number"][0]
    ham = pheg.build_pheg_hamiltonian(gp, v0, ms, max_n=4)
    _, amp = pheg.pheg_ground_state(ham)
    n_pheg = pheg.pheg_photon_number(amp, ham)[0]
    devs = [abs(x / analytic - 1.0) for x in (n_exact, n_recon, n_pheg)]
    ok = max(devs) <= 1e-6
    assert _report(3, "homogeneous photon number", ok,
                   f"analytic {analytic:.6e}; rel devs exact/reconstruction/pheg = "
                   + ", ".join(f"{d:.1e}" for d in devs) + " (tol 1e-6)")


def test_criterion_4_pheg_completeness(ring):
    gp, vp = ring
    complete = []
    superior = []
    for lam in (0.25, 0.5, 1.0):
        ms = modes.single_mode(PERIODIC_OMEGA, lam)
        e_ref = exact.ground_state(
            exact.build_pf_hamiltonian(gp, vp, ms, FockTruncation(100)))[0]
        e20 = pheg.pheg_ground_state(
            pheg.build_pheg_hamiltonian(gp, vp, ms, max_n=20))[0]
        complete.append(abs(e20 - e_ref))
        if lam >= 0.5:
            e4 = pheg.pheg_ground_state(
                pheg.build_pheg_hamiltonian(gp, vp, ms, max_n=4))[0]
            e_triv = exact.ground_state(
                exact.build_pf_hamiltonian(gp, vp, ms, FockTruncation(4),
                                           "bare_with_A2"))[0]
            superior.append((lam, abs(e4 - e_ref), abs(e_triv - e_ref)))
    ok = max(complete) <= 1e-7 and all(a < b for _, a, b in superior)
    assert _report(4, "pHEG completeness & superiority", ok,
                   f"max |E(pheg20) - E(PF100)| = {max(complete):.2e} (tol 1e-7); "
                   + "; ".join(f"lam={l}: pheg4 {a:.1e} vs trivial4 {b:.1e}"
                               for l, a, b in superior))


def test_criterion_5_variational_mollification(ring, fig5_data):
    gp, vp = ring
    worst_pheg = -np.inf
    for lam in LAMBDA_GRID:
        ms = modes.single_mode(PERIODIC_OMEGA, lam)
        e_ref = exact.ground_state(
            exact.build_pf_hamiltonian(gp, vp, ms, FockTruncation(60)))[0]
        e_m = pheg.pheg_ground_state(
            pheg.build_pheg_hamiltonian(gp, vp, ms, max_n=0,
                                        potential_mode="mollified_00"))[0]
        worst_pheg = max(worst_pheg, e_ref - e_m)
    worst_px = float(np.max(fig5_data["exact"] - fig5_data["pxm"]))
    ok = worst_pheg <= 1e-8 and worst_px <= 1e-8
    assert _report(5, "variational mollification", ok,
                   f"worst E_exact - E_mollified: pheg {worst_pheg:.2e}, "
                   f"px-mollified {worst_px:.2e} (violations allowed < 1e-8)")


def test_criterion_6_px_equals_photon_free(fig5_data):
    worst = float(np.max(np.abs(fig5_data["px"] - fig5_data["pf"])))
    ok = worst <= 1e-7
    assert _report(6, "px SCF reproduces photon-free", ok,
                   f"max |E_px - E_pf| = {worst:.2e} over 11 couplings (tol 1e-7)")


def test_criterion_7_pxlda_quality_window(fig5_data):
    """Honest red: the first clause fails at small coupling.

    At exact resonance the adiabatic substitution overbinds by slightly more
    than a factor two relative to the exact coupling shift (second-order
    perturbation theory: 1/omega_tilde vs 1/(Delta E + omega_tilde) with
    Delta E = omega_tilde).  The pxLDA inherits that ratio as lambda -> 0, so
    its absolute error exceeds the bare-KS error until the local-density
    error cancellation takes over near lambda ~ 0.2.  See the decisions
    ledger for the full analysis.
    """
    sel = LAMBDA_GRID <= 0.3 + 1e-12
    err_lda = np.abs(fig5_data["pxlda"] - fig5_data["exact"])[sel]
    err_bare = np.abs(fig5_data["bare"] - fig5_data["exact"])[sel]
    clause1 = err_lda <= err_bare + 1e-12
    at_03 = np.isclose(LAMBDA_GRID, 0.3)
    err_px_03 = float(np.abs(fig5_data["px"] - fig5_data["exact"])[at_03][0])
    err_lda_03 = float(np.abs(fig5_data["pxlda"] - fig5_data["exact"])[at_03][0])
    clause2 = err_lda_03 < err_px_03
    table = "; ".join(
        f"lam={l:.2f}: lda {a:.2e} vs bare {b:.2e} {'<=' if c else '>'}"
        for l, a, b, c in zip(LAMBDA_GRID[sel], err_lda, err_bare, clause1))
    ok = bool(np.all(clause1)) and clause2
    _report(7, "pxLDA quality window", ok,
            f"clause1 (beats bare KS at every lambda <= 0.3): {table}; "
            f"clause2 (beats px at lambda=0.3): lda {err_lda_03:.2e} "
            f"{'<' if clause2 else '>='} px {err_px_03:.2e}")
    assert ok, ("known honest failure: adiabatic overbinding ratio ~2.1 at "
                "resonance exceeds the bare-KS error at lambda <= 0.15")


def test_criterion_8_polariton_splitting(dynamics_runs):
    res_ex = dynamics_runs[("exact_pzw", "resonance")]
    res_pf = dynamics_runs[("photon_free", "resonance")]
    omega_res = res_ex["omega_cav"]
    two_g = 2 * 0.136 * omega_res
    peaks_ex = sorted(p[0] for p in _peaks(res_ex, min_rel_height=0.1,
                                           max_peaks=2))
    peaks_pf = sorted(p[0] for p in _peaks(res_pf, min_rel_height=0.1,
                                           max_peaks=2))
    split = peaks_ex[1] - peaks_ex[0]
    split_ok = abs(split - two_g) <= 0.2 * two_g
    agree = [abs(a - b) for a, b in zip(peaks_ex, peaks_pf)]
    agree_ok = max(agree) <= 0.02
    ok = split_ok and agree_ok and len(peaks_ex) == 2
    assert _report(8, "polariton splitting at resonance", ok,
                   f"exact peaks {peaks_ex[0]:.4f}/{peaks_ex[1]:.4f}, splitting "
                   f"{split:.4f} vs 2g = {two_g:.4f} (within 20%: {split_ok}); "
                   f"photon-free offsets {agree[0]:.4f}/{agree[1]:.4f} Ha "
                   f"(tol 0.02)")


def test_criterion_9_sweep_morphology(dynamics_runs):
    g = grid.build_grid(151, 0.2, "dirichlet")
    v = grid.soft_coulomb(g, 1.0)
    evals = exact.matter_eigenvalues(g, v, 8)
    omega1 = evals[1] - evals[0]
    omega7 = evals[7] - evals[0]  # 4th dipole-active line (box-state like)

    pf01 = dynamics_runs[("photon_free", 0.1)]
    pf02 = dynamics_runs[("photon_free", 0.2)]
    pf10 = dynamics_runs[("photon_free", 1.0)]
    lda01 = dynamics_runs[("pxlda_maxwell", 0.1)]

    first_01 = _peak_in(pf01, omega1 - 0.08, omega1 + 0.1)
    first_02 = _peak_in(pf02, omega1 - 0.08, omega1 + 0.1)
    first_10 = _peak_in(pf10, omega1 - 0.1, omega1 + 0.05)
    up_bend = first_01 > first_02 > omega1 + 0.003
    above_res = first_10 < omega1  # matter line pushed down above resonance

    high_pf = _peak_in(pf01, omega7 - 0.07, omega7 + 0.07)
    high_lda = _peak_in(lda01, omega7 - 0.07, omega7 + 0.07)
    pf_down = high_pf < omega7 - 0.005
    lda_up = high_lda > omega7 + 0.005
    lda_first = _peak_in(lda01, omega1 - 0.08, omega1 + 0.1)
    lda_all_up = lda_first > omega1 + 0.003 and lda_up

    res_ex = dynamics_runs[("exact_pzw", "resonance")]
    res_pf = dynamics_runs[("photon_free", "resonance")]
    peaks_ex = sorted(p[0] for p in _peaks(res_ex, min_rel_height=0.1, max_peaks=2))
    peaks_pf = sorted(p[0] for p in _peaks(res_pf, min_rel_height=0.1, max_peaks=2))
    res_agree = max(abs(a - b) for a, b in zip(peaks_ex, peaks_pf)) <= 0.02

    ok = up_bend and above_res and pf_down and lda_all_up and res_agree
    assert _report(
        9, "frequency-sweep morphology", ok,
        f"bare Omega1 {omega1:.4f}: photon-free first line "
        f"{first_01:.4f} (0.1) > {first_02:.4f} (0.2) > bare [up-bend {up_bend}], "
        f"{first_10:.4f} at 1.0 [below bare {above_res}]; high line (bare "
        f"{omega7:.4f}): photon-free {high_pf:.4f} down={pf_down}, pxlda "
        f"{high_lda:.4f} up={lda_up}; resonance branch agreement <= 0.02: "
        f"{res_agree}")


def test_criterion_10_conservation(dynamics_runs):
    norm_worst = max(r["norm_drift"] for r in dynamics_runs.values())
    energy_worst = max(r["energy_drift"] for r in dynamics_runs.values())
    ok = norm_worst <= 1e-8 and energy_worst <= 1e-7
    assert _report(10, "norm/energy conservation", ok,
                   f"max norm drift {norm_worst:.2e} (tol 1e-8); max post-kick "
                   f"energy drift {energy_worst:.2e} relative (tol 1e-7) over "
                   f"{len(dynamics_runs)} propagations")


def test_criterion_11_dual_form_cross_checks():
    # Eq. (14) two printed forms, gauge-invariant comparison
    g = grid.build_grid(4801, 0.00625, "dirichlet")
    x = g.coords
    ms = modes.single_mode(0.4, 0.3)
    phi = 1 / np.cosh(1.2 * x) * (1 + 0.15 * np.sin(1.1 * x))
    phi /= np.sqrt(np.sum(phi**2) * g.spacing)
    v1 = qedft.v_px_orbital(phi, g, ms, route="sqrt_density")
    v2 = qedft.v_px_orbital(phi, g, ms, route="current")
    win = (x >= -8) & (x <= 8)

    def gauge(vv):
        vs = vv[win]
        return vs - (vs[0] + (vs[-1] - vs[0])
                     * (x[win] - x[win][0]) / (x[win][-1] - x[win][0]))

    dev_px = float(np.max(np.abs(gauge(v1) - gauge(v2))))

    g2 = grid.build_grid(301, 0.1, "dirichlet")
    rho = np.exp(-g2.coords**2)
    cfg = qedft.XcConfig(functional="pxlda")
    dev_lda = float(np.max(np.abs(
        qedft.v_pxlda(rho, g2, ms, cfg, route="direct")
        - qedft.v_pxlda(rho, g2, ms, cfg, route="poisson"))))

    times = np.arange(0.0, 100.0 + 1e-12, 1e-3)
    jp = lambda t: np.sin(0.3 * t) * (1.0 - np.exp(-t / 5.0))  # noqa: E731
    m_ode = photon_free.memory_term_ode(times, jp, 0.45)
    m_quad = photon_free.memory_term_quadrature(times, jp(times), 0.45)
    dev_mem = float(np.max(np.abs(m_ode - m_quad)) / np.max(np.abs(m_quad)))

    dev_overlap = 0.0
    for delta in (0.3, -0.9, 2.1):
        d_mat = expm(delta * (np.diag(np.sqrt(np.arange(1, 60)), -1)
                              - np.diag(np.sqrt(np.arange(1, 60)), 1)))
        for n in range(6):
            for m in range(6):
                dev_overlap = max(dev_overlap, abs(
                    pheg.displaced_overlap(n, m, delta) - d_mat[n, m]))

    ok = dev_px <= 1e-8 and dev_lda <= 1e-8 and dev_mem <= 1e-6 \
        and dev_overlap <= 1e-10
    assert _report(11, "dual-form cross-checks", ok,
                   f"px forms {dev_px:.1e} (1e-8); pxLDA routes {dev_lda:.1e} "
                   f"(1e-8); memory ODE vs quadrature {dev_mem:.1e} (1e-6); "
                   f"displaced overlaps vs expm {dev_overlap:.1e} (1e-10)")
