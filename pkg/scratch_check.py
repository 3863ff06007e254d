import numpy as np
from qedlab import grid as g, modes as md, exact as ex, photon_free as pf, pheg

# --- dressing
ms = md.single_mode(0.5, 0.2)
print("dressed omega:", ms.dressed_omegas[0], "expect", np.sqrt(0.29))

# --- small dirichlet problem: gauge invariance
gr = g.build_grid(121, 0.25, "dirichlet")
v = g.soft_coulomb(gr, 1.0)
res = ex.resonance_frequency(gr, v)
print("resonance (121x0.25):", res)

ms = md.single_mode(0.4, 0.1)
tr = ex.FockTruncation(25)
h_pf = ex.build_pf_hamiltonian(gr, v, ms, tr, "dressed_bilinear")
h_pfb = ex.build_pf_hamiltonian(gr, v, ms, tr, "bare_with_A2")
h_pzw = ex.build_pzw_hamiltonian(gr, v, ms, tr)
e_pf, _ = ex.ground_state(h_pf)
e_pfb, _ = ex.ground_state(h_pfb)
e_pzw, _ = ex.ground_state(h_pzw)
e_bare = ex.matter_eigenvalues(gr, v, 1)[0]
print(f"E(PF dressed) = {e_pf:.10f}")
print(f"E(PF bare A2) = {e_pfb:.10f}   diff {abs(e_pf-e_pfb):.2e}")
print(f"E(PZW)        = {e_pzw:.10f}   diff {abs(e_pf-e_pzw):.2e}")
print(f"E(bare)       = {e_bare:.10f}")

# lambda = 0 decoupling
ms0 = md.single_mode(0.4, 0.0)
e0, _ = ex.ground_state(ex.build_pf_hamiltonian(gr, v, ms0, ex.FockTruncation(2)))
print("lambda=0 coupled vs bare:", abs(e0 - e_bare))

# photon-free static
h_free = pf.build_static_pf_free_hamiltonian(gr, v, ms)
e_free, _ = ex.ground_state(h_free)
print(f"E(photon-free) = {e_free:.10f}  (exact {e_pf:.10f}, overbinds by {e_free-e_pf:.2e})")

# observables of the exact ground state
st = ex.solve_coupled_ground_state(h_pf, gr, ms, tr, "pf_dressed")
obs = ex.observables(st)
print("dipole:", obs["dipole"], "variance:", obs["dipole_variance"])
print("photon number (bare):", obs["photon_number"], "dressed:", obs["photon_number_dressed"])

# --- periodic homogeneous: AC3 values
grp = g.build_grid(31, 1.0, "periodic")
v0 = g.zero_potential(grp)
msh = md.single_mode(0.4, 0.5)
analytic = pheg.homogeneous_photon_number(msh)[0]
h_per = ex.build_pf_hamiltonian(grp, v0, msh, ex.FockTruncation(6))
e_per, vec = ex.ground_state(h_per)
stp = ex.solve_coupled_ground_state(h_per, grp, msh, ex.FockTruncation(6), "pf_dressed")
obsp = ex.observables(stp)
print("homogeneous: exact photon number", obsp["photon_number"][0], "analytic", analytic)
print("homogeneous energy (reported):", e_per, "expect", msh.zero_point_offset())

# photon-free reconstruction on the k=0 plane wave
psi_k = np.zeros(31); psi_k[15] = 1.0  # k=0 entry (centered ordering)
print("k index 15 is k=0?", grp.k_points[15])
rec = pf.reconstruct_photon_observables(psi_k, msh, grp)
print("photon-free reconstruction:", rec["photon_number"][0])

# pHEG at v=0
ph = pheg.build_pheg_hamiltonian(grp, v0, msh, max_n=3)
off = ph.matrix - np.diag(np.diag(ph.matrix))
print("pHEG v=0 off-diagonal max:", np.max(np.abs(off)))
e_ph, amp = pheg.pheg_ground_state(ph)
print("pHEG v=0 ground:", e_ph, "photon number:", pheg.pheg_photon_number(amp, ph)[0])

# pHEG completeness vs periodic PF with soft-coulomb
vper = g.soft_coulomb(grp, 1.0)
for lam in (0.25, 1.0):
    m2 = md.single_mode(0.4, lam)
    h_ref = ex.build_pf_hamiltonian(grp, vper, m2, ex.FockTruncation(60))
    e_ref, _ = ex.ground_state(h_ref)
    ph2 = pheg.build_pheg_hamiltonian(grp, vper, m2, max_n=12)
    e_ph2, _ = pheg.pheg_ground_state(ph2)
    ph0 = pheg.build_pheg_hamiltonian(grp, vper, m2, max_n=0, potential_mode="mollified_00")
    e_ph0, _ = pheg.pheg_ground_state(ph0)
    h_n4 = ex.build_pf_hamiltonian(grp, vper, m2, ex.FockTruncation(4))
    e_n4, _ = ex.ground_state(h_n4)
    ph4 = pheg.build_pheg_hamiltonian(grp, vper, m2, max_n=4)
    e_ph4, _ = pheg.pheg_ground_state(ph4)
    print(f"lam={lam}: ref={e_ref:.9f} pheg12={e_ph2:.9f} (d={abs(e_ph2-e_ref):.1e}) "
          f"pheg0m={e_ph0:.9f} (d={e_ph0-e_ref:+.1e}) "
          f"pf4err={abs(e_n4-e_ref):.1e} pheg4err={abs(e_ph4-e_ref):.1e}")
