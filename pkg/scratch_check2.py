import time
import numpy as np
from qedlab import grid as g, modes as md, exact as ex, photon_free as pf, pheg, dynamics as dyn

grp = g.build_grid(31, 1.0, "periodic")
vper = g.soft_coulomb(grp, 1.0)
res = ex.resonance_frequency(grp, vper)
print("periodic resonance:", res)

t0 = time.time()
for lam in (0.25, 0.5, 1.0):
    m2 = md.single_mode(res, lam)
    h_ref = ex.build_pf_hamiltonian(grp, vper, m2, ex.FockTruncation(100))
    e_ref, _ = ex.ground_state(h_ref)
    ph20 = pheg.build_pheg_hamiltonian(grp, vper, m2, max_n=20)
    e20, _ = pheg.pheg_ground_state(ph20)
    ph4 = pheg.build_pheg_hamiltonian(grp, vper, m2, max_n=4)
    e4, _ = pheg.pheg_ground_state(ph4)
    h4 = ex.build_pf_hamiltonian(grp, vper, m2, ex.FockTruncation(4))
    epf4, _ = ex.ground_state(h4)
    print(f"lam={lam}: |e20-ref|={abs(e20-e_ref):.2e}  pheg4err={abs(e4-e_ref):.2e} "
          f"pf4err={abs(epf4-e_ref):.2e}")
print("AC4 block time:", time.time() - t0)

# --- dynamics smoke: tiny grid, short run, exact pzw vs photon free peaks
gr = g.build_grid(121, 0.25, "dirichlet")
v = g.soft_coulomb(gr, 1.0)
om = ex.resonance_frequency(gr, v)
lam = md.coupling_from_g_ratio(om, 0.136)
ms = md.single_mode(om, lam)
run = dyn.SpectrumRun(dt=2e-3, t_end=300.0, damping=1e-2, record_stride=10)
kick = dyn.KickProtocol()

t0 = time.time()
out = dyn.kick_and_spectrum("exact_pzw", gr, v, ms, ex.FockTruncation(12), kick, run)
t_ex = time.time() - t0
peaks = dyn.spectrum_peaks(out["omega"], out["amplitude"], max_peaks=4)
print(f"exact pzw: {t_ex:.1f}s, norm drift {out['norm_drift']:.2e}, "
      f"energy drift {out['energy_drift']:.2e}")
print("  peaks:", [(round(p[0], 4), round(p[1], 3)) for p in peaks])
print("  2g =", 2 * 0.136 * om, " splitting:", abs(peaks[0][0] - peaks[1][0])
      if len(peaks) > 1 else None)

t0 = time.time()
out2 = dyn.kick_and_spectrum("photon_free", gr, v, ms, None, kick, run)
print(f"photon-free: {time.time()-t0:.1f}s, norm drift {out2['norm_drift']:.2e}, "
      f"energy drift {out2['energy_drift']:.2e}")
peaks2 = dyn.spectrum_peaks(out2["omega"], out2["amplitude"], max_peaks=4)
print("  peaks:", [(round(p[0], 4), round(p[1], 3)) for p in peaks2])

t0 = time.time()
out3 = dyn.kick_and_spectrum("maxwell_classical", gr, v, ms, None, kick, run)
print(f"maxwell: {time.time()-t0:.1f}s, norm drift {out3['norm_drift']:.2e}, "
      f"energy drift {out3['energy_drift']:.2e}")
peaks3 = dyn.spectrum_peaks(out3["omega"], out3["amplitude"], max_peaks=4)
print("  peaks:", [(round(p[0], 4), round(p[1], 3)) for p in peaks3])

t0 = time.time()
out4 = dyn.kick_and_spectrum("pxlda_maxwell", gr, v, ms, None, kick, run)
print(f"pxlda-maxwell: {time.time()-t0:.1f}s, norm drift {out4['norm_drift']:.2e}, "
      f"energy drift {out4['energy_drift']:.2e}")
peaks4 = dyn.spectrum_peaks(out4["omega"], out4["amplitude"], max_peaks=4)
print("  peaks:", [(round(p[0], 4), round(p[1], 3)) for p in peaks4])
