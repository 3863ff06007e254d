"""Cavity QED in the long-wavelength limit on 1D model systems.

Subpackages cover the full ladder of descriptions benchmarked against each
other: exact coupled solvers in two gauges, the photon-free effective
Hamiltonian, the displaced plane-wave (pHEG) basis, photon-exchange density
functionals, and delta-kick spectroscopy, plus a CLI experiment driver.
"""

from . import grid, modes, exact, photon_free, pheg, qedft, dynamics

__all__ = ["grid", "modes", "exact", "photon_free", "pheg", "qedft", "dynamics"]
__version__ = "0.1.0"
