"""thimbletrace: complex periodic orbits and trace-formula densities of
states for 1D polynomial Hamiltonians H = p^2 + V(q).

Submodules
----------
model        potentials and complexified energy curves
periods      homology cycles and their (action, time period) lattice
thimble      finite-dimensional Picard-Lefschetz decomposition engine
loopspace    Fourier-discretized loops: action, orbit finding, flow, amplitudes
spectrum     exact eigenvalue oracle, smoothed densities, phase-space volume
traceformula semiclassical and quantum trace-formula assembly
cli          command-line front end
"""

from .model import EnergyCurve, Potential, branch_points, build_potential, curve
from .periods import (
    Cycle,
    PeriodData,
    cycle_period,
    homology_basis,
    period_lattice,
    primitive_decomposition,
    real_orbit_cycle,
)

__all__ = [
    "EnergyCurve",
    "Potential",
    "branch_points",
    "build_potential",
    "curve",
    "Cycle",
    "PeriodData",
    "cycle_period",
    "homology_basis",
    "period_lattice",
    "primitive_decomposition",
    "real_orbit_cycle",
]

__version__ = "0.1.0"
