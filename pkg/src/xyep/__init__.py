"""Exceptional points of the open non-Hermitian XY chain.

The chain ``H = -sum_j (X_j X_{j+1} + lam * Y_j Y_{j+1})`` with complex
anisotropy ``lam`` is solved by free fermions.  This package builds its
quasi-energies, assembles the many-body spectrum, locates exceptional points
of finite chains and checks them against brute-force exact diagonalization.
"""

from xyep.errors import (
    CapacityError,
    ConvergenceError,
    EpCensusError,
    IncompleteRootSetError,
    XYEPError,
)
from xyep.model import (
    GammaParams,
    ModelParams,
    QuasiEnergySet,
    SpectrumMultiset,
    assemble_spectrum,
    build_c_matrix,
    exact_diagonalization,
    ground_state_energy,
    quasi_energies_matrix,
    spectra_match,
)
from xyep.quasimomentum import (
    QuasiMomentum,
    crosscheck_routes,
    eps_from_k,
    k_residual,
    solve_quasimomenta,
)
from xyep.exceptional import (
    EpRecord,
    ep_k_residual,
    find_eps,
    gap_landscape,
    verify_ep,
    verify_trivial_point,
)
from xyep.asymptotics import (
    RingConvergenceReport,
    convergence_report,
    roots_of_unity_prediction,
)
from xyep.pt import PtReport, on_axis_eps, pt_spectrum_check
from xyep.topology import PhaseSample, bloch_symbol, phase_diagram, winding_number

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "ConvergenceError",
    "EpCensusError",
    "EpRecord",
    "GammaParams",
    "IncompleteRootSetError",
    "ModelParams",
    "PhaseSample",
    "PtReport",
    "QuasiEnergySet",
    "QuasiMomentum",
    "RingConvergenceReport",
    "SpectrumMultiset",
    "XYEPError",
    "assemble_spectrum",
    "bloch_symbol",
    "build_c_matrix",
    "convergence_report",
    "crosscheck_routes",
    "ep_k_residual",
    "eps_from_k",
    "exact_diagonalization",
    "find_eps",
    "gap_landscape",
    "ground_state_energy",
    "k_residual",
    "on_axis_eps",
    "phase_diagram",
    "pt_spectrum_check",
    "quasi_energies_matrix",
    "roots_of_unity_prediction",
    "solve_quasimomenta",
    "spectra_match",
    "verify_ep",
    "verify_trivial_point",
    "winding_number",
]
