"""Broken PT symmetry on the imaginary ``lam`` axis.

Parity reverses the chain and time reversal conjugates coefficients, which
sends ``lam`` to ``-conj(lam)``.  For ``lam = i * lam_I`` the Hamiltonian is
PT-symmetric, so its spectrum is closed under complex conjugation while
containing genuinely complex levels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from xyep.exceptional import find_eps
from xyep.model import (
    ModelParams,
    assemble_spectrum,
    exact_diagonalization,
    quasi_energies_matrix,
    spectra_match,
)

ON_AXIS_TOL = 1e-7


@dataclass
class PtReport:
    lam: complex
    conjugation_defect: float
    real_count: int
    conjugate_pair_count: int
    route: str
    passed: bool
    quasi_defect: float = 0.0

    def __post_init__(self):
        self.lam = complex(self.lam)
        if self.lam.real != 0 or self.lam.imag == 0:
            raise ValueError(f"PT reports are for pure imaginary lambda, got {self.lam!r}")

    @property
    def broken(self) -> bool:
        """Closed under conjugation and with complex levels present."""
        return self.passed and self.conjugate_pair_count > 0


def spectrum(L, lam, route):
    p = ModelParams(L, lam)
    if route == "ed":
        return exact_diagonalization(p).energies
    if route == "free_fermion":
        return assemble_spectrum(quasi_energies_matrix(p)).energies
    raise ValueError(f"route must be 'ed' or 'free_fermion', got {route!r}")


def pt_spectrum_check(L, lambda_I, tol=1e-9, route="free_fermion", real_tol=1e-9) -> PtReport:
    """Conjugation closure of the spectrum at ``lam = i * lambda_I``.

    ``conjugation_defect`` is the worst distance of the optimal pairing
    between the spectrum and its complex conjugate; levels with
    ``|Im E| < real_tol`` are counted as real.
    """
    lambda_I = float(lambda_I)
    if lambda_I == 0:
        raise ValueError("lambda_I must be nonzero")
    lam = complex(0.0, lambda_I)
    E = spectrum(L, lam, route)
    defect = spectra_match(E, E.conj(), tol).max_distance
    eps = quasi_energies_matrix(ModelParams(L, lam)).epsilons
    # quasi-energies are defined up to sign: close the set under negation first
    signed = np.concatenate([eps, -eps])
    qdefect = spectra_match(signed, signed.conj(), tol).max_distance
    is_real = np.abs(E.imag) < real_tol
    return PtReport(
        lam=lam,
        conjugation_defect=float(defect),
        real_count=int(is_real.sum()),
        conjugate_pair_count=int((E.imag >= real_tol).sum()),
        route=route,
        passed=defect < tol,
        quasi_defect=float(qdefect),
    )


def mirror_defect(L, lambda_I, route="ed") -> float:
    """Multiset distance between the spectra at ``+i lambda_I`` and ``-i lambda_I``."""
    a = spectrum(L, complex(0, lambda_I), route)
    b = spectrum(L, complex(0, -lambda_I), route)
    return spectra_match(a, b, 0.0).max_distance


def on_axis_eps(L, tol=ON_AXIS_TOL, records=None) -> list:
    """EPs with ``|Re lam| < tol``, sorted by ``Im lam``."""
    if records is None:
        records = find_eps(L)
    hits = [r for r in records if abs(r.lambda_ep.real) < tol]
    return sorted(hits, key=lambda r: r.lambda_ep.imag)
