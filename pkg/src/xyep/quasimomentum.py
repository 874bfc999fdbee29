"""Quasi-momenta of the open chain and the second route to the quasi-energies.

For each branch ``mu = lam**(+1)`` or ``lam**(-1)`` the quasi-momenta solve

    sin((L + 2) k) + mu * sin(L k) = 0

away from the trivial roots ``k = 0`` and ``k = pi/2`` that every even-L
chain carries.  Writing ``w = exp(2ik)`` turns the left-hand side into a
degree ``L + 2`` polynomial, so there are exactly ``L`` nontrivial roots per
branch on the strip ``0 <= Re k < pi``.  They come in pairs ``(k, pi - k)``
with the same quasi-energy, so each branch carries ``L / 2`` quasi-energies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from xyep.errors import IncompleteRootSetError
from xyep.model import (
    NEAR_DEGENERATE_TOL,
    GammaParams,
    ModelParams,
    QuasiEnergySet,
    canonical_sqrt,
    canonicalize,
    cluster_centroids,
    quasi_energies_matrix,
    spectra_match,
)
from xyep.roots import fold, newton, roots_with_multiplicity, seed_grid

BRANCHES = ("plus", "minus")
# Sector of C^T C carrying each branch (checked against the matrix route).
BRANCH_SECTOR = {"plus": "even", "minus": "odd"}


@dataclass(frozen=True)
class QuasiMomentum:
    """A quasi-momentum on the fundamental strip ``0 <= Re k < pi``."""

    k: complex
    branch: str

    def __post_init__(self):
        if self.branch not in BRANCHES:
            raise ValueError(f"branch must be 'plus' or 'minus', got {self.branch!r}")
        object.__setattr__(self, "k", complex(fold(self.k)))


def branch_coupling(lam, branch) -> complex:
    lam = complex(lam)
    if branch == "plus":
        return lam
    if branch == "minus":
        if lam == 0:
            raise ValueError("the minus branch needs lambda != 0")
        return 1 / lam
    raise ValueError(f"branch must be 'plus' or 'minus', got {branch!r}")


def k_residual(k, p: ModelParams, branch="plus"):
    """``sin((L+2)k) + lam**(+-1) sin(Lk)``; the pole-free form of the condition."""
    mu = branch_coupling(p.lam, branch)
    k = np.asarray(k, dtype=complex)
    r = np.sin((p.L + 2) * k) + mu * np.sin(p.L * k)
    return complex(r) if r.ndim == 0 else r


def k_residual_derivative(k, L, mu):
    k = np.asarray(k, dtype=complex)
    return (L + 2) * np.cos((L + 2) * k) + L * mu * np.cos(L * k)


def _reduced(L, mu):
    """Residual divided by ``sin 2k``: same nontrivial roots, none at 0 or pi/2."""

    def g(k):
        return (np.sin((L + 2) * k) + mu * np.sin(L * k)) / np.sin(2 * k)

    def step(k):
        r = np.sin((L + 2) * k) + mu * np.sin(L * k)
        dr = k_residual_derivative(k, L, mu)
        s, c = np.sin(2 * k), np.cos(2 * k)
        return r * s / (dr * s - 2 * r * c)

    def rel_residual(k):
        a, b = np.sin((L + 2) * k), mu * np.sin(L * k)
        return np.abs(a + b) / (np.abs(a) + np.abs(b) + 1e-300)

    return g, step, rel_residual


def _im_extent(lam, L):
    # Roots sit near |exp(2ik)| ~ |lam|^(+-1), i.e. |Im k| ~ |ln|lam|| / 2.
    return 1.0 + abs(math.log(abs(lam)))


def _roots_on_strip(g, step, rel_residual, expected, n_re, n_im, im_max):
    """Newton from a grid, then cluster and count multiplicities."""
    for attempt in range(4):
        seeds = seed_grid(n_re << attempt, n_im << attempt, im_max)
        k, ok = newton(step, seeds)
        k = fold(k[ok])
        k = k[np.abs(k.imag) <= 2 * im_max + 1]
        with np.errstate(all="ignore"):
            k = k[rel_residual(k) < 1e-9]
        roots = roots_with_multiplicity(g, k)
        if len(roots) == expected:
            return np.array(roots)
    raise IncompleteRootSetError(f"found {len(roots)} roots, expected {expected}", roots)


def solve_quasimomenta(p: ModelParams, branch="plus") -> list:
    """The ``L`` nontrivial quasi-momenta of one branch, counted with multiplicity."""
    if p.L % 2:
        raise ValueError("quasi-momentum route is implemented for even L only")
    if p.lam == 0:
        raise ValueError("lambda = 0 has no quasi-momentum description")
    mu = branch_coupling(p.lam, branch)
    g, step, res = _reduced(p.L, mu)
    roots = _roots_on_strip(g, step, res, p.L, 8 * p.L, 16, _im_extent(p.lam, p.L))
    out = [QuasiMomentum(k, branch) for k in roots]
    return sorted(out, key=lambda q: (q.k.real, q.k.imag))


def eps_from_k(k, g: GammaParams) -> complex:
    """``sqrt(1 - (1 - gamma^2) sin^2 k)`` in the ``H_gamma`` normalisation."""
    kk = k.k if isinstance(k, QuasiMomentum) else complex(k)
    gamma = g.gamma if isinstance(g, GammaParams) else complex(g)
    val = 1 - (1 - gamma**2) * np.sin(kk) ** 2
    return complex(canonicalize(np.sqrt(complex(val))))


def gamma_to_lambda_units(g: GammaParams) -> complex:
    """Factor from ``eps_from_k`` to ``C^T C`` quasi-energies.

    ``H_lam = 4/(1+gamma) H_gamma`` and the ``H_gamma`` energies are
    ``sum +- eps/2`` (single-particle energies ``eps`` of occupied/empty
    modes), so the factor is ``2 / (1 + gamma) = 1 + lam``.
    """
    return g.scale / 2


def _pair_up(values):
    """Merge the (k, pi - k) partners: average nearest pairs of equal values.

    Pairing and averaging use the squares, which are blind to the sign
    convention.
    """
    sq = list(np.asarray(values, dtype=complex) ** 2)
    out = []
    while sq:
        v = sq.pop(0)
        j = int(np.argmin([abs(v - w) for w in sq]))
        out.append((v + sq.pop(j)) / 2)
    return list(canonical_sqrt(np.array(out)))


def quasi_energies_quasimomentum(p: ModelParams) -> QuasiEnergySet:
    """Quasi-energies assembled from both branches of quasi-momenta."""
    g = GammaParams.from_lambda(p.lam)
    factor = gamma_to_lambda_units(g)
    eps, labels = [], []
    for branch in BRANCHES:
        ks = solve_quasimomenta(p, branch)
        vals = canonicalize(np.array([factor * eps_from_k(q, g) for q in ks]))
        merged = _pair_up(vals)
        eps.extend(merged)
        labels.extend([BRANCH_SECTOR[branch]] * len(merged))
    q = QuasiEnergySet(np.array(eps), labels, "quasimomentum")
    q.near_degenerate = q.min_gap() < NEAR_DEGENERATE_TOL
    return q


@dataclass
class CrosscheckReport:
    passed: bool
    max_distance: float
    near_degenerate: bool
    matrix: QuasiEnergySet
    quasimomentum: QuasiEnergySet
    per_sector_counts: dict = field(default_factory=dict)


def crosscheck_routes(p: ModelParams, tol: float = 1e-8) -> CrosscheckReport:
    """Compare the quasi-momentum route against the ``C^T C`` eigenvalues.

    Near a coalescing pair both routes are only accurate to about
    ``sqrt(machine eps)`` per value, so when either set is near-degenerate
    the comparison is made on cluster centroids.
    """
    qm = quasi_energies_matrix(p)
    qk = quasi_energies_quasimomentum(p)
    near = qm.near_degenerate or qk.near_degenerate
    counts = {s: sum(1 for x in qk.sectors if x == s) for s in ("odd", "even")}
    worst = 0.0
    for sector in ("odd", "even"):
        a, b = qm.sector(sector), qk.sector(sector)
        if len(a) != len(b):
            return CrosscheckReport(False, math.inf, near, qm, qk, counts)
        if near:
            # square first: a coalescing pair may straddle the sign convention
            ca, sa = cluster_centroids(a**2, NEAR_DEGENERATE_TOL)
            cb, sb = cluster_centroids(b**2, NEAR_DEGENERATE_TOL)
            if len(ca) != len(cb) or sorted(sa) != sorted(sb):
                return CrosscheckReport(False, math.inf, near, qm, qk, counts)
            a, b = canonical_sqrt(ca), canonical_sqrt(cb)
        worst = max(worst, spectra_match(a, b, tol).max_distance)
    return CrosscheckReport(worst <= tol, worst, near, qm, qk, counts)
