"""Model definition, free-fermion spectrum and the exact-diagonalization oracle.

The rescaled chain is

    H_lam = -sum_{j=1}^{L-1} (X_j X_{j+1} + lam * Y_j Y_{j+1})

with open boundaries.  Its 2^L energies are the sign combinations
``sum_j +/- eps_j`` of L quasi-energies, where ``eps_j**2`` runs over the
eigenvalues of ``C.T @ C`` and ``C`` carries ones on the superdiagonal and
``lam`` on the subdiagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.optimize import linear_sum_assignment
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from xyep.errors import CapacityError, ConvergenceError

MAX_ASSEMBLY_L = 20
MAX_ED_L = 14
# Defective pairs split by O(sqrt(machine eps)) in floating point, so the
# flag has to sit well above that.
NEAR_DEGENERATE_TOL = 1e-6
_DENSE_MATCH_LIMIT = 2048

SECTORS = ("odd", "even")


@dataclass(frozen=True)
class ModelParams:
    """Chain length and complex anisotropy of ``H_lam``.

    Odd ``L`` is rejected unless ``allow_odd`` is set.
    """

    L: int
    lam: complex
    allow_odd: bool = False

    def __post_init__(self):
        if isinstance(self.L, bool) or int(self.L) != self.L:
            raise ValueError(f"L must be an integer, got {self.L!r}")
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(self, "lam", complex(self.lam))
        if self.L < 2:
            raise ValueError(f"L must be >= 2, got {self.L}")
        if self.L % 2 and not self.allow_odd:
            raise ValueError(f"L must be even (got {self.L}); pass allow_odd to override")
        if not (math.isfinite(self.lam.real) and math.isfinite(self.lam.imag)):
            raise ValueError(f"lambda must be finite, got {self.lam!r}")

    @classmethod
    def from_gamma(cls, L, gamma, allow_odd=False):
        return cls(L, GammaParams(gamma).lam, allow_odd=allow_odd)


@dataclass(frozen=True)
class GammaParams:
    """Anisotropy ``gamma`` of the unscaled chain ``H_gamma``.

    ``lam = (1 - gamma) / (1 + gamma)`` and ``H_lam = 4 / (1 + gamma) * H_gamma``.
    """

    gamma: complex

    def __post_init__(self):
        g = complex(self.gamma)
        object.__setattr__(self, "gamma", g)
        if g == -1:
            raise ValueError("gamma = -1 has no lambda image")
        if not (math.isfinite(g.real) and math.isfinite(g.imag)):
            raise ValueError(f"gamma must be finite, got {g!r}")

    @property
    def lam(self) -> complex:
        return (1 - self.gamma) / (1 + self.gamma)

    @property
    def scale(self) -> complex:
        """Factor taking ``H_gamma`` to ``H_lam``."""
        return 4 / (1 + self.gamma)

    @classmethod
    def from_lambda(cls, lam):
        lam = complex(lam)
        if lam == -1:
            raise ValueError("lambda = -1 has no gamma image")
        return cls((1 - lam) / (1 + lam))


# Relative width of the band around the imaginary axis treated as Re == 0.
# Eigenvalues that are imaginary in exact arithmetic pick up a real part at
# the 1e-8 level near a coalescence.
AXIS_BAND = 1e-7


def canonicalize(eps):
    """Move each value onto the half-plane ``Re > 0`` or ``Re == 0, Im >= 0``.

    Values whose real part is within ``AXIS_BAND * |eps|`` of zero count as
    imaginary and are given ``Im >= 0``.
    """
    s = np.asarray(eps, dtype=complex)
    on_axis = np.abs(s.real) <= AXIS_BAND * np.abs(s)
    flip = np.where(on_axis, s.imag < 0, s.real < 0)
    return np.where(flip, -s, s)


def canonical_sqrt(a):
    return canonicalize(np.sqrt(np.asarray(a, dtype=complex)))


def _lex_order(values):
    values = np.asarray(values, dtype=complex)
    return np.lexsort((values.imag, values.real))


def sign_invariant_distance(x, y):
    """``min(|x - y|, |x + y|)``: quasi-energies are only defined up to sign."""
    return min(abs(x - y), abs(x + y))


@dataclass
class QuasiEnergySet:
    """The L quasi-energies of a chain, with their sector labels.

    ``epsilons`` is kept sorted by (real, imag) and every entry lies on the
    canonical square-root half-plane.
    """

    epsilons: np.ndarray
    sectors: tuple
    source: str
    near_degenerate: bool = False

    def __post_init__(self):
        eps = canonicalize(np.atleast_1d(self.epsilons))
        sectors = tuple(self.sectors)
        if len(sectors) != len(eps):
            raise ValueError("one sector label per quasi-energy is required")
        if self.source not in ("matrix", "quasimomentum"):
            raise ValueError(f"unknown source {self.source!r}")
        order = _lex_order(eps)
        self.epsilons = eps[order]
        self.sectors = tuple(sectors[i] for i in order)

    def __len__(self):
        return len(self.epsilons)

    @property
    def L(self) -> int:
        return len(self.epsilons)

    @property
    def a(self) -> np.ndarray:
        """Eigenvalues of ``C^T C``."""
        return self.epsilons ** 2

    def sector(self, name):
        return np.array([e for e, s in zip(self.epsilons, self.sectors) if s == name])

    def min_gap(self) -> float:
        """Smallest sign-invariant distance between two quasi-energies."""
        return closest_pair(self.epsilons)[2]


def closest_pair(eps):
    """Indices and sign-invariant distance of the two closest quasi-energies."""
    eps = np.asarray(eps, dtype=complex)
    if len(eps) < 2:
        return 0, 0, math.inf
    diff = np.abs(eps[:, None] - eps[None, :])
    summ = np.abs(eps[:, None] + eps[None, :])
    d = np.minimum(diff, summ)
    np.fill_diagonal(d, np.inf)
    i, j = np.unravel_index(np.argmin(d), d.shape)
    i, j = sorted((int(i), int(j)))
    return i, j, float(d[i, j])


@dataclass
class SpectrumMultiset:
    """All 2^L energies (with multiplicity) from one of the two pipelines."""

    energies: np.ndarray
    origin: str

    def __post_init__(self):
        self.energies = np.asarray(self.energies, dtype=complex)
        if self.origin not in ("free_fermion", "exact_diag"):
            raise ValueError(f"unknown origin {self.origin!r}")
        n = len(self.energies)
        if n == 0 or n & (n - 1):
            raise ValueError(f"cardinality must be a power of two, got {n}")

    def __len__(self):
        return len(self.energies)

    @property
    def L(self) -> int:
        return len(self.energies).bit_length() - 1

    def sorted(self) -> np.ndarray:
        return self.energies[_lex_order(self.energies)]


def build_c_matrix(p: ModelParams) -> np.ndarray:
    """Quasi-energy matrix: 1 on the superdiagonal, ``lam`` on the subdiagonal."""
    C = np.zeros((p.L, p.L), dtype=complex)
    idx = np.arange(p.L - 1)
    C[idx, idx + 1] = 1
    C[idx + 1, idx] = p.lam
    return C


def ctc_matrix(p: ModelParams) -> np.ndarray:
    """``C^T C`` with the plain transpose (complex symmetric, not Hermitian)."""
    C = build_c_matrix(p)
    return C.T @ C


def sector_sites(L):
    """0-based site indices of the two decoupled sectors.

    ``C^T C`` only couples sites two apart, so odd (1, 3, ...) and even
    (2, 4, ...) sites form independent blocks.
    """
    return {"odd": np.arange(0, L, 2), "even": np.arange(1, L, 2)}


def _eig(A, p, left=False):
    try:
        return scipy.linalg.eig(A, left=left, right=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceError(f"eigensolver failed for L={p.L}, lambda={p.lam!r}: {exc}") from exc


def sector_eigensystem(p: ModelParams):
    """Eigen-decomposition of ``C^T C`` sector by sector.

    Returns a list of ``(sector, a, vectors)`` where ``vectors`` are the right
    eigenvectors embedded in the full L-dimensional site space.
    """
    A = ctc_matrix(p)
    out = []
    for name, sites in sector_sites(p.L).items():
        if len(sites) == 0:
            continue
        block = A[np.ix_(sites, sites)]
        a, v = _eig(block, p)
        if not np.all(np.isfinite(a)):
            raise ConvergenceError(f"non-finite eigenvalues for L={p.L}, lambda={p.lam!r}")
        full = np.zeros((p.L, len(sites)), dtype=complex)
        full[sites] = v
        out.append((name, a, full))
    return out


def quasi_energies_matrix(p: ModelParams) -> QuasiEnergySet:
    """Quasi-energies ``eps_j = sqrt(a_j)`` from the eigenvalues of ``C^T C``.

    Each eigenvector is supported on odd or on even sites only, which fixes
    its sector label.  The set is flagged ``near_degenerate`` when two
    quasi-energies agree to within ``NEAR_DEGENERATE_TOL``.
    """
    eps, labels = [], []
    for name, a, _ in sector_eigensystem(p):
        eps.extend(canonical_sqrt(a))
        labels.extend([name] * len(a))
    q = QuasiEnergySet(np.array(eps), labels, "matrix")
    q.near_degenerate = q.min_gap() < NEAR_DEGENERATE_TOL
    return q


def assemble_spectrum(q) -> SpectrumMultiset:
    """All ``2^L`` sign combinations ``sum_j s_j eps_j``."""
    eps = q.epsilons if isinstance(q, QuasiEnergySet) else np.asarray(q, dtype=complex)
    if len(eps) > MAX_ASSEMBLY_L:
        raise CapacityError(f"spectrum assembly limited to L <= {MAX_ASSEMBLY_L}, got {len(eps)}")
    energies = np.zeros(1, dtype=complex)
    for e in eps:
        energies = np.concatenate([energies + e, energies - e])
    return SpectrumMultiset(energies, "free_fermion")


def ground_state_energy(q) -> complex:
    """All-minus combination ``-sum_j eps_j``.

    For complex ``lam`` this is a labelled state of the canonical sign
    convention, not an extremum of the spectrum.
    """
    eps = q.epsilons if isinstance(q, QuasiEnergySet) else np.asarray(q, dtype=complex)
    return complex(-np.sum(eps))


_PAULI = {
    "I": sp.identity(2, dtype=complex, format="csr"),
    "X": sp.csr_matrix(np.array([[0, 1], [1, 0]], dtype=complex)),
    "Y": sp.csr_matrix(np.array([[0, -1j], [1j, 0]], dtype=complex)),
}


def _two_site(L, j, name):
    ops = [_PAULI["I"]] * L
    ops[j] = ops[j + 1] = _PAULI[name]
    return reduce(lambda x, y: sp.kron(x, y, format="csr"), ops)


def pauli_chain_hamiltonian(L, xx, yy) -> np.ndarray:
    """Dense ``-sum_j (xx X_j X_{j+1} + yy Y_j Y_{j+1})``, open boundaries."""
    if L > MAX_ED_L:
        raise CapacityError(f"exact diagonalization limited to L <= {MAX_ED_L}, got {L}")
    H = sp.csr_matrix((2**L, 2**L), dtype=complex)
    for j in range(L - 1):
        H = H - xx * _two_site(L, j, "X") - yy * _two_site(L, j, "Y")
    return H.toarray()


def hamiltonian_matrix(p: ModelParams) -> np.ndarray:
    return pauli_chain_hamiltonian(p.L, 1.0, p.lam)


def gamma_hamiltonian_matrix(L, g: GammaParams) -> np.ndarray:
    """``H_gamma = -1/2 sum_j ((1+g)/2 XX + (1-g)/2 YY)``."""
    return pauli_chain_hamiltonian(L, (1 + g.gamma) / 4, (1 - g.gamma) / 4)


def exact_diagonalization(p: ModelParams) -> SpectrumMultiset:
    """Full spectrum of the dense ``2^L x 2^L`` Hamiltonian."""
    if p.L > MAX_ED_L:
        raise CapacityError(f"exact diagonalization limited to L <= {MAX_ED_L}, got {p.L}")
    H = hamiltonian_matrix(p)
    try:
        w = scipy.linalg.eigvals(H)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceError(f"ED failed for L={p.L}, lambda={p.lam!r}: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise ConvergenceError(f"ED produced non-finite values for L={p.L}, lambda={p.lam!r}")
    return SpectrumMultiset(w, "exact_diag")


@dataclass
class MatchReport:
    """Outcome of :func:`spectra_match`; truthy iff the multisets match."""

    matched: bool
    max_distance: float
    worst_pair: tuple = field(default=(None, None))
    method: str = "sorted"

    def __bool__(self):
        return self.matched


def _values(x):
    if isinstance(x, SpectrumMultiset):
        return x.energies
    if isinstance(x, QuasiEnergySet):
        return x.epsilons
    return np.asarray(x, dtype=complex).ravel()


def _report(a, b, d, method):
    i = int(np.argmax(d))
    return float(d[i]), (complex(a[i]), complex(b[i])), method


def spectra_match(a, b, tol: float) -> MatchReport:
    """Match two multisets of complex numbers within ``tol``.

    A lexicographic pairing is tried first; if it does not already satisfy
    ``tol`` the pairing is refined by a minimum-cost assignment (dense for
    small sets, restricted to candidate neighbours for large ones).
    """
    a, b = _values(a), _values(b)
    if len(a) != len(b):
        raise ValueError(f"cardinality mismatch: {len(a)} vs {len(b)}")
    if len(a) == 0:
        return MatchReport(True, 0.0)
    a_s, b_s = a[_lex_order(a)], b[_lex_order(b)]
    d = np.abs(a_s - b_s)
    worst, pair, method = _report(a_s, b_s, d, "sorted")
    if worst <= tol:
        return MatchReport(True, worst, pair, method)

    if len(a) <= _DENSE_MATCH_LIMIT:
        cost = np.abs(a[:, None] - b[None, :])
        rows, cols = linear_sum_assignment(cost)
        d = cost[rows, cols]
        worst, pair, method = _report(a[rows], b[cols], d, "assignment")
        return MatchReport(worst <= tol, worst, pair, method)

    # Sparse refinement: only pairs closer than the sorted-pairing worst case.
    ta, tb = cKDTree(np.c_[a.real, a.imag]), cKDTree(np.c_[b.real, b.imag])
    radius = max(10 * tol, 1e-12)
    dm = ta.sparse_distance_matrix(tb, radius, output_type="coo_matrix").tocsr()
    try:
        from scipy.sparse.csgraph import min_weight_full_bipartite_matching

        graph = dm.copy()
        graph.data = graph.data + 1e-300  # explicit zeros would drop the edge
        rows = np.arange(len(a))
        cols = min_weight_full_bipartite_matching(graph)
        d = np.abs(a[rows] - b[cols])
        worst, pair, method = _report(a[rows], b[cols], d, "sparse-assignment")
        return MatchReport(worst <= tol, worst, pair, method)
    except ValueError:
        return MatchReport(False, worst, pair, "sorted")


def cluster_centroids(values, radius):
    """Group values closer than ``radius`` (single linkage).

    Returns ``(centroids, sizes)`` in lexicographic order of the centroids.
    Centroids of a coalescing cluster are well conditioned even where the
    individual eigenvalues are not.
    """
    values = np.asarray(values, dtype=complex).ravel()
    if len(values) == 0:
        return values, np.zeros(0, dtype=int)
    tree = cKDTree(np.c_[values.real, values.imag])
    pairs = tree.query_pairs(radius, output_type="ndarray")
    n = len(values)
    adj = sp.coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)) if len(pairs) else sp.coo_matrix((n, n))
    ncomp, labels = connected_components(adj, directed=False)
    sizes = np.bincount(labels, minlength=ncomp)
    centroids = np.bincount(labels, weights=values.real, minlength=ncomp) / sizes
    centroids = centroids + 1j * np.bincount(labels, weights=values.imag, minlength=ncomp) / sizes
    order = _lex_order(centroids)
    return centroids[order], sizes[order]



def snap_to_centroids(values, radius):
    """Replace each value by the centroid of its ``radius`` cluster, multiplicity kept."""
    values = np.asarray(values, dtype=complex).ravel()
    if len(values) == 0:
        return values
    tree = cKDTree(np.c_[values.real, values.imag])
    pairs = tree.query_pairs(radius, output_type="ndarray")
    n = len(values)
    adj = sp.coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)) if len(pairs) else sp.coo_matrix((n, n))
    _, labels = connected_components(adj, directed=False)
    sizes = np.bincount(labels)
    cre = np.bincount(labels, weights=values.real) / sizes
    cim = np.bincount(labels, weights=values.imag) / sizes
    return cre[labels] + 1j * cim[labels]


def centroid_match(a, b, tol: float, radius: float = NEAR_DEGENERATE_TOL) -> MatchReport:
    """:func:`spectra_match` after snapping both sets to cluster centroids.

    At an EP a Jordan block of size m splits eigenvalues by about
    ``eps**(1/m)``; the cluster mean is accurate to machine precision.
    """
    r = spectra_match(snap_to_centroids(_values(a), radius), snap_to_centroids(_values(b), radius), tol)
    r.method = "centroid-" + r.method
    return r
