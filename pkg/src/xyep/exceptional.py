"""Exceptional points of finite chains.

A quasi-momentum is a double root of ``sin((L+2)k) + mu sin(Lk)`` when the
derivative ``(L+2)cos((L+2)k) + L mu cos(Lk)`` vanishes too.  Eliminating
``mu`` leaves

    F(k) = (L+2) sin(Lk) cos((L+2)k) - L sin((L+2)k) cos(Lk)
         = sin(2(L+1)k) - (L+1) sin(2k),

whose roots on ``0 <= Re k < pi`` are the triple trivial roots at 0 and
``pi/2`` plus ``2L - 4`` others.  Those pair up under ``k -> pi - k``, and
each of the ``L - 2`` classes gives ``mu = -sin((L+2)k) / sin(Lk)``, i.e. an
EP at ``lam = mu`` (plus branch) and at ``lam = 1/mu`` (minus branch).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from xyep.errors import EpCensusError, IncompleteRootSetError
from xyep.model import (
    MAX_ED_L,
    ModelParams,
    assemble_spectrum,
    canonical_sqrt,
    cluster_centroids,
    ctc_matrix,
    hamiltonian_matrix,
    quasi_energies_matrix,
    sector_sites,
)
from xyep.quasimomentum import BRANCH_SECTOR, k_residual_derivative
from xyep.roots import dedupe, fold, newton, roots_with_multiplicity, seed_grid

MAX_EP_L = 64
MAX_HAMILTONIAN_CHECK_L = 10
DEGENERACY_TOL = 1e-6
TRIVIAL_RADIUS = 1e-6
MAX_GRID_CELLS = 2048 * 2048


@dataclass
class EpRecord:
    """One exceptional point in the complex ``lam`` plane."""

    k_ep: complex
    lambda_ep: complex
    branch: str
    ring: str
    quasi_gap: float = math.nan
    lr_overlap: float = math.nan
    trivial: bool = False

    def __post_init__(self):
        self.k_ep = complex(self.k_ep)
        self.lambda_ep = complex(self.lambda_ep)
        expected = "inner" if abs(self.lambda_ep) < 1 else "outer"
        if abs(self.lambda_ep) == 1 or self.ring != expected:
            raise ValueError(f"ring {self.ring!r} inconsistent with |lambda| = {abs(self.lambda_ep)}")
        if self.branch not in ("plus", "minus"):
            raise ValueError(f"unknown branch {self.branch!r}")


def ep_k_residual(k, L):
    """``(L+2) sin(Lk) cos((L+2)k) - L sin((L+2)k) cos(Lk)``."""
    k = np.asarray(k, dtype=complex)
    r = (L + 2) * np.sin(L * k) * np.cos((L + 2) * k) - L * np.sin((L + 2) * k) * np.cos(L * k)
    return complex(r) if r.ndim == 0 else r


def _ep_derivative(k, L):
    return -4 * (L + 1) * np.sin(L * k) * np.sin((L + 2) * k)


def _reduced(L):
    """``F / sin(2k)^3``: entire, no zeros at the trivial points."""

    def g(k):
        return ep_k_residual(k, L) / np.sin(2 * k) ** 3

    def step(k):
        F, dF = ep_k_residual(k, L), _ep_derivative(k, L)
        s, c = np.sin(2 * k), np.cos(2 * k)
        return F * s / (dF * s - 6 * F * c)

    def rel_residual(k):
        a = (L + 2) * np.abs(np.sin(L * k) * np.cos((L + 2) * k))
        b = L * np.abs(np.sin((L + 2) * k) * np.cos(L * k))
        return np.abs(ep_k_residual(k, L)) / (a + b + 1e-300)

    return g, step, rel_residual


def lambda_from_k(k, L) -> complex:
    """``mu = -sin((L+2)k) / sin(Lk)``; the plus-branch EP for an EP momentum."""
    return complex(-np.sin((L + 2) * k) / np.sin(L * k))


def polish(k, mu, L, iters=8):
    """Newton on the pair of double-root conditions in ``(k, mu)`` jointly."""
    for _ in range(iters):
        sL, sL2 = np.sin(L * k), np.sin((L + 2) * k)
        cL, cL2 = np.cos(L * k), np.cos((L + 2) * k)
        f1 = sL2 + mu * sL
        f2 = (L + 2) * cL2 + L * mu * cL
        J = np.array([[(L + 2) * cL2 + L * mu * cL, sL],
                      [-(L + 2) ** 2 * sL2 - L**2 * mu * sL, L * cL]])
        try:
            dk, dmu = np.linalg.solve(J, [-f1, -f2])
        except np.linalg.LinAlgError:
            break
        k, mu = k + dk, mu + dmu
        if abs(dk) + abs(dmu) < 1e-15 * (1 + abs(mu)):
            break
    return complex(k), complex(mu)


def _is_trivial(k):
    k = complex(fold(k))
    return abs(k) < TRIVIAL_RADIUS or abs(k - np.pi) < TRIVIAL_RADIUS or abs(k - np.pi / 2) < TRIVIAL_RADIUS


def ep_momenta(L):
    """The ``2L - 4`` nontrivial roots of :func:`ep_k_residual` on the strip."""
    g, step, res = _reduced(L)
    im_max = 0.5 + math.log(L + 1) / L
    expected = 2 * L - 4
    roots = []
    for attempt in range(4):
        seeds = seed_grid((8 * L) << attempt, 16 << attempt, im_max)
        k, ok = newton(step, seeds)
        k = fold(k[ok])
        with np.errstate(all="ignore"):
            k = k[np.isfinite(k) & (res(k) < 1e-9)]
        roots = [r for r in roots_with_multiplicity(g, k) if not _is_trivial(r)]
        if len(roots) == expected:
            return np.array(sorted(roots, key=lambda z: (z.real, z.imag)))
    raise IncompleteRootSetError(f"found {len(roots)} EP momenta for L={L}, expected {expected}", roots)


def _sort_key(rec):
    return (round(rec.lambda_ep.real, 10), round(rec.lambda_ep.imag, 10), rec.branch)


def find_eps(L, verify=True) -> list:
    """All ``2L - 4`` exceptional points of the length-``L`` chain.

    With ``verify`` the matrix-level gap and left/right overlap are filled in.
    """
    if L % 2 or not 4 <= L <= MAX_EP_L:
        raise ValueError(f"find_eps needs even 4 <= L <= {MAX_EP_L}, got {L}")
    ks = ep_momenta(L)
    # one representative per (k, pi - k) class
    reps = dedupe(np.where(ks.real > np.pi / 2, np.pi - ks, ks), 1e-7)
    records = []
    for k in reps:
        k, mu = polish(k, lambda_from_k(k, L), L)
        for branch, lam in (("plus", mu), ("minus", 1 / mu)):
            ring = "inner" if abs(lam) < 1 else "outer"
            records.append(EpRecord(k, lam, branch, ring))
    if len(records) != 2 * L - 4:
        raise EpCensusError(f"L={L}: {len(records)} EPs, expected {2 * L - 4}", records)
    if verify:
        for rec in records:
            m = verify_matrix_level(rec.lambda_ep, L)
            rec.quasi_gap, rec.lr_overlap = m.quasi_gap, m.overlap
    return sorted(records, key=_sort_key)


def null_space_overlap(M, rank_tol=None, rank=None):
    """Left/right overlap of the numerical null space of ``M``.

    With orthonormal bases ``Y`` (left) and ``X`` (right) of the null space,
    returns the smallest singular value of ``Y^H X`` and the null-space
    dimension.  It vanishes when the eigenvalue is defective and is of order
    one for a well-conditioned semisimple one.  ``rank_tol`` defaults to
    ``1e-8 * max(1, ||M||)``.
    """
    U, S, Vh = np.linalg.svd(M)
    if rank_tol is None:
        rank_tol = 1e-8 * max(1.0, float(S[0]) if len(S) else 0.0)
    if rank is None:
        rank = max(1, int(np.sum(S <= rank_tol)))
    Y = U[:, -rank:]
    X = Vh[-rank:].conj().T
    return float(np.linalg.svd(Y.conj().T @ X, compute_uv=False).min()), rank


def cluster_overlap(A, values):
    """Normalized left/right overlap for a near-degenerate eigenvalue group.

    A group tighter than ``DEGENERACY_TOL`` is treated as one eigenvalue at
    its centroid; otherwise each member is measured on its own and the
    smallest overlap is returned.
    """
    values = np.atleast_1d(np.asarray(values, dtype=complex))
    scale = max(1.0, float(np.linalg.norm(A, 2)))
    n = A.shape[0]
    spread = float(np.max(np.abs(values - values.mean()))) if len(values) > 1 else 0.0
    if spread * 2 <= DEGENERACY_TOL * scale:
        tol = max(1e-8 * scale, 10 * 2 * spread)
        return null_space_overlap(A - values.mean() * np.eye(n), rank_tol=tol)[0]
    return min(null_space_overlap(A - v * np.eye(n), rank=1)[0] for v in values)


@dataclass
class MatrixCheck:
    lam: complex
    quasi_gap: float
    overlap: float
    pair: tuple
    sectors: tuple


def verify_matrix_level(lam, L) -> MatrixCheck:
    """Closest quasi-energy pair of ``C^T C`` at ``lam`` and its overlap."""
    p = ModelParams(L, lam)
    A = ctc_matrix(p)
    q = quasi_energies_matrix(p)
    a = q.epsilons**2
    d = np.abs(a[:, None] - a[None, :])
    np.fill_diagonal(d, np.inf)
    i, j = np.unravel_index(np.argmin(d), d.shape)
    ei, ej = q.epsilons[i], q.epsilons[j]
    gap = float(min(abs(ei - ej), abs(ei + ej)))
    overlap = cluster_overlap(A, [a[i], a[j]])
    return MatrixCheck(complex(lam), gap, overlap, (complex(ei), complex(ej)), (q.sectors[i], q.sectors[j]))


@dataclass
class HamiltonianCheck:
    targets_total: int
    targets_checked: int
    coalescing: int
    max_centroid_error: float
    min_overlap: float
    max_overlap: float
    max_pair_split: float


def verify_hamiltonian_level(lam, L, max_targets=None) -> HamiltonianCheck:
    """Coalescence of many-body levels at ``lam`` (dense ED).

    With ``eps_i`` and ``eps_j`` the closest quasi-energy pair, the levels
    ``rest + d`` and ``rest - d`` (``d = eps_i - eps_j``) meet when the pair
    coalesces, for each of the ``2^(L-2)`` sign combinations ``rest`` of the
    other quasi-energies.  For a coalescing pair the ED eigenvalues around
    each ``rest`` are grouped, their centroid is compared with ``rest`` and the
    null-space overlap decides whether the level is defective.  Otherwise the
    two levels are measured one by one and none counts as coalescing.
    """
    if L > min(MAX_HAMILTONIAN_CHECK_L, MAX_ED_L):
        raise ValueError(f"Hamiltonian-level check limited to L <= {MAX_HAMILTONIAN_CHECK_L}")
    if max_targets is None:
        # one dense SVD per target; L = 10 means 1024 x 1024 each
        max_targets = 64 if L <= 8 else 8
    p = ModelParams(L, lam)
    q = quasi_energies_matrix(p)
    a = q.epsilons**2
    d = np.abs(a[:, None] - a[None, :])
    np.fill_diagonal(d, np.inf)
    i, j = np.unravel_index(np.argmin(d), d.shape)
    ei, ej = q.epsilons[i], q.epsilons[j]
    delta = ei - ej if abs(ei - ej) <= abs(ei + ej) else ei + ej
    rest = np.delete(q.epsilons, [i, j])
    targets, mult = cluster_centroids(assemble_spectrum(rest).energies, DEGENERACY_TOL)
    total = len(targets)
    if total > max_targets:
        pick = np.linspace(0, total - 1, max_targets).round().astype(int)
        targets, mult = targets[pick], mult[pick]

    H = hamiltonian_matrix(p)
    n = len(H)
    w = np.linalg.eigvals(H)
    scale = max(1.0, float(np.linalg.norm(H, 2)))
    coalescing, cen_err, split = 0, 0.0, 0.0
    overlaps = []
    degenerate = abs(delta) < DEGENERACY_TOL
    for t, m in zip(targets, mult):
        if degenerate:
            near = w[np.argsort(np.abs(w - t))[: 2 * m]]
            cen_err = max(cen_err, abs(near.mean() - t))
            split = max(split, float(np.max(np.abs(near - near.mean()))))
            ov, g = null_space_overlap(H - t * np.eye(n), rank_tol=1e-8 * scale)
            coalescing += g < 2 * m
            overlaps.append(ov)
        else:
            for level in (t + delta, t - delta):
                nearest = w[np.argmin(np.abs(w - level))]
                cen_err = max(cen_err, abs(nearest - level))
                overlaps.append(null_space_overlap(H - nearest * np.eye(n), rank=1)[0])
            split = max(split, abs(2 * delta))
    return HamiltonianCheck(total, len(targets), int(coalescing), cen_err,
                            float(min(overlaps)), float(max(overlaps)), split)


@dataclass
class EpVerification:
    lambda_ep: complex
    quasi_gap: float
    matrix_overlap: float
    matrix_passed: bool
    hamiltonian: HamiltonianCheck = None
    hamiltonian_passed: bool = None

    @property
    def passed(self):
        return self.matrix_passed and self.hamiltonian_passed is not False


def verify_ep(rec, L, tol=1e-6, hamiltonian=None) -> EpVerification:
    """Check that ``rec`` is a genuine EP at matrix and (small L) Hamiltonian level.

    ``rec`` may be an :class:`EpRecord` or a bare ``lam`` value.  Failures
    come back in the report; nothing is raised.  The record's ``quasi_gap``
    and ``lr_overlap`` fields are updated in place.
    """
    lam = rec.lambda_ep if isinstance(rec, EpRecord) else complex(rec)
    m = verify_matrix_level(lam, L)
    out = EpVerification(lam, m.quasi_gap, m.overlap, m.quasi_gap < tol and m.overlap < tol)
    if isinstance(rec, EpRecord):
        rec.quasi_gap, rec.lr_overlap = m.quasi_gap, m.overlap
    if hamiltonian is None:
        hamiltonian = L <= 8
    if hamiltonian:
        h = verify_hamiltonian_level(lam, L)
        out.hamiltonian = h
        out.hamiltonian_passed = (
            h.coalescing == h.targets_checked and h.max_centroid_error < tol and h.max_overlap < tol
        )
    return out


@dataclass
class TrivialPointReport:
    """Behaviour at ``lam = +-(L+2)/L`` (plus branch) or its reciprocal (minus branch)."""

    L: int
    lam: complex
    k_trivial: float
    branch: str
    residual: float
    derivative_residual: float
    trivial_eps: complex
    eps_sector: str
    matrix_eps_error: float
    degeneracy_detected: bool
    min_matrix_overlap: float
    min_hamiltonian_overlap: float = math.nan
    details: dict = field(default_factory=dict)


def trivial_lambda(L, sign=1, branch="plus") -> complex:
    """``sign * (L+2)/L`` for the plus branch, its reciprocal for minus."""
    mu = sign * (L + 2) / L
    return complex(mu if branch == "plus" else 1 / mu)


def verify_trivial_point(L, sign=1, branch="plus", hamiltonian=None) -> TrivialPointReport:
    """Show that a trivial double root is not an exceptional point.

    At ``mu = +(L+2)/L`` the momentum ``k = pi/2`` (``k = 0`` for ``-``)
    solves both double-root conditions.  The formal quasi-energy at that
    momentum, ``|1 -+ lam|``, is the same expression in both sectors, and the
    genuine eigenvalue of ``C^T C`` equal to it sits in one sector only:
    the degeneracy is between sectors, and every eigenvector keeps a
    left/right overlap of order one.
    """
    lam = trivial_lambda(L, sign, branch)
    mu = lam if branch == "plus" else 1 / lam
    k = np.pi / 2 if sign > 0 else 0.0
    residual = abs(np.sin((L + 2) * k) + mu * np.sin(L * k))
    dres = abs(k_residual_derivative(k, L, mu))
    eps_t = complex(canonical_sqrt(1 + lam**2 + 2 * lam * np.cos(2 * k)))

    p = ModelParams(L, lam)
    q = quasi_energies_matrix(p)
    sector = BRANCH_SECTOR[branch]
    in_sector = q.sector(sector)
    err = float(np.min(np.abs(in_sector - eps_t)))
    detected = residual < 1e-10 and dres < 1e-10 * (L + 2) and err < 1e-8

    A = ctc_matrix(p)
    ov = []
    for sites in sector_sites(L).values():
        for a in np.linalg.eigvals(A[np.ix_(sites, sites)]):
            ov.append(cluster_overlap(A, [a]))
    rep = TrivialPointReport(L, lam, k, branch, float(residual), float(dres), eps_t, sector, err,
                             detected, float(min(ov)))
    if hamiltonian is None:
        hamiltonian = L <= 8
    if hamiltonian:
        H = hamiltonian_matrix(p)
        w = np.linalg.eigvals(H)
        cents, _ = cluster_centroids(w, DEGENERACY_TOL)
        scale = max(1.0, float(np.linalg.norm(H, 2)))
        rep.min_hamiltonian_overlap = min(
            null_space_overlap(H - c * np.eye(len(H)), rank_tol=1e-8 * scale)[0] for c in cents
        )
    return rep


GAP_MEASURES = ("smallest_two", "min_pair")


def _landscape_rows(L, lams, measure="smallest_two"):
    """Sign-invariant quasi-energy gap for each ``lam``.

    ``smallest_two`` is the distance between the two quasi-energies of
    smallest modulus (the pair that coalesces at every EP); ``min_pair`` is
    the minimum over all pairs.
    """
    if measure not in GAP_MEASURES:
        raise ValueError(f"measure must be one of {GAP_MEASURES}, got {measure!r}")
    lams = np.asarray(lams, dtype=complex)
    n = len(lams)
    eps = []
    for sites in sector_sites(L).values():
        m = len(sites)
        # sector block of C^T C: diagonal 1 + lam^2 except at the chain ends
        diag = np.ones((n, m), dtype=complex) * (1 + lams[:, None] ** 2)
        if sites[0] == 0:
            diag[:, 0] = lams**2
        if sites[-1] == L - 1:
            diag[:, -1] = 1
        blocks = np.zeros((n, m, m), dtype=complex)
        idx = np.arange(m)
        blocks[:, idx, idx] = diag
        blocks[:, idx[:-1], idx[:-1] + 1] = lams[:, None]
        blocks[:, idx[:-1] + 1, idx[:-1]] = lams[:, None]
        with np.errstate(all="ignore"):
            try:
                a = np.linalg.eigvals(blocks)
            except np.linalg.LinAlgError:
                a = np.full((n, m), np.nan, dtype=complex)
                for r in range(n):
                    try:
                        a[r] = np.linalg.eigvals(blocks[r])
                    except np.linalg.LinAlgError:
                        pass
        eps.append(np.sqrt(a))
    e = np.concatenate(eps, axis=1)
    if measure == "smallest_two":
        bad = ~np.all(np.isfinite(e), axis=1)
        mags = np.where(np.isfinite(e), np.abs(e), np.inf)
        order = np.argsort(mags, axis=1, kind="stable")[:, :2]
        x = np.take_along_axis(e, order[:, :1], axis=1)[:, 0]
        y = np.take_along_axis(e, order[:, 1:], axis=1)[:, 0]
        out = np.minimum(np.abs(x - y), np.abs(x + y))
        out[bad] = np.nan
        return out
    diff = np.abs(e[:, :, None] - e[:, None, :])
    summ = np.abs(e[:, :, None] + e[:, None, :])
    d = np.minimum(diff, summ)
    idx = np.arange(e.shape[1])
    d[:, idx, idx] = np.inf
    out = d.reshape(n, -1).min(axis=1)
    out[~np.all(np.isfinite(e), axis=1)] = np.nan
    return out


@dataclass
class GapLandscape:
    L: int
    re: np.ndarray
    im: np.ndarray
    gap: np.ndarray  # shape (len(im), len(re)); NaN marks failed cells
    measure: str = "smallest_two"

    def local_minima(self, below=np.inf, exclude_real_axis=False):
        """Grid points lower than all eight neighbours (interior only)."""
        g = np.where(np.isnan(self.gap), np.inf, self.gap)
        core = g[1:-1, 1:-1]
        mask = core < below
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if di or dj:
                    mask &= core < g[1 + di: g.shape[0] - 1 + di, 1 + dj: g.shape[1] - 1 + dj]
        ii, jj = np.nonzero(mask)
        pts = self.re[jj + 1] + 1j * self.im[ii + 1]
        if exclude_real_axis:
            step = abs(self.im[1] - self.im[0]) if len(self.im) > 1 else 0
            pts = pts[np.abs(pts.imag) > step]
        return pts

    def zeros(self, zero_tol=DEGENERACY_TOL, exclude_real_axis=True) -> list:
        """Refine every grid minimum to a zero of the gap and classify it.

        Grid minima seed a secant iteration; zeros are deduplicated and
        sorted.  A zero whose coalescing pair keeps a left/right overlap above
        ``zero_tol`` is a cross-sector crossing, not an EP.  This is a
        grid-scan EP locator independent of the root finder.
        """
        found = []
        for z in self.local_minima(exclude_real_axis=exclude_real_axis):
            lam, g = refine_minimum(self.L, z)
            if not g < zero_tol or any(abs(lam - f.lam) < 1e-6 for f in found):
                continue
            if exclude_real_axis and abs(lam.imag) < 1e-6:
                continue
            m = verify_matrix_level(lam, self.L)
            found.append(LandscapeZero(lam, g, m.overlap, m.sectors, m.overlap < zero_tol))
        return sorted(found, key=lambda f: (round(f.lam.real, 8), round(f.lam.imag, 8)))

    def ep_minima(self, zero_tol=DEGENERACY_TOL) -> list:
        return [f.lam for f in self.zeros(zero_tol) if f.is_ep]


def gap_at(L, lam, measure="smallest_two") -> float:
    return float(_landscape_rows(L, [complex(lam)], measure)[0])


def _discriminant(L, lam):
    """``(a1 - a2)^2`` for the two ``C^T C`` eigenvalues of smallest modulus.

    Symmetric in the pair, hence analytic in ``lam`` near a coalescence even
    though ``a1`` and ``a2`` themselves have a square-root branch point.
    """
    a = quasi_energies_matrix(ModelParams(L, lam)).a
    o = np.argsort(np.abs(a), kind="stable")
    return complex((a[o[0]] - a[o[1]]) ** 2)


def refine_minimum(L, lam0, h=1e-3, maxiter=60):
    """Secant iteration on the discriminant from ``lam0``; returns ``(lam, gap)``."""
    z0, z1 = complex(lam0), complex(lam0) + h
    f0, f1 = _discriminant(L, z0), _discriminant(L, z1)
    for _ in range(maxiter):
        if f1 == f0 or not np.isfinite(f1):
            break
        z2 = z1 - f1 * (z1 - z0) / (f1 - f0)
        if not np.isfinite(z2) or abs(z2) > 1e6:
            break
        z0, f0, z1 = z1, f1, z2
        f1 = _discriminant(L, z1)
        if abs(z1 - z0) < 1e-15 * (1 + abs(z1)):
            break
    return z1, gap_at(L, z1)


@dataclass
class LandscapeZero:
    """A refined zero of the gap and what kind of coincidence it is."""

    lam: complex
    gap: float
    overlap: float
    sectors: tuple
    is_ep: bool


def gap_landscape(L, re_range=(-2.5, 2.5), im_range=(-2.5, 2.5), n_re=201, n_im=201, threads=1,
                  measure="smallest_two") -> GapLandscape:
    """Quasi-energy gap over a rectangle of complex ``lam``."""
    if n_re * n_im > MAX_GRID_CELLS:
        raise ValueError(f"grid of {n_re}x{n_im} exceeds the 2048^2 limit")
    p = ModelParams(L, 0.0)  # validates L
    re = np.linspace(*re_range, n_re)
    im = np.linspace(*im_range, n_im)
    rows = [re + 1j * y for y in im]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        gap = np.array(list(pool.map(lambda r: _landscape_rows(p.L, r, measure), rows)))
    return GapLandscape(L, re, im, gap, measure)
