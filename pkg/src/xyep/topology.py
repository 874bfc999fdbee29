"""Non-Hermitian winding number and the topological phase diagram.

The translation-invariant chain reduces to the off-diagonal Bloch symbol

    h(k) = (1 + lam) cos k + i (1 - lam) sin k = exp(ik) + lam exp(-ik),

whose winding about the origin labels the phase: ``+1`` for ``|lam| < 1``,
``-1`` for ``|lam| > 1``.  ``h`` has a zero on the Brillouin zone exactly when
``|lam| = 1``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

BOUNDARY_BAND = 1e-3
MAX_GRID_CELLS = 2048 * 2048
_MAX_DEPTH = 40


def bloch_symbol(lam, k):
    k = np.asarray(k, dtype=float)
    h = np.exp(1j * k) + complex(lam) * np.exp(-1j * k)
    return complex(h) if h.ndim == 0 else h


@dataclass
class PhaseSample:
    """Winding number at one ``lam``; ``w`` is None where it is ill-defined."""

    lam: complex
    w: int | None
    samples_used: int
    boundary: bool = False
    residual: float = 0.0


def _accumulate(lam, k0, k1, h0, h1, depth, zero_tol):
    """Phase change of ``h`` from ``k0`` to ``k1``, bisecting large steps."""
    d = np.angle(h1 / h0)
    if abs(d) <= np.pi / 2:
        return d, 0
    if depth >= _MAX_DEPTH:
        raise ZeroDivisionError("winding path passes through a zero of h")
    km = 0.5 * (k0 + k1)
    hm = bloch_symbol(lam, km)
    if abs(hm) < zero_tol:
        raise ZeroDivisionError("winding path passes through a zero of h")
    a, na = _accumulate(lam, k0, km, h0, hm, depth + 1, zero_tol)
    b, nb = _accumulate(lam, km, k1, hm, h1, depth + 1, zero_tol)
    return a + b, na + nb + 1


def winding_number(lam, n_k=256) -> PhaseSample:
    """Winding of ``h(k)`` over ``[0, 2 pi)`` from ``n_k`` uniform steps.

    Steps whose principal phase increment exceeds ``pi / 2`` are bisected.
    Points within ``BOUNDARY_BAND`` of the unit circle, a zero on the path,
    or a total that is not within 0.01 of an integer give ``w = None`` with
    ``boundary`` set.
    """
    if n_k < 64:
        raise ValueError(f"n_k must be >= 64, got {n_k}")
    lam = complex(lam)
    if abs(abs(lam) - 1) < BOUNDARY_BAND:
        return PhaseSample(lam, None, 0, boundary=True, residual=np.nan)
    k = np.linspace(0.0, 2 * np.pi, n_k + 1)
    h = bloch_symbol(lam, k)
    zero_tol = 1e-14 * (1 + abs(lam))
    if np.any(np.abs(h) < zero_tol):
        return PhaseSample(lam, None, n_k, boundary=True, residual=np.nan)
    d = np.angle(h[1:] / h[:-1])
    total, used = float(np.sum(d)), n_k
    for i in np.flatnonzero(np.abs(d) > np.pi / 2):
        try:
            sub, extra = _accumulate(lam, k[i], k[i + 1], h[i], h[i + 1], 0, zero_tol)
        except ZeroDivisionError:
            return PhaseSample(lam, None, used, boundary=True, residual=np.nan)
        total += sub - d[i]
        used += extra
    x = total / (2 * np.pi)
    w = int(round(x))
    residual = abs(x - w)
    if residual >= 0.01:
        return PhaseSample(lam, None, used, boundary=True, residual=residual)
    return PhaseSample(lam, w, used, residual=residual)


@dataclass
class PhaseDiagram:
    re: np.ndarray
    im: np.ndarray
    w: np.ndarray  # int, shape (len(im), len(re)); 0 where flagged
    boundary: np.ndarray
    n_k: int


def phase_diagram(re_range=(-1.5, 1.5), im_range=(-1.5, 1.5), n_re=101, n_im=101, n_k=256, threads=1) -> PhaseDiagram:
    if n_re * n_im > MAX_GRID_CELLS:
        raise ValueError(f"grid of {n_re}x{n_im} exceeds the 2048^2 limit")
    re = np.linspace(*re_range, n_re)
    im = np.linspace(*im_range, n_im)

    def row(y):
        return [winding_number(complex(x, y), n_k) for x in re]

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(row, im))
    w = np.array([[s.w if s.w is not None else 0 for s in r] for r in rows], dtype=int)
    boundary = np.array([[s.boundary for s in r] for r in rows], dtype=bool)
    return PhaseDiagram(re, im, w, boundary, n_k)
