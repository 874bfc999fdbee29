"""Vectorised complex Newton iteration and root bookkeeping on a period-pi strip."""

from __future__ import annotations

import numpy as np


def newton(step, seeds, maxiter=80, tol=1e-14):
    """Run ``k <- k - step(k)`` on all seeds at once.

    Returns the final iterates and a mask of seeds whose last step was below
    ``tol`` (relative to ``1 + |k|``).  Diverging seeds are dropped by the
    mask, not raised on.
    """
    k = np.array(seeds, dtype=complex)
    done = np.zeros(k.shape, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(maxiter):
            active = ~done
            if not active.any():
                break
            dk = step(k[active])
            bad = ~np.isfinite(dk)
            dk[bad] = 0
            knew = k[active] - dk
            idx = np.flatnonzero(active)
            k[idx] = knew
            small = np.abs(dk) <= tol * (1 + np.abs(knew))
            done[idx[small & ~bad]] = True
            # park blown-up iterates so they stop costing work
            lost = bad | (np.abs(knew.imag) > 50)
            done[idx[lost]] = True
            k[idx[lost]] = np.nan
    ok = done & np.isfinite(k)
    return k, ok


def fold(k, period=np.pi):
    """Map ``Re k`` into ``[0, period)``."""
    k = np.asarray(k, dtype=complex)
    re = np.mod(k.real, period)
    re = np.where(np.isclose(re, period, rtol=0, atol=1e-12), 0.0, re)
    return re + 1j * k.imag


def strip_distance(x, y, period=np.pi):
    """Distance between points of the strip, periodic in the real part."""
    d = np.asarray(x) - np.asarray(y)
    re = np.abs(d.real) % period
    re = np.minimum(re, period - re)
    return np.hypot(re, d.imag)


def dedupe(roots, tol, period=np.pi):
    """Greedy clustering of strip points closer than ``tol``; returns representatives."""
    reps = []
    for r in sorted(np.asarray(roots).ravel(), key=lambda z: (z.real, z.imag)):
        if not reps or np.min(strip_distance(np.array(reps), r, period)) > tol:
            reps.append(r)
    return np.array(reps, dtype=complex)


def zero_count(f, center, radius, n=96):
    """Number of zeros of analytic ``f`` inside a circle (argument principle).

    The phase of ``f`` is accumulated over ``n`` points with the increment
    taken on the principal branch, so ``n`` must resolve the winding.
    """
    t = np.linspace(0.0, 2 * np.pi, n + 1)
    z = center + radius * np.exp(1j * t)
    vals = f(z)
    dphi = np.angle(vals[1:] / vals[:-1])
    return int(round(np.sum(dphi) / (2 * np.pi)))


def seed_grid(n_re, n_im, im_max, re_max=np.pi):
    """Cell-centred grid over ``[0, re_max] x [-im_max, im_max]``.

    Cell centres avoid the trivial points ``k = 0`` and ``k = pi / 2`` exactly.
    """
    re = (np.arange(n_re) + 0.5) / n_re * re_max
    im = (np.arange(n_im) + 0.5) / n_im * 2 * im_max - im_max
    R, I = np.meshgrid(re, im, indexing="ij")
    return (R + 1j * I).ravel()


def group(points, tol, period=np.pi):
    """Single-linkage groups of strip points closer than ``tol``.

    Each group is returned unwrapped next to its first member so that its
    mean is meaningful across the periodic seam.
    """
    points = list(np.asarray(points, dtype=complex).ravel())
    groups = []
    while points:
        members = [points.pop(0)]
        grew = True
        while grew:
            grew = False
            for q in list(points):
                if np.min(strip_distance(np.array(members), q, period)) <= tol:
                    points.remove(q)
                    shift = period * np.round((members[0].real - q.real) / period)
                    members.append(q + shift)
                    grew = True
        groups.append(np.array(members))
    return groups


def roots_with_multiplicity(f, candidates, merge_tol=1e-4, period=np.pi):
    """Turn converged Newton iterates into a root list counted with multiplicity.

    Iterates near a multiple root scatter by ``eps**(1/m)``; they are merged
    and the multiplicity is read off the argument principle around the group.
    Groups whose zero count matches their size are kept as distinct roots.
    """
    reps = dedupe(candidates, 1e-9, period)
    groups = group(reps, merge_tol, period)
    centers = np.array([g.mean() for g in groups])
    roots = []
    for i, members in enumerate(groups):
        c = centers[i]
        spread = float(np.max(np.abs(members - c)))
        others = np.delete(centers, i)
        room = 0.4 * float(np.min(strip_distance(others, c, period))) if len(others) else 1.0
        radius = min(max(10 * spread, 1e-4), room)
        m = zero_count(f, c, radius, n=256)
        if m == len(members):
            roots.extend(members)
        elif m > 0:
            roots.extend([c] * m)
    return fold(np.array(roots, dtype=complex), period)
