"""Large-L limit of the EP rings.

As ``L`` grows both rings close in on the unit circle at the L-th roots of
unity, with ``+1`` and ``-1`` missing (they belong to the trivial momenta).
The inner ring approaches from inside and the outer one from outside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from xyep.exceptional import find_eps


def roots_of_unity_prediction(L) -> list:
    """``exp(2 pi i j / L)`` for ``j = 1 .. L-1``, ``j != L/2``."""
    if L % 2 or L < 4:
        raise ValueError(f"need even L >= 4, got {L}")
    return [complex(np.exp(2j * np.pi * j / L)) for j in range(1, L) if 2 * j != L]


def _angle_distance(a, b):
    d = abs(a - b) % (2 * np.pi)
    return min(d, 2 * np.pi - d)


@dataclass
class RingConvergenceReport:
    L: int
    inner_max_dev: float
    outer_max_dev: float
    predicted_angles: list
    angle_errors: list
    lambdas: list = field(default_factory=list)
    rings: list = field(default_factory=list)
    branches: list = field(default_factory=list)
    unmatched: int = 0
    two_sided: bool = True


def convergence_report(L, records=None) -> RingConvergenceReport:
    """Match each EP to its nearest predicted root of unity by angle.

    EPs further than ``pi / L`` in angle from every prediction are counted in
    ``unmatched``; ``two_sided`` is false if any inner-ring EP has
    ``|lam| >= 1`` or any outer-ring EP ``|lam| <= 1``.
    """
    if records is None:
        records = find_eps(L)
    pred = np.angle(roots_of_unity_prediction(L))
    inner = [abs(r.lambda_ep) for r in records if r.ring == "inner"]
    outer = [abs(r.lambda_ep) for r in records if r.ring == "outer"]
    matched, errors, unmatched = [], [], 0
    for r in records:
        phi = np.angle(r.lambda_ep)
        dist = [_angle_distance(phi, p) for p in pred]
        j = int(np.argmin(dist))
        matched.append(float(pred[j]))
        errors.append(float(dist[j]))
        unmatched += dist[j] > np.pi / L
    return RingConvergenceReport(
        L=L,
        inner_max_dev=max(1 - x for x in inner) if inner else math.nan,
        outer_max_dev=max(x - 1 for x in outer) if outer else math.nan,
        predicted_angles=matched,
        angle_errors=errors,
        lambdas=[r.lambda_ep for r in records],
        rings=[r.ring for r in records],
        branches=[r.branch for r in records],
        unmatched=int(unmatched),
        two_sided=all(x < 1 for x in inner) and all(x > 1 for x in outer),
    )


def fit_rate(reports) -> dict:
    """Log-log slope of the radial deviation against L, per ring.

    Purely descriptive; no rate is asserted anywhere.
    """
    Ls = np.log([r.L for r in reports])
    out = {}
    for name in ("inner_max_dev", "outer_max_dev"):
        y = np.log([getattr(r, name) for r in reports])
        out[name] = float(np.polyfit(Ls, y, 1)[0]) if len(reports) > 1 else math.nan
    return out
