"""Acceptance criteria, one pass/fail line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import contextlib
import io
import time

import mpmath
import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, nearest_distance
from xyep import serialize
from xyep.cli import run
from xyep.exceptional import find_eps, verify_hamiltonian_level, verify_matrix_level, verify_trivial_point
from xyep.asymptotics import convergence_report
from xyep.model import (
    NEAR_DEGENERATE_TOL,
    ModelParams,
    assemble_spectrum,
    cluster_centroids,
    exact_diagonalization,
    hamiltonian_matrix,
    quasi_energies_matrix,
    spectra_match,
)
from xyep.pt import on_axis_eps, pt_spectrum_check
from xyep.quasimomentum import crosscheck_routes
from xyep.topology import BOUNDARY_BAND, phase_diagram, winding_number

SEED = 20240611


def report(n, ok, title, detail):
    line = f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def random_lambdas(rng, n, r_max=3.0):
    r = r_max * np.sqrt(rng.uniform(0, 1, n))
    return r * np.exp(2j * np.pi * rng.uniform(0, 1, n))


def cli_bytes(argv):
    buf = io.BytesIO()

    class Out:
        buffer = buf

        def flush(self):
            pass

    with contextlib.redirect_stdout(Out()):
        code = run(argv)
    return code, buf.getvalue()


def test_criterion_01_l4_golden_values():
    run(["eps", "--L", "4"])  # warm caches outside the timed region
    t0 = time.perf_counter()
    code, out = cli_bytes(["eps", "--L", "4"])
    dt = time.perf_counter() - t0
    lam = [r["lambda_ep"] for r in serialize.loads_json(out)["data"]["records"]]
    target = [0.5j, -0.5j, 2j, -2j]
    err = max(nearest_distance(target, lam), nearest_distance(lam, target))
    ok = code == 0 and len(lam) == 4 and err < 1e-8 and dt < 1.0
    report(1, ok, "eps --L 4 = {+-0.5i, +-2i}", f"{len(lam)} records, max error {err:.1e}, {dt:.2f} s")


def test_criterion_02_ep_census():
    t0 = time.perf_counter()
    details, ok = [], True
    for L in (4, 6, 8, 10, 12, 14, 16):
        lam = np.array([r.lambda_ep for r in find_eps(L)])
        inner = int(np.sum(np.abs(lam) < 1))
        recip = nearest_distance(1 / lam, lam)
        conj = nearest_distance(lam.conj(), lam)
        good = len(lam) == 2 * L - 4 and inner == L - 2 and len(lam) - inner == L - 2 and recip < 1e-8 and conj < 1e-8
        ok &= good
        details.append(f"L={L}:{len(lam)}({inner}/{len(lam) - inner})")
    dt = time.perf_counter() - t0
    ok &= dt < 30
    report(2, ok, "census 2L-4, rings L-2/L-2, closed under 1/lam and conj", " ".join(details) + f", {dt:.1f} s")


def test_criterion_03_ep_character_l4():
    p = ModelParams(4, 2j)
    targets = [1, -1, 15**0.5 * 1j, -(15**0.5) * 1j]
    # double precision: a defective pair splits by ~sqrt(eps); its centroid does not
    ed = exact_diagonalization(p).energies
    raw = max(np.min(np.abs(ed - t)) for t in targets)
    cents, sizes = cluster_centroids(ed, NEAR_DEGENERATE_TOL)
    cen = max(np.min(np.abs(cents - t)) for t in targets)
    # 40-digit ED: the same eigenvalues with no clustering at all
    mpmath.mp.dps = 40
    hp = np.array([complex(e) for e in mpmath.eig(mpmath.matrix(hamiltonian_matrix(p).tolist()), left=False,
                                                  right=False)])
    hp_err = max(np.min(np.abs(hp - t)) for t in targets)
    h = verify_hamiltonian_level(2j, 4)
    m = verify_matrix_level(2j, 4)
    ok = cen < 1e-8 and hp_err < 1e-8 and h.max_overlap < 1e-6 and m.overlap < 1e-6 and h.coalescing == h.targets_checked
    report(3, ok, "lam=2i, L=4: ED has +-1, +-sqrt(15)i, overlap < 1e-6",
           f"centroid err {cen:.1e} (raw double {raw:.1e}), 40-digit ED err {hp_err:.1e}, "
           f"Hamiltonian overlap {h.max_overlap:.1e}, C^T C overlap {m.overlap:.1e}")


def test_criterion_04_oracle_equivalence():
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    worst, fails = 0.0, 0
    for L in (2, 4, 6, 8):
        for lam in random_lambdas(rng, 20):
            p = ModelParams(L, lam)
            m = spectra_match(assemble_spectrum(quasi_energies_matrix(p)), exact_diagonalization(p), 1e-8)
            worst = max(worst, m.max_distance)
            fails += not m.matched
    dt = time.perf_counter() - t0
    report(4, fails == 0 and dt < 60, "free fermion = ED, 4 L x 20 random lam",
           f"{80 - fails}/80 matched, worst {worst:.1e}, {dt:.1f} s")


def test_criterion_05_route_crosscheck():
    rng = np.random.default_rng(SEED + 1)
    worst, fails = 0.0, 0
    for L in (4, 6, 8):
        for lam in random_lambdas(rng, 10):
            r = crosscheck_routes(ModelParams(L, lam), 1e-8)
            worst = max(worst, r.max_distance)
            fails += not r.passed
    report(5, fails == 0, "quasi-momentum route = matrix route, 3 L x 10 random lam",
           f"{30 - fails}/30 passed, worst {worst:.1e}")


def test_criterion_06_trivial_points():
    details, ok = [], True
    for L in (4, 6):
        for sign in (1, -1):
            r = verify_trivial_point(L, sign)
            ok &= r.degeneracy_detected and r.min_matrix_overlap > 0.1
            details.append(f"lam={r.lam.real:+.4f}: degenerate={r.degeneracy_detected}, overlap={r.min_matrix_overlap:.3f}")
    report(6, ok, "trivial points +-(L+2)/L are not EPs", "; ".join(details))


def test_criterion_07_ring_convergence():
    t0 = time.perf_counter()
    reps = [convergence_report(L) for L in (8, 16, 32)]
    dt = time.perf_counter() - t0
    inner = [r.inner_max_dev for r in reps]
    outer = [r.outer_max_dev for r in reps]
    ok = inner[0] > inner[1] > inner[2] and outer[0] > outer[1] > outer[2]
    ok &= all(r.two_sided for r in reps) and dt < 300
    report(7, ok, "ring deviations decrease over L = 8, 16, 32, two-sided",
           f"inner {[round(x, 4) for x in inner]}, outer {[round(x, 4) for x in outer]}, {dt:.1f} s")


def test_criterion_08_pt_axis():
    worst = max(pt_spectrum_check(L, li, 1e-9).conjugation_defect
                for L in (4, 6, 8) for li in (0.3, 0.7, 1.5, 2.5))
    counts = {L: len(on_axis_eps(L)) for L in (4, 6, 8, 10, 12)}
    ok = worst < 1e-9 and counts == {4: 4, 6: 0, 8: 4, 10: 0, 12: 4}
    report(8, ok, "PT conjugation defect < 1e-9, on-axis EP counts", f"worst defect {worst:.1e}, counts {counts}")


def test_criterion_09_phase_diagram():
    rng = np.random.default_rng(SEED + 2)
    t0 = time.perf_counter()
    phi = rng.uniform(0, 2 * np.pi, 400)
    r_in, r_out = rng.uniform(0.1, 0.95, 200), rng.uniform(1.05, 3.0, 200)
    w_in = [winding_number(r * np.exp(1j * f), 256).w for r, f in zip(r_in, phi[:200])]
    w_out = [winding_number(r * np.exp(1j * f), 256).w for r, f in zip(r_out, phi[200:])]
    d = phase_diagram(n_re=101, n_im=101, n_k=256)
    X, Y = np.meshgrid(d.re, d.im)
    flagged = np.abs(np.abs(X + 1j * Y)[d.boundary] - 1)
    dt = time.perf_counter() - t0
    ok = all(w == 1 for w in w_in) and all(w == -1 for w in w_out)
    ok &= bool(np.all(flagged < BOUNDARY_BAND)) and dt < 60
    report(9, ok, "w=+1 inside, w=-1 outside, boundary flags only in the band",
           f"{w_in.count(1)}/200 inside, {w_out.count(-1)}/200 outside, {len(flagged)} flagged cells "
           f"(max ||lam|-1| {flagged.max() if len(flagged) else 0:.1e}), {dt:.1f} s")


DETERMINISM_RUNS = [
    ["quasi", "--L", "6", "--lambda", "0.3,1.2"],
    ["spectrum", "--L", "6", "--lambda", "0,2", "--compare-ed"],
    ["eps", "--L", "8"],
    ["rings", "--L", "8,16,32"],
    ["gap", "--L", "6", "--res", "101"],
    ["pt", "--L", "8", "--sweep", "0.1:3:30"],
    ["phase", "--grid", "-1.5,1.5,-1.5,1.5", "--res", "101"],
    ["verify", "--L", "4"],
]


def test_criterion_10_determinism():
    same, total, codes = 0, 0, set()
    for argv in DETERMINISM_RUNS:
        for fmt in ("json", "csv", "svg"):
            c1, a = cli_bytes(argv + ["--format", fmt])
            c2, b = cli_bytes(argv + ["--format", fmt])
            codes |= {c1, c2}
            total += 1
            same += a == b and len(a) > 0
    ok = same == total and codes == {0}
    report(10, ok, "byte-identical repeated runs, every subcommand x json/csv/svg", f"{same}/{total} identical")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
