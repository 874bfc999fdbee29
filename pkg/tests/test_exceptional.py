import numpy as np
import pytest

from conftest import ep_polynomial_oracle, nearest_distance
from xyep.errors import EpCensusError
from xyep.exceptional import (
    EpRecord,
    ep_k_residual,
    find_eps,
    gap_at,
    gap_landscape,
    null_space_overlap,
    verify_ep,
    verify_hamiltonian_level,
    verify_matrix_level,
    verify_trivial_point,
)

# frozen from the polynomial oracle (numpy.roots, independent of the Newton solver)
L6_EPS = np.array([
    -0.7757019803849249 - 1.4922176658829285j,
    -0.7757019803849249 + 1.4922176658829285j,
    -0.2742520652550074 - 0.5275786152760904j,
    -0.2742520652550074 + 0.5275786152760904j,
    0.27425206525500745 - 0.5275786152760903j,
    0.27425206525500745 + 0.5275786152760903j,
    0.7757019803849252 - 1.4922176658829285j,
    0.7757019803849252 + 1.4922176658829285j,
])


def lambdas(L):
    return np.array([r.lambda_ep for r in find_eps(L)])


@pytest.mark.parametrize("k", [0.0, np.pi / 2])
def test_trivial_roots_of_ep_equation(k):
    assert abs(ep_k_residual(k, 4)) < 1e-12


def test_residual_zero_at_found_momenta():
    for r in find_eps(8, verify=False):
        assert abs(ep_k_residual(r.k_ep, 8)) < 1e-12 * 8


def test_l4_golden_values():
    lam = lambdas(4)
    assert nearest_distance([0.5j, -0.5j, 2j, -2j], lam) < 1e-12
    assert len(lam) == 4


def test_l6_frozen_values():
    assert nearest_distance(L6_EPS, lambdas(6)) < 1e-12
    assert nearest_distance(lambdas(6), L6_EPS) < 1e-12


@pytest.mark.parametrize("L", [4, 6, 8, 10, 12, 14, 16])
def test_census_against_polynomial_oracle(L):
    lam = lambdas(L)
    oracle = ep_polynomial_oracle(L)
    assert len(lam) == len(oracle) == 2 * L - 4
    assert nearest_distance(lam, oracle) < 1e-10
    assert nearest_distance(oracle, lam) < 1e-10


@pytest.mark.parametrize("L", [4, 8, 14])
def test_reciprocal_and_conjugation_closed(L):
    lam = lambdas(L)
    assert nearest_distance(1 / lam, lam) < 1e-8
    assert nearest_distance(lam.conj(), lam) < 1e-8


@pytest.mark.parametrize("L", [6, 10, 16, 32, 64])
def test_ring_split(L):
    recs = find_eps(L, verify=False)
    inner = [r for r in recs if abs(r.lambda_ep) < 1]
    assert len(inner) == L - 2
    assert all(r.ring == "inner" for r in inner)
    # the plus branch always sits on the outer ring
    assert all((r.branch == "plus") == (r.ring == "outer") for r in recs)


@pytest.mark.parametrize("L", [3, 5, 2, 66])
def test_find_eps_rejects_bad_L(L):
    with pytest.raises(ValueError):
        find_eps(L)


def test_record_validates_ring():
    with pytest.raises(ValueError):
        EpRecord(0.7, 2j, "plus", "inner")


def test_records_sorted_deterministically():
    a = [(r.lambda_ep, r.branch) for r in find_eps(10)]
    b = [(r.lambda_ep, r.branch) for r in find_eps(10)]
    assert a == b
    re = [round(z.real, 10) for z, _ in a]
    assert re == sorted(re)


def test_census_error_carries_records():
    err = EpCensusError("mismatch", [1, 2])
    assert err.records == [1, 2]


@pytest.mark.parametrize("L", [4, 6, pytest.param(8, marks=pytest.mark.slow)])
def test_all_eps_verify_both_levels(L):
    for r in find_eps(L):
        v = verify_ep(r, L, 1e-6)
        assert v.matrix_passed, (r.lambda_ep, v.quasi_gap, v.matrix_overlap)
        assert v.hamiltonian_passed, (r.lambda_ep, v.hamiltonian)


@pytest.mark.parametrize("L", [12, 20, 32])
def test_matrix_level_for_larger_L(L):
    for r in find_eps(L):
        assert r.quasi_gap < 1e-6 and r.lr_overlap < 1e-6


def test_l4_hamiltonian_jordan_structure():
    h = verify_hamiltonian_level(2j, 4)
    assert h.coalescing == h.targets_checked == 4
    assert h.max_centroid_error < 1e-12
    assert h.max_overlap < 1e-6


def test_near_ep_is_not_an_ep():
    v = verify_ep(1.9j, 4)
    assert not v.passed
    assert v.quasi_gap > 0.1
    assert v.matrix_overlap > 0.1


def test_null_space_overlap_semisimple_vs_defective():
    assert null_space_overlap(np.zeros((2, 2)))[0] == pytest.approx(1.0)
    jordan = np.array([[0, 1], [0, 0]], dtype=complex)
    assert null_space_overlap(jordan)[0] < 1e-12


@pytest.mark.parametrize("L", [4, 6])
@pytest.mark.parametrize("sign", [1, -1])
def test_trivial_points_are_not_eps(L, sign):
    rep = verify_trivial_point(L, sign)
    assert rep.degeneracy_detected
    assert rep.min_matrix_overlap > 0.1
    assert rep.min_hamiltonian_overlap > 0.1
    assert abs(rep.lam - sign * (L + 2) / L) < 1e-15


@pytest.mark.parametrize("L", [4, 6, 8])
def test_gap_landscape_zeros_are_the_eps(L):
    land = gap_landscape(L)
    found = land.ep_minima()
    assert len(found) == 2 * L - 4
    assert nearest_distance(found, lambdas(L)) < 1e-10


def test_gap_landscape_measures():
    a = gap_landscape(4, n_re=21, n_im=21)
    b = gap_landscape(4, n_re=21, n_im=21, measure="min_pair")
    assert np.all(b.gap <= a.gap + 1e-12)
    with pytest.raises(ValueError):
        gap_landscape(4, n_re=21, n_im=21, measure="median")


def test_gap_vanishes_on_the_ep_only():
    assert gap_at(4, 2j) < 1e-6
    assert gap_at(4, 2j + 0.01) > 1e-2


def test_real_axis_has_no_ep():
    # Hermitian for real lam: no landscape zero off the special points
    for lam in np.linspace(-3, 3, 61):
        if min(abs(abs(lam) - 1), abs(abs(lam) - 1.5), abs(abs(lam) - 2 / 3), abs(lam)) < 1e-9:
            continue
        assert verify_matrix_level(lam, 4).overlap > 1e-3


def test_gap_grid_limit():
    with pytest.raises(ValueError):
        gap_landscape(4, n_re=4096, n_im=4096)


@pytest.mark.parametrize("L", [4, 6])
def test_real_axis_gap_zeros(L):
    x = np.linspace(-3, 3, 6001)
    g = gap_landscape(L, (-3, 3), (-0.001, 0.001), 6001, 3, measure="min_pair").gap[1]
    zeros = [x[i] for i in range(1, len(x) - 1) if g[i] < 1e-9]
    assert np.allclose(zeros, [-1, 0, 1], atol=1e-12)
    # the trivial points keep a finite matrix-level gap
    for lam in ((L + 2) / L, -(L + 2) / L):
        assert gap_at(L, lam, "min_pair") > 1e-3
