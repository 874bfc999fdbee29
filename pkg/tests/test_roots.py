import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from xyep.roots import dedupe, fold, newton, roots_with_multiplicity, seed_grid, strip_distance, zero_count


@given(st.floats(-50, 50), st.floats(-5, 5))
def test_fold_lands_on_strip(re, im):
    k = fold(complex(re, im))
    assert 0 <= k.real < np.pi + 1e-12 and k.imag == im


def test_strip_distance_is_periodic():
    assert strip_distance(0.01, np.pi - 0.01) < 0.03


def test_dedupe():
    r = dedupe(np.array([0.5, 0.5 + 1e-12, 1.0, np.pi + 0.5]), 1e-9)
    assert len(r) == 2


def test_newton_on_sine():
    k, ok = newton(lambda z: np.tan(z), np.array([0.3 + 0.1j, 2.9 - 0.2j]))
    assert ok.all() and np.allclose(np.sin(k), 0, atol=1e-14)


def test_zero_count_argument_principle():
    f = lambda z: (z - 1) ** 3 * (z + 1)
    assert zero_count(f, 1.0, 0.5) == 3
    assert zero_count(f, 0.0, 2.0) == 4


def test_multiplicity_recovered_from_scattered_iterates():
    f = lambda z: (z - 1.0) ** 2 * (z - 2.0)
    cands = np.array([1 + 1e-7, 1 - 1e-7j, 2.0])
    roots = roots_with_multiplicity(f, cands)
    assert sorted(np.round(np.real(roots), 6)) == [1, 1, 2]


def test_seed_grid_shape():
    g = seed_grid(8, 4, 1.0)
    assert g.size == 32 and np.all(np.abs(g.imag) < 1.0) and np.all((0 < g.real) & (g.real < np.pi))
