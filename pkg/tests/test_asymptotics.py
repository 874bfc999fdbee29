import numpy as np
import pytest

from xyep.asymptotics import convergence_report, fit_rate, roots_of_unity_prediction
from xyep.exceptional import find_eps


@pytest.fixture(scope="module")
def reports():
    return {L: convergence_report(L) for L in (8, 16, 32)}


def test_prediction_l4():
    assert np.allclose(sorted(roots_of_unity_prediction(4), key=lambda z: z.imag), [-1j, 1j])


def test_prediction_l6():
    pred = roots_of_unity_prediction(6)
    expected = [np.exp(1j * s * np.pi / 3) for s in (1, 2, -1, -2)]
    assert all(min(abs(p - e) for p in pred) < 1e-14 for e in expected)


@pytest.mark.parametrize("L", [4, 8, 16, 32])
def test_prediction_count_matches_ring_size(L):
    pred = roots_of_unity_prediction(L)
    assert len(pred) == L - 2
    assert all(abs(abs(z) - 1) < 1e-14 for z in pred)
    assert all(abs(z - 1) > 1e-9 and abs(z + 1) > 1e-9 for z in pred)
    assert (L % 8 != 0) or any(abs(z - 1j) < 1e-14 for z in pred)


@pytest.mark.parametrize("L", [3, 2])
def test_prediction_rejects_bad_L(L):
    with pytest.raises(ValueError):
        roots_of_unity_prediction(L)


def test_l4_deviations():
    r = convergence_report(4)
    assert r.inner_max_dev == pytest.approx(0.5, abs=1e-12)
    assert r.outer_max_dev == pytest.approx(1.0, abs=1e-12)


def test_monotone_two_sided_convergence(reports):
    inner = [reports[L].inner_max_dev for L in (8, 16, 32)]
    outer = [reports[L].outer_max_dev for L in (8, 16, 32)]
    assert inner[0] > inner[1] > inner[2] > 0
    assert outer[0] > outer[1] > outer[2] > 0
    assert all(r.two_sided for r in reports.values())


def test_l32_angle_errors(reports):
    r = reports[32]
    assert max(r.angle_errors) < 2 * np.pi / 32
    assert r.unmatched == 0


def test_every_prediction_hit_once_per_ring(reports):
    r = reports[16]
    for ring in ("inner", "outer"):
        angles = [a for a, g in zip(r.predicted_angles, r.rings) if g == ring]
        assert len(set(np.round(angles, 12))) == 14


def test_fit_rate_is_negative(reports):
    rates = fit_rate(list(reports.values()))
    assert rates["inner_max_dev"] < 0 and rates["outer_max_dev"] < 0


def test_report_uses_given_records():
    recs = find_eps(8)
    assert convergence_report(8, recs).lambdas == [r.lambda_ep for r in recs]
