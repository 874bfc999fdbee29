import numpy as np
import pytest

ACCEPTANCE_LINES = []


def ep_polynomial_oracle(L):
    """EPs from the roots of w^(2L+2) - (L+1) w^(L+2) + (L+1) w^L - 1, w = exp(2ik).

    Independent of the Newton solver: numpy companion-matrix roots, the
    triple roots at w = +-1 dropped, both branches mu and 1/mu kept.
    """
    n = 2 * L + 2
    c = np.zeros(n + 1)
    c[0], c[-1] = 1.0, -1.0
    c[n - (L + 2)] -= L + 1
    c[n - L] += L + 1
    w = np.roots(c)
    w = w[(np.abs(w - 1) > 1e-3) & (np.abs(w + 1) > 1e-3)]
    k = np.log(w) / 2j
    mu = -np.sin((L + 2) * k) / np.sin(L * k)
    out = []
    for v in np.concatenate([mu, 1 / mu]):
        if all(abs(v - u) > 1e-6 for u in out):
            out.append(complex(v))
    return np.array(out)


def nearest_distance(a, b):
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    return float(np.max(np.min(np.abs(a[:, None] - b[None, :]), axis=1)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
