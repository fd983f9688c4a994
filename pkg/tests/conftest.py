"""Shared system factories for the test suite."""
import numpy as np
import pytest

from fuchsian_amplitudes.lie import build_sl
from fuchsian_amplitudes.system import FuchsianSystem, make_system


def _random_traceless(rng, N, scale=1.0):
    X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    X = X - np.trace(X) / N * np.eye(N)
    return scale * X


def two_pole_sl2(a=0.3 + 0.1j, z1=0.0, z2=1.0):
    """Closed-form system: A1 = diag(a,-a) at z1, A2 = -A1 at z2.

    The residues commute, so Psi(x) = exp(A1 [L(x) - L(x0)]) with
    L(x) = log(x - z1) - log(x - z2) tracked continuously.
    """
    A1 = np.diag([a, -a]).astype(complex)
    return make_system(2, [z1, z2], [A1, -A1])


def random_sl2_three(seed=42, scale=0.22):
    """Generic three-puncture sl_2 system, residue scale small enough that
    all local exponents stay well inside the non-resonant strip."""
    rng = np.random.default_rng(seed)
    z = np.array([0.0 + 0.0j, 1.0 + 0.0j, 0.4 + 0.9j])
    A1 = _random_traceless(rng, 2, scale)
    A2 = _random_traceless(rng, 2, scale)
    return make_system(2, z, [A1, A2, -(A1 + A2)])


def random_sl3_three(seed=7, scale=0.15):
    rng = np.random.default_rng(seed)
    z = np.array([0.0 + 0.0j, 1.0 + 0.0j, 0.3 + 1.1j])
    A1 = _random_traceless(rng, 3, scale)
    A2 = _random_traceless(rng, 3, scale)
    return make_system(3, z, [A1, A2, -(A1 + A2)])


def random_sl2_four(seed=19, scale=0.2):
    rng = np.random.default_rng(seed)
    z = np.array([0.0 + 0.0j, 1.0 + 0.0j, 0.5 + 1.0j, -0.6 + 0.7j])
    A = [_random_traceless(rng, 2, scale) for _ in range(3)]
    A.append(-(A[0] + A[1] + A[2]))
    return make_system(2, z, A)


@pytest.fixture(scope="session")
def sl2():
    return build_sl(2)


@pytest.fixture(scope="session")
def sl3():
    return build_sl(3)


@pytest.fixture(scope="session")
def twopole():
    return two_pole_sl2()


@pytest.fixture(scope="session")
def sys3():
    return random_sl2_three()


@pytest.fixture(scope="session")
def sys3_sl3():
    return random_sl3_three()


@pytest.fixture(scope="session")
def sys4():
    return random_sl2_four()
