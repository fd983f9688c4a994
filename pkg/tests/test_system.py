"""System validation, rational evaluation, JSON round-trip."""
import json

import numpy as np
import pytest

from fuchsian_amplitudes.errors import InvalidSystem, TooCloseToPuncture
from fuchsian_amplitudes.system import (
    FuchsianSystem,
    connection_at,
    connection_derivative_at,
    load_system,
    make_system,
    save_system,
    system_from_json,
    system_to_json,
    validate,
)
from fuchsian_amplitudes.lie import build_sl

from conftest import two_pole_sl2, random_sl2_three


def test_two_pole_validates():
    sys_ = two_pole_sl2()
    assert sys_.report.passed
    assert sys_.clearance == pytest.approx(1e-3)


def test_validation_fails_on_bad_residue_sum():
    alg = build_sl(2)
    A1 = np.diag([0.3, -0.3]).astype(complex)
    sys_ = FuchsianSystem(algebra=alg, punctures=np.array([0.0, 1.0]),
                          residues=np.array([A1, -0.5 * A1]))
    rep = validate(sys_)
    assert not rep.passed
    assert rep.defect("residue-sum") == pytest.approx(0.15)
    with pytest.raises(InvalidSystem):
        connection_at(sys_, 0.5)


def test_validation_fails_on_nilpotent_residue():
    alg = build_sl(2)
    A1 = np.array([[0, 1], [0, 0]], dtype=complex)
    sys_ = FuchsianSystem(algebra=alg, punctures=np.array([0.0, 1.0]),
                          residues=np.array([A1, -A1]))
    rep = validate(sys_)
    names = {n: ok for n, ok, _, _ in rep.checks}
    assert not names["genericity"]


def test_validation_fails_on_resonance():
    alg = build_sl(2)
    A1 = np.diag([0.5, -0.5]).astype(complex)   # eigenvalue difference 1
    sys_ = FuchsianSystem(algebra=alg, punctures=np.array([0.0, 1.0]),
                          residues=np.array([A1, -A1]))
    rep = validate(sys_)
    names = {n: ok for n, ok, _, _ in rep.checks}
    assert not names["non-resonance"]


def test_connection_at_midpoint_direct_sum():
    sys_ = two_pole_sl2(a=0.3 + 0.1j, z1=0.0, z2=1.0)
    x = 0.5
    # independent rational evaluation
    A1 = sys_.residues[0]
    want = A1 / (x - 0.0) + (-A1) / (x - 1.0)
    got = connection_at(sys_, x)
    assert np.abs(got - want).max() < 1e-15


def test_connection_decay_at_infinity():
    sys_ = two_pole_sl2()
    for R in (1e3, 1e4):
        n = np.abs(connection_at(sys_, R + 0.3j)).max()
        assert n < 5.0 / R**2


def test_connection_clearance():
    sys_ = two_pole_sl2()
    with pytest.raises(TooCloseToPuncture):
        connection_at(sys_, 0.0 + sys_.clearance / 2)


def test_connection_holomorphic():
    sys_ = random_sl2_three()
    rng = np.random.default_rng(2)
    h = 1e-6
    for _ in range(5):
        x = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        if min(abs(x - z) for z in sys_.punctures) < 10 * sys_.clearance:
            continue
        ddx = (connection_at(sys_, x + h) - connection_at(sys_, x - h)) / (2 * h)
        ddy = (connection_at(sys_, x + 1j * h) - connection_at(sys_, x - 1j * h)) / (2 * h)
        # Cauchy-Riemann: d/dy = i d/dx
        assert np.abs(ddy - 1j * ddx).max() < 1e-8 * max(1.0, np.abs(ddx).max())


def test_residue_extraction_richardson():
    sys_ = random_sl2_three()
    z0 = sys_.punctures[0]
    A0 = sys_.residues[0]
    # f(r) = (x - z0) A(x) at x = z0 + r u has expansion A0 + c1 r + c2 r^2 + ...
    u = np.exp(0.7j)
    f = lambda r: r * u * connection_at(sys_, z0 + r * u)
    r0 = 4e-3   # halving twice stays outside the clearance radius
    f1, f2, f4 = f(r0), f(r0 / 2), f(r0 / 4)
    g1 = 2.0 * f2 - f1           # kills the O(r) term
    g2 = 2.0 * f4 - f2
    rich = (4.0 * g2 - g1) / 3.0  # kills the O(r^2) term
    assert np.abs(rich - A0).max() < 1e-8


def test_connection_derivative():
    sys_ = two_pole_sl2()
    x = 0.3 + 0.2j
    h = 1e-6
    fd = (connection_at(sys_, x + h) - connection_at(sys_, x - h)) / (2 * h)
    got = connection_derivative_at(sys_, x, 1)
    assert np.abs(fd - got).max() < 1e-7
    assert np.abs(connection_derivative_at(sys_, x, 0) - connection_at(sys_, x)).max() == 0.0


def test_json_round_trip(tmp_path):
    sys_ = random_sl2_three()
    p = tmp_path / "system.json"
    save_system(sys_, p)
    loaded = load_system(p)
    assert np.abs(loaded.punctures - sys_.punctures).max() < 1e-15
    assert np.abs(loaded.residues - sys_.residues).max() < 1e-15
    assert loaded.clearance == pytest.approx(sys_.clearance)


def test_json_loader_rejects_mismatched_counts():
    data = system_to_json(two_pole_sl2())
    data["punctures"] = data["punctures"][:1]
    with pytest.raises(InvalidSystem):
        system_from_json(data)


def test_make_system_rejects_close_punctures():
    A1 = np.diag([0.3, -0.3]).astype(complex)
    with pytest.raises(InvalidSystem):
        make_system(2, [0.0, 1e-9], [A1, -A1], clearance=1e-3)
