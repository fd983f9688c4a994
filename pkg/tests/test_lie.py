"""Structure layer: basis, Killing form, root decomposition, Casimirs."""
import numpy as np
import pytest

from fuchsian_amplitudes.errors import NonGenericElement
from fuchsian_amplitudes.lie import (
    build_sl,
    casimir_ad_invariance_defect,
    casimir_tensor,
    killing,
    root_decomposition,
)


def _random_traceless(rng, N):
    X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    return X - np.trace(X) / N * np.eye(N)


def _adjoint_matrix_explicit(alg, E):
    # independent oracle: column a of ad_E holds the coordinates of [E, e_a],
    # coordinates solved per column by least squares against the flat basis
    cols = []
    flat = alg.basis.reshape(alg.dim, -1).T
    for e in alg.basis:
        br = (E @ e - e @ E).reshape(-1)
        c, *_ = np.linalg.lstsq(flat, br, rcond=None)
        cols.append(c)
    return np.stack(cols, axis=1)


@pytest.mark.parametrize("N,dim", [(2, 3), (3, 8), (4, 15), (5, 24)])
def test_build_sl_dimensions(N, dim):
    alg = build_sl(N)
    assert alg.dim == dim
    assert alg.basis.shape == (dim, N, N)
    for e in alg.basis:
        assert abs(np.trace(e)) < 1e-12


@pytest.mark.parametrize("N", [0, 1, 6])
def test_build_sl_range(N):
    with pytest.raises(ValueError):
        build_sl(N)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_dual_basis_pairing(N):
    alg = build_sl(N)
    for a in range(alg.dim):
        for b in range(alg.dim):
            got = killing(alg.basis[a], alg.dual[b])
            want = 1.0 if a == b else 0.0
            assert abs(got - want) < 1e-10


@pytest.mark.parametrize("N", [2, 3])
def test_dual_reconstruction(N):
    alg = build_sl(N)
    for a in range(alg.dim):
        rec = sum(killing(alg.basis[a], alg.dual[b]) * alg.basis[b]
                  for b in range(alg.dim))
        assert np.abs(rec - alg.basis[a]).max() < 1e-10


def test_killing_sl2_cartan_square():
    # ad_H on sl_2 has spectrum {2, 0, -2}, so Tr(ad_H^2) = 8
    H = np.diag([1.0, -1.0]).astype(complex)
    assert abs(killing(H, H) - 8.0) < 1e-12


def test_killing_zero():
    F = np.array([[0, 1], [0, 0]], dtype=complex)
    assert killing(np.zeros((2, 2), dtype=complex), F) == 0


def test_killing_rejects_trace():
    with pytest.raises(ValueError):
        killing(np.eye(2, dtype=complex), np.eye(2, dtype=complex))


@pytest.mark.parametrize("N", [2, 3, 4])
def test_killing_matches_explicit_adjoint(N):
    rng = np.random.default_rng(11 + N)
    alg = build_sl(N)
    for _ in range(4):
        E = _random_traceless(rng, N)
        F = _random_traceless(rng, N)
        adE = _adjoint_matrix_explicit(alg, E)
        adF = _adjoint_matrix_explicit(alg, F)
        want = np.trace(adE @ adF)
        assert abs(killing(E, F) - want) < 1e-9 * max(1.0, abs(want))


@pytest.mark.parametrize("N", [2, 3])
def test_killing_ad_invariance(N):
    rng = np.random.default_rng(7)
    for _ in range(6):
        E, F, G = (_random_traceless(rng, N) for _ in range(3))
        lhs = killing(E @ F - F @ E, G)
        rhs = -killing(F, E @ G - G @ E)
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


@pytest.mark.parametrize("N", [2, 3, 4])
def test_jacobi_identity(N):
    alg = build_sl(N)
    f = alg.structure
    # sum over cyclic permutations of f_{ab}^x f_{xc}^d
    t = np.einsum("abx,xcd->abcd", f, f)
    total = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
    assert np.abs(total).max() < 1e-12


@pytest.mark.parametrize("N", [2, 3])
def test_adjoint_matrix_consistency(N):
    rng = np.random.default_rng(23)
    alg = build_sl(N)
    E = _random_traceless(rng, N)
    got = alg.adjoint_matrix(E)
    want = _adjoint_matrix_explicit(alg, E)
    assert np.abs(got - want).max() < 1e-10


def test_root_decomposition_sl2():
    cd = root_decomposition(np.diag([0.7, -0.7]).astype(complex))
    assert cd.rank == 1
    vals = sorted(r.real for r, _ in cd.roots)
    assert np.allclose(vals, [-1.4, 1.4], atol=1e-12)
    for r, v in cd.roots:
        E = cd.pivot
        defect = np.abs((E @ v - v @ E) - r * v).max()
        assert defect < 1e-9


@pytest.mark.parametrize("N", [2, 3])
def test_root_values_come_in_pairs(N):
    rng = np.random.default_rng(5 + N)
    cd = root_decomposition(_random_traceless(rng, N))
    vals = [r for r, _ in cd.roots]
    assert len(vals) + cd.rank == N * N - 1
    for r in vals:
        assert min(abs(r + s) for s in vals) < 1e-9


def test_root_decomposition_commuting_element():
    E = np.diag([0.7, -0.7]).astype(complex)
    cd = root_decomposition(E)
    F = np.diag([2.0 + 1j, -2.0 - 1j])
    F_h, comps = cd.decompose(F)
    assert np.abs(F_h - F).max() < 1e-12
    for m in comps.values():
        assert np.abs(m).max() < 1e-12


def test_root_decomposition_reconstruction_and_idempotency():
    rng = np.random.default_rng(3)
    cd = root_decomposition(_random_traceless(rng, 3))
    F = _random_traceless(rng, 3)
    F_h, comps = cd.decompose(F)
    rec = F_h + sum(comps.values())
    assert np.abs(rec - F).max() < 1e-9
    F_h2, comps2 = cd.decompose(F_h)
    assert np.abs(F_h2 - F_h).max() < 1e-10
    for m in comps2.values():
        assert np.abs(m).max() < 1e-10


def test_root_decomposition_rejects_nilpotent():
    E = np.array([[0, 1], [0, 0]], dtype=complex)
    with pytest.raises(NonGenericElement):
        root_decomposition(E)


def test_root_decomposition_rejects_equal_spacing():
    # equally spaced eigenvalues make two ad-eigenvalues collide
    E = np.diag([1.0, 0.0, -1.0]).astype(complex)
    with pytest.raises(NonGenericElement):
        root_decomposition(E)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_casimir_degree2_is_inverse_gram(N):
    alg = build_sl(N)
    c2 = casimir_tensor(alg, 2)
    assert np.abs(c2.coeffs - alg.gram_inv).max() < 1e-14
    assert casimir_ad_invariance_defect(alg, c2) < 1e-10


def test_casimir_degree2_contraction_is_scalar():
    # sum_a e_a e^a acts as (N^2-1)/(2 N^2) Id in the fundamental
    for N in (2, 3):
        alg = build_sl(N)
        op = np.einsum("ab,aij,bjk->ik", alg.gram_inv, alg.basis, alg.basis)
        want = (N * N - 1) / (2.0 * N * N) * np.eye(N)
        assert np.abs(op - want).max() < 1e-12


def test_casimir_degree3_sl2_vanishes():
    with pytest.raises(ValueError):
        casimir_tensor(build_sl(2), 3)


@pytest.mark.parametrize("N", [3, 4])
def test_casimir_degree3_ad_invariance(N):
    alg = build_sl(N)
    c3 = casimir_tensor(alg, 3)
    assert np.abs(c3.coeffs).max() > 1e-8
    assert casimir_ad_invariance_defect(alg, c3) < 1e-10


def test_casimir_unsupported_degree():
    with pytest.raises(ValueError):
        casimir_tensor(build_sl(3), 4)
