"""Exact-structure layer for sl_N.

Basis, bracket, Killing form, dual basis, root decompositions relative to a
generic element, and Casimir tensors. Elements of the algebra are stored in
the fundamental N x N realization; the adjoint representation is only built
on demand for verification. The Killing form of sl_N equals 2N times the
fundamental trace form, and every pairing in this package uses that
normalization.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .errors import NonGenericElement

_TRACELESS_TOL = 1e-9


def _check_traceless(E: np.ndarray) -> None:
    t = abs(np.trace(E))
    scale = max(1.0, float(np.abs(E).max(initial=0.0)))
    if t > _TRACELESS_TOL * scale:
        raise ValueError(f"matrix is not traceless: |tr| = {t:.3e}")


def killing(E: np.ndarray, F: np.ndarray) -> complex:
    """Killing form <E, F> = Tr_adjoint(ad_E ad_F) = 2N Tr_fund(EF)."""
    E = np.asarray(E, dtype=complex)
    F = np.asarray(F, dtype=complex)
    _check_traceless(E)
    _check_traceless(F)
    N = E.shape[0]
    return complex(2 * N * np.trace(E @ F))


@dataclass(frozen=True)
class LieAlgebraBasis:
    """Ordered basis of sl_N with Killing-dual and structure constants."""

    N: int
    dim: int
    basis: np.ndarray        # (dim, N, N)
    dual: np.ndarray         # (dim, N, N), <e_a, e^b> = delta_a^b
    gram: np.ndarray         # (dim, dim) Killing Gram matrix
    gram_inv: np.ndarray
    structure: np.ndarray    # f_{ab}^c with [e_a, e_b] = sum_c f_{ab}^c e_c
    _coord_map: np.ndarray = field(repr=False)   # (dim, N*N) pseudo-inverse

    def coordinates(self, X: np.ndarray) -> np.ndarray:
        """Coordinates of a traceless matrix in this basis."""
        return self._coord_map @ np.asarray(X, dtype=complex).reshape(-1)

    def from_coordinates(self, c: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(c, dtype=complex), self.basis, axes=1)

    def adjoint_matrix(self, E: np.ndarray) -> np.ndarray:
        """Matrix of ad_E acting on coordinates (dim x dim)."""
        E = np.asarray(E, dtype=complex)
        cols = [self.coordinates(E @ e - e @ E) for e in self.basis]
        return np.stack(cols, axis=1)


def build_sl(N: int) -> LieAlgebraBasis:
    """Basis of sl_N, 2 <= N <= 5: elementary E_ij (row-major, i != j)
    followed by Cartan differences E_ii - E_{i+1,i+1}."""
    if not 2 <= N <= 5:
        raise ValueError(f"N = {N} out of supported range 2..5")
    mats = []
    for i in range(N):
        for j in range(N):
            if i != j:
                m = np.zeros((N, N), dtype=complex)
                m[i, j] = 1.0
                mats.append(m)
    for i in range(N - 1):
        m = np.zeros((N, N), dtype=complex)
        m[i, i] = 1.0
        m[i + 1, i + 1] = -1.0
        mats.append(m)
    basis = np.array(mats)
    dim = N * N - 1
    flat = basis.reshape(dim, N * N)
    # coords solve flat.T @ c = vec(X); exact for traceless X
    coord_map = np.linalg.pinv(flat.T)
    gram = 2 * N * np.einsum("aij,bji->ab", basis, basis)
    gram_inv = np.linalg.inv(gram)
    dual = np.tensordot(gram_inv, basis, axes=1)
    brackets = np.einsum("aij,bjk->abik", basis, basis)
    brackets = brackets - np.transpose(brackets, (1, 0, 2, 3))
    structure = np.einsum("abx,cx->abc", brackets.reshape(dim, dim, N * N),
                          coord_map)
    return LieAlgebraBasis(N=N, dim=dim, basis=basis, dual=dual, gram=gram,
                           gram_inv=gram_inv, structure=structure,
                           _coord_map=coord_map)


@dataclass(frozen=True)
class CartanData:
    """Eigen-decomposition of ad_E for a regular semisimple pivot E.

    The commutant of E is the Cartan subalgebra h; the root spaces are the
    one-dimensional nonzero ad-eigenspaces. decompose(F) splits any F into
    its h-component and root components in the pivot's eigenbasis.
    """

    pivot: np.ndarray
    eigenvalues: np.ndarray          # fundamental eigenvalues of the pivot
    P: np.ndarray                    # pivot = P diag(eigenvalues) P^{-1}
    Pinv: np.ndarray
    cartan_basis: tuple              # rank-many g-elements spanning h
    roots: tuple                     # ((r_value, root_space_basis), ...)
    root_pairs: tuple                # index pairs (i, k) matching roots

    @property
    def rank(self) -> int:
        return len(self.cartan_basis)

    def decompose(self, F: np.ndarray):
        """Split F = F_h + sum_r F_r; returns (F_h, {(i,k): F_r})."""
        Ft = self.Pinv @ np.asarray(F, dtype=complex) @ self.P
        diag = np.diag(np.diag(Ft))
        F_h = self.P @ diag @ self.Pinv
        comps = {}
        n = Ft.shape[0]
        for i in range(n):
            for k in range(n):
                if i != k:
                    m = np.zeros_like(Ft)
                    m[i, k] = Ft[i, k]
                    comps[(i, k)] = self.P @ m @ self.Pinv
        return F_h, comps

    def cartan_part(self, F: np.ndarray) -> np.ndarray:
        return self.decompose(F)[0]

    def root_value(self, pair) -> complex:
        i, k = pair
        return complex(self.eigenvalues[i] - self.eigenvalues[k])


def root_decomposition(E: np.ndarray, gap_tol: float = 1e-8) -> CartanData:
    """Root decomposition relative to a regular semisimple E.

    Raises NonGenericElement when the ad_E zero eigenspace is larger than
    the rank or two nonzero ad-eigenvalues collide within the relative gap
    tolerance. Both conditions are checked on the fundamental spectrum:
    ad-eigenvalues of sl_N are the pairwise differences lam_i - lam_k.
    """
    E = np.asarray(E, dtype=complex)
    _check_traceless(E)
    lam, P = np.linalg.eig(E)
    n = E.shape[0]
    scale = max(float(np.abs(lam).max()), 1e-300)
    for i in range(n):
        for k in range(i + 1, n):
            if abs(lam[i] - lam[k]) <= gap_tol * scale:
                raise NonGenericElement(
                    "pivot has (nearly) repeated eigenvalues; "
                    "ad zero-eigenspace exceeds the rank")
    diffs = {}
    for i in range(n):
        for k in range(n):
            if i != k:
                diffs[(i, k)] = lam[i] - lam[k]
    pairs = list(diffs)
    for a in range(len(pairs)):
        for b in range(a + 1, len(pairs)):
            if abs(diffs[pairs[a]] - diffs[pairs[b]]) <= gap_tol * scale:
                raise NonGenericElement(
                    "nonzero ad-eigenvalues collide within tolerance")
    Pinv = np.linalg.inv(P)
    cartan = []
    for i in range(n - 1):
        d = np.zeros((n, n), dtype=complex)
        d[i, i] = 1.0
        d[i + 1, i + 1] = -1.0
        cartan.append(P @ d @ Pinv)
    roots = []
    for (i, k), r in diffs.items():
        m = np.zeros((n, n), dtype=complex)
        m[i, k] = 1.0
        roots.append((complex(r), P @ m @ Pinv))
    return CartanData(pivot=E, eigenvalues=lam, P=P, Pinv=Pinv,
                      cartan_basis=tuple(cartan), roots=tuple(roots),
                      root_pairs=tuple(pairs))


@dataclass(frozen=True)
class CasimirTensor:
    """Invariant tensor C_i = sum c_{a1..ai} e_{a1} x ... x e_{ai}.

    Coefficients are taken against the primal basis, so the degree-2 tensor
    is the inverse Killing Gram matrix and C_2 = sum_a e_a x e^a.
    """

    degree: int
    coeffs: np.ndarray


def casimir_tensor(algebra: LieAlgebraBasis, degree: int) -> CasimirTensor:
    """Casimir tensor of degree 2 (any N) or 3 (N >= 3).

    Degree 3 is the fully symmetrized fundamental trace d_{abc} =
    sym Tr(e_a e_b e_c), with all indices raised by the inverse Gram; it
    vanishes identically on sl_2, hence the N >= 3 restriction.
    """
    if degree == 2:
        return CasimirTensor(degree=2, coeffs=algebra.gram_inv.copy())
    if degree == 3:
        if algebra.N < 3:
            raise ValueError("degree-3 Casimir vanishes identically on sl_2")
        b = algebra.basis
        t3 = np.einsum("aij,bjk,cki->abc", b, b, b)
        d = np.zeros_like(t3)
        for p in permutations((0, 1, 2)):
            d += np.transpose(t3, p)
        d /= 6.0
        g = algebra.gram_inv
        c = np.einsum("xyz,xa,yb,zc->abc", d, g, g, g)
        return CasimirTensor(degree=3, coeffs=c)
    raise ValueError(f"unsupported Casimir degree {degree}")


def casimir_ad_invariance_defect(algebra: LieAlgebraBasis,
                                 tensor: CasimirTensor) -> float:
    """Max norm of the ad-action of every basis element on the tensor.

    For the invariant element sum c_{a1..ai} e_{a1} x ... x e_{ai}, acting
    with ad_{e_b} on slot s sends the coefficient array to
    sum_{a_s} f_{b a_s}^{d} c_{..a_s..}; invariance means the slot sum is 0.
    """
    c = tensor.coeffs
    f = algebra.structure
    i = tensor.degree
    worst = 0.0
    for bidx in range(algebra.dim):
        fb = f[bidx]          # (a, d): ad_{e_b} e_a = sum_d fb[a, d] e_d
        total = np.zeros_like(c)
        for s in range(i):
            total += np.tensordot(c, fb, axes=([s], [0])).transpose(
                _restore_axis(i, s))
        worst = max(worst, float(np.abs(total).max()))
    return worst


def _restore_axis(ndim: int, s: int):
    """Axis permutation putting tensordot's appended axis back at slot s."""
    order = list(range(ndim - 1))
    order.insert(s, ndim - 1)
    return order
