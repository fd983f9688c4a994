"""Amplitudes on the bundle of (route, Lie-algebra element) points.

Connected amplitudes are cyclic-permutation sums over kernel products,
disconnected ones full signed permutation sums; both use the regularized
kernel when projections coincide.  Casimir amplitudes put several legs at
one location and contract with an invariant tensor; the normal-ordered
variant extracts the constant term of the point-split amplitude
algebraically from the Taylor expansion of M generated by M' = [A, M].

All traces carry the same normalization as the Killing form here: Tr = 2N
times the matrix trace, applied once per trace factor.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import NoConvergence, TooManyPoints
from .lie import CasimirTensor, casimir_tensor, killing
from .system import FuchsianSystem
from .transport import (
    DEFAULT_TOL,
    BundlePoint,
    Path,
    layout,
    local_frame,
    point_route,
    transport,
)

MAX_POINTS = 8
COINCIDE_RTOL = 1e-9


# ---------------------------------------------------------------------------
# requests

@dataclass(frozen=True)
class AmplitudeRequest:
    points: tuple
    mode: str = "disconnected"   # "connected" | "disconnected"

    def validate(self):
        if not self.points:
            raise ValueError("amplitude request needs at least one point")
        if len(self.points) > MAX_POINTS:
            raise TooManyPoints(f"n = {len(self.points)} exceeds {MAX_POINTS}")
        if self.mode not in ("connected", "disconnected"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class CasimirAmplitudeRequest:
    degree: int
    x: complex
    extras: tuple = ()
    variant: str = "plain"       # "plain" | "normal-ordered"

    def validate(self):
        if self.degree + len(self.extras) > MAX_POINTS:
            raise TooManyPoints(
                f"degree {self.degree} + {len(self.extras)} extras exceeds "
                f"{MAX_POINTS}")
        if self.variant not in ("plain", "normal-ordered"):
            raise ValueError(f"unknown variant {self.variant!r}")


# ---------------------------------------------------------------------------
# prepared points and kernels

def _prepare(system, points, tol, gauge=None):
    """[(projection, Psi, E)] with Psi the transport along each route."""
    prep = []
    for X in points:
        T = transport(system, X.route, tol).matrix
        if gauge is not None:
            T = T @ gauge
        prep.append((complex(X.route.end), T,
                     np.asarray(X.E, dtype=complex)))
    return prep


def _kernel_table(system, prep):
    """K[i][k] = K(x_i, x_k); E-independent, shared by all permutations."""
    n = len(prep)
    thr = COINCIDE_RTOL * system.scale()
    invs = [np.linalg.inv(P) for _, P, _ in prep]
    K = [[None] * n for _ in range(n)]
    for i in range(n):
        xi = prep[i][0]
        for k in range(n):
            xk, Pk = prep[k][0], prep[k][1]
            if abs(xk - xi) <= thr:
                A = system.connection_at(xi, enforce_clearance=False)
                K[i][k] = invs[i] @ A @ Pk
            else:
                K[i][k] = (invs[i] @ Pk) / (xk - xi)
    return K


def kernel(system, X: BundlePoint, Y: BundlePoint,
           tol: float = DEFAULT_TOL, gauge=None) -> np.ndarray:
    """K(x,y) = Psi(x)^{-1} Psi(y) / (pi(y)-pi(x)); regularized on the
    diagonal to Psi(x)^{-1} A(pi(x)) Psi(y)."""
    prep = _prepare(system, [X, Y], tol, gauge)
    return _kernel_table(system, prep)[0][1]


def _cycle_value(prep, K, cycle, twoN):
    head = cycle[0]
    M = prep[head][2] @ K[head][cycle[1 % len(cycle)]]
    for pos in range(1, len(cycle)):
        i = cycle[pos]
        k = cycle[(pos + 1) % len(cycle)]
        M = M @ (prep[i][2] @ K[i][k])
    return twoN * np.trace(M)


def _connected_value(system, prep):
    n = len(prep)
    if n > MAX_POINTS:
        raise TooManyPoints(f"n = {n} exceeds {MAX_POINTS}")
    K = _kernel_table(system, prep)
    twoN = 2.0 * system.algebra.N
    total = 0.0 + 0.0j
    for tail in permutations(range(1, n)):
        total += _cycle_value(prep, K, (0,) + tail, twoN)
    return (-1.0) ** (n + 1) * total


def _perm_cycles(perm):
    n = len(perm)
    seen = [False] * n
    cycles = []
    for s in range(n):
        if seen[s]:
            continue
        c = [s]
        seen[s] = True
        k = perm[s]
        while k != s:
            c.append(k)
            seen[k] = True
            k = perm[k]
        cycles.append(tuple(c))
    return cycles


def _disconnected_value(system, prep):
    n = len(prep)
    if n == 0:
        return 1.0 + 0.0j
    if n > MAX_POINTS:
        raise TooManyPoints(f"n = {n} exceeds {MAX_POINTS}")
    K = _kernel_table(system, prep)
    twoN = 2.0 * system.algebra.N
    total = 0.0 + 0.0j
    for perm in permutations(range(n)):
        cycles = _perm_cycles(perm)
        term = (-1.0) ** (n - len(cycles))
        for c in cycles:
            term *= _cycle_value(prep, K, c, twoN)
        total += term
    return total


def w_connected(system, points, tol: float = DEFAULT_TOL, gauge=None) -> complex:
    """W_n: (-1)^{n+1} sum over the (n-1)! cyclic orders of the trace of
    E_i K(x_i, x_next) around the cycle."""
    AmplitudeRequest(tuple(points), "connected").validate()
    return _connected_value(system, _prepare(system, points, tol, gauge))


def w_disconnected(system, points, tol: float = DEFAULT_TOL, gauge=None) -> complex:
    """What_n: full signed permutation sum, one trace factor per cycle."""
    AmplitudeRequest(tuple(points), "disconnected").validate()
    return _disconnected_value(system, _prepare(system, points, tol, gauge))


def evaluate_amplitude(system, req: AmplitudeRequest,
                       tol: float = DEFAULT_TOL) -> complex:
    req.validate()
    fn = w_connected if req.mode == "connected" else w_disconnected
    return fn(system, list(req.points), tol)


# ---------------------------------------------------------------------------
# limit checks

def short_distance_check(system, X1: BundlePoint, X2: BundlePoint,
                         extras=(), eps: float | None = None,
                         tol: float = DEFAULT_TOL) -> dict:
    """Coinciding-point behaviour: subtracting <E1,E2>/x12^2 and the
    commutator simple pole from What_n leaves a bounded remainder.

    X1 supplies the approach direction and E1; the approach runs along a
    straight segment from pi(X2) on X2's lift at separations eps, eps/2,
    eps/4.  Returns the remainder sequence and its max/min ratio.
    """
    if eps is None:
        eps = 1e-2 * system.scale()
    x2 = complex(X2.route.end)
    u = complex(X1.route.end) - x2
    if abs(u) == 0.0:
        u = 1.0 + 0.0j
    u /= abs(u)
    E1 = np.asarray(X1.E, dtype=complex)
    E2 = np.asarray(X2.E, dtype=complex)
    comm = E1 @ E2 - E2 @ E1
    pair = killing(E1, E2)
    sub = [BundlePoint(X2.route, comm)] + list(extras)
    w_sub = _disconnected_value(system, _prepare(system, sub, tol))
    # double pole multiplies the amplitude of the spectator points alone
    w_rest = _disconnected_value(system, _prepare(system, list(extras), tol))
    values = []
    for k in range(3):
        e = eps / 2 ** k
        sep = e * u
        route1 = X2.route.join(Path.from_points([x2, x2 + sep]))
        pts = [BundlePoint(route1, E1), X2] + list(extras)
        w = w_disconnected(system, pts, tol)
        R = w - pair * w_rest / sep ** 2 - w_sub / sep
        values.append((e, R))
    mags = [abs(r) for _, r in values]
    ratio = max(mags) / max(min(mags), 1e-300)
    return {"remainders": values, "ratio": ratio, "bounded": ratio <= 3.0,
            "pair": pair, "commutator_norm": float(np.abs(comm).max())}


def _frame_triple(system, fr, r, E):
    """Prepared (x, Psi, E) near puncture fr.j from the verified local-frame
    series; legitimate below clearance where the ODE may not run."""
    x = system.punctures[fr.j] + r * cmath.exp(1j * fr.theta)
    return (complex(x), fr.psi_at(r, fr.theta), np.asarray(E, complex))


def puncture_asymptotics_check(system, j: int, E, extras=(),
                               tol: float = DEFAULT_TOL) -> dict:
    """Near z_j: What_n(x.E, extras) has simple-pole coefficient
    <A_j, E_j> What_{n-1}(extras) (E_j the Cartan part of Psi_j E Psi_j^{-1})
    plus power components at the root values of A_j.

    The pole coefficient is fitted in the exponent basis {1, t, t^{1+r}}
    from near-field values; root exponents are fitted from pure-root probes
    by a complex log-log slope.  Near-field amplitude values use the
    local-frame series, which transport tests validate against the ODE.
    """
    fr = local_frame(system, j, tol)
    cd = system.cartan_data(j)
    E = np.asarray(E, dtype=complex)
    psi_j_inv = np.linalg.inv(fr.psi_j)
    F = fr.psi_j @ E @ psi_j_inv
    F_h, _ = cd.decompose(F)
    extras_prep = _prepare(system, list(extras), tol)
    w_rest = _disconnected_value(system, extras_prep)
    predicted = killing(system.residues[j], F_h) * w_rest

    ms = system.min_pairwise_distance()
    radii = np.geomspace(1e-5 * ms, 1e-3 * ms, 12)
    tw = []
    for r in radii:
        prep = [_frame_triple(system, fr, r, E)] + extras_prep
        t = r * cmath.exp(1j * fr.theta)
        tw.append(t * _disconnected_value(system, prep))
    roots = [rv for rv, _ in cd.roots]
    ts = radii * cmath.exp(1j * fr.theta)
    cols = [np.ones_like(ts), ts]
    cols += [ts * np.exp(rv * np.log(ts)) for rv in roots]
    Amat = np.stack(cols, axis=1)
    coeffs, *_ = np.linalg.lstsq(Amat, np.array(tw), rcond=None)
    fitted = coeffs[0]
    scale_ref = max(abs(predicted), abs(fitted), 1e-300)
    pole_defect = abs(fitted - predicted) / scale_ref

    # slope fits want smaller radii than the pole fit: the O(t) analytic
    # correction biases log-log slopes linearly in the top radius
    probe_radii = np.geomspace(1e-6 * ms, 1e-4 * ms, 12)
    root_fits = []
    for rv, R in cd.roots:
        probe = psi_j_inv @ R @ fr.psi_j
        # every permutation term is linear in the probe leg, so the whole
        # amplitude carries the t^r factor and the slope fit needs no
        # subtraction even with extra points present
        vals = []
        for r in probe_radii:
            prep = [_frame_triple(system, fr, r, probe)] + extras_prep
            vals.append(_disconnected_value(system, prep))
        slopes = []
        for m in range(len(probe_radii) - 1):
            num = np.log(vals[m + 1] / vals[m])
            den = math.log(probe_radii[m + 1] / probe_radii[m])
            slopes.append(num / den)
        slope = complex(np.mean(slopes))
        root_fits.append((rv, slope, abs(slope - rv) / abs(rv)))

    return {"pole_coefficient": fitted, "pole_predicted": predicted,
            "pole_rel_defect": float(pole_defect), "roots": root_fits,
            "n": 1 + len(extras_prep)}


# ---------------------------------------------------------------------------
# Casimir amplitudes

def _leg_indices(degree, dim):
    idx = np.indices((dim,) * degree).reshape(degree, -1).T
    return idx


def casimir_amplitude(system, tensor: CasimirTensor, x: complex, extras=(),
                      variant: str = "plain", word=None, route=None,
                      tol: float = DEFAULT_TOL) -> complex:
    """Amplitude with the degree-i invariant tensor's legs at x.

    plain: contract the tensor against What_{i+n} with all Casimir legs on
    the same lift of x (regularized kernel on the diagonal).
    normal-ordered: constant-term extraction, degrees 2 and 3, no extras.
    route: optional explicit Path to x replacing the default straight one
    (the value is lift-independent; this only helps clearance).
    """
    CasimirAmplitudeRequest(tensor.degree, x, tuple(extras),
                            variant).validate()
    if variant == "normal-ordered":
        if extras:
            raise ValueError("normal-ordered variant takes no extra points")
        return normal_ordered_casimir_amplitude(system, tensor, x,
                                                word=word, tol=tol)
    if route is None:
        route = point_route(system, x, word)
    elif abs(complex(route.end) - complex(x)) > 1e-12 * max(1.0, abs(x)):
        raise ValueError("route endpoint does not match x")
    T = transport(system, route, tol).matrix
    extras_prep = _prepare(system, list(extras), tol)
    alg = system.algebra
    legs = [(complex(x), T, None)] * tensor.degree
    prep = legs + extras_prep
    K = _kernel_table(system, prep)
    twoN = 2.0 * alg.N
    n = len(prep)
    basis = alg.basis
    total = 0.0 + 0.0j
    C = tensor.coeffs
    for idx in _leg_indices(tensor.degree, alg.dim):
        c = C[tuple(idx)]
        if c == 0.0:
            continue
        full = [(prep[i][0], prep[i][1],
                 basis[idx[i]] if i < tensor.degree else prep[i][2])
                for i in range(n)]
        sub = 0.0 + 0.0j
        for perm in permutations(range(n)):
            cycles = _perm_cycles(perm)
            term = (-1.0) ** (n - len(cycles))
            for cyc in cycles:
                term *= _cycle_value(full, K, cyc, twoN)
            sub += term
        total += c * sub
    return total


def direct_rational_W2C2(system, x: complex) -> complex:
    """sum_a [ -Tr(f_a A f^a A) + Tr(f_a A) Tr(f^a A) ] from A(x) alone.

    Transport-free rationality oracle for the degree-2 plain amplitude;
    basis independent because only sum_a f_a (x) f^a enters.
    """
    A = system.connection_at(x)
    alg = system.algebra
    twoN = 2.0 * alg.N
    t1 = np.einsum("aij,jk,akl,li->", alg.basis, A, alg.dual, A)
    t2 = np.einsum("aij,ji,akl,lk->", alg.basis, A, alg.dual, A)
    return complex(-twoN * t1 + twoN * twoN * t2)


def connection_taylor(system, x: complex, order: int):
    """[A_0, ..., A_order] with A(y) = sum_m A_m (y-x)^m."""
    out = [system.connection_at(x)]
    for m in range(1, order + 1):
        out.append(system.connection_derivative_at(x, m) / math.factorial(m))
    return out


def m_taylor(system, x: complex, M0, order: int,
             A_taylor=None):
    """Taylor coefficients of M(y) around x from M' = [A, M]:
    (k+1) M_{k+1} = sum_{m+l=k} [A_m, M_l]."""
    if A_taylor is None:
        A_taylor = connection_taylor(system, x, order - 1 if order else 0)
    Ms = [np.asarray(M0, dtype=complex)]
    for k in range(order):
        acc = np.zeros_like(Ms[0])
        for m in range(k + 1):
            Am, Ml = A_taylor[m], Ms[k - m]
            acc += Am @ Ml - Ml @ Am
        Ms.append(acc / (k + 1))
    return Ms


def normal_ordered_casimir_amplitude(system, tensor: CasimirTensor,
                                     x: complex, word=None,
                                     tol: float = DEFAULT_TOL) -> complex:
    """Constant term of the point-split Casimir amplitude at x.

    The split legs sit at y_k = x + t_k with nested separations
    |t_2| < |t_1|; each contour integral d t_k/(2 pi i t_k) picks the
    coefficient of t_k^0, read off algebraically from the Taylor expansion
    of M (via M' = [A, M]) and the region expansion
    1/(t_2 - t_1) = -sum t_2^m / t_1^{m+1}.
    """
    if tensor.degree not in (2, 3):
        raise ValueError("normal ordering implemented for degrees 2 and 3")
    alg = system.algebra
    twoN = 2.0 * alg.N
    route = point_route(system, x, word)
    Psi = transport(system, route, tol).matrix
    Psi_inv = np.linalg.inv(Psi)
    m0 = np.einsum("ij,ajk,kl->ail", Psi, alg.basis, Psi_inv)
    order = tensor.degree + 1
    A_t = connection_taylor(system, x, order)
    A0 = A_t[0]
    w1 = twoN * np.einsum("ij,aji->a", A0, m0)

    def bracket(P, Q):
        return np.einsum("ij,ajk->aik", P, Q) - np.einsum(
            "aij,jk->aik", Q, P)

    M1 = bracket(A0, m0)
    M2 = (bracket(A_t[1], m0) + bracket(A0, M1)) / 2.0
    C = tensor.coeffs
    if tensor.degree == 2:
        P2 = twoN * np.einsum("aij,bji->ab", M2, m0)
        return complex(np.einsum("ab,a,b->", C, w1, w1) +
                       np.einsum("ab,ab->", C, P2))
    M3 = (bracket(A_t[2], m0) + bracket(A_t[1], M1) + bracket(A0, M2)) / 3.0
    P2 = twoN * np.einsum("aij,bji->ab", M2, m0)
    term111 = np.einsum("abc,a,b,c->", C, w1, w1, w1)
    term1_23 = np.einsum("abc,a,bc->", C, w1, P2)
    term2_13 = np.einsum("abc,b,ac->", C, w1, P2)
    term3_12 = np.einsum("abc,c,ab->", C, w1, P2)
    # connected three-point constant term: -(G_30 + G_21) in the nested
    # region, G_pq = Tr(M_p^a M_0^c M_q^b) - Tr(M_p^a M_q^b M_0^c)
    G30 = twoN * (np.einsum("abc,aij,cjk,bki->", C, M3, m0, m0) -
                  np.einsum("abc,aij,bjk,cki->", C, M3, m0, m0))
    G21 = twoN * (np.einsum("abc,aij,cjk,bki->", C, M2, m0, M1) -
                  np.einsum("abc,aij,bjk,cki->", C, M2, M1, m0))
    return complex(term111 + term1_23 + term2_13 + term3_12 - (G30 + G21))


def normal_ordered_casimir_quadrature(system, tensor: CasimirTensor,
                                      x: complex, radius: float | None = None,
                                      nodes: int = 64,
                                      tol: float = DEFAULT_TOL) -> complex:
    """Numerical contour cross-check of the algebraic constant-term
    extraction; nested circles of radii radius and radius/2."""
    if tensor.degree not in (2, 3):
        raise ValueError("normal ordering implemented for degrees 2 and 3")
    if radius is None:
        radius = system.clearance / 2.0
    alg = system.algebra
    twoN = 2.0 * alg.N
    route = point_route(system, x, word=None)
    Psi_x = transport(system, route, tol).matrix
    A_x = system.connection_at(x)
    C = tensor.coeffs

    def psi_at(y):
        seg = route.join(Path.from_points([x, y]))
        return transport(system, seg, tol).matrix

    if tensor.degree == 2:
        acc = 0.0 + 0.0j
        for k in range(nodes):
            y = x + radius * cmath.exp(2j * np.pi * k / nodes)
            Psi_y = psi_at(y)
            Ky_x = np.linalg.inv(Psi_y) @ Psi_x / (x - y)
            Kx_y = np.linalg.inv(Psi_x) @ Psi_y / (y - x)
            Ky_y = np.linalg.inv(Psi_y) @ system.connection_at(y) @ Psi_y
            Kx_x = np.linalg.inv(Psi_x) @ A_x @ Psi_x
            w1a = twoN * np.einsum("aij,ji->a", alg.basis, Ky_y)
            w1b = twoN * np.einsum("bij,ji->b", alg.basis, Kx_x)
            T = twoN * np.einsum("aij,jk,bkl,li->ab",
                                 alg.basis, Ky_x, alg.basis, Kx_y)
            acc += np.einsum("ab,a,b->", C, w1a, w1b) - np.einsum(
                "ab,ab->", C, T)
        return complex(acc / nodes)

    r1, r2 = radius, radius / 2.0
    psis1 = [psi_at(x + r1 * cmath.exp(2j * np.pi * k / nodes))
             for k in range(nodes)]
    psis2 = [psi_at(x + r2 * cmath.exp(2j * np.pi * k / nodes))
             for k in range(nodes)]
    Kx_x = np.linalg.inv(Psi_x) @ A_x @ Psi_x
    w1c = twoN * np.einsum("cij,ji->c", alg.basis, Kx_x)
    acc = 0.0 + 0.0j
    for k in range(nodes):
        y1 = x + r1 * cmath.exp(2j * np.pi * k / nodes)
        P1 = psis1[k]
        P1_inv = np.linalg.inv(P1)
        K1x = P1_inv @ Psi_x / (x - y1)
        Kx1 = np.linalg.inv(Psi_x) @ P1 / (y1 - x)
        K11 = P1_inv @ system.connection_at(y1) @ P1
        w1a = twoN * np.einsum("aij,ji->a", alg.basis, K11)
        T_ac = twoN * np.einsum("aij,jk,ckl,li->ac",
                                alg.basis, K1x, alg.basis, Kx1)
        for l in range(nodes):
            y2 = x + r2 * cmath.exp(2j * np.pi * l / nodes)
            P2m = psis2[l]
            P2_inv = np.linalg.inv(P2m)
            K22 = P2_inv @ system.connection_at(y2) @ P2m
            w1b = twoN * np.einsum("bij,ji->b", alg.basis, K22)
            K12 = P1_inv @ P2m / (y2 - y1)
            K21 = P2_inv @ P1 / (y1 - y2)
            K2x = P2_inv @ Psi_x / (x - y2)
            Kx2 = np.linalg.inv(Psi_x) @ P2m / (y2 - x)
            T_ab = twoN * np.einsum("aij,jk,bkl,li->ab",
                                    alg.basis, K12, alg.basis, K21)
            T_bc = twoN * np.einsum("bij,jk,ckl,li->bc",
                                    alg.basis, K2x, alg.basis, Kx2)
            R_abc = twoN * np.einsum("aij,jk,bkl,lm,cmn,ni->abc",
                                     alg.basis, K12, alg.basis, K2x,
                                     alg.basis, Kx1)
            R_acb = twoN * np.einsum("aij,jk,ckl,lm,bmn,ni->abc",
                                     alg.basis, K1x, alg.basis, Kx2,
                                     alg.basis, K21)
            what3 = (np.einsum("abc,a,b,c->", C, w1a, w1b, w1c)
                     - np.einsum("abc,ab,c->", C, T_ab, w1c)
                     - np.einsum("abc,ac,b->", C, T_ac, w1b)
                     - np.einsum("abc,bc,a->", C, T_bc, w1a)
                     + np.einsum("abc,abc->", C, R_abc)
                     + np.einsum("abc,abc->", C, R_acb))
            acc += what3
    return complex(acc / nodes ** 2)


def extract_charges(system, degree: int, j: int,
                    tol: float = DEFAULT_TOL) -> complex:
    """q_j = lim (x-z_j)^degree What(C_degree(x)) along the spoke, via
    Richardson extrapolation in the integer-power Laurent basis.

    Uses the plain variant, whose values are rational in x, so the
    extrapolation sees integer powers only.
    """
    tensor = casimir_tensor(system.algebra, degree)
    lay = layout(system)
    zj = system.punctures[j]
    theta = lay.theta[j]
    c = system.clearance
    radii = [8 * c, 4 * c, 2 * c, c]
    vals = []
    for r in radii:
        t = r * cmath.exp(1j * theta)
        x = zj + t
        w = casimir_amplitude(system, tensor, x, tol=tol)
        vals.append(t ** degree * w)
    seq = list(vals)
    for level in range(1, 4):
        seq = [(2 ** level * seq[i + 1] - seq[i]) / (2 ** level - 1)
               for i in range(len(seq) - 1)]
    q = seq[0]
    drift = abs(q - vals[-1])
    if abs(q) > 0 and drift / abs(q) > 0.5:
        raise NoConvergence(
            f"charge extrapolation drifted by {drift:.2e} vs |q|={abs(q):.2e}")
    return complex(q)


def evaluate_casimir(system, req: CasimirAmplitudeRequest,
                     tol: float = DEFAULT_TOL) -> complex:
    req.validate()
    tensor = casimir_tensor(system.algebra, req.degree)
    return casimir_amplitude(system, tensor, req.x, extras=list(req.extras),
                             variant=req.variant, tol=tol)


# ---------------------------------------------------------------------------
# rationality fitting

def rational_fit_residual(system, xs, values, pole_order: int) -> float:
    """Least-squares fit by sums of 1/(x-z_j)^k, k <= pole_order, with the
    pole locations fixed at the punctures; relative max residual."""
    xs = np.asarray(xs, dtype=complex)
    vals = np.asarray(values, dtype=complex)
    cols = []
    for zj in system.punctures:
        for k in range(1, pole_order + 1):
            cols.append(1.0 / (xs - zj) ** k)
    Amat = np.stack(cols, axis=1)
    coeffs, *_ = np.linalg.lstsq(Amat, vals, rcond=None)
    resid = np.abs(Amat @ coeffs - vals).max()
    return float(resid / max(np.abs(vals).max(), 1e-300))
