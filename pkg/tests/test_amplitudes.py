"""Amplitude layer: regularized kernel, permutation sums, coinciding-point
and near-puncture behaviour, Casimir amplitudes in both regularizations,
and charge extraction.

Oracles are test-local: the commuting two-pole system has a closed-form
solution via accumulated logs, small-circle quadrature supplies Laurent
coefficients, and partition identities are enumerated by hand.
"""
import cmath
import math
from dataclasses import replace
from itertools import permutations

import numpy as np
import pytest
from scipy.linalg import expm

from conftest import random_sl2_three, two_pole_sl2
from fuchsian_amplitudes.errors import (
    ClearanceViolation,
    TooManyPoints,
)
from fuchsian_amplitudes.geometry import arc_polyline
from fuchsian_amplitudes.lie import CasimirTensor, casimir_tensor, killing
from fuchsian_amplitudes.system import FuchsianSystem, make_system
from fuchsian_amplitudes.transport import (
    BundlePoint,
    LoopWord,
    Path,
    layout,
    local_frame,
    point_route,
    realize,
    transport,
)
from fuchsian_amplitudes.amplitudes import (
    AmplitudeRequest,
    casimir_amplitude,
    direct_rational_W2C2,
    evaluate_amplitude,
    extract_charges,
    kernel,
    normal_ordered_casimir_amplitude,
    normal_ordered_casimir_quadrature,
    puncture_asymptotics_check,
    rational_fit_residual,
    short_distance_check,
    w_connected,
    w_disconnected,
)


def _traceless(rng, N, scale=0.5):
    M = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    M -= np.trace(M) / N * np.eye(N)
    return scale * M


def _cont_log(vertices, z):
    # per-segment principal logs accumulate the true winding for any
    # polyline avoiding z (each straight segment subtends less than pi)
    total = 0.0j
    for a, b in zip(vertices[:-1], vertices[1:]):
        total += cmath.log((b - z) / (a - z))
    return total


def _two_pole_psi(system, path):
    # commuting residues: Psi = exp(A1 (L1 - L2)) with Li the accumulated
    # logs of x - z_i along the path, Psi(x0) = Id
    A1 = system.residues[0]
    L1 = _cont_log(path.vertices, system.punctures[0])
    L2 = _cont_log(path.vertices, system.punctures[1])
    return expm(A1 * (L1 - L2))


def _point(system, x, E, word=None):
    return BundlePoint(point_route(system, x, word), np.asarray(E, complex))


@pytest.fixture(scope="module")
def pts3(sl2, sys3):
    rng = np.random.default_rng(11)
    xs = [0.25 + 0.3j, -0.35 + 0.5j, 0.8 + 0.55j]
    return [_point(sys3, x, _traceless(rng, 2)) for x in xs]


class TestKernel:
    def test_same_route_is_similarity_of_connection(self, sys3):
        x = 0.3 + 0.4j
        X = _point(sys3, x, np.zeros((2, 2)))
        T = transport(sys3, X.route).matrix
        K = kernel(sys3, X, X)
        expected = np.linalg.solve(T, sys3.connection_at(x) @ T)
        assert np.abs(K - expected).max() <= 1e-9

    def test_two_pole_closed_form(self, twopole):
        x, y = -0.7 + 0.9j, 1.4 + 1.1j
        X = _point(twopole, x, np.zeros((2, 2)))
        Y = _point(twopole, y, np.zeros((2, 2)))
        K = kernel(twopole, X, Y)
        Px = _two_pole_psi(twopole, X.route)
        Py = _two_pole_psi(twopole, Y.route)
        expected = np.linalg.solve(Px, Py) / (y - x)
        assert np.abs(K - expected).max() <= 1e-8

    def test_coinciding_value_is_limit_of_generic_kernel(self, sys3):
        # distinct lifts of the basepoint: trivial route vs the first loop
        lay = layout(sys3)
        route_x = Path((lay.basepoint,))
        route_y = realize(sys3, LoopWord.parse("g1"))
        X = BundlePoint(route_x, np.zeros((2, 2)))
        Y = BundlePoint(route_y, np.zeros((2, 2)))
        K_reg = kernel(sys3, X, Y, tol=1e-12)
        Tx = transport(sys3, route_x, tol=1e-12).matrix
        Ty = transport(sys3, route_y, tol=1e-12).matrix
        pole = np.linalg.solve(Tx, Ty)
        u = cmath.exp(0.37j)
        eps = 2e-3 * sys3.scale()

        def defect(e):
            seg = Path.from_points([lay.basepoint, lay.basepoint + e * u])
            Yp = BundlePoint(route_y.join(seg), Y.E)
            return kernel(sys3, X, Yp, tol=1e-12) - pole / (e * u)

        # two Richardson levels: the defect has a full Taylor tail in e
        d1, d2, d3 = defect(eps), defect(eps / 2), defect(eps / 4)
        r1, r2 = 2.0 * d2 - d1, 2.0 * d3 - d2
        extrap = (4.0 * r2 - r1) / 3.0
        assert np.abs(extrap - K_reg).max() <= 1e-7

    def test_route_into_forbidden_disk_rejected(self, sys3):
        bad = sys3.punctures[0] + 0.1 * sys3.clearance
        X = _point(sys3, bad, np.eye(2) - np.eye(2))
        with pytest.raises((ClearanceViolation, Exception)):
            kernel(sys3, X, X)


class TestConnected:
    def test_single_point_commuting_element(self, twopole):
        # E commuting with the residues: M(x.E) = E, so W1 = <A(x), E>
        x = 0.4 + 1.3j
        E = 0.7 * twopole.residues[0]
        X = _point(twopole, x, E)
        w = w_connected(twopole, [X])
        assert abs(w - killing(twopole.connection_at(x), E)) <= 1e-10

    def test_zero_element_kills_amplitude(self, sys3, pts3):
        Z = BundlePoint(pts3[0].route, np.zeros((2, 2)))
        assert w_connected(sys3, [Z, pts3[1]]) == 0.0

    def test_two_point_symmetry(self, sys3, pts3):
        w12 = w_connected(sys3, [pts3[0], pts3[1]])
        w21 = w_connected(sys3, [pts3[1], pts3[0]])
        assert abs(w12 - w21) <= 1e-12 * max(1.0, abs(w12))

    def test_multilinearity_in_each_slot(self, sys3, pts3):
        rng = np.random.default_rng(5)
        E = _traceless(rng, 2)
        F = _traceless(rng, 2)
        a, b = 0.7 - 0.2j, -1.1 + 0.4j
        base = pts3[1]
        combo = BundlePoint(pts3[0].route, a * E + b * F)
        lhs = w_connected(sys3, [combo, base])
        rhs = (a * w_connected(sys3, [BundlePoint(pts3[0].route, E), base])
               + b * w_connected(sys3, [BundlePoint(pts3[0].route, F), base]))
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


class TestDisconnected:
    def test_single_point_equals_connected(self, sys3, pts3):
        assert w_disconnected(sys3, pts3[:1]) == w_connected(sys3, pts3[:1])

    def test_two_point_partition(self, sys3, pts3):
        X1, X2 = pts3[0], pts3[1]
        lhs = w_disconnected(sys3, [X1, X2])
        rhs = (w_connected(sys3, [X1, X2])
               + w_connected(sys3, [X1]) * w_connected(sys3, [X2]))
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))

    def test_three_point_partition(self, sys3, pts3):
        X1, X2, X3 = pts3
        W1 = {i: w_connected(sys3, [p]) for i, p in enumerate(pts3)}
        W2 = {(i, k): w_connected(sys3, [pts3[i], pts3[k]])
              for i, k in [(0, 1), (0, 2), (1, 2)]}
        rhs = (w_connected(sys3, pts3)
               + W1[0] * W2[(1, 2)] + W1[1] * W2[(0, 2)] + W1[2] * W2[(0, 1)]
               + W1[0] * W1[1] * W1[2])
        lhs = w_disconnected(sys3, pts3)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))

    def test_point_count_cap(self, sys3, pts3):
        too_many = [pts3[0]] * 9
        with pytest.raises(TooManyPoints):
            w_disconnected(sys3, too_many)
        with pytest.raises(TooManyPoints):
            evaluate_amplitude(
                sys3, AmplitudeRequest(tuple(too_many), "disconnected"))

    def test_solution_choice_independence(self, sys3, pts3):
        # replacing Psi by Psi C and E by C^-1 E C changes nothing
        rng = np.random.default_rng(23)
        C = expm(_traceless(rng, 2, 0.6))
        moved = [BundlePoint(p.route, np.linalg.solve(C, p.E @ C))
                 for p in pts3]
        w0 = w_disconnected(sys3, pts3)
        w1 = w_disconnected(sys3, moved, gauge=C)
        assert abs(w0 - w1) <= 1e-9 * max(1.0, abs(w0))

    def test_global_conjugation_invariance(self, sys3, pts3):
        rng = np.random.default_rng(29)
        g = expm(_traceless(rng, 2, 0.4))
        ginv = np.linalg.inv(g)
        res = np.array([g @ A @ ginv for A in sys3.residues])
        sys_g = FuchsianSystem(algebra=sys3.algebra,
                               punctures=sys3.punctures.copy(),
                               residues=res)
        moved = [BundlePoint(p.route, g @ p.E @ ginv) for p in pts3]
        w0 = w_disconnected(sys3, pts3)
        w1 = w_disconnected(sys_g, moved)
        assert abs(w0 - w1) <= 1e-9 * max(1.0, abs(w0))


class TestShortDistance:
    def test_generic_pair_bounded(self, sys3):
        rng = np.random.default_rng(3)
        X2 = _point(sys3, 0.2 + 0.35j, _traceless(rng, 2))
        X1 = _point(sys3, 0.23 + 0.37j, _traceless(rng, 2))
        out = short_distance_check(sys3, X1, X2)
        assert out["bounded"] and out["ratio"] <= 3.0

    def test_equal_elements_no_simple_pole(self, sys3):
        rng = np.random.default_rng(4)
        E = _traceless(rng, 2)
        X2 = _point(sys3, 0.2 + 0.35j, E)
        X1 = _point(sys3, 0.24 + 0.33j, E)
        out = short_distance_check(sys3, X1, X2)
        assert out["commutator_norm"] <= 1e-14
        assert out["bounded"]

    def test_killing_orthogonal_pair(self, sys3):
        rng = np.random.default_rng(6)
        E2 = _traceless(rng, 2)
        E1 = _traceless(rng, 2)
        E1 = E1 - killing(E1, E2) / killing(E2, E2) * E2
        X2 = _point(sys3, 0.2 + 0.35j, E2)
        X1 = _point(sys3, 0.23 + 0.37j, E1)
        out = short_distance_check(sys3, X1, X2)
        assert abs(out["pair"]) <= 1e-12
        assert out["bounded"]

    def test_with_spectator_point(self, sys3):
        rng = np.random.default_rng(3)
        X2 = _point(sys3, 0.2 + 0.35j, _traceless(rng, 2))
        X1 = _point(sys3, 0.23 + 0.37j, _traceless(rng, 2))
        Y = _point(sys3, -0.4 + 0.1j, _traceless(rng, 2))
        out = short_distance_check(sys3, X1, X2, extras=(Y,))
        assert out["bounded"] and out["ratio"] <= 3.0


class TestPunctureAsymptotics:
    def test_single_point_pole_coefficient(self, sys3):
        rng = np.random.default_rng(8)
        res = puncture_asymptotics_check(sys3, 1, _traceless(rng, 2))
        assert res["pole_rel_defect"] <= 1e-4
        assert max(d for _, _, d in res["roots"]) <= 1e-3

    def test_sl3_pole_and_roots(self, sl3, sys3_sl3):
        rng = np.random.default_rng(9)
        res = puncture_asymptotics_check(sys3_sl3, 0, _traceless(rng, 3))
        assert res["pole_rel_defect"] <= 1e-4
        assert max(d for _, _, d in res["roots"]) <= 1e-3

    def test_cartan_element_pure_pole(self, sys3):
        fr = local_frame(sys3, 0)
        cd = sys3.cartan_data(0)
        H = cd.cartan_basis[0]
        E = np.linalg.solve(fr.psi_j, H @ fr.psi_j)
        res = puncture_asymptotics_check(sys3, 0, E)
        assert abs(res["pole_predicted"] - killing(sys3.residues[0], H)) \
            <= 1e-8 * max(1.0, abs(res["pole_predicted"]))
        assert res["pole_rel_defect"] <= 1e-4

    def test_root_element_no_pole(self, sys3):
        rng = np.random.default_rng(10)
        fr = local_frame(sys3, 0)
        cd = sys3.cartan_data(0)
        _, R = cd.roots[0]
        E_root = np.linalg.solve(fr.psi_j, R @ fr.psi_j)
        res = puncture_asymptotics_check(sys3, 0, E_root)
        gen = puncture_asymptotics_check(sys3, 0, _traceless(rng, 2))
        # no Cartan component: predicted residue vanishes and the fitted
        # one is small on the scale of a generic element's residue
        assert abs(res["pole_predicted"]) <= 1e-10
        assert abs(res["pole_coefficient"]) \
            <= 1e-3 * abs(gen["pole_coefficient"])

    def test_pole_with_spectator(self, sys3):
        rng = np.random.default_rng(12)
        Y = _point(sys3, -0.4 + 0.1j, _traceless(rng, 2))
        res = puncture_asymptotics_check(sys3, 1, _traceless(rng, 2),
                                         extras=(Y,))
        assert res["pole_rel_defect"] <= 1e-4


def _laurent_coeff(f, center, order, radius, nodes=64):
    # (1/2pi i) contour integral of (x-center)^{order-1} f(x) around center
    out = 0.0j
    for m in range(nodes):
        t = radius * cmath.exp(2j * math.pi * m / nodes)
        out += t ** order * f(center + t)
    return out / nodes


def _grid_points(system, rng, n, margin):
    z = system.punctures
    lo = min(min(z.real), min(z.imag)) - 0.4
    hi = max(max(z.real), max(z.imag)) + 0.4
    out = []
    while len(out) < n:
        x = complex(rng.uniform(lo, hi), rng.uniform(lo, hi))
        if min(abs(x - zj) for zj in z) >= margin:
            out.append(x)
    return out


class TestCasimirPlain:
    def test_matches_direct_rational_on_grid(self, sl2, sys3):
        rng = np.random.default_rng(14)
        t2 = casimir_tensor(sl2, 2)
        xs = _grid_points(sys3, rng, 20, 0.15)
        vals, direct = [], []
        for x in xs:
            vals.append(casimir_amplitude(sys3, t2, x))
            direct.append(direct_rational_W2C2(sys3, x))
        vals = np.array(vals)
        direct = np.array(direct)
        rel = np.abs(vals - direct) / np.maximum(np.abs(direct), 1e-12)
        assert rel.max() <= 1e-7
        # rationality of the scan: poles only at the punctures, order two
        assert rational_fit_residual(sys3, xs, vals, 2) <= 1e-6

    def test_basis_choice_irrelevant(self, sl2, sys3):
        rng = np.random.default_rng(15)
        g = expm(_traceless(rng, 2, 0.5))
        ginv = np.linalg.inv(g)
        b2 = np.einsum("ij,ajk,kl->ail", g, sl2.basis, ginv)
        flat = b2.reshape(sl2.dim, -1)
        cm = np.linalg.pinv(flat.T)
        gram = 2 * sl2.N * np.einsum("aij,bji->ab", b2, b2)
        gram_inv = np.linalg.inv(gram)
        dual = np.tensordot(gram_inv, b2, axes=1)
        alg2 = replace(sl2, basis=b2, dual=dual, gram=gram,
                       gram_inv=gram_inv, _coord_map=cm)
        sys2 = FuchsianSystem(algebra=alg2,
                              punctures=sys3.punctures.copy(),
                              residues=sys3.residues.copy())
        x = 0.7 + 0.25j
        w_ref = casimir_amplitude(sys3, casimir_tensor(sl2, 2), x)
        w_alt = casimir_amplitude(sys2, casimir_tensor(alg2, 2), x)
        assert abs(w_ref - w_alt) <= 1e-9 * max(1.0, abs(w_ref))

    def test_lift_choice_irrelevant(self, sl2, sys3):
        t2 = casimir_tensor(sl2, 2)
        x = 0.3 - 0.55j
        w0 = casimir_amplitude(sys3, t2, x)
        w1 = casimir_amplitude(sys3, t2, x, word=LoopWord.parse("g2 g1^-1"))
        assert abs(w0 - w1) <= 1e-9 * max(1.0, abs(w0))

    def test_far_field_decay(self, twopole):
        # A(x)^2 = O(x^-4): quadrupling the distance cuts the value ~256x
        R = 40.0
        w1 = direct_rational_W2C2(twopole, R + 3.0j)
        w2 = direct_rational_W2C2(twopole, 4 * (R + 3.0j))
        ratio = abs(w2 / w1)
        assert 0.5 * 4.0 ** -4 <= ratio <= 2.0 * 4.0 ** -4

    def test_double_pole_coefficient_two_ways(self, twopole):
        # Laurent quadrature vs scaled radial limit, both on the rational
        # oracle; Richardson removes the O(t) tail of t^2 W
        z1 = twopole.punctures[0]
        c2 = _laurent_coeff(lambda x: direct_rational_W2C2(twopole, x),
                            z1, 2, 0.3)
        h = 1e-2   # radii stay outside the clearance disk

        def scaled(r):
            return r ** 2 * direct_rational_W2C2(twopole, z1 + r)

        seq = [scaled(h / 2 ** k) for k in range(4)]
        for level in range(1, 4):
            seq = [(2 ** level * seq[i + 1] - seq[i]) / (2 ** level - 1)
                   for i in range(len(seq) - 1)]
        assert abs(c2 - seq[0]) <= 1e-6 * max(1.0, abs(c2))

    def test_with_extra_point(self, sl2, sys3):
        # degree + extras within the cap evaluates; beyond the cap raises
        rng = np.random.default_rng(16)
        Y = _point(sys3, -0.3 + 0.2j, _traceless(rng, 2))
        t2 = casimir_tensor(sl2, 2)
        w = casimir_amplitude(sys3, t2, 0.6 + 0.4j, extras=(Y,))
        assert np.isfinite(w.real) and np.isfinite(w.imag)
        with pytest.raises(TooManyPoints):
            casimir_amplitude(sys3, t2, 0.6 + 0.4j, extras=(Y,) * 7)


class TestNormalOrdered:
    def test_degree2_difference_identity(self, sl2, sys3):
        # the two regularizations differ by sum_a Tr(A(x)^2 f_a f^a)
        t2 = casimir_tensor(sl2, 2)
        x = 0.45 + 0.6j
        plain = casimir_amplitude(sys3, t2, x)
        no = normal_ordered_casimir_amplitude(sys3, t2, x)
        A = sys3.connection_at(x)
        shift = sum(2 * sl2.N * np.trace(A @ A @ sl2.basis[a] @ sl2.dual[a])
                    for a in range(sl2.dim))
        assert abs((no - plain) - shift) <= 1e-8 * max(1.0, abs(plain))

    def test_degree2_quadrature_cross_check(self, sl2, sys3):
        t2 = casimir_tensor(sl2, 2)
        x = 0.45 + 0.6j
        alg = normal_ordered_casimir_amplitude(sys3, t2, x)
        quad = normal_ordered_casimir_quadrature(sys3, t2, x, nodes=64,
                                                 tol=1e-11)
        assert abs(alg - quad) <= 1e-6 * max(1.0, abs(alg))

    def test_degree3_quadrature_cross_check(self, sl3, sys3_sl3):
        t3 = casimir_tensor(sl3, 3)
        x = 0.55 + 0.35j
        alg = normal_ordered_casimir_amplitude(sys3_sl3, t3, x)
        quad = normal_ordered_casimir_quadrature(sys3_sl3, t3, x, nodes=24,
                                                 tol=1e-11)
        assert abs(alg - quad) <= 1e-6 * max(1.0, abs(alg))

    def test_rational_scan(self, sl2, sys3):
        rng = np.random.default_rng(17)
        t2 = casimir_tensor(sl2, 2)
        xs = _grid_points(sys3, rng, 12, 0.2)
        vals = [normal_ordered_casimir_amplitude(sys3, t2, x) for x in xs]
        assert rational_fit_residual(sys3, xs, vals, 2) <= 1e-6

    def test_unsupported_degrees(self, sl2, sl3, sys3):
        with pytest.raises(ValueError):
            casimir_tensor(sl2, 3)
        with pytest.raises(ValueError):
            casimir_tensor(sl3, 4)
        t3 = casimir_tensor(sl3, 3)
        fake = CasimirTensor(degree=4, coeffs=np.zeros((3,) * 4))
        with pytest.raises(ValueError):
            normal_ordered_casimir_amplitude(sys3, fake, 0.5 + 0.5j)
        with pytest.raises(ValueError):
            normal_ordered_casimir_amplitude(sys3, t3, 0.5 + 0.5j,
                                             word=None)


class TestCharges:
    def test_degree2_matches_laurent(self, twopole):
        q = extract_charges(twopole, 2, 0)
        c2 = _laurent_coeff(lambda x: direct_rational_W2C2(twopole, x),
                            twopole.punctures[0], 2, 0.3)
        assert abs(q - c2) <= 1e-7 * max(1.0, abs(c2))

    def test_degree2_scaling(self):
        s = 1.7
        base = two_pole_sl2()
        A1 = base.residues[0]
        scaled = make_system(2, list(base.punctures), [s * A1, -s * A1])
        q1 = extract_charges(base, 2, 0)
        q2 = extract_charges(scaled, 2, 0)
        assert abs(q2 - s ** 2 * q1) <= 1e-8 * max(1.0, abs(q2))

    def test_degree3_needs_rank_two(self, twopole):
        with pytest.raises(ValueError):
            extract_charges(twopole, 3, 0)

    def test_degree3_matches_laurent(self, sl3, sys3_sl3):
        q = extract_charges(sys3_sl3, 3, 0)
        t3 = casimir_tensor(sl3, 3)
        lay = layout(sys3_sl3)
        z0 = sys3_sl3.punctures[0]
        rho, th = lay.rho[0], lay.theta[0]
        r = 0.05 * sys3_sl3.min_pairwise_distance()
        nodes = 24
        acc = 0.0j
        for m in range(nodes):
            ang = th + 2 * math.pi * m / nodes
            pts = [lay.basepoint, z0 + rho * cmath.exp(1j * th)]
            pts += arc_polyline(z0, rho, th, ang)[1:]
            x = z0 + r * cmath.exp(1j * ang)
            pts.append(x)
            route = Path.from_points(pts)
            w = casimir_amplitude(sys3_sl3, t3, x, route=route, tol=1e-11)
            acc += (r * cmath.exp(1j * ang)) ** 3 * w
        c3 = acc / nodes
        assert abs(q - c3) <= 1e-6 * max(1.0, abs(c3))
