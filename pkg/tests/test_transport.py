"""Transport, monodromy, local frames, and M(x.E).

Oracle for the two-pole system: the residues commute, so
Psi(x) = exp(A1 [L(x) - L(x0)]) with L(x) = log(x - z1) - log(x - z2)
continued along the path. The tests compute that closed form locally.
"""
import cmath
import math

import numpy as np
import pytest
from scipy.linalg import expm

from fuchsian_amplitudes.errors import ClearanceViolation, ResonantSystem
from fuchsian_amplitudes.system import make_system
from fuchsian_amplitudes.transport import (
    BundlePoint,
    LoopWord,
    Path,
    evaluate_M,
    frame_monodromy,
    generator_monodromies,
    layout,
    local_frame,
    monodromy,
    point_route,
    realize,
    transport,
)

from conftest import two_pole_sl2, random_sl2_three


def _cont_log(vertices, z):
    """Continuous increment of log(x - z) along a polyline.

    Each straight segment with z off it subtends less than pi, so the
    per-segment principal logs stitch to the continuous branch.
    """
    total = 0.0 + 0.0j
    for a, b in zip(vertices[:-1], vertices[1:]):
        total += cmath.log((b - z) / (a - z))
    return total


def _two_pole_T(system, path):
    """Closed-form transport for the commuting two-pole system."""
    z1, z2 = system.punctures
    A1 = system.residues[0]
    dL = _cont_log(path.vertices, z1) - _cont_log(path.vertices, z2)
    return expm(A1 * dL)


# ---------------------------------------------------------------------------
# transport

class TestTransport:
    def test_two_pole_closed_form(self, twopole):
        x0 = layout(twopole).basepoint
        path = Path.from_points([x0, x0 + 0.8j, -1.2 + 0.4j, -0.5 - 0.9j])
        T = transport(twopole, path).matrix
        T_oracle = _two_pole_T(twopole, path)
        assert np.abs(T - T_oracle).max() < 1e-8

    def test_empty_path(self, twopole):
        x0 = layout(twopole).basepoint
        res = transport(twopole, Path((x0,)))
        assert np.array_equal(res.matrix, np.eye(2))
        res2 = transport(twopole, Path.from_points([x0, x0]))
        assert np.array_equal(res2.matrix, np.eye(2))

    def test_reversal_inverse(self, sys3):
        x0 = layout(sys3).basepoint
        path = Path.from_points([x0, x0 + 1.1, x0 + 1.1 - 2.3j, x0 - 0.4j])
        T = transport(sys3, path).matrix
        T_rev = transport(sys3, path.reversed()).matrix
        assert np.abs(T_rev @ T - np.eye(2)).max() < 1e-9

    def test_det_and_error_estimate(self, sys3):
        g = layout(sys3).loops[0]
        res = transport(sys3, g, tol=1e-10)
        assert abs(np.linalg.det(res.matrix) - 1.0) < 1e-9
        assert res.error_estimate < 1e-10
        assert res.length > 0

    def test_clearance_violation(self, sys3):
        x0 = layout(sys3).basepoint
        bad = Path.from_points([x0, sys3.punctures[1] + sys3.clearance / 10])
        with pytest.raises(ClearanceViolation):
            transport(sys3, bad)

    def test_caching_returns_same_result(self, sys3):
        g = layout(sys3).loops[1]
        r1 = transport(sys3, g)
        r2 = transport(sys3, g)
        assert r1 is r2

    def test_homotopy_invariance(self, sys3):
        # perturb interior vertices by <= clearance/2: transport moves <= 10 tol
        g = layout(sys3).loops[0]
        T = transport(sys3, g, tol=1e-10).matrix
        rng = np.random.default_rng(3)
        verts = list(g.vertices)
        for i in range(1, len(verts) - 1):
            dz = rng.standard_normal() + 1j * rng.standard_normal()
            verts[i] = verts[i] + 0.45 * sys3.clearance * dz / abs(dz)
        T_pert = transport(sys3, Path.from_points(verts), tol=1e-10).matrix
        assert np.abs(T_pert - T).max() < 10 * 1e-10 + 1e-12


# ---------------------------------------------------------------------------
# monodromy

class TestMonodromy:
    def test_two_pole_eigenvalues(self, twopole):
        a = 0.3 + 0.1j
        S1 = monodromy(twopole, "g1")
        got = np.sort_complex(np.linalg.eigvals(S1))
        want = np.sort_complex(np.array(
            [cmath.exp(2j * np.pi * a), cmath.exp(-2j * np.pi * a)]))
        assert np.abs(got - want).max() < 1e-8

    def test_product_word_trivial(self, sys3, sys4, sys3_sl3):
        for system in (sys3, sys4, sys3_sl3):
            lay = layout(system)
            word = LoopWord(tuple((j, 1) for j in lay.order))
            S = monodromy(system, word)
            N = system.algebra.N
            assert np.abs(S - np.eye(N)).max() < 1e-8

    def test_contractible_word(self, sys3):
        S = monodromy(sys3, "g1 g1^-1")
        assert np.abs(S - np.eye(2)).max() < 1e-10

    def test_decorated_word(self, sys3):
        S_plain = monodromy(sys3, "g1 g3")
        S_dec = monodromy(sys3, "g1 g2 g2^-1 g3")
        assert np.abs(S_plain - S_dec).max() < 1e-9

    def test_word_matches_realized_path(self, sys3):
        word = LoopWord.parse("g2 g1^-1")
        S_word = monodromy(sys3, word)
        S_path = transport(sys3, realize(sys3, word)).matrix
        assert np.abs(S_word - S_path).max() < 1e-9

    def test_homotopic_realizations_agree(self, sys3):
        # an independent hand-drawn loop around puncture 0 only
        z = sys3.punctures
        x0 = layout(sys3).basepoint
        r = 40 * sys3.clearance
        ring = [z[0] + r * cmath.exp(1j * (math.pi / 6 + 2 * np.pi * k / 14))
                for k in range(15)]
        loop = Path.from_points([x0, ring[0]] + ring[1:] + [x0])
        S_hand = transport(sys3, loop).matrix
        S_std = monodromy(sys3, "g1")
        assert np.abs(S_hand - S_std).max() < 1e-8

    def test_basepoint_moved_along_loop(self, sys3):
        # re-rooting the loop at an interior vertex conjugates the transport
        # by the connecting arc; as an ODE-quotient S is unchanged
        g = layout(sys3).loops[0]
        S = transport(sys3, g).matrix
        m = len(g.vertices) // 2
        rerooted = Path.from_points(
            g.vertices[m:] + g.vertices[1:m + 1])
        S_new = transport(sys3, rerooted).matrix
        C = transport(sys3, Path.from_points(g.vertices[:m + 1])).matrix
        assert np.abs(S_new - C @ S @ np.linalg.inv(C)).max() < 1e-8
        ev = np.sort_complex(np.linalg.eigvals(S))
        ev_new = np.sort_complex(np.linalg.eigvals(S_new))
        assert np.abs(ev - ev_new).max() < 1e-8

    def test_word_parsing(self):
        w = LoopWord.parse("g1 g2^-1 g10")
        assert w.word == ((0, 1), (1, -1), (9, 1))
        assert w.inverse().word == ((9, -1), (1, 1), (0, -1))
        with pytest.raises(ValueError):
            LoopWord.parse("h1")
        with pytest.raises(ValueError):
            LoopWord.parse("g1^2")

    def test_layout_deterministic(self):
        a = random_sl2_three()
        b = random_sl2_three()
        la, lb = layout(a), layout(b)
        assert la.basepoint == lb.basepoint
        assert la.order == lb.order
        assert all(pa.vertices == pb.vertices
                   for pa, pb in zip(la.loops, lb.loops))


# ---------------------------------------------------------------------------
# local frames

class TestLocalFrame:
    def test_two_pole_closed_form(self, twopole):
        # Psi_1 = exp(A1 (-L2 - L0)): L2 the continued log(x-z2) at z1,
        # L0 = log(x0-z1) - log(x0-z2), both started principal at x0
        z1, z2 = twopole.punctures
        A1 = twopole.residues[0]
        x0 = layout(twopole).basepoint
        L0 = cmath.log(x0 - z1) - cmath.log(x0 - z2)
        L2 = cmath.log(x0 - z2) + cmath.log((z1 - z2) / (x0 - z2))
        psi_oracle = expm(-A1 * (L2 + L0))
        fr = local_frame(twopole, 0)
        assert np.abs(fr.psi_j - psi_oracle).max() < 1e-6
        assert fr.residual < 1e-5

    def test_reconstruction_matches_monodromy(self, sys3, sys3_sl3):
        for system in (sys3, sys3_sl3):
            S = generator_monodromies(system)
            for j in range(system.n_punctures):
                S_rec = frame_monodromy(system, j)
                assert np.abs(S_rec - S[j]).max() < 1e-6

    def test_power_branch(self, sys3):
        fr = local_frame(sys3, 0)
        t = fr.rho * cmath.exp(1j * fr.theta)
        log_t = math.log(fr.rho) + 1j * fr.theta
        tpow = fr.power(t, log_t)
        # (x-z_j)^{A_j} should solve the one-pole equation d/dt = A_j/t
        A0 = sys3.residues[0]
        h = 1e-6 * fr.rho
        tp = fr.power(t + h, cmath.log(t + h))
        tm = fr.power(t - h, cmath.log(t - h))
        resid = (tp - tm) / (2 * h) - A0 @ tpow / t
        assert np.abs(resid).max() < 1e-4

    def test_series_matches_transport(self, sys3):
        # Psi from the frame data vs direct ODE transport at a nearby point
        fr = local_frame(sys3, 2)
        lay = layout(sys3)
        r = 3.0 * sys3.clearance
        psi_series = fr.psi_at(r, fr.theta)
        x = sys3.punctures[2] + r * cmath.exp(1j * fr.theta)
        psi_ode = transport(sys3, Path.from_points([lay.basepoint, x])).matrix
        assert np.abs(psi_series - psi_ode).max() < 1e-8

    def test_resonant_system_rejected(self):
        A1 = np.diag([0.5, -0.5]).astype(complex)
        with pytest.raises(ResonantSystem):
            make_system(2, [0.0, 1.0], [A1, -A1])


# ---------------------------------------------------------------------------
# M(x.E)

class TestEvaluateM:
    def test_zero_element(self, sys3):
        x0 = layout(sys3).basepoint
        X = BundlePoint(Path.from_points([x0, x0 + 0.9]),
                        np.zeros((2, 2), dtype=complex))
        assert np.abs(evaluate_M(sys3, X)).max() == 0.0

    def test_commuting_element_two_pole(self, twopole):
        A1 = twopole.residues[0]
        x0 = layout(twopole).basepoint
        for x in (x0 + 0.7, x0 - 1.1j, x0 + 0.4 + 0.9j):
            X = BundlePoint(Path.from_points([x0, x]), A1)
            assert np.abs(evaluate_M(twopole, X) - A1).max() < 1e-10

    def test_equivariance(self, sys3):
        rng = np.random.default_rng(11)
        E = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        E = E - np.trace(E) / 2 * np.eye(2)
        x = layout(sys3).basepoint + 0.8 + 0.2j
        word = LoopWord.parse("g2 g1^-1")
        S = monodromy(sys3, word)
        X = BundlePoint(point_route(sys3, x), E)
        E_tw = np.linalg.inv(S) @ E @ S
        X_tw = BundlePoint(point_route(sys3, x, word), E_tw)
        M = evaluate_M(sys3, X)
        M_tw = evaluate_M(sys3, X_tw)
        assert np.abs(M - M_tw).max() < 1e-8

    def test_ode_residual(self, sys3):
        rng = np.random.default_rng(5)
        E = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        E = E - np.trace(E) / 2 * np.eye(2)
        x0 = layout(sys3).basepoint
        x = x0 + 0.6 - 0.3j
        h = 1e-4 * sys3.scale()
        M = evaluate_M(sys3, BundlePoint(point_route(sys3, x), E))
        Mp = evaluate_M(sys3, BundlePoint(
            Path.from_points([x0, x, x + h]), E))
        Mm = evaluate_M(sys3, BundlePoint(
            Path.from_points([x0, x, x - h]), E))
        dM = (Mp - Mm) / (2 * h)
        A = sys3.connection_at(x)
        assert np.abs(dM - (A @ M - M @ A)).max() < 1e-6

    def test_near_puncture_root_exponents(self, sys3):
        """Off-Cartan components of M scale like t^{r} with r running over
        the eigenvalue differences of A_j; fit the complex slope over two
        decades using the verified frame series."""
        j = 0
        fr = local_frame(sys3, j)
        rng = np.random.default_rng(23)
        E = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        E = E - np.trace(E) / 2 * np.eye(2)
        G = fr.psi_j @ E @ np.linalg.inv(fr.psi_j)
        ms = sys3.min_pairwise_distance()
        radii = np.geomspace(1e-5 * ms, 1e-3 * ms, 9)
        vals = []
        for r in radii:
            psi = fr.psi_at(r, fr.theta)
            M = psi @ E @ np.linalg.inv(psi)
            vals.append(fr.Pinv @ M @ fr.P)
        lam = fr.eigenvalues
        for i in range(2):
            for k in range(2):
                if i == k:
                    continue
                want = lam[i] - lam[k]
                # per-step slopes of log F between consecutive radii
                slopes = []
                for m in range(len(radii) - 1):
                    num = np.log(vals[m + 1][i, k] / vals[m][i, k])
                    den = math.log(radii[m + 1] / radii[m])
                    slopes.append(num / den)
                got = np.mean(slopes)
                assert abs(got - want) / abs(want) < 1e-3
