"""Finite-cutoff validation of the curvature localization.

LHS: finite-difference antisymmetrized derivative of the truncated edge
integrals t_Y(sys) = (1/2pi i) sum_m int_{x0}^{x_eps} <A, M_eta> dx.
RHS: (2N/2pi i) { sum_m [tr(eta2 Th1 - eta1 Th2)]_{hub}^{eps-end}
                  + sign-combos of circle integrals of
                    lambda = tr(Psi^-1 Psi' [Th1, Th2]) }.
The identity is exact at every cutoff; no epsilon limit is taken.
"""
import importlib

import numpy as np

from fuchsian_amplitudes import cycles as cyc
from fuchsian_amplitudes.system import FuchsianSystem
from tests.conftest import random_sl2_three, two_pole_sl2

tr = importlib.import_module("fuchsian_amplitudes.transport")

H = 1e-3
TOL = 1e-12


def residue_dirs(sys0, seed, amp=0.3):
    rng = np.random.default_rng(seed)
    n = sys0.n_punctures
    N = sys0.algebra.N
    X = [rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
         for _ in range(n)]
    X = [x - np.trace(x) / N * np.eye(N) for x in X]
    sc = max(float(np.abs(A).max()) for A in sys0.residues)
    X = [amp * sc * x / max(1.0, float(np.abs(x).max())) for x in X]
    X[n - 1] = -sum(X[:n - 1])
    return X


def shifted(sys0, X, h):
    res = [A + h * xk for A, xk in zip(sys0.residues, X)]
    return FuchsianSystem(sys0.algebra, sys0.punctures, res)


def edge_data(sys, dirs, lay):
    """Per cut in angular order: (j, eta, app, edge_path truncated later)."""
    order = lay.order
    N = sys.algebra.N
    S0, dS0 = {}, {}
    for j in order:
        S0[j], dS0[j] = tr.transport_with_derivative(sys, dirs,
                                                     lay.loops[j], TOL)
    out = []
    W = np.eye(N, dtype=complex)
    dW = np.zeros((N, N), dtype=complex)
    for m, j in enumerate(order):
        Winv = np.linalg.inv(W)
        J = Winv @ S0[j] @ W
        dJ = Winv @ (dS0[j] + S0[j] @ dW @ Winv - dW @ Winv @ S0[j]) @ W
        eta = dJ @ np.linalg.inv(J)
        eta -= np.trace(eta) / N * np.eye(N)
        word = " ".join(f"g{k + 1}" for k in order[:m])
        app = tr.realize(sys, tr.LoopWord.parse(word), lay) if word else None
        out.append((j, eta, app))
        dW = dS0[j] @ W + S0[j] @ dW
        W = S0[j] @ W
    return out


def trunc_path(sys, lay, j, eps_frac):
    zj = sys.punctures[j]
    entry = lay.spokes[j].end
    rho = abs(entry - zj)
    eps = eps_frac * rho
    phi = (entry - zj) / rho
    x_eps = zj + eps * phi
    return tr.Path.from_points([lay.basepoint, entry, x_eps]), x_eps, eps


def t_trunc(sys, dirs, lay, eps_frac):
    """(1/2pi i) sum_m of the truncated edge integrals of <A, M>."""
    data = edge_data(sys, dirs, lay)
    terms = []
    for j, eta, app in data:
        path, x_eps, eps = trunc_path(sys, lay, j, eps_frac)
        terms.append((1.0 + 0.0j, cyc.Arc(path=path, E=eta, approach=app)))
    val = cyc.integrate_W1(sys, cyc.Chain(tuple(terms)), TOL)
    return val / (2j * np.pi)


def a_of(sys, x):
    A = np.zeros_like(sys.residues[0])
    for Ak, zk in zip(sys.residues, sys.punctures):
        A = A + Ak / (x - zk)
    return A


def compose(T, dT1, dT2, Ts, dTs1, dTs2):
    return (Ts @ T, dTs1 @ T + Ts @ dT1, dTs2 @ T + Ts @ dT2)


def seg_twd(sys, X, Y, a, b):
    p = tr.Path.from_points([a, b])
    _, d1 = tr.transport_with_derivative(sys, X, p, TOL)
    T, d2 = tr.transport_with_derivative(sys, Y, p, TOL)
    return T, d1, d2


def rhs_terms(sys, X, Y, lay, eps_frac, n_circ=160):
    dataX = edge_data(sys, X, lay)
    dataY = edge_data(sys, Y, lay)
    N = sys.algebra.N
    bnd = 0.0 + 0.0j
    circ = {}
    for (j, etaX, app), (_, etaY, _) in zip(dataX, dataY):
        path, x_eps, eps = trunc_path(sys, lay, j, eps_frac)
        # hub end: Theta through the access alone
        if app is None:
            T0 = np.eye(N, dtype=complex)
            d10 = np.zeros((N, N), dtype=complex)
            d20 = np.zeros((N, N), dtype=complex)
        else:
            _, d10 = tr.transport_with_derivative(sys, X, app, TOL)
            T0, d20 = tr.transport_with_derivative(sys, Y, app, TOL)
        Th1_hub = np.linalg.solve(T0, d10)
        Th2_hub = np.linalg.solve(T0, d20)
        # eps end
        _, d1e = tr.transport_with_derivative(sys, X, path, TOL)
        Te, d2e = tr.transport_with_derivative(sys, Y, path, TOL)
        T = Te @ T0
        d1 = d1e @ T0 + Te @ d10
        d2 = d2e @ T0 + Te @ d20
        Th1 = np.linalg.solve(T, d1)
        Th2 = np.linalg.solve(T, d2)
        bnd += np.trace(etaY @ Th1 - etaX @ Th2)
        bnd -= np.trace(etaY @ Th1_hub - etaX @ Th2_hub)
        # circle at the puncture, CCW from the eps end of the edge
        zj = sys.punctures[j]
        phi0 = np.angle(x_eps - zj)
        thetas = phi0 + np.linspace(0.0, 2.0 * np.pi, n_circ + 1)
        nodes = zj + eps * np.exp(1j * thetas)
        lam = np.empty(n_circ + 1, dtype=complex)

        def lam_at(Tc, d1c, d2c, x):
            Q = np.linalg.solve(Tc, a_of(sys, x) @ Tc)
            t1 = np.linalg.solve(Tc, d1c)
            t2 = np.linalg.solve(Tc, d2c)
            return np.trace(Q @ (t1 @ t2 - t2 @ t1))

        Tc, d1c, d2c = T, d1, d2
        lam[0] = lam_at(Tc, d1c, d2c, nodes[0])
        for k in range(n_circ):
            Ts, ds1, ds2 = seg_twd(sys, X, Y, nodes[k], nodes[k + 1])
            Tc, d1c, d2c = compose(Tc, d1c, d2c, Ts, ds1, ds2)
            lam[k + 1] = lam_at(Tc, d1c, d2c, nodes[k + 1])
        dx = np.diff(nodes)
        circ[j] = complex(np.sum(0.5 * (lam[:-1] + lam[1:]) * dx))
    # big circle
    span = max(abs(z - lay.basepoint) for z in sys.punctures)
    R = 4.0 * span
    x_R = lay.basepoint + R
    ray = tr.Path.from_points([lay.basepoint, x_R])
    _, d1r = tr.transport_with_derivative(sys, X, ray, TOL)
    Tr_, d2r = tr.transport_with_derivative(sys, Y, ray, TOL)
    thetas = np.linspace(0.0, 2.0 * np.pi, 2 * n_circ + 1)
    nodes = lay.basepoint + R * np.exp(1j * thetas)
    lam = np.empty(2 * n_circ + 1, dtype=complex)
    Tc, d1c, d2c = Tr_, d1r, d2r

    def lam_at(Tc, d1c, d2c, x):
        Q = np.linalg.solve(Tc, a_of(sys, x) @ Tc)
        t1 = np.linalg.solve(Tc, d1c)
        t2 = np.linalg.solve(Tc, d2c)
        return np.trace(Q @ (t1 @ t2 - t2 @ t1))

    lam[0] = lam_at(Tc, d1c, d2c, nodes[0])
    for k in range(2 * n_circ):
        Ts, ds1, ds2 = seg_twd(sys, X, Y, nodes[k], nodes[k + 1])
        Tc, d1c, d2c = compose(Tc, d1c, d2c, Ts, ds1, ds2)
        lam[k + 1] = lam_at(Tc, d1c, d2c, nodes[k + 1])
    dx = np.diff(nodes)
    circ_inf = complex(np.sum(0.5 * (lam[:-1] + lam[1:]) * dx))
    return bnd, circ, circ_inf


def run_case(name, sys0, X, Y, eps_frac):
    lay = tr.layout(sys0)
    N = sys0.algebra.N
    pref = 2.0 * N / (2j * np.pi)

    def tX(s):
        return t_trunc(s, X, lay, eps_frac)

    def tY(s):
        return t_trunc(s, Y, lay, eps_frac)

    lhs = ((tY(shifted(sys0, X, H)) - tY(shifted(sys0, X, -H))) / (2 * H)
           - (tX(shifted(sys0, Y, H)) - tX(shifted(sys0, Y, -H))) / (2 * H))
    bnd, circ, cinf = rhs_terms(sys0, X, Y, lay, eps_frac)
    csum = sum(circ.values())
    print(f"--- {name} (eps_frac={eps_frac}) ---")
    print(f"  LHS (FD of truncated)   = {lhs:.8g}")
    print(f"  bnd = {bnd:.6g}  csum = {csum:.6g}  cinf = {cinf:.6g}")
    for a in (1.0, -1.0):
        for b in (1.0, -1.0):
            rhs = pref * (bnd + a * csum + b * cinf)
            print(f"  RHS a={a:+.0f} b={b:+.0f}: {rhs:.8g}   "
                  f"diff={abs(rhs - lhs):.3e}")
    for a in (1.0, -1.0):
        rhs = pref * (bnd + a * csum)
        print(f"  RHS a={a:+.0f} no-inf: {rhs:.8g}   "
              f"diff={abs(rhs - lhs):.3e}")


def main():
    s2 = two_pole_sl2()
    X2 = residue_dirs(s2, 3)
    Y2 = residue_dirs(s2, 4)
    run_case("two-pole", s2, X2, Y2, 0.3)

    sys0 = random_sl2_three(5)
    X = residue_dirs(sys0, 8)
    Y = residue_dirs(sys0, 21)
    run_case("sl2 seed5 (8,21)", sys0, X, Y, 0.3)


if __name__ == "__main__":
    main()
