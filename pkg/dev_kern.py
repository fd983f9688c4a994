"""Decompose the curvature into hub + per-puncture parts and test
epsilon-independence; print candidate endpoint-kernel values."""
import cmath
import math

import numpy as np
from scipy.integrate import quad

from dev_curv import (H, TOL, a_of, compose, edge_data, residue_dirs,
                      seg_twd, shifted, trunc_path)
from fuchsian_amplitudes import cycles as cyc
from fuchsian_amplitudes.lie import killing
from tests.conftest import random_sl2_three, two_pole_sl2
import importlib

tr = importlib.import_module("fuchsian_amplitudes.transport")


def theta_pair(sys, X, Y, app, path=None):
    N = sys.algebra.N
    if app is None:
        T0 = np.eye(N, dtype=complex)
        d10 = np.zeros((N, N), dtype=complex)
        d20 = np.zeros((N, N), dtype=complex)
    else:
        _, d10 = tr.transport_with_derivative(sys, X, app, TOL)
        T0, d20 = tr.transport_with_derivative(sys, Y, app, TOL)
    if path is None:
        T, d1, d2 = T0, d10, d20
    else:
        _, d1e = tr.transport_with_derivative(sys, X, path, TOL)
        Te, d2e = tr.transport_with_derivative(sys, Y, path, TOL)
        T = Te @ T0
        d1 = d1e @ T0 + Te @ d10
        d2 = d2e @ T0 + Te @ d20
    return T, np.linalg.solve(T, d1), np.linalg.solve(T, d2)


def circle_integral(sys, X, Y, T, d1, d2, zj, x_eps, n_circ=240):
    eps = abs(x_eps - zj)
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
    return complex(np.sum(0.5 * (lam[:-1] + lam[1:]) * dx))


def tail_R(sys, dirs, lay, m, j, eps_frac):
    """R_j = int_0^{r_eps} (<A, M> e^{i phi} - kappa/r) dr for the full
    edge element, via the local Frobenius frame."""
    data = edge_data(sys, dirs, lay)
    _, eta, app = data[m]
    path, x_eps, r_eps = trunc_path(sys, lay, j, eps_frac)
    T = tr.transport(sys, path, TOL).matrix
    if app is not None:
        T = T @ tr.transport(sys, app, TOL).matrix
    M_eps = T @ eta @ np.linalg.inv(T)
    zj = sys.punctures[j]
    fr = tr.local_frame(sys, j, TOL)
    phi = cmath.phase(x_eps - zj)
    phi_br = fr.theta + math.remainder(phi - fr.theta, 2.0 * math.pi)
    Psi_eps = fr.psi_at(r_eps, phi_br)
    E_hat = np.linalg.solve(Psi_eps, M_eps @ Psi_eps)
    D_full = fr.psi_j @ E_hat @ np.linalg.inv(fr.psi_j)
    D_h, _ = cyc._cartan_split(sys, j, D_full)
    kappa = killing(sys.residues[j], D_h)
    e_phi = cmath.exp(1j * phi)

    def f(r):
        Psi = fr.psi_at(r, phi_br)
        M = Psi @ E_hat @ np.linalg.inv(Psi)
        x = zj + r * e_phi
        return killing(a_of(sys, x), M) * e_phi - kappa / r

    re = quad(lambda r: f(r).real, 0.0, r_eps, limit=400, epsabs=1e-11)[0]
    im = quad(lambda r: f(r).imag, 0.0, r_eps, limit=400, epsabs=1e-11)[0]
    return re + 1j * im


def decompose(sys0, X, Y, eps_frac, n_circ=240):
    lay = tr.layout(sys0)
    N = sys0.algebra.N
    pref = 2.0 * N / (2j * np.pi)
    dataX = edge_data(sys0, X, lay)
    dataY = edge_data(sys0, Y, lay)
    hub = 0.0 + 0.0j
    punc = {}
    for m, ((j, etaX, app), (_, etaY, _)) in enumerate(zip(dataX, dataY)):
        _, th1h, th2h = theta_pair(sys0, X, Y, app)
        hub -= pref * np.trace(etaY @ th1h - etaX @ th2h)
        path, x_eps, r_eps = trunc_path(sys0, lay, j, eps_frac)
        T, th1, th2 = theta_pair(sys0, X, Y, app, path)
        endb = pref * np.trace(etaY @ th1 - etaX @ th2)
        circ = pref * circle_integral(sys0, X, Y, T,
                                      T @ th1, T @ th2,
                                      sys0.punctures[j], x_eps, n_circ)
        tail = ((tail_R(shifted(sys0, X, H), Y, lay, m, j, eps_frac)
                 - tail_R(shifted(sys0, X, -H), Y, lay, m, j, eps_frac))
                / (2 * H)
                - (tail_R(shifted(sys0, Y, H), X, lay, m, j, eps_frac)
                   - tail_R(shifted(sys0, Y, -H), X, lay, m, j, eps_frac))
                / (2 * H)) / (2j * np.pi)
        punc[j] = (endb, circ, tail)
    return hub, punc


def kernel_data(sys0, X, Y, lay):
    """Endpoint element coordinates of both chains in the A_j eigenframe."""
    dataX = edge_data(sys0, X, lay)
    dataY = edge_data(sys0, Y, lay)
    out = {}
    for (j, etaX, app), (_, etaY, _) in zip(dataX, dataY):
        path, x_eps, r_eps = trunc_path(sys0, lay, j, 0.3)
        T = tr.transport(sys0, path, TOL).matrix
        if app is not None:
            T = T @ tr.transport(sys0, app, TOL).matrix
        zj = sys0.punctures[j]
        fr = tr.local_frame(sys0, j, TOL)
        phi = cmath.phase(x_eps - zj)
        phi_br = fr.theta + math.remainder(phi - fr.theta, 2.0 * math.pi)
        Psi_eps = fr.psi_at(r_eps, phi_br)
        cd = sys0.cartan_data(j)
        hs = []
        for eta in (etaX, etaY):
            M_eps = T @ eta @ np.linalg.inv(T)
            E_hat = np.linalg.solve(Psi_eps, M_eps @ Psi_eps)
            D_full = fr.psi_j @ E_hat @ np.linalg.inv(fr.psi_j)
            hs.append(cd.Pinv @ D_full @ cd.P)
        out[j] = (hs[0], hs[1], cd.eigenvalues)
    return out


def report(name, sys0, X, Y, dom):
    print(f"=== {name} ===")
    for eps_frac in (0.3, 0.18):
        hub, punc = decompose(sys0, X, Y, eps_frac)
        tot = hub + sum(sum(p) for p in punc.values())
        print(f"  eps_frac={eps_frac}: hub={hub:.6g}")
        for j, (endb, circ, tail) in sorted(punc.items()):
            print(f"    j={j}: endb={endb:.6g} circ={circ:.6g} "
                  f"tail={tail:.6g}  sum={endb + circ + tail:.6g}")
        print(f"  total={tot:.8g}  dom={dom:.8g}  "
              f"diff={abs(tot - dom):.3e}")
    lay = tr.layout(sys0)
    kd = kernel_data(sys0, X, Y, lay)
    twoN = 2.0 * sys0.algebra.N
    for j, (h1, h2, lam) in sorted(kd.items()):
        d1 = np.diag(np.diag(h1))
        d2 = np.diag(np.diag(h2))
        cart = twoN * np.trace(d1 @ d2)
        full = twoN * np.trace(h1 @ h2)
        print(f"  j={j}: exps={np.round(lam, 4)}")
        print(f"     <D1h,D2h>={cart:.6g}  <D1,D2>={full:.6g}")
        print(f"     h1 offdiag={h1[0, 1]:.4g},{h1[1, 0]:.4g}  "
              f"h2 offdiag={h2[0, 1]:.4g},{h2[1, 0]:.4g}")


def main():
    s2 = two_pole_sl2()
    X2 = residue_dirs(s2, 3)
    Y2 = residue_dirs(s2, 4)
    report("two-pole", s2, X2, Y2, 0.0 + 0.0j)

    sys0 = random_sl2_three(5)
    X = residue_dirs(sys0, 8)
    Y = residue_dirs(sys0, 21)
    report("sl2 seed5 (8,21)", sys0, X, Y, 13.5906 - 2.96792j)


if __name__ == "__main__":
    main()
