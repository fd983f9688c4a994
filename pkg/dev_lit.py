"""Literal-representative pairing: full eta on each cut arc, no loop split."""
import importlib
import itertools

import numpy as np

from fuchsian_amplitudes import cycles as cyc
from fuchsian_amplitudes.system import FuchsianSystem
from tests.conftest import random_sl2_three, two_pole_sl2

tr = importlib.import_module("fuchsian_amplitudes.transport")

H = 1e-3


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


def omega_dir(sys_base, Y):
    def fam(u):
        return shifted(sys_base, Y, u)
    return cyc.malgrange_cycle(fam, base=sys_base).omega


def curvature(sys0, X, Y):
    t1 = (omega_dir(shifted(sys0, X, H), Y)
          - omega_dir(shifted(sys0, X, -H), Y)) / (2 * H)
    t2 = (omega_dir(shifted(sys0, Y, H), X)
          - omega_dir(shifted(sys0, Y, -H), X)) / (2 * H)
    return t1 - t2


def literal_chain(sys0, X, lay, tol=1e-12, h=1e-5):
    """B = sum over cuts of [edge.eta] with the full eta = dJ J^{-1}."""
    order = lay.order
    N = sys0.algebra.N
    S0, dS0 = {}, {}
    for j in order:
        S0[j], dS0[j] = tr.transport_with_derivative(sys0, X, lay.loops[j],
                                                     tol)
    terms = []
    W = np.eye(N, dtype=complex)
    dW = np.zeros((N, N), dtype=complex)
    for m, j in enumerate(order):
        Winv = np.linalg.inv(W)
        J = Winv @ S0[j] @ W
        dJ = Winv @ (dS0[j] + S0[j] @ dW @ Winv - dW @ Winv @ S0[j]) @ W
        eta = dJ @ np.linalg.inv(J)
        eta -= np.trace(eta) / N * np.eye(N)
        word = " ".join(f"g{k + 1}" for k in order[:m])
        app = tr.realize(sys0, tr.LoopWord.parse(word), lay) if word else None
        entry = lay.spokes[j].end
        edge_path = tr.Path.from_points([lay.basepoint, entry,
                                         sys0.punctures[j]])
        terms.append((1.0 + 0.0j, cyc.Arc(path=edge_path, E=eta,
                                          approach=app, end_puncture=j)))
        dW = dS0[j] @ W + S0[j] @ dW
        W = S0[j] @ W
    return cyc.Chain(tuple(terms))


def main():
    print("=== literal two-pole ===")
    s2 = two_pole_sl2()
    X2 = residue_dirs(s2, 3)
    Y2 = residue_dirs(s2, 4)
    dom2 = curvature(s2, X2, Y2)
    l2a = tr.layout(s2)
    l2b = tr.layout(s2, rho_scale=0.72, corridor_scale=0.55,
                    entry_twist=0.30)
    B1 = literal_chain(s2, X2, l2a)
    B2 = literal_chain(s2, Y2, l2b)
    try:
        pair2 = cyc.intersection(s2, B1, B2)
        print(f"  dom={dom2:.6g}  (B1,B2)={pair2:.6g}")
    except cyc.NonTransversal as e:
        print(f"  dom={dom2:.6g}  NonTransversal: {e}")

    print("=== literal sl2 seed 5 ===")
    sys0 = random_sl2_three(5)
    lay0 = tr.layout(sys0)
    lay_m = tr.layout(sys0, basepoint=lay0.basepoint, rho_scale=0.72,
                      corridor_scale=0.55, entry_twist=0.30)
    seeds = (8, 21, 33)
    dirs = {k: residue_dirs(sys0, k) for k in seeds}
    ch0 = {k: literal_chain(sys0, dirs[k], lay0) for k in seeds}
    chm = {k: literal_chain(sys0, dirs[k], lay_m) for k in seeds}
    for a, b in itertools.combinations(seeds, 2):
        dom = curvature(sys0, dirs[a], dirs[b])
        try:
            pab = cyc.intersection(sys0, ch0[a], chm[b])
            rel = abs(pab - dom) / max(1.0, abs(dom))
            print(f"  ({a},{b}): dom={dom:.6g}  pair={pab:.6g}  rel={rel:.2e}")
        except cyc.NonTransversal as e:
            print(f"  ({a},{b}): dom={dom:.6g}  NonTransversal: {e}")

    print("=== literal invariance (8,21) ===")
    lay_p = tr.layout(sys0, basepoint=lay0.basepoint, rho_scale=0.80,
                      corridor_scale=0.70, entry_twist=-0.22)
    lay_q = tr.layout(sys0, basepoint=lay0.basepoint, rho_scale=0.65,
                      corridor_scale=0.50, entry_twist=0.15)
    chp = literal_chain(sys0, dirs[8], lay_p)
    chq = literal_chain(sys0, dirs[21], lay_q)
    try:
        alt = cyc.intersection(sys0, chp, chq)
        print(f"  alt layouts: pair={alt:.6g}")
    except cyc.NonTransversal as e:
        print(f"  alt layouts NonTransversal: {e}")


if __name__ == "__main__":
    main()
