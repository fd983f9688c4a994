"""Endpoint-term validation: twist invariance and the d-omega match."""
import importlib

import numpy as np

from fuchsian_amplitudes import cycles as cyc
from fuchsian_amplitudes.system import FuchsianSystem
from tests.conftest import random_sl2_three

tr = importlib.import_module("fuchsian_amplitudes.transport")


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


def two_param(sys0, X, Y):
    res0 = [A.copy() for A in sys0.residues]

    def at(s, t):
        res = [A + s * xk + t * yk for A, xk, yk in zip(res0, X, Y)]
        return FuchsianSystem(sys0.algebra, sys0.punctures, res)
    return at


def slice_family(at, s_fixed, axis):
    if axis == "t":
        return lambda u: at(s_fixed, u)
    return lambda u: at(u, s_fixed)


def omega_of(at, s, axis, lay=None):
    fam = slice_family(at, s, axis)
    r = cyc.malgrange_cycle(fam, base=fam(0.0), lay=lay)
    return r


def main():
    sys0 = random_sl2_three(5)
    X = residue_dirs(sys0, 8)
    Y = residue_dirs(sys0, 21)
    at = two_param(sys0, X, Y)

    lay0 = tr.layout(sys0)
    fam_x = slice_family(at, 0.0, "s")
    fam_y = slice_family(at, 0.0, "t")
    B1 = cyc.malgrange_cycle(fam_x, base=sys0)
    print(f"B1 (default star): hub={B1.hub_defect:.1e} "
          f"gen={B1.generalized_defect:.1e} omega={B1.omega:.6g}")

    twists = (0.30, -0.22, 0.14)
    vals = []
    for tw in twists:
        lay_m = tr.layout(sys0, basepoint=lay0.basepoint, rho_scale=0.72,
                          corridor_scale=0.55, entry_twist=tw)
        B2 = cyc.malgrange_cycle(fam_y, base=sys0, lay=lay_m)
        interior = cyc._crossing_sum(sys0, B1.chain, B2.chain, 1e-12)
        pinned = cyc._pinned_pair_sum(sys0, B1.chain, B2.chain, 1e-12)
        P = cyc.intersection(sys0, B1.chain, B2.chain)
        vals.append(P)
        print(f"twist {tw:+.2f}: interior={interior:.6g} "
              f"pinned={pinned:.6g} total={P:.6g}")
    sp = max(abs(v - vals[0]) for v in vals[1:])
    print(f"twist invariance spread: {sp:.3e}")
    lay_m = tr.layout(sys0, basepoint=lay0.basepoint, rho_scale=0.72,
                      corridor_scale=0.55, entry_twist=0.30)
    B2 = cyc.malgrange_cycle(fam_y, base=sys0, lay=lay_m)
    anti = cyc.intersection(sys0, B2.chain, B1.chain) + vals[0]
    print(f"antisymmetry defect: {abs(anti):.3e}")

    for H in (2e-3, 1e-3):
        wt_p = omega_of(at, H, "t").omega
        wt_m = omega_of(at, -H, "t").omega
        ws_p = omega_of(at, H, "s").omega
        ws_m = omega_of(at, -H, "s").omega
        dom = (wt_p - wt_m) / (2 * H) - (ws_p - ws_m) / (2 * H)
        print(f"H={H:.0e}: dom={dom:.8g}")
        if H == 1e-3:
            print(f"ratio dom / (B1,B2) = {dom / vals[0]:.8g}")


if __name__ == "__main__":
    main()
