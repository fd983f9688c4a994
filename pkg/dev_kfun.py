"""Measure K_ef(Delta) on two-pole systems with varied exponents."""
import numpy as np

from dev_curv import residue_dirs, shifted
from dev_kern import decompose, kernel_data
from tests.conftest import two_pole_sl2
import importlib

tr = importlib.import_module("fuchsian_amplitudes.transport")


def coords(h):
    return np.array([h[0, 0], h[0, 1], h[1, 0]])


def two_pole_at(d):
    return two_pole_sl2(a=d)


def kef_for(sys2, pair_seeds=((3, 4), (5, 6))):
    lay = tr.layout(sys2)
    vals = []
    for a, b in pair_seeds:
        X = residue_dirs(sys2, a)
        Y = residue_dirs(sys2, b)
        hub, punc = decompose(sys2, X, Y, 0.3, n_circ=240)
        kd = kernel_data(sys2, X, Y, lay)
        for j in (0, 1):
            h1, h2, lam = kd[j]
            c1, c2 = coords(h1), coords(h2)
            det = c1[1] * c2[2] - c1[2] * c2[1]
            # orient by the sign of the first exponent
            dj = lam[0]
            k = sum(punc[j]) / det
            vals.append((dj, k))
    return vals


def main():
    ds = [0.3 + 0.1j, 0.15 + 0.05j, 0.22 - 0.12j, 0.08 + 0.2j,
          0.4 + 0.02j, 0.05 - 0.03j]
    print("   d            Delta        K_ef(measured, by sample)")
    for d in ds:
        sys2 = two_pole_at(d)
        vals = kef_for(sys2)
        for dj, k in vals:
            print(f"  d_first={dj:.4g}  Delta={2 * dj:.4g}  K={k:.6g}")


if __name__ == "__main__":
    main()
