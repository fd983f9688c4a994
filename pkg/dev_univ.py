"""Universality check: kernel formula predicts per-puncture curvature
content on a generic three-pole system."""
import numpy as np

from dev_curv import residue_dirs
from dev_kern import decompose, kernel_data
from tests.conftest import random_sl2_three
import importlib

tr = importlib.import_module("fuchsian_amplitudes.transport")


def K_formula(N, D):
    return N * (2 * np.pi * D - np.sin(2 * np.pi * D)) / (
        2 * np.pi * np.sin(np.pi * D) ** 2)


def main():
    sys0 = random_sl2_three(5)
    X = residue_dirs(sys0, 8)
    Y = residue_dirs(sys0, 21)
    dom = 13.5906 - 2.96792j
    lay = tr.layout(sys0)
    kd = kernel_data(sys0, X, Y, lay)
    hub, punc = decompose(sys0, X, Y, 0.25, n_circ=640)
    total = hub
    print(f"hub = {hub:.6g}")
    for j in sorted(punc):
        h1, h2, lam = kd[j]
        D = lam[0] - lam[1]
        pred = K_formula(sys0.algebra.N, D) * (
            h1[0, 1] * h2[1, 0] - h1[1, 0] * h2[0, 1])
        meas = sum(punc[j])
        total += meas
        print(f"j={j}: Delta={D:.4g}")
        print(f"   measured PUNC = {meas:.6g}")
        print(f"   kernel pred   = {pred:.6g}   "
              f"rel.err={abs(meas - pred) / abs(pred):.2e}")
    print(f"total = {total:.8g}  vs dom {dom:.6g}  "
          f"diff={abs(total - dom):.2e}")


if __name__ == "__main__":
    main()
