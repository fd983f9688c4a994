"""Fit the per-puncture endpoint kernel PUNC_j = h1^T K h2 on two-pole."""
import itertools

import numpy as np

from dev_curv import residue_dirs
from dev_kern import decompose, kernel_data
from tests.conftest import two_pole_sl2
import importlib

tr = importlib.import_module("fuchsian_amplitudes.transport")


def coords(h):
    return np.array([h[0, 0], h[0, 1], h[1, 0]])


def main():
    s2 = two_pole_sl2()
    lay = tr.layout(s2)
    seeds = list(range(3, 11))
    pairs = list(itertools.combinations(seeds, 2))[:14]
    rows = {0: [], 1: []}
    rhs = {0: [], 1: []}
    for a, b in pairs:
        X = residue_dirs(s2, a)
        Y = residue_dirs(s2, b)
        hub, punc = decompose(s2, X, Y, 0.3, n_circ=320)
        kd = kernel_data(s2, X, Y, lay)
        for j in (0, 1):
            h1, h2, lam = kd[j]
            c1 = coords(h1)
            c2 = coords(h2)
            design = np.outer(c1, c2).ravel()
            rows[j].append(design)
            rhs[j].append(sum(punc[j]))
        print(f"pair ({a},{b}): PUNC0={sum(punc[0]):.6g} "
              f"PUNC1={sum(punc[1]):.6g} hub={abs(hub):.2e}")
    for j in (0, 1):
        A = np.array(rows[j])
        b = np.array(rhs[j])
        K, res, rank, sv = np.linalg.lstsq(A, b, rcond=None)
        pred = A @ K
        resid = np.abs(pred - b)
        print(f"--- puncture {j}: exps "
              f"{np.round(kernel_data(s2, residue_dirs(s2, 3), residue_dirs(s2, 4), lay)[j][2], 4)}")
        print("K =")
        for r in range(3):
            print("   " + "  ".join(f"{K[3 * r + c]:.6g}" for c in range(3)))
        print(f"  max residual = {resid.max():.3e}  "
              f"max |PUNC| = {np.abs(b).max():.3g}")


if __name__ == "__main__":
    main()
