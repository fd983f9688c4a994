"""Fit the pinned-endpoint coefficients against the measured curvature."""
import importlib
import itertools

import numpy as np

from fuchsian_amplitudes import cycles as cyc
from fuchsian_amplitudes.lie import killing
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


def endpoint_ds(sys0, chain):
    out = {}
    for _, arc in chain.terms:
        if arc.end_puncture is not None:
            out[arc.end_puncture] = cyc._puncture_gauge(sys0, arc, 1e-12)[5]
    return out


def main():
    print("two-pole sanity: curvature of a residue family")
    s2 = two_pole_sl2()
    X2 = residue_dirs(s2, 3)
    Y2 = residue_dirs(s2, 4)
    print(f"  dom(two-pole) = {curvature(s2, X2, Y2):.6g}")

    sys0 = random_sl2_three(5)
    lay0 = tr.layout(sys0)
    print(f"cut order: {lay0.order}")
    seeds = (8, 21, 33, 44)
    dirs = {k: residue_dirs(sys0, k) for k in seeds}
    chains = {}
    lay_m = tr.layout(sys0, basepoint=lay0.basepoint, rho_scale=0.72,
                      corridor_scale=0.55, entry_twist=0.30)
    for k in seeds:
        def fam(u, Xk=dirs[k]):
            return shifted(sys0, Xk, u)
        chains[k] = (cyc.malgrange_cycle(fam, base=sys0),
                     cyc.malgrange_cycle(fam, base=sys0, lay=lay_m))

    rows = []
    rhs = []
    n_p = sys0.n_punctures
    for a, b in itertools.combinations(seeds, 2):
        dom = curvature(sys0, dirs[a], dirs[b])
        D1 = endpoint_ds(sys0, chains[a][0].chain)
        D2 = endpoint_ds(sys0, chains[b][1].chain)
        pi = [killing(D1[j], D2[j]) for j in range(n_p)]
        rows.append(pi)
        rhs.append(dom)
        print(f"pair ({a},{b}): dom={dom:.6g}  pi="
              + " ".join(f"{p:.4g}" for p in pi))
    Arows = np.array(rows)
    bvec = np.array(rhs)
    kappa, res, rank, sv = np.linalg.lstsq(Arows, bvec, rcond=None)
    fitres = np.abs(Arows @ kappa - bvec)
    print(f"kappa (puncture order 0..{n_p - 1}): "
          + " ".join(f"{k:.6g}" for k in kappa))
    print(f"fit residuals: {fitres}")
    print(f"max residual / max|dom|: "
          f"{fitres.max() / max(abs(bvec)):.3e}")


if __name__ == "__main__":
    main()
