"""Pair deformation chains against puncture-ending (B-type) probes."""
import importlib

import numpy as np

from fuchsian_amplitudes import cycles as cyc
from fuchsian_amplitudes.lie import killing
from fuchsian_amplitudes.system import FuchsianSystem
from tests.conftest import random_sl2_three

tr = importlib.import_module("fuchsian_amplitudes.transport")


def residue_family(sys0, X):
    res0 = [A.copy() for A in sys0.residues]
    n = len(res0)

    def fam(t):
        res = [A + t * X[k] for k, A in enumerate(res0)]
        res[n - 1] = -sum(res[:n - 1])
        return FuchsianSystem(sys0.algebra, sys0.punctures, res)
    return fam


def gauge_family(sys0, X):
    import scipy.linalg as sla

    def fam(t):
        C = sla.expm(t * X)
        Ci = np.linalg.inv(C)
        return FuchsianSystem(sys0.algebra, sys0.punctures,
                              [C @ A @ Ci for A in sys0.residues])
    return fam


def rand_dirs(sys0, seed):
    rng = np.random.default_rng(seed)
    n = sys0.n_punctures
    N = sys0.algebra.N
    X = [rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
         for _ in range(n)]
    X = [x - np.trace(x) / N * np.eye(N) for x in X]
    sc = max(float(np.abs(A).max()) for A in sys0.residues)
    return [0.3 * sc * x / max(1.0, float(np.abs(x).max())) for x in X]


def main():
    sys0 = random_sl2_three(5)
    lay_m = tr.layout(sys0, basepoint=tr.layout(sys0).basepoint,
                      rho_scale=0.72, corridor_scale=0.55, entry_twist=0.30)
    fam_r = residue_family(sys0, rand_dirs(sys0, 8))
    r_res = cyc.malgrange_cycle(fam_r, base=sys0, lay=lay_m)
    B = r_res.chain

    rng = np.random.default_rng(123)
    N = sys0.algebra.N
    print("edge probes [delta_j.E_comm] on the default star:")
    for j in range(sys0.n_punctures):
        E = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        E -= np.trace(E) / N * np.eye(N)
        E_c, F = cyc.commutant_split(sys0, j, E)
        probe = cyc.Chain(((1.0 + 0.0j, cyc.puncture_arc(sys0, j, E_c)),))
        v = cyc.intersection(sys0, probe, B)
        print(f"  j={j}: ([delta_j.E_comm], B_res) = {v:.6g}  "
              f"|E_c|={np.abs(E_c).max():.3g}")
        # also the loop probe [gamma_j.F] for contrast
        probe2 = cyc.Chain(((1.0 + 0.0j, cyc.lasso_arc(sys0, j, F)),))
        v2 = cyc.intersection(sys0, probe2, B)
        print(f"        ([gamma_j.F], B_res) = {v2:.6g}")

    Xg = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    Xg -= np.trace(Xg) / N * np.eye(N)
    fam_g = gauge_family(sys0, 0.4 * Xg)
    r_g = cyc.malgrange_cycle(fam_g, base=sys0, lay=lay_m)
    print("same probes against the gauge-family chain:")
    for j in range(sys0.n_punctures):
        E = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        E -= np.trace(E) / N * np.eye(N)
        E_c, F = cyc.commutant_split(sys0, j, E)
        probe = cyc.Chain(((1.0 + 0.0j, cyc.puncture_arc(sys0, j, E_c)),))
        v = cyc.intersection(sys0, probe, r_g.chain)
        print(f"  j={j}: ([delta_j.E_comm], B_gauge) = {v:.6g}")


if __name__ == "__main__":
    main()
