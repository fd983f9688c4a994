"""Is the deformation chain a null class? Pair it against a basis."""
import numpy as np

import importlib

from fuchsian_amplitudes import cycles as cyc
tr = importlib.import_module("fuchsian_amplitudes.transport")
from fuchsian_amplitudes.system import FuchsianSystem
from tests.conftest import random_sl2_three


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
    rep = cyc.cycle_space(sys0)
    print(f"basis cycles: {rep.total} (warning={rep.warning})")

    lay_m = tr.layout(sys0, basepoint=tr.layout(sys0).basepoint,
                      rho_scale=0.72, corridor_scale=0.55, entry_twist=0.30)

    fam_r = residue_family(sys0, rand_dirs(sys0, 8))
    r_res = cyc.malgrange_cycle(fam_r, base=sys0, lay=lay_m)
    print(f"residue fam: hub={r_res.hub_defect:.1e} "
          f"gen={r_res.generalized_defect:.1e} omega={r_res.omega:.6g}")
    vals = [cyc.intersection(sys0, b, r_res.chain) for b in rep.basis]
    print("  (basis_k, B_res):", " ".join(f"{abs(v):.3e}" for v in vals))

    N = sys0.algebra.N
    rng = np.random.default_rng(77)
    Xg = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    Xg = Xg - np.trace(Xg) / N * np.eye(N)
    fam_g = gauge_family(sys0, 0.4 * Xg)
    r_g = cyc.malgrange_cycle(fam_g, base=sys0, lay=lay_m)
    print(f"gauge fam:   hub={r_g.hub_defect:.1e} "
          f"gen={r_g.generalized_defect:.1e} omega={r_g.omega:.6g}")
    vals = [cyc.intersection(sys0, b, r_g.chain) for b in rep.basis]
    print("  (basis_k, B_gauge):", " ".join(f"{abs(v):.3e}" for v in vals))

    # reference: what the display formula predicts for the gauge chain
    # against one lasso cycle, summed over loops in angular order
    lay0 = tr.layout(sys0)
    S = {j: tr.transport(sys0, lay0.loops[j]).matrix
         for j in range(sys0.n_punctures)}
    from fuchsian_amplitudes.lie import killing
    for kb, b in enumerate(rep.basis):
        pred = 0.0 + 0.0j
        # B_gauge ~ sum_m [gamma_m.X_m] with X_m s.t. edge elems eta_m =
        # (1-Ad_{J_m})X_m in cut frame; here just check magnitude scale
        pred = sum(abs(c) for c, _ in b.terms)
        print(f"  basis {kb}: {len(b.terms)} lasso terms, |coeff| sum "
              f"{pred:.2f}")


if __name__ == "__main__":
    main()
