"""Arc-by-arc crossing audit: basis lasso cycles vs deformation chain."""
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
    lay_m = tr.layout(sys0, basepoint=tr.layout(sys0).basepoint,
                      rho_scale=0.72, corridor_scale=0.55, entry_twist=0.30)
    fam_r = residue_family(sys0, rand_dirs(sys0, 8))
    r_res = cyc.malgrange_cycle(fam_r, base=sys0, lay=lay_m)
    B = r_res.chain
    print("deformation chain arcs:")
    for c, a in B.terms:
        print(f"  coeff={c:.3g} end_puncture={a.end_puncture} "
              f"verts={len(a.path.vertices)} |E|={np.abs(a.E).max():.3g}")
    b0 = rep.basis[0]
    print("basis[0] arcs:")
    for c, a in b0.terms:
        print(f"  coeff={c:.3g} end_puncture={a.end_puncture} "
              f"verts={len(a.path.vertices)} |E|={np.abs(a.E).max():.3g}")
    total = 0.0 + 0.0j
    for i1, (c1, a1) in enumerate(b0.terms):
        for i2, (c2, a2) in enumerate(B.terms):
            hits = cyc._arc_crossings(a1, a2)
            if hits is None:
                print(f"  pair ({i1},{i2}): DEGENERATE")
                continue
            sub = 0.0 + 0.0j
            for i, k, pt, sgn in hits:
                M1 = cyc._m_at(sys0, a1, i, pt, 1e-12)
                M2 = cyc._m_at(sys0, a2, k, pt, 1e-12)
                v = c1 * c2 * sgn * killing(M1, M2)
                sub += v
            total += sub
            if hits:
                print(f"  pair ({i1},{i2}): {len(hits)} crossings, "
                      f"sum={sub:.6g}")
    print(f"grand total: {total:.6g}")


if __name__ == "__main__":
    main()
