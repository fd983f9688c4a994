"""Bisection probe: pure-loop B-chains from global conjugation families."""
import sys
import numpy as np
from scipy.linalg import expm

sys.path.insert(0, "/root/pkg/src")

from fuchsian_amplitudes.system import make_system
import importlib
cyc = importlib.import_module("fuchsian_amplitudes.cycles")


def _rt(rng, N, scale):
    X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    return scale * (X - np.trace(X) / N * np.eye(N))


def run(seed=5, scale=0.6):
    rng = np.random.default_rng(seed)
    z = np.array([0.0 + 0.0j, 1.0 + 0.0j, 0.4 + 0.9j])
    A1 = _rt(rng, 2, 0.22)
    A2 = _rt(rng, 2, 0.22)
    A = [A1, A2, -(A1 + A2)]
    X = _rt(rng, 2, scale)
    Y = _rt(rng, 2, scale)

    def fam(s1, s2):
        C = expm(s1 * X) @ expm(s2 * Y)
        Ci = np.linalg.inv(C)
        return make_system(2, z, [C @ a @ Ci for a in A])

    base = fam(0.0, 0.0)
    r1 = cyc.malgrange_cycle(lambda t: fam(t, 0.0), base=base)
    r2 = cyc.malgrange_cycle(lambda t: fam(0.0, t), base=base)
    narc1 = sum(1 for _, a in r1.chain.terms if a.end_puncture is not None)
    narc2 = sum(1 for _, a in r2.chain.terms if a.end_puncture is not None)
    print(f"seed {seed}: hub1={r1.hub_defect:.2e} gen1={r1.generalized_defect:.2e} "
          f"punct-arcs: {narc1},{narc2} (want 0,0)")
    print(f"  omega1={r1.omega:.6g}  omega2={r2.omega:.6g}")

    P12 = cyc.intersection(base, r1.chain, r2.chain)
    P21 = cyc.intersection(base, r2.chain, r1.chain)
    print(f"  P12={P12:.6g}  antisym defect={abs(P12+P21):.2e}")

    H = 1e-3
    def om(k, s):
        if k == 1:
            return cyc.malgrange_cycle(lambda t: fam(t, s),
                                       base=fam(0.0, s)).omega
        return cyc.malgrange_cycle(lambda t: fam(s, t),
                                   base=fam(s, 0.0)).omega

    for HH in (H, H / 2):
        dom = (om(2, HH) - om(2, -HH)) / (2 * HH) \
            - (om(1, HH) - om(1, -HH)) / (2 * HH)
        print(f"  H={HH:g}: dom={dom:.6g}  ratio={dom / P12:.6g}"
              if abs(P12) > 1e-12 else f"  H={HH:g}: dom={dom:.6g} (P12~0)")


if __name__ == "__main__":
    run(5)
    run(23)
