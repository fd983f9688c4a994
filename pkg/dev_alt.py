"""(B1, B2) with B2 built on an alternate star, vs coordinate dom."""
import sys
import numpy as np
from scipy.linalg import expm

sys.path.insert(0, "/root/pkg/src")

from fuchsian_amplitudes.system import make_system
import importlib
cyc = importlib.import_module("fuchsian_amplitudes.cycles")
trn = importlib.import_module("fuchsian_amplitudes.transport")


def _rt(rng, N, scale):
    X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    return scale * (X - np.trace(X) / N * np.eye(N))


def report(name, fam, base, H=1e-3):
    lay_alt = trn.layout(base, basepoint=trn.alternate_basepoint(base))
    r1 = cyc.malgrange_cycle(lambda t: fam(t, 0.0), base=base)
    r2 = cyc.malgrange_cycle(lambda t: fam(0.0, t), base=base, lay=lay_alt)
    r2_same = cyc.malgrange_cycle(lambda t: fam(0.0, t), base=base)
    print(f"{name}: hub1={r1.hub_defect:.1e} gen1={r1.generalized_defect:.1e} "
          f"hub2={r2.hub_defect:.1e} gen2={r2.generalized_defect:.1e}")
    print(f"  omega2 same-star={r2_same.omega:.8g} alt-star={r2.omega:.8g} "
          f"  diff={abs(r2_same.omega - r2.omega):.2e}")

    P12 = cyc.intersection(base, r1.chain, r2.chain)
    P21 = cyc.intersection(base, r2.chain, r1.chain)
    print(f"  P12={P12:.6g}  antisym defect={abs(P12 + P21):.2e}")

    def om(k, s):
        if k == 1:
            return cyc.malgrange_cycle(lambda t: fam(t, s),
                                       base=fam(0.0, s)).omega
        return cyc.malgrange_cycle(lambda t: fam(s, t),
                                   base=fam(s, 0.0)).omega

    dom = (om(2, H) - om(2, -H)) / (2 * H) - (om(1, H) - om(1, -H)) / (2 * H)
    print(f"  dom={dom:.6g}")
    if abs(P12) > 1e-9:
        print(f"  ratio dom/P12={dom / P12:.6g}")


def gauge_case(seed=5):
    rng = np.random.default_rng(seed)
    z = np.array([0.0 + 0.0j, 1.0 + 0.0j, 0.4 + 0.9j])
    A1 = _rt(rng, 2, 0.22)
    A2 = _rt(rng, 2, 0.22)
    A = [A1, A2, -(A1 + A2)]
    X = _rt(rng, 2, 0.6)
    Y = _rt(rng, 2, 0.6)

    def fam(s1, s2):
        C = expm(s1 * X) @ expm(s2 * Y)
        Ci = np.linalg.inv(C)
        return make_system(2, z, [C @ a @ Ci for a in A])

    report(f"gauge seed {seed}", fam, fam(0.0, 0.0))


def generic_case(seed1, seed2, scale):
    rng = np.random.default_rng(seed1)
    z = np.array([0.0 + 0.0j, 1.0 + 0.0j, 0.4 + 0.9j])
    A1 = _rt(rng, 2, 0.22)
    A2 = _rt(rng, 2, 0.22)
    rng2 = np.random.default_rng(seed2)
    B1 = _rt(rng2, 2, scale)
    B2 = _rt(rng2, 2, scale)

    def fam(s1, s2):
        A1s = A1 + s1 * B1
        A2s = A2 + s2 * B2
        return make_system(2, z, [A1s, A2s, -(A1s + A2s)])

    report(f"generic seeds ({seed1},{seed2},{scale})", fam, fam(0.0, 0.0))


if __name__ == "__main__":
    gauge_case(5)
    generic_case(5, 8, 1.0)
    generic_case(11, 21, 0.5)
    generic_case(3, 33, 0.5)
