"""(B1, B2) with B2 on a scaled/twisted star at the SAME basepoint:
same classes, transversal support, no push-off."""
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
    lay_m1 = trn.layout(base, rho_scale=0.72, corridor_scale=0.55,
                        entry_twist=0.30)
    lay_m2 = trn.layout(base, rho_scale=0.80, corridor_scale=0.62,
                        entry_twist=-0.22)
    r1 = cyc.malgrange_cycle(lambda t: fam(t, 0.0), base=base)
    r2a = cyc.malgrange_cycle(lambda t: fam(0.0, t), base=base, lay=lay_m1)
    r2b = cyc.malgrange_cycle(lambda t: fam(0.0, t), base=base, lay=lay_m2)
    r2s = cyc.malgrange_cycle(lambda t: fam(0.0, t), base=base)
    print(f"{name}: defects hub/gen: "
          f"{r1.hub_defect:.0e}/{r1.generalized_defect:.0e} "
          f"{r2a.hub_defect:.0e}/{r2a.generalized_defect:.0e}")
    print(f"  omega2: same={r2s.omega:.8g} modA={r2a.omega:.8g} "
          f"modB={r2b.omega:.8g}")
    print(f"  omega2 class-invariance: |same-modA|={abs(r2s.omega - r2a.omega):.2e} "
          f"|same-modB|={abs(r2s.omega - r2b.omega):.2e}")

    PA = cyc.intersection(base, r1.chain, r2a.chain)
    PB = cyc.intersection(base, r1.chain, r2b.chain)
    PAr = cyc.intersection(base, r2a.chain, r1.chain)
    print(f"  P(modA)={PA:.6g}  P(modB)={PB:.6g}  |diff|={abs(PA - PB):.2e}")
    print(f"  antisym defect={abs(PA + PAr):.2e}")

    def om(k, s):
        if k == 1:
            return cyc.malgrange_cycle(lambda t: fam(t, s),
                                       base=fam(0.0, s)).omega
        return cyc.malgrange_cycle(lambda t: fam(s, t),
                                   base=fam(s, 0.0)).omega

    dom = (om(2, H) - om(2, -H)) / (2 * H) - (om(1, H) - om(1, -H)) / (2 * H)
    print(f"  dom={dom:.6g}")
    if abs(PA) > 1e-9:
        print(f"  ratio dom/P={dom / PA:.6g}")


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
