"""Probe: necessary conditions on the pairing + Richardson-stable dom."""
import sys
import numpy as np

sys.path.insert(0, "/root/pkg/src")
sys.path.insert(0, "/root/pkg/tests")

from fuchsian_amplitudes.system import make_system
import importlib
cyc = importlib.import_module("fuchsian_amplitudes.cycles")


def _rt(rng, N, scale):
    X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    return scale * (X - np.trace(X) / N * np.eye(N))


def make_family(seed1, seed2, scale=0.5):
    """Two-parameter sl2 three-pole residue family (s1, s2)."""
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
    return fam


def run(seed1, seed2, scale, H=1e-3):
    fam = make_family(seed1, seed2, scale)
    base = fam(0.0, 0.0)

    r1 = cyc.malgrange_cycle(lambda t: fam(t, 0.0), base=base)
    r2 = cyc.malgrange_cycle(lambda t: fam(0.0, t), base=base)
    print(f"seeds ({seed1},{seed2},scale {scale}): hub1={r1.hub_defect:.2e} "
          f"gen1={r1.generalized_defect:.2e} hub2={r2.hub_defect:.2e} "
          f"gen2={r2.generalized_defect:.2e}")

    # --- pairing necessary conditions
    P12 = cyc.intersection(base, r1.chain, r2.chain)
    P21 = cyc.intersection(base, r2.chain, r1.chain)
    P11 = cyc.intersection(base, r1.chain, r1.chain)
    P22 = cyc.intersection(base, r2.chain, r2.chain)
    print(f"  P12={P12:.6g}")
    print(f"  P21={P21:.6g}   antisym defect={abs(P12 + P21):.3e}")
    print(f"  P11={P11:.6g}   P22={P22:.6g}  (want 0)")

    # --- dom with two step sizes (Richardson)
    def om(k, s, other=0.0):
        if k == 1:
            f = (lambda t: fam(t, s))
            b = fam(0.0, s)
            return cyc.malgrange_cycle(f, base=b).omega
        f = (lambda t: fam(s, t))
        b = fam(s, 0.0)
        return cyc.malgrange_cycle(f, base=b).omega

    for HH in (H, H / 2):
        d1_om2 = (om(2, HH) - om(2, -HH)) / (2 * HH)
        d2_om1 = (om(1, HH) - om(1, -HH)) / (2 * HH)
        dom = d1_om2 - d2_om1
        print(f"  H={HH:g}: d1om2={d1_om2:.6g} d2om1={d2_om1:.6g} "
              f"dom={dom:.6g}")
        print(f"        ratio dom/P12 = {dom / P12:.6g}")


if __name__ == "__main__":
    run(5, 8, 1.0)
    run(11, 21, 0.5)
