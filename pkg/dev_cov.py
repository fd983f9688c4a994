"""Covariance check: omega(delta_Y) must be invariant under global
conjugation of the system (with the direction co-conjugated)."""
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


def run(seed=5):
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

    for s1 in (0.0, 5e-4, 1e-3, -1e-3, 0.01):
        r = cyc.malgrange_cycle(lambda t: fam(s1, t), base=fam(s1, 0.0))
        print(f"s1={s1:+.4g}: omega(dY)={r.omega:.10g} hub={r.hub_defect:.1e}")

    # and a generic (non-gauge) inner direction, also co-conjugated:
    B1 = _rt(rng, 2, 0.5)
    B2 = _rt(rng, 2, 0.5)

    def fam2(s1, s2):
        C = expm(s1 * X)
        Ci = np.linalg.inv(C)
        Aa = A[0] + s2 * B1
        Ab = A[1] + s2 * B2
        return make_system(2, z, [C @ Aa @ Ci, C @ Ab @ Ci,
                                  C @ (-(Aa + Ab)) @ Ci])

    print("generic inner direction, co-conjugated outer gauge flow:")
    for s1 in (0.0, 1e-3, 0.01):
        r = cyc.malgrange_cycle(lambda t: fam2(s1, t), base=fam2(s1, 0.0))
        print(f"s1={s1:+.4g}: omega(dB)={r.omega:.10g} hub={r.hub_defect:.1e}")


if __name__ == "__main__":
    run()
