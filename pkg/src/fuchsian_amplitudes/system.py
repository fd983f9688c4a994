"""Fuchsian connection A(x) = sum_j A_j/(x - z_j) with sum_j A_j = 0.

A system bundles the punctures, the sl_N residues, per-puncture root
decompositions, and the geometric clearance radius that every integration
path must respect. Validation is report-style; a failed report blocks all
downstream operations.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidSystem,
    NonGenericElement,
    ResonantSystem,
    TooCloseToPuncture,
)
from .lie import CartanData, LieAlgebraBasis, build_sl, root_decomposition

RESONANCE_TOL = 1e-8


@dataclass
class ValidationReport:
    checks: list  # (name, passed, defect, note)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _, _ in self.checks)

    def defect(self, name: str) -> float:
        for n, _, d, _ in self.checks:
            if n == name:
                return d
        raise KeyError(name)

    def lines(self):
        for name, ok, defect, note in self.checks:
            status = "pass" if ok else "FAIL"
            yield f"{status:4s}  {name:<22s} defect {defect:9.3e}  {note}"


@dataclass(eq=False)
class FuchsianSystem:
    """Punctures z_j plus residues A_j in sl_N, with validation state."""

    algebra: LieAlgebraBasis
    punctures: np.ndarray            # (N_p,) complex
    residues: np.ndarray             # (N_p, N, N) complex
    clearance: float = 0.0           # 0 means: use the default at validation
    genericity_tol: float = 1e-8
    genericity: tuple = field(default=(), repr=False)   # CartanData per j
    _report: ValidationReport | None = field(default=None, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.punctures = np.asarray(self.punctures, dtype=complex)
        self.residues = np.asarray(self.residues, dtype=complex)
        if self.clearance <= 0.0:
            self.clearance = 1e-3 * self.min_pairwise_distance()

    @property
    def n_punctures(self) -> int:
        return len(self.punctures)

    def min_pairwise_distance(self) -> float:
        z = self.punctures
        if len(z) < 2:
            return 1.0
        return float(min(abs(z[i] - z[k])
                         for i in range(len(z)) for k in range(i + 1, len(z))))

    def scale(self) -> float:
        z = self.punctures
        spread = float(max(abs(a - b) for a in z for b in z)) if len(z) > 1 else 1.0
        return max(spread, 1.0e-300)

    @property
    def report(self) -> ValidationReport:
        if self._report is None:
            self._report = validate(self)
        return self._report

    def require_valid(self):
        if not self.report.passed:
            failed = [n for n, ok, _, _ in self.report.checks if not ok]
            msg = "system failed validation: " + ", ".join(failed)
            if failed == ["non-resonance"]:
                raise ResonantSystem(msg)
            raise InvalidSystem(msg)

    def connection_at(self, x: complex,
                      enforce_clearance: bool = True) -> np.ndarray:
        return connection_at(self, x, enforce_clearance)

    def connection_derivative_at(self, x: complex, order: int = 1) -> np.ndarray:
        return connection_derivative_at(self, x, order)

    def cartan_data(self, j: int) -> CartanData:
        self.require_valid()
        return self.genericity[j]


def validate(system: FuchsianSystem) -> ValidationReport:
    """Check all system invariants; returns pass/fail with measured defects."""
    checks = []
    A = system.residues
    z = system.punctures
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))

    sum_defect = float(np.abs(A.sum(axis=0)).max())
    checks.append(("residue-sum", sum_defect <= 1e-12 * scale, sum_defect,
                   "sum_j A_j = 0"))

    minsep = system.min_pairwise_distance()
    sep_ok = minsep >= 10.0 * system.clearance
    checks.append(("puncture-separation", sep_ok, float(10 * system.clearance - minsep)
                   if not sep_ok else 0.0,
                   f"min separation {minsep:.3e} vs 10*clearance"))

    tr_defect = float(max(abs(np.trace(Aj)) for Aj in A))
    checks.append(("traceless-residues", tr_defect <= 1e-9 * scale, tr_defect,
                   "residues in sl_N"))

    genericity = []
    generic_ok = True
    note = "all residues regular semisimple"
    for j, Aj in enumerate(A):
        try:
            genericity.append(root_decomposition(Aj, system.genericity_tol))
        except (NonGenericElement, ValueError) as exc:
            generic_ok = False
            genericity.append(None)
            note = f"residue {j}: {exc}"
    checks.append(("genericity", generic_ok, 0.0 if generic_ok else 1.0, note))

    res_ok = True
    res_worst = np.inf
    note = "no integer eigenvalue differences"
    for j, Aj in enumerate(A):
        lam = np.linalg.eigvals(Aj)
        for i in range(len(lam)):
            for k in range(len(lam)):
                if i == k:
                    continue
                d = lam[i] - lam[k]
                m = round(d.real)
                if m != 0:
                    gap = abs(d - m)
                    res_worst = min(res_worst, gap)
                    if gap <= RESONANCE_TOL:
                        res_ok = False
                        note = f"residue {j}: eigenvalue difference near {m}"
    checks.append(("non-resonance", res_ok,
                   0.0 if res_ok else float(res_worst), note))

    report = ValidationReport(checks)
    system.genericity = tuple(genericity)
    system._report = report
    return report


def connection_at(system: FuchsianSystem, x: complex,
                  enforce_clearance: bool = True) -> np.ndarray:
    """A(x) = sum_j A_j/(x - z_j); exact rational evaluation.

    The clearance guard catches accidental near-puncture use; internal
    near-field formulas may disable it since A is exact anywhere off the
    punctures themselves.
    """
    system.require_valid()
    x = complex(x)
    d = x - system.punctures
    nearest = float(np.abs(d).min())
    if enforce_clearance and nearest < system.clearance:
        raise TooCloseToPuncture(
            f"x within {nearest:.3e} of a puncture (clearance "
            f"{system.clearance:.3e})")
    return np.tensordot(1.0 / d, system.residues, axes=1)


def connection_derivative_at(system: FuchsianSystem, x: complex,
                             order: int = 1) -> np.ndarray:
    """d^order/dx^order of A at x (order >= 0), same clearance rule."""
    system.require_valid()
    x = complex(x)
    d = x - system.punctures
    if float(np.abs(d).min()) < system.clearance:
        raise TooCloseToPuncture("derivative evaluation inside clearance")
    fac = (-1.0) ** order * math.factorial(order)
    return fac * np.tensordot(d ** (-(order + 1)), system.residues, axes=1)


def make_system(algebra_or_N, punctures, residues, clearance: float = 0.0,
                genericity_tol: float = 1e-8) -> FuchsianSystem:
    """Build and validate a system; raises InvalidSystem on failure."""
    if isinstance(algebra_or_N, LieAlgebraBasis):
        alg = algebra_or_N
    else:
        alg = build_sl(int(algebra_or_N))
    sys_ = FuchsianSystem(algebra=alg, punctures=np.asarray(punctures, dtype=complex),
                          residues=np.asarray(residues, dtype=complex),
                          clearance=clearance, genericity_tol=genericity_tol)
    sys_.require_valid()
    return sys_


def _matrix_to_json(m: np.ndarray):
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def _matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def system_to_json(system: FuchsianSystem) -> dict:
    return {
        "N": system.algebra.N,
        "punctures": [[float(z.real), float(z.imag)] for z in system.punctures],
        "residues": [_matrix_to_json(Aj) for Aj in system.residues],
        "tolerances": {
            "clearance": system.clearance,
            "genericity": system.genericity_tol,
        },
    }


def system_from_json(data: dict) -> FuchsianSystem:
    """Load a system from the JSON schema; re-verifies all invariants."""
    N = int(data["N"])
    punctures = [complex(re, im) for re, im in data["punctures"]]
    residues = [_matrix_from_json(rows) for rows in data["residues"]]
    for Aj in residues:
        if Aj.shape != (N, N):
            raise InvalidSystem(f"residue shape {Aj.shape} != ({N}, {N})")
    if len(residues) != len(punctures):
        raise InvalidSystem("puncture and residue counts differ")
    tol = data.get("tolerances", {})
    sys_ = FuchsianSystem(
        algebra=build_sl(N),
        punctures=np.array(punctures),
        residues=np.array(residues),
        clearance=float(tol.get("clearance", 0.0)),
        genericity_tol=float(tol.get("genericity", 1e-8)),
    )
    sys_.require_valid()
    return sys_


def load_system(path) -> FuchsianSystem:
    with open(path) as fh:
        return system_from_json(json.load(fh))


def save_system(system: FuchsianSystem, path) -> None:
    with open(path, "w") as fh:
        json.dump(system_to_json(system), fh, indent=2)


def resonance_gap(system: FuchsianSystem) -> float:
    """Smallest distance of any eigenvalue difference to a nonzero integer."""
    worst = np.inf
    for Aj in system.residues:
        lam = np.linalg.eigvals(Aj)
        for i in range(len(lam)):
            for k in range(len(lam)):
                if i == k:
                    continue
                d = lam[i] - lam[k]
                m = round(d.real)
                if m != 0:
                    worst = min(worst, abs(d - m))
    return float(worst)
