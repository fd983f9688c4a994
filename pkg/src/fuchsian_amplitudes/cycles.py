"""Arc and chain calculus on the bundle: boundaries, intersections,
regularized periods of W_1, cycle-space dimension counts, and the
deformation cycles attached to one-parameter families.

Arcs are polylines with a g-element attached at the start; the element is
understood through the M-field M(x) = Psi(x) E Psi(x)^{-1} propagated along
the arc.  Homotopy classes are represented concretely by polylines and
compared behaviorally (boundaries, intersections, periods), never
syntactically.  Arcs may end at a puncture; integrals and boundary values
are then regularized through the local frame.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import (
    IllConditionedSplit,
    NonTransversal,
    NoConvergence,
)
from .geometry import segment_crossing
from .lie import killing
from .system import FuchsianSystem
from .transport import (
    DEFAULT_TOL,
    LoopWord,
    Path,
    layout,
    local_frame,
    monodromy,
    realize,
    transport,
    transport_dense,
    transport_with_derivative,
)

KERNEL_TOL = 1e-8        # singular values below this (relative) span a kernel
SPLIT_TOL = 1e-10        # retained singular values below this are rejected
MERGE_TOL = 1e-9         # boundary points merge within this times scale
ROOT_TOL = 1e-8          # root components allowed at a puncture endpoint


# ---------------------------------------------------------------------------
# arcs and chains

@dataclass(frozen=True)
class Arc:
    """Oriented polyline with a g-element attached at its start.

    approach fixes the lift of the start: a path from the basepoint to
    path.start (None means the straight segment).  end_puncture marks an
    arc whose final vertex is exactly the puncture z_j.
    """

    path: Path
    E: np.ndarray
    approach: Path | None = None
    end_puncture: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "E", np.asarray(self.E, dtype=complex))


@dataclass(frozen=True)
class Chain:
    terms: tuple  # ((coefficient, Arc), ...)


@dataclass(frozen=True)
class BoundaryDivisor:
    """g-valued divisor: interior points and puncture entries.

    points: tuple of (complex location, g-value); punctures: tuple of
    (puncture index, h_j-valued limit).
    """

    points: tuple
    punctures: tuple

    def point_norm(self) -> float:
        if not self.points:
            return 0.0
        return max(float(np.abs(v).max()) for _, v in self.points)

    def puncture_norm(self) -> float:
        if not self.punctures:
            return 0.0
        return max(float(np.abs(v).max()) for _, v in self.punctures)

    def is_cycle(self, tol: float = 1e-7) -> bool:
        return self.point_norm() <= tol and self.puncture_norm() <= tol

    def is_generalized_cycle(self, tol: float = 1e-7) -> bool:
        return self.point_norm() <= tol


def lasso_arc(system, j: int, E) -> Arc:
    """[gamma_j.E]: the layout lasso around z_j based at x0."""
    return Arc(path=layout(system).loops[j], E=np.asarray(E, complex))


def puncture_arc(system, j: int, E) -> Arc:
    """[delta_j.E]: basepoint to z_j along the spoke, ending at the
    puncture."""
    lay = layout(system)
    entry = lay.spokes[j].end
    path = Path.from_points([lay.basepoint, entry, system.punctures[j]])
    return Arc(path=path, E=np.asarray(E, complex), end_puncture=j)


def _approach(system, arc: Arc) -> Path:
    if arc.approach is not None:
        return arc.approach
    x0 = layout(system).basepoint
    start = arc.path.start
    if abs(start - x0) == 0.0:
        return Path((x0,))
    return Path.from_points([x0, start])


def arc_reverse(system, arc: Arc, tol: float = DEFAULT_TOL) -> Arc:
    """Same support with opposite orientation; the element moves to the
    other end through the arc's own transport."""
    if arc.end_puncture is not None:
        raise ValueError("cannot reverse an arc ending at a puncture")
    app = _approach(system, arc)
    T_path = transport(system, arc.path, tol).matrix
    T_app = transport(system, app, tol).matrix
    G = T_path @ T_app
    E_rev = G @ arc.E @ np.linalg.inv(G)
    return Arc(path=arc.path.reversed(), E=E_rev,
               approach=app.join(arc.path))


# ---------------------------------------------------------------------------
# puncture-endpoint regularization data

def _puncture_gauge(system, arc: Arc, tol: float):
    """Frame data for an arc ending at z_j.

    Returns (j, frame, phi, r_split, E_hat, D) where the M-field on the
    final radial segment is psi_at(s, phi_branch) @ E_hat @ inverse, and
    D = Psi_j E_hat Psi_j^{-1} is the element whose Cartan part drives the
    pole of W_1.
    """
    j = arc.end_puncture
    zj = system.punctures[j]
    verts = arc.path.vertices
    if abs(verts[-1] - zj) != 0.0:
        raise ValueError("puncture-ending arc must end exactly at z_j")
    v_pre = verts[-2]
    d_pre = abs(v_pre - zj)
    if d_pre <= system.clearance:
        raise ValueError("approach vertex inside the clearance disk")
    fr = local_frame(system, j, tol)
    phi = cmath.phase(v_pre - zj)
    r_split = min(fr.rho, d_pre)
    P = zj + r_split * cmath.exp(1j * phi)
    # lift at P through the arc's own route
    app = _approach(system, arc)
    pre = Path(verts[:-1]).join(Path.from_points([v_pre, P])) \
        if d_pre > r_split else Path(verts[:-1])
    T = transport(system, pre, tol).matrix @ \
        transport(system, app, tol).matrix
    M_P = T @ arc.E @ np.linalg.inv(T)
    # any fixed branch works here: psi(x) psi(P)^{-1} is sheet-independent
    phi_br = fr.theta + math.remainder(phi - fr.theta, 2.0 * math.pi)
    Psi_P = fr.psi_at(r_split, phi_br)
    E_hat = np.linalg.solve(Psi_P, M_P @ Psi_P)
    D = fr.psi_j @ E_hat @ np.linalg.inv(fr.psi_j)
    return j, fr, phi_br, r_split, E_hat, D


def _cartan_split(system, j: int, D):
    """D = D_h + D_roots in the eigenbasis of A_j; returns both parts."""
    cd = system.cartan_data(j)
    D_h, comps = cd.decompose(D)
    D_r = sum(comps.values()) if comps else np.zeros_like(D)
    return D_h, D_r


# ---------------------------------------------------------------------------
# boundary

def boundary(system, chain: Chain, tol: float = DEFAULT_TOL,
             root_tol: float = ROOT_TOL,
             merge_tol: float = MERGE_TOL) -> BoundaryDivisor:
    """g-valued endpoint divisor of a chain: sum of coeff * (end - start)
    M-values, merged when projections coincide.

    An arc ending at z_j contributes the h_j-limit of its M-field there;
    root components above root_tol (relative) make the endpoint value
    ill-defined and raise ValueError.
    """
    system.require_valid()
    scale = system.scale()
    pts: list = []       # [location, accumulated value]
    punct: dict = {}
    for coeff, arc in chain.terms:
        if abs(coeff) == 0.0:
            continue
        app = _approach(system, arc)
        T_app = transport(system, app, tol).matrix
        M_start = T_app @ arc.E @ np.linalg.inv(T_app)
        _merge_point(pts, arc.path.start, -coeff * M_start,
                     merge_tol * scale)
        if arc.end_puncture is None:
            T = transport(system, arc.path, tol).matrix @ T_app
            M_end = T @ arc.E @ np.linalg.inv(T)
            _merge_point(pts, arc.path.end, coeff * M_end,
                         merge_tol * scale)
        else:
            j, _, _, _, _, D = _puncture_gauge(system, arc, tol)
            D_h, D_r = _cartan_split(system, j, D)
            dnorm = max(float(np.abs(D).max()), 1e-300)
            if float(np.abs(D_r).max()) / dnorm > root_tol:
                raise ValueError(
                    f"arc ending at puncture {j} carries root components "
                    f"({float(np.abs(D_r).max()) / dnorm:.2e} relative); "
                    "split it with replace_puncture_arc first")
            punct[j] = punct.get(j, 0.0) + coeff * D_h
    points = tuple((x, v) for x, v in pts)
    punctures = tuple(sorted(punct.items()))
    return BoundaryDivisor(points=points, punctures=punctures)


def _merge_point(pts, x, value, eps):
    for entry in pts:
        if abs(entry[0] - x) <= eps:
            entry[1] = entry[1] + value
            return
    pts.append([complex(x), np.asarray(value, dtype=complex)])


# ---------------------------------------------------------------------------
# intersection form

def _push_off(system, chain: Chain, center: complex, shift: complex,
              theta: float, mu: float, tol: float) -> Chain:
    """Move a chain off its own support by the similarity
    z -> center + shift + e^{i theta}(1+mu)(z - center), keeping its
    classes: every start is reconnected to its original lift by a short
    segment, and endpoints pinned at punctures stay pinned.

    A plain translation is not enough: it keeps every moved segment
    parallel to its original, so pairs of coincident strands never cross
    and their contribution to an intersection number is silently lost.
    The small rotation restores those crossings."""
    w = cmath.exp(1j * theta) * (1.0 + mu)

    def fmap(z):
        return center + shift + w * (z - center)

    terms = []
    for coeff, arc in chain.terms:
        verts = list(arc.path.vertices)
        if arc.end_puncture is None:
            moved = [fmap(v) for v in verts]
        else:
            moved = [fmap(v) for v in verts[:-1]] + [verts[-1]]
        app = _approach(system, arc)
        conn = Path.from_points([arc.path.start, fmap(arc.path.start)])
        # the joined approach already transports the frame across the
        # connector, so the element is unchanged
        terms.append((coeff, Arc(path=Path.from_points(moved), E=arc.E,
                                 approach=app.join(conn),
                                 end_puncture=arc.end_puncture)))
    return Chain(tuple(terms))


def _segments(path: Path):
    v = path.vertices
    return list(zip(v[:-1], v[1:], range(len(v) - 1)))


def _arc_crossings(arc1: Arc, arc2: Arc):
    """Transversal crossings of two polylines: (i, k, point, sign) with
    sign +1 when (tangent1, tangent2) is positively oriented.  Returns
    None when any segment pair is too degenerate to decide.

    Final segments of two arcs ending at the same puncture share only
    that endpoint and never cross in their interiors; the pair is skipped
    so the shared vertex does not read as degenerate.
    """
    out = []
    segs1 = _segments(arc1.path)
    segs2 = _segments(arc2.path)
    last1, last2 = len(segs1) - 1, len(segs2) - 1
    same_punct = (arc1.end_puncture is not None
                  and arc1.end_puncture == arc2.end_puncture)
    for a1, b1, i in segs1:
        for a2, b2, k in segs2:
            if same_punct and i == last1 and k == last2:
                continue
            hit = segment_crossing(a1, b1, a2, b2)
            if hit == "degenerate":
                return None
            if hit is None:
                continue
            t1, t2, point, sign = hit
            out.append((i, k, point, sign))
    return out


def _m_at(system, arc: Arc, seg_index: int, point: complex, tol: float):
    """M-value of the arc's field at an interior point of segment
    seg_index."""
    verts = arc.path.vertices
    prefix = Path.from_points(list(verts[:seg_index + 1]) + [point])
    app = _approach(system, arc)
    T = transport(system, prefix, tol).matrix @ \
        transport(system, app, tol).matrix
    return T @ arc.E @ np.linalg.inv(T)


def _crossing_sum(system, chain1: Chain, chain2: Chain, tol: float):
    """Sum of index * <M, M'> over transversal crossings, or None when
    any segment pair is too degenerate to decide."""
    total = 0.0 + 0.0j
    for coeff1, arc1 in chain1.terms:
        if abs(coeff1) == 0.0:
            continue
        for coeff2, arc2 in chain2.terms:
            if abs(coeff2) == 0.0:
                continue
            hits = _arc_crossings(arc1, arc2)
            if hits is None:
                return None
            for i, k, point, sign in hits:
                M1 = _m_at(system, arc1, i, point, tol)
                M2 = _m_at(system, arc2, k, point, tol)
                total += coeff1 * coeff2 * sign * killing(M1, M2)
    return total


def _pinned_pair_sum(system, chain1: Chain, chain2: Chain, tol: float):
    """Half-weight terms for pairs of arcs pinned at the same puncture.

    Two arcs ending at z_j meet there whatever their homotopy classes, so
    the crossing sum alone is not invariant: rotating one approach through
    the other toggles an interior crossing by the full <M, M'> with
    nothing to compensate.  The marked-endpoint convention restores
    invariance: each pinned pair contributes half the pairing of its
    endpoint elements, signed by the cyclic order of the approach rays.
    Equal approach angles leave the order undefined and raise
    NonTransversal.
    """
    total = 0.0 + 0.0j
    gauge_cache: dict = {}

    def endpoint_d(which, idx, arc):
        key = (which, idx)
        if key not in gauge_cache:
            gauge_cache[key] = _puncture_gauge(system, arc, tol)[5]
        return gauge_cache[key]

    for i1, (c1, a1) in enumerate(chain1.terms):
        if a1.end_puncture is None or abs(c1) == 0.0:
            continue
        z1 = system.punctures[a1.end_puncture]
        phi1 = cmath.phase(a1.path.vertices[-2] - z1)
        for i2, (c2, a2) in enumerate(chain2.terms):
            if a2.end_puncture != a1.end_puncture or abs(c2) == 0.0:
                continue
            phi2 = cmath.phase(a2.path.vertices[-2] - z1)
            d = math.remainder(phi2 - phi1, 2.0 * math.pi)
            if abs(d) < 1e-9:
                raise NonTransversal(
                    f"two arcs end at puncture {a1.end_puncture} with the "
                    "same approach angle; rebuild one chain with a twisted "
                    "star so the cyclic order at the puncture is defined")
            s = 1.0 if d > 0.0 else -1.0
            D1 = endpoint_d(0, i1, a1)
            D2 = endpoint_d(1, i2, a2)
            total += 0.5 * s * c1 * c2 * killing(D1, D2)
    return total


def _chains_identical(chain1: Chain, chain2: Chain) -> bool:
    if chain1 is chain2:
        return True
    if len(chain1.terms) != len(chain2.terms):
        return False
    for (c1, a1), (c2, a2) in zip(chain1.terms, chain2.terms):
        if c1 != c2 or a1.end_puncture != a2.end_puncture:
            return False
        if a1.path.vertices != a2.path.vertices:
            return False
        if not np.array_equal(a1.E, a2.E):
            return False
    return True


def intersection(system, chain1: Chain, chain2: Chain,
                 tol: float = DEFAULT_TOL) -> complex:
    """Sum over transversal crossings of index * <M, M'>.

    Chains already in general position are paired directly; this is the
    reliable regime, and chains that must be intersected repeatedly should
    be built on supports in general position (for deformation cycles, on
    different stars).  A chain paired with itself is zero by antisymmetry.
    Arc pairs pinned at the same puncture additionally contribute half the
    pairing of their endpoint elements, signed by the cyclic order of the
    approach rays; without this term the crossing sum would depend on the
    approach angles.  When distinct chains touch (shared basepoint,
    overlapping polylines), the second chain is moved off by a small
    similarity map in both rotational directions; the value is returned
    only when the two moves agree, since strand pairs that were coincident
    before the move can cross with a direction-dependent sign.
    Disagreement means the value is not determined by a local push-off,
    and NonTransversal is raised: rebuild one chain on a support in
    general position instead.
    """
    system.require_valid()
    if _chains_identical(chain1, chain2):
        return 0.0 + 0.0j
    lay = layout(system)
    pinned = _pinned_pair_sum(system, chain1, chain2, tol)
    direct = _crossing_sum(system, chain1, chain2, tol)
    if direct is not None:
        return direct + pinned

    # the push-off must stay well below the corridor half-width so the
    # perturbed copy pairs crossings locally with the original, and the
    # twist small enough that no moved vertex drifts by a puncture scale
    base_shift = 0.4 * lay.corridor
    span = max(abs(z - lay.basepoint) for z in system.punctures)
    rho_min = min(10.0 * system.clearance, 0.45 *
                  system.min_pairwise_distance())
    theta0 = min(0.04, 0.25 * rho_min / span)
    centroid = complex(system.punctures.mean())
    ang0 = cmath.phase(lay.basepoint - centroid) + 0.77

    for attempt in range(6):
        shift = base_shift * (1.0 + 0.21 * attempt) * \
            cmath.exp(1j * (ang0 + 2.399963 * attempt))
        theta = theta0 * (1.0 + 0.17 * attempt)
        mu = 0.5 * theta
        halves = []
        for sgn in (1.0, -1.0):
            moved = _push_off(system, chain2, lay.basepoint, shift,
                              sgn * theta, mu, tol)
            halves.append(_crossing_sum(system, chain1, moved, tol))
        if halves[0] is not None and halves[1] is not None:
            gap = abs(halves[0] - halves[1])
            scale = max(1.0, abs(halves[0]), abs(halves[1]))
            if gap <= 1e-5 * scale:
                return 0.5 * (halves[0] + halves[1]) + pinned
            raise NonTransversal(
                "overlapping supports with direction-dependent crossings; "
                "rebuild one chain in general position (for deformation "
                "cycles, pass a layout on an alternate basepoint)")
    raise NonTransversal(
        "no transversal configuration found within the retry budget")


# ---------------------------------------------------------------------------
# replacing puncture-ending arcs

def _conj_matrix(alg, S):
    Sinv = np.linalg.inv(S)
    cols = [alg.coordinates(S @ e @ Sinv) for e in alg.basis]
    return np.stack(cols, axis=1)


def _split_by_matrix(alg, S, E, context: str):
    """E = E_comm + (F - S F S^{-1}) with E_comm commuting with S.

    The split uses the spectral decomposition of Ad_S: the kernel and
    image of (Id - Ad) are complementary eigenspace sums (they are
    Killing-orthogonal, not Euclidean-orthogonal, so a least-squares
    projection would give the wrong commuting part).
    """
    ad = _conj_matrix(alg, S)
    lam, Q = np.linalg.eig(ad)
    gap = np.abs(1.0 - lam)
    on_kernel = gap <= KERNEL_TOL
    bad = (~on_kernel) & (gap < SPLIT_TOL ** 0.5)
    if np.any(bad):
        raise IllConditionedSplit(
            f"Ad_S {context} has eigenvalues too close to 1 for a stable "
            "commutant split")
    c = alg.coordinates(np.asarray(E, complex))
    y = np.linalg.solve(Q, c)
    f = np.where(on_kernel, 0.0, y / np.where(on_kernel, 1.0, 1.0 - lam))
    F = alg.from_coordinates(Q @ f)
    image_part = F - S @ F @ np.linalg.inv(S)
    E_comm = np.asarray(E, complex) - image_part
    return E_comm, F


def commutant_split(system, j: int, E, tol: float = DEFAULT_TOL):
    """E = E_comm + (F - S_j F S_j^{-1}) with E_comm commuting with the
    generator monodromy S_j."""
    S = monodromy(system, f"g{j + 1}", tol)
    return _split_by_matrix(system.algebra, S, E, f"at puncture {j}")


def replace_puncture_arc(system, j: int, E,
                         tol: float = DEFAULT_TOL) -> Chain:
    """Equivalent chain for [delta_j.E]: the commuting part stays on the
    puncture-ending arc, the rest becomes a loop term [gamma_j.F]."""
    E_comm, F = commutant_split(system, j, E, tol)
    terms = [(1.0 + 0.0j, puncture_arc(system, j, E_comm))]
    if float(np.abs(F).max()) > 0.0:
        terms.append((1.0 + 0.0j, lasso_arc(system, j, F)))
    return Chain(tuple(terms))


def probe_arcs(system, j: int, n: int = 5, seed: int = 7):
    """Deterministic transversal probes crossing the corridor of spoke j:
    short segments passing between x0 and z_j, right to left."""
    lay = layout(system)
    x0 = lay.basepoint
    zj = system.punctures[j]
    d = zj - x0
    dhat = d / abs(d)
    nhat = 1j * dhat
    rng = np.random.default_rng(seed)
    span = 24.0 * lay.corridor
    out = []
    for _ in range(n):
        u = 0.3 + 0.4 * rng.random()
        mid = x0 + u * d
        tilt = (rng.random() - 0.5) * 0.6
        direc = nhat * cmath.exp(1j * tilt)
        E = rng.normal(size=(system.algebra.N,) * 2) \
            + 1j * rng.normal(size=(system.algebra.N,) * 2)
        E -= np.trace(E) / system.algebra.N * np.eye(system.algebra.N)
        path = Path.from_points([mid - span * direc, mid + span * direc])
        out.append(Arc(path=path, E=E))
    return out


def probe_equivalence_defect(system, chain1: Chain, chain2: Chain, j: int,
                             n: int = 5, seed: int = 7,
                             tol: float = DEFAULT_TOL) -> float:
    """Max difference of intersections with deterministic probe arcs; small
    values certify equivalence of the two chains near spoke j."""
    worst = 0.0
    for probe in probe_arcs(system, j, n, seed):
        pc = Chain(((1.0 + 0.0j, probe),))
        v1 = intersection(system, chain1, pc, tol)
        v2 = intersection(system, chain2, pc, tol)
        worst = max(worst, abs(v1 - v2))
    return worst


# ---------------------------------------------------------------------------
# cycle space

def count_block_parameters(n_punctures: int, algebra) -> int:
    """(1/2)((N_p - 2) dim g - N_p rank g); integral for sl_N inputs."""
    dim = algebra.dim
    rank = algebra.N - 1
    twice = (n_punctures - 2) * dim - n_punctures * rank
    if twice % 2 != 0:
        raise ValueError("parameter count is not an integer")
    return twice // 2


@dataclass(frozen=True)
class CycleSpaceReport:
    total: int            # dimension of loop-built cycles mod trivial ones
    a_cycles: int         # N_p * rank
    remainder: int        # total - a_cycles, equals 2 * block parameters
    basis: tuple          # Chain per independent cycle
    vectors: np.ndarray   # coordinates in g^{N_p}, one row per basis chain
    warning: str | None


def cycle_space(system, tol: float = DEFAULT_TOL,
                svd_tol: float = KERNEL_TOL) -> CycleSpaceReport:
    """Cycles built from the generator lassos with one element each.

    Kernel of (E_1..E_Np) -> sum_j (E_j - S_j E_j S_j^{-1}), quotiented by
    the combinations induced by the trivial product word.
    """
    system.require_valid()
    alg = system.algebra
    lay = layout(system)
    n_p = system.n_punctures
    S = [monodromy(system, f"g{j + 1}", tol) for j in range(n_p)]
    blocks = [np.eye(alg.dim) - _conj_matrix(alg, Sj) for Sj in S]
    Phi = np.concatenate(blocks, axis=1)
    U, sing, Vh = np.linalg.svd(Phi)
    smax = sing[0]
    rank = int(np.sum(sing > svd_tol * smax))
    kernel = Vh[rank:].conj().T                     # (Np dim, K)

    # trivial combinations: traversing the contractible product word
    # spreads one element E over the loops with cumulative conjugations
    order = lay.order
    triv_cols = []
    for e in alg.basis:
        vec = np.zeros(n_p * alg.dim, dtype=complex)
        C = np.eye(alg.N, dtype=complex)
        for j in order:
            Ej = C @ e @ np.linalg.inv(C)
            vec[j * alg.dim:(j + 1) * alg.dim] = alg.coordinates(Ej)
            C = S[j] @ C
        triv_cols.append(vec)
    T = np.stack(triv_cols, axis=1)
    Qt, _ = np.linalg.qr(T)
    K_perp = kernel - Qt @ (Qt.conj().T @ kernel)
    Uq, sq, Vq = np.linalg.svd(K_perp, full_matrices=False)
    keep = sq > svd_tol * max(sq[0], 1e-300)
    quot = Uq[:, keep]

    total = int(keep.sum())
    a_cycles = n_p * (alg.N - 1)
    remainder = total - a_cycles
    warning = None
    expected_kernel = (n_p - 1) * alg.dim
    if kernel.shape[1] != expected_kernel:
        warning = (f"kernel dimension {kernel.shape[1]} differs from the "
                   f"generic {expected_kernel}")
    elif total != (n_p - 2) * alg.dim:
        warning = (f"cycle dimension {total} differs from the generic "
                   f"{(n_p - 2) * alg.dim}")
    elif remainder != 2 * count_block_parameters(n_p, alg):
        warning = "remainder does not match the block-parameter count"

    chains = []
    rows = []
    for k in range(total):
        vec = quot[:, k]
        terms = []
        for j in range(n_p):
            Ej = alg.from_coordinates(vec[j * alg.dim:(j + 1) * alg.dim])
            if float(np.abs(Ej).max()) > 1e-14:
                terms.append((1.0 + 0.0j, lasso_arc(system, j, Ej)))
        chains.append(Chain(tuple(terms)))
        rows.append(vec)
    return CycleSpaceReport(total=total, a_cycles=a_cycles,
                            remainder=remainder, basis=tuple(chains),
                            vectors=np.array(rows), warning=warning)


def darboux_basis(M: np.ndarray, tol: float = 1e-10):
    """Greedy symplectic reduction of an antisymmetric matrix.

    Returns (C, rank) with C^T M C = diag(J, ..., J, 0, ...) where J is the
    2x2 symplectic block; rank is the number of blocks times two.
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    ref = max(float(np.abs(M).max()), 1e-300)

    def omega(u, v):
        return u @ M @ v

    pool = [np.eye(n, dtype=complex)[:, i] for i in range(n)]
    pairs: list = []
    while True:
        best, bi, bk = 0.0, -1, -1
        for i in range(len(pool)):
            for k in range(i + 1, len(pool)):
                w = abs(omega(pool[i], pool[k]))
                if w > best:
                    best, bi, bk = w, i, k
        if bi < 0 or best <= tol * ref:
            break
        p = pool[bi]
        q = pool[bk] / omega(pool[bi], pool[bk])
        rest = [v for m, v in enumerate(pool) if m not in (bi, bk)]
        # skew Gram-Schmidt: make the remaining vectors omega-orthogonal
        # to the new symplectic pair (p, q) with omega(p, q) = 1
        pool = [v - omega(p, v) * q + omega(q, v) * p for v in rest]
        pairs.extend([p, q])
    C = np.stack(pairs + pool, axis=1)
    return C, len(pairs)


# ---------------------------------------------------------------------------
# periods of W_1

def _w1_segment_integral(system, seg_sol, T_before, a, b, E0, pole,
                         quad_tol):
    """Integral of W_1 - pole over one polyline segment via the dense
    interpolant."""
    def f(t):
        x = a + t * (b - a)
        Psi = seg_sol.sol(t).reshape(T_before.shape) @ T_before
        M = Psi @ E0 @ np.linalg.inv(Psi)
        val = killing(system.connection_at(x), M)
        if pole is not None:
            kappa, zj = pole
            val -= kappa / (x - zj)
        return val * (b - a)

    val, _ = quad(f, 0.0, 1.0, complex_func=True,
                  epsabs=quad_tol, epsrel=quad_tol, limit=200)
    return val


def _near_field_integral(system, fr, j, phi, r_split, D_h, kappa, tol):
    """Integral of (W_1 - kappa/(x - z_j)) from the split radius down to
    the puncture along the direction phi.

    The endpoint field is Cartan, so M(t) = H(t) D_h H(t)^{-1} exactly
    (the local exponents commute through D_h) and the pole is removed
    structurally: h = <A_j, M - D_h>/t + <rest of A, M>, which is analytic
    at t = 0 and never suffers the kappa/t cancellation.
    """
    zj = system.punctures[j]
    Aj = system.residues[j]
    e_phi = cmath.exp(1j * phi)

    def h(s):
        t = s * e_phi
        H = fr.H_at(t)
        M = H @ D_h @ np.linalg.inv(H)
        x = zj + t
        B = system.connection_at(x, enforce_clearance=False) \
            - Aj / (x - zj)
        return killing(Aj, M - D_h) / t + killing(B, M)

    ms = system.min_pairwise_distance()
    s_tail = max(1e-6 * ms, r_split * 1e-6)
    nodes, weights = np.polynomial.legendre.leggauss(12)
    total = 0.0 + 0.0j
    hi = r_split
    while hi > s_tail * (1 + 1e-12):
        lo = max(hi / 2.0, s_tail)
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        total += half * sum(w * h(mid + half * t)
                            for t, w in zip(nodes, weights))
        hi = lo

    # analytic tail below s_tail: short Taylor fit, then integrate it
    exps = [0.0, 1.0, 2.0, 3.0]
    window = np.geomspace(s_tail, min(1e2 * s_tail, r_split), 12)
    vals = np.array([h(s) for s in window])
    cols = np.stack([window ** al for al in exps], axis=1)
    coeffs, *_ = np.linalg.lstsq(cols, vals, rcond=None)
    resid = np.abs(cols @ coeffs - vals).max()
    scale_ref = max(np.abs(vals).max(), 1e-300)
    if resid / scale_ref > 1e-6:
        raise NoConvergence(
            f"near-puncture tail fit residual {resid / scale_ref:.2e}")
    tail = sum(c * s_tail ** (al + 1) / (al + 1)
               for c, al in zip(coeffs, exps))
    # orientation: the arc runs inward, from r_split to 0
    return -e_phi * (total + tail)


def integrate_W1(system, chain: Chain, tol: float = DEFAULT_TOL,
                 quad_tol: float = 1e-10,
                 root_tol: float = ROOT_TOL) -> complex:
    """Integral of W_1 over a chain, complex-linear in the coefficients.

    Arcs ending at z_j are regularized: the simple pole <A_j, E_j>/(x-z_j)
    is subtracted along the whole arc and -<A_j,E_j> log(x_start - z_j) is
    added on the principal branch.
    """
    system.require_valid()
    total = 0.0 + 0.0j
    for coeff, arc in chain.terms:
        if abs(coeff) == 0.0:
            continue
        app = _approach(system, arc)
        T_app = transport(system, app, tol).matrix
        E0 = T_app @ arc.E @ np.linalg.inv(T_app)
        if arc.end_puncture is None:
            pieces, _ = transport_dense(system, arc.path, tol)
            val = sum(_w1_segment_integral(system, sol, T_b, a, b, E0,
                                           None, quad_tol)
                      for a, b, T_b, sol in pieces)
            total += coeff * val
            continue

        j, fr, phi_br, r_split, E_hat, D = _puncture_gauge(system, arc, tol)
        D_h, D_r = _cartan_split(system, j, D)
        dnorm = max(float(np.abs(D).max()), 1e-300)
        if float(np.abs(D_r).max()) / dnorm > root_tol:
            raise ValueError(
                f"arc ending at puncture {j} carries root components; "
                "split it with replace_puncture_arc first")
        kappa = killing(system.residues[j], D_h)
        zj = system.punctures[j]
        verts = arc.path.vertices
        v_pre = verts[-2]
        phi = cmath.phase(v_pre - zj)
        P = zj + r_split * cmath.exp(1j * phi)
        outer = Path(verts[:-1])
        if abs(v_pre - zj) > r_split:
            outer = outer.join(Path.from_points([v_pre, P]))
        val = 0.0 + 0.0j
        if not outer.is_trivial:
            pieces, _ = transport_dense(system, outer, tol)
            val += sum(_w1_segment_integral(system, sol, T_b, a, b, E0,
                                            (kappa, zj), quad_tol)
                       for a, b, T_b, sol in pieces)
        val += _near_field_integral(system, fr, j, phi, r_split,
                                    D_h, kappa, tol)
        val -= kappa * cmath.log(arc.path.start - zj)
        total += coeff * val
    return total


def a_cycle_period(system, j: int, E_j, tol: float = DEFAULT_TOL) -> complex:
    """(1/2pi i) of the W_1 integral over [gamma_j.Psi_j^{-1} E_j Psi_j];
    equals <E_j, A_j> for E_j in the Cartan algebra of A_j."""
    fr = local_frame(system, j, tol)
    E = np.linalg.solve(fr.psi_j, np.asarray(E_j, complex) @ fr.psi_j)
    chain = Chain(((1.0 + 0.0j, lasso_arc(system, j, E)),))
    return integrate_W1(system, chain, tol) / (2j * math.pi)


# ---------------------------------------------------------------------------
# deformation (Malgrange-form) cycles

@dataclass(frozen=True)
class MalgrangeResult:
    chain: Chain              # split edge arcs plus loop corrections
    omega: complex            # (1/2pi i) integral of W_1 over the chain
    hub_defect: float         # norm of the summed edge elements at x0
    generalized_defect: float  # interior boundary norm of the chain
    edge_elements: tuple      # conjugated edge elements, cut order


def malgrange_cycle(family, h: float = 1e-5, tol: float = DEFAULT_TOL,
                    base: FuchsianSystem | None = None,
                    lay=None) -> MalgrangeResult:
    """Deformation cycle of a one-parameter family of systems.

    The family must fix the punctures and vary the residues; h is the step
    of the (benign) central difference taken on the residues themselves.
    The monodromy derivatives are then exact, integrated alongside the
    transports through the variational equation.

    The cut graph is the star of spokes from the basepoint; the derivative
    of each cut's jump, conjugated by the cumulative monodromy products of
    the angular order, yields edge elements whose hub contributions cancel
    by telescoping.  Each edge element is split into a part commuting with
    the jump, carried by the puncture-ending edge, and a loop correction,
    so the result is a generalized cycle.

    lay selects the star (layout(sys, basepoint=...)); the default is the
    system's own layout.  Two deformation cycles meant to be intersected
    must be built on different stars so their supports are in general
    position; elements are always expressed through approaches rooted at
    the default basepoint.
    """
    sys0 = base if base is not None else family(0.0)
    sys0.require_valid()
    lay0 = layout(sys0)
    if lay is None:
        lay = lay0
    alt = abs(lay.basepoint - lay0.basepoint) > 0.0
    route = Path.from_points([lay0.basepoint, lay.basepoint]) if alt \
        else None
    order = lay.order
    sysp = family(h)
    sysm = family(-h)
    N = sys0.algebra.N
    scale = sys0.scale()
    if max(float(np.abs(sysp.punctures - sys0.punctures).max()),
           float(np.abs(sysm.punctures - sys0.punctures).max())) \
            > 1e-12 * scale:
        raise ValueError("the family must keep the punctures fixed")
    dres = [(Ap - Am) / (2.0 * h)
            for Ap, Am in zip(sysp.residues, sysm.residues)]

    S0 = {}
    dS0 = {}
    for j in order:
        S0[j], dS0[j] = transport_with_derivative(sys0, dres,
                                                  lay.loops[j], tol)

    # jumps across the cuts in angular order and their exact derivatives:
    # J_m = W_{m-1}^{-1} S_{o_m} W_{m-1} with W_m the ordered product
    J0 = []
    elements = []
    W = np.eye(N, dtype=complex)
    dW = np.zeros((N, N), dtype=complex)
    for j in order:
        Winv = np.linalg.inv(W)
        J = Winv @ S0[j] @ W
        dJ = Winv @ (dS0[j] + S0[j] @ dW @ Winv - dW @ Winv @ S0[j]) @ W
        eta = dJ @ np.linalg.inv(J)
        # exact derivatives of a unimodular family are traceless; the
        # projection removes integrator-level residue only
        eta -= np.trace(eta) / N * np.eye(N)
        J0.append(J)
        elements.append(eta)
        dW = dS0[j] @ W + S0[j] @ dW
        W = S0[j] @ W

    # hub cancellation in the hub's own branch: sum of W_{m-1} eta_m W^-1
    W = np.eye(N, dtype=complex)
    hub = np.zeros((N, N), dtype=complex)
    approaches: list = []
    for m, j in enumerate(order):
        hub = hub + W @ elements[m] @ np.linalg.inv(W)
        word = " ".join(f"g{k + 1}" for k in order[:m])
        app = realize(sys0, LoopWord.parse(word), lay) if word else None
        if route is not None:
            app = route.join(app) if app is not None else route
        approaches.append(app)
        W = S0[j] @ W
    hub_defect = float(np.abs(hub).max())

    # elements live in the germ at the star's own hub; arcs express their
    # element through an approach rooted at the default basepoint, so on an
    # alternate star every element is pulled back through the route
    if route is not None:
        Tr = transport(sys0, route, tol).matrix
        Tri = np.linalg.inv(Tr)
    eta_scale = max([float(np.abs(e).max()) for e in elements] + [0.0])
    terms = []
    for m, j in enumerate(order):
        eta = elements[m]
        if float(np.abs(eta).max()) <= 1e-9 * eta_scale or eta_scale == 0.0:
            continue
        # split against the jump itself: it is the loop monodromy seen
        # from the arc's own branch
        E_comm, F = _split_by_matrix(sys0.algebra, J0[m], eta,
                                     f"for the cut at puncture {j}")
        if route is not None:
            E_comm = Tri @ E_comm @ Tr
            F = Tri @ F @ Tr
        app = approaches[m]
        entry = lay.spokes[j].end
        edge_path = Path.from_points([lay.basepoint, entry,
                                      sys0.punctures[j]])
        # parts at the derivative-noise floor are dropped, not carried as
        # arcs whose endpoint data would be pure noise
        if float(np.abs(E_comm).max()) > 1e-7 * eta_scale:
            terms.append((1.0 + 0.0j, Arc(path=edge_path, E=E_comm,
                                          approach=app, end_puncture=j)))
        if float(np.abs(F).max()) > 1e-7 * eta_scale:
            terms.append((1.0 + 0.0j, Arc(path=lay.loops[j], E=F,
                                          approach=app)))
    chain = Chain(tuple(terms))
    if terms:
        bd = boundary(sys0, chain, tol, root_tol=1e-5)
        generalized_defect = bd.point_norm()
        omega = integrate_W1(sys0, chain, tol,
                             root_tol=1e-5) / (2j * math.pi)
    else:
        generalized_defect = 0.0
        omega = 0.0 + 0.0j
    return MalgrangeResult(chain=chain, omega=omega, hub_defect=hub_defect,
                           generalized_defect=generalized_defect,
                           edge_elements=tuple(elements))
