"""Plane geometry for polyline paths.

Points are complex numbers. Paths are polylines given by vertex sequences;
all clearance, winding and crossing computations reduce to segment-level
primitives kept in this module.
"""
from __future__ import annotations

import cmath

import numpy as np


def segment_point_distance(a: complex, b: complex, z: complex) -> float:
    """Distance from point z to the closed segment [a, b]."""
    d = b - a
    L2 = abs(d) ** 2
    if L2 == 0.0:
        return abs(z - a)
    t = ((z - a).real * d.real + (z - a).imag * d.imag) / L2
    t = min(1.0, max(0.0, t))
    return abs(z - (a + t * d))


def polyline_clearance(vertices, punctures) -> float:
    """Minimum distance from any segment of the polyline to any puncture."""
    vs = [complex(v) for v in vertices]
    best = np.inf
    for a, b in zip(vs[:-1], vs[1:]):
        for z in punctures:
            best = min(best, segment_point_distance(a, b, complex(z)))
    return float(best)


def polyline_length(vertices) -> float:
    vs = [complex(v) for v in vertices]
    return float(sum(abs(b - a) for a, b in zip(vs[:-1], vs[1:])))


def continuous_log_increment(vertices, z: complex) -> complex:
    """log(end - z) - log(start - z) tracked continuously along the polyline.

    A straight segment never subtends an angle of pi or more at an external
    point, so the per-segment principal-branch increments add up to the true
    continuous branch. The imaginary part divided by 2*pi is the winding.
    """
    total = 0.0 + 0.0j
    vs = [complex(v) for v in vertices]
    for a, b in zip(vs[:-1], vs[1:]):
        total += cmath.log((b - z) / (a - z))
    return total


def winding_number(vertices, z: complex) -> int:
    inc = continuous_log_increment(vertices, z)
    return int(round(inc.imag / (2.0 * np.pi)))


def arc_polyline(center: complex, radius: float, angle_from: float,
                 angle_to: float, max_step: float = np.pi / 8):
    """Vertices of a polygonal approximation of a circular arc.

    The arc is traversed from angle_from to angle_to; pass angle_to >
    angle_from for counterclockwise travel. Chord midpoints stay within
    radius*(1 - cos(max_step/2)) of the circle.
    """
    sweep = angle_to - angle_from
    n = max(2, int(np.ceil(abs(sweep) / max_step)))
    angles = np.linspace(angle_from, angle_to, n + 1)
    return [center + radius * cmath.exp(1j * a) for a in angles]


def segment_crossing(a1: complex, b1: complex, a2: complex, b2: complex,
                     parallel_tol: float = 1e-9, endpoint_tol: float = 1e-9):
    """Transversal crossing of two open segments.

    Returns None when the segments do not cross strictly inside both, a
    tuple (t1, t2, point, sign) for a clean transversal crossing, or the
    string 'degenerate' when the configuration is too close to parallel
    overlap or to an endpoint to decide (caller should perturb and retry).
    sign is +1 when the second direction is counterclockwise from the first.
    """
    d1 = b1 - a1
    d2 = b2 - a2
    denom = d1.real * d2.imag - d1.imag * d2.real   # cross(d1, d2)
    scale = abs(d1) * abs(d2)
    if scale == 0.0:
        return None
    r = a2 - a1
    if abs(denom) <= parallel_tol * scale:
        # parallel: degenerate only if the support lines nearly coincide
        # and the segments actually overlap in range.
        off = abs(r.real * d1.imag - r.imag * d1.real) / max(abs(d1), 1e-300)
        if off <= endpoint_tol * max(abs(d1), abs(d2)):
            lo = min(segment_point_distance(a1, b1, a2),
                     segment_point_distance(a1, b1, b2),
                     segment_point_distance(a2, b2, a1),
                     segment_point_distance(a2, b2, b1))
            if lo <= endpoint_tol * max(abs(d1), abs(d2)):
                return "degenerate"
        return None
    t1 = (r.real * d2.imag - r.imag * d2.real) / denom
    t2 = (r.real * d1.imag - r.imag * d1.real) / denom
    eps = endpoint_tol
    if t1 < -eps or t1 > 1 + eps or t2 < -eps or t2 > 1 + eps:
        return None
    if min(t1, t2) < eps or max(t1, t2) > 1 - eps:
        return "degenerate"
    point = a1 + t1 * d1
    return t1, t2, point, (1 if denom > 0 else -1)
