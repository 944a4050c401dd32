"""Hyperboloid-model primitives for the hyperbolic plane.

Points are numpy triples (p1, p2, p0) on the upper sheet of <p, p> = -1 for
the Minkowski form <u, v> = u1 v1 + u2 v2 - u0 v0. A complete geodesic line
is encoded by a unit spacelike normal n (the line is <p, n> = 0), and a
convex domain is an intersection of the halfplanes <p, n_i> < 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    CoincidentPoints,
    InvalidHPoint,
    InvalidTangent,
    PointNotInterior,
    PointOnGeodesic,
    ValidationError,
)

HPOINT_TOL = 1e-10
DOMAIN_MARGIN = 1e-9

_J = np.array([1.0, 1.0, -1.0])


def mdot(u, v) -> float:
    """Minkowski pairing u1 v1 + u2 v2 - u0 v0."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(u[0] * v[0] + u[1] * v[1] - u[2] * v[2])


def _as_triple(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (3,) or not np.all(np.isfinite(p)):
        raise InvalidHPoint(f"expected a finite coordinate triple, got {p!r}")
    return p


def check_hpoint(p) -> np.ndarray:
    p = _as_triple(p)
    if abs(mdot(p, p) + 1.0) > HPOINT_TOL or p[2] <= 0.0:
        raise InvalidHPoint("point is not on the upper hyperboloid sheet")
    return p


def normalize_hpoint(p) -> np.ndarray:
    """Rescale a timelike triple onto the upper hyperboloid sheet."""
    p = _as_triple(p)
    q = -mdot(p, p)
    if q <= 0.0 or p[2] <= 0.0:
        raise InvalidHPoint("triple is not timelike with positive last coordinate")
    return p / math.sqrt(q)


def hpoint(x1: float, x2: float) -> np.ndarray:
    """Hyperboloid point above chart coordinates (x1, x2)."""
    return np.array([x1, x2, math.sqrt(1.0 + x1 * x1 + x2 * x2)])


ORIGIN = hpoint(0.0, 0.0)


class HTangent(NamedTuple):
    """Tangent vector at a hyperboloid point: <base, vec> = 0."""

    base: np.ndarray
    vec: np.ndarray


def check_tangent(t: HTangent, unit: bool = True) -> HTangent:
    base = check_hpoint(t.base)
    vec = _as_triple(t.vec)
    if abs(mdot(base, vec)) > 1e-8:
        raise InvalidTangent("vector is not Minkowski-orthogonal to its base point")
    if unit and abs(mdot(vec, vec) - 1.0) > 1e-8:
        raise InvalidTangent("tangent vector is not unit length")
    return HTangent(base, vec)


def tangent_toward_chart(p, direction) -> HTangent:
    """Unit tangent at p whose chart shadow points along `direction`."""
    p = check_hpoint(p)
    d = np.asarray(direction, dtype=float)
    v = np.array([d[0], d[1], 0.0])
    v = v + mdot(p, v) * p  # Minkowski projection onto the tangent space
    n = math.sqrt(mdot(v, v))
    if n == 0.0:
        raise ValidationError("direction must be nonzero")
    return HTangent(p, v / n)


@dataclass(frozen=True)
class HGeodesicLine:
    """Complete geodesic {p : <p, normal> = 0} with unit spacelike normal."""

    normal: np.ndarray

    def __post_init__(self):
        n = _as_triple(self.normal)
        if abs(mdot(n, n) - 1.0) > HPOINT_TOL:
            raise ValidationError("geodesic normal must be unit spacelike within 1e-10")
        object.__setattr__(self, "normal", n)


@dataclass(frozen=True)
class GeodesicDomain:
    """Intersection of the halfplanes <p, n_i> < 0, with an interior witness."""

    boundaries: tuple
    witness: np.ndarray

    def __post_init__(self):
        bs = tuple(
            b if isinstance(b, HGeodesicLine) else HGeodesicLine(np.asarray(b, dtype=float))
            for b in self.boundaries
        )
        if not bs:
            raise ValidationError("domain needs at least one boundary geodesic")
        w = check_hpoint(self.witness)
        for b in bs:
            if mdot(w, b.normal) >= -1e-12:
                raise ValidationError("witness point is not strictly inside every halfplane")
        object.__setattr__(self, "boundaries", bs)
        object.__setattr__(self, "witness", w)
        object.__setattr__(self, "normal_rows", np.stack([b.normal for b in bs]))

    @property
    def count(self) -> int:
        return len(self.boundaries)


def h_dist(p, q) -> float:
    """Geodesic distance acosh(-<p, q>), via the difference vector when the
    points are close (the acosh form loses digits there)."""
    p = check_hpoint(p)
    q = check_hpoint(q)
    c = -mdot(p, q)
    if c < 1.0 + 1e-8:
        delta = p - q
        return 2.0 * math.asinh(0.5 * math.sqrt(max(0.0, mdot(delta, delta))))
    return math.acosh(c)


def exp_map(t: HTangent, s: float) -> np.ndarray:
    """Point at arclength s along the unit tangent t."""
    base, vec = check_tangent(t)
    p = base * math.cosh(s) + vec * math.sinh(s)
    return normalize_hpoint(p)


def log_map(p, q) -> tuple[HTangent, float]:
    """Unit tangent at p toward q, with the distance; inverse of exp_map."""
    p = check_hpoint(p)
    q = check_hpoint(q)
    d = h_dist(p, q)
    w = q + mdot(p, q) * p
    n = math.sqrt(max(0.0, mdot(w, w)))
    if d == 0.0 or n == 0.0:
        raise CoincidentPoints("log map needs two distinct points")
    return HTangent(p, w / n), d


def signed_dist_to_geodesic(p, line: HGeodesicLine) -> float:
    """arcsinh(<p, n>): negative on the domain side, |.| is the distance."""
    p = check_hpoint(p)
    return math.asinh(mdot(p, line.normal))


def project_to_geodesic(p, line: HGeodesicLine) -> np.ndarray:
    """Nearest point on the geodesic line (Minkowski Gram-Schmidt)."""
    p = check_hpoint(p)
    a = mdot(p, line.normal)
    return (p - a * line.normal) / math.sqrt(1.0 + a * a)


def normal_field(p, line: HGeodesicLine) -> HTangent:
    """Unit tangent at p toward its projection on the line; minus this vector
    is the gradient of the distance to the line."""
    p = check_hpoint(p)
    a = mdot(p, line.normal)
    if a == 0.0:
        raise PointOnGeodesic("normal field is undefined on the line itself")
    vec = -math.copysign(1.0, a) * (a * p + line.normal) / math.sqrt(1.0 + a * a)
    return HTangent(p, vec)


def ray_hit_geodesic(x, xi: HTangent, line: HGeodesicLine):
    """First meeting of the ray exp_x(s * xi), s > 0, with the line.

    Returns (point, s) or None when the ray stays on one side (including
    asymptotic rays). Solves tanh s = -<x, n> / <xi, n>.
    """
    x = check_hpoint(x)
    base, vec = check_tangent(xi)
    a = mdot(x, line.normal)
    if a == 0.0:
        raise PointOnGeodesic("ray origin lies on the geodesic")
    b = mdot(vec, line.normal)
    if b == 0.0:
        return None
    ratio = -a / b
    if ratio <= 0.0 or ratio >= 1.0:
        return None
    s = math.atanh(ratio)
    return exp_map(HTangent(x, vec), s), s


def domain_contains(domain: GeodesicDomain, p) -> bool:
    """Membership in the open domain with Minkowski margin DOMAIN_MARGIN."""
    p = check_hpoint(p)
    return bool(np.all(domain.normal_rows @ (p * _J) < -DOMAIN_MARGIN))


def require_in_domain(domain: GeodesicDomain, *points):
    for p in points:
        if not domain_contains(domain, p):
            raise PointNotInterior("point must lie in the domain interior")


# ---------------------------------------------------------------------------
# coordinates and isometries
# ---------------------------------------------------------------------------

def disk_to_hyperboloid(u) -> np.ndarray:
    """Poincare-disk point (|u| < 1) to hyperboloid coordinates."""
    u = np.asarray(u, dtype=float)
    s = float(u @ u)
    if s >= 1.0:
        raise ValidationError("disk points must satisfy |u| < 1")
    return np.array([2.0 * u[0], 2.0 * u[1], 1.0 + s]) / (1.0 - s)


def hyperboloid_to_disk(p) -> np.ndarray:
    """Inverse chart of disk_to_hyperboloid."""
    p = check_hpoint(p)
    return p[:2] / (1.0 + p[2])


def geodesic_from_ideal_endpoints(e1, e2) -> HGeodesicLine:
    """Geodesic line with the given ideal endpoints (unit disk-boundary
    vectors). The normal orientation is arbitrary; flip as needed."""
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    for e in (e1, e2):
        if abs(np.linalg.norm(e) - 1.0) > 1e-9:
            raise ValidationError("ideal endpoints must be unit vectors on the disk boundary")
    l1 = np.array([e1[0], e1[1], 1.0])
    l2 = np.array([e2[0], e2[1], 1.0])
    n = _J * np.cross(l1, l2)
    q = mdot(n, n)
    if q <= 1e-14:
        raise ValidationError("ideal endpoints must be distinct")
    return HGeodesicLine(n / math.sqrt(q))


def geodesic_at_distance(direction_angle: float, distance: float) -> HGeodesicLine:
    """Geodesic at the given distance from the origin, perpendicular to the
    chart direction (cos a, sin a), oriented with the origin inside."""
    c, s = math.cos(direction_angle), math.sin(direction_angle)
    return HGeodesicLine(
        np.array([c * math.cosh(distance), s * math.cosh(distance), math.sinh(distance)])
    )


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def boost(t: float) -> np.ndarray:
    c, s = math.cosh(t), math.sinh(t)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def random_isometry(rng: np.random.Generator) -> np.ndarray:
    """Random orientation-preserving hyperbolic isometry (rotation-boost-rotation)."""
    return rotation(rng.uniform(0.0, 2.0 * math.pi)) @ boost(rng.uniform(-1.5, 1.5)) @ rotation(
        rng.uniform(0.0, 2.0 * math.pi)
    )


def apply_isometry(g: np.ndarray, p) -> np.ndarray:
    """Apply the isometry matrix to a point, tangent vector or normal triple."""
    return g @ np.asarray(p, dtype=float)


def transform_domain(g: np.ndarray, domain: GeodesicDomain) -> GeodesicDomain:
    return GeodesicDomain(
        tuple(HGeodesicLine(g @ b.normal) for b in domain.boundaries),
        normalize_hpoint(g @ domain.witness),
    )
