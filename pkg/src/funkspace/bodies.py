"""Euclidean convex bodies: membership, supporting hyperplanes, ray exits.

A body is one of three representations sharing the same query surface:
``HalfspacePolytope`` (finite facet list), ``Ellipsoid`` (center, frame,
radii), ``SupportOracle`` (callable support function h plus the map from a
direction to its support point). All queries are pure functions of
immutable values.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NumericFailure,
    PointNotInterior,
    PointNotOnBoundary,
    PointOutsideHalfspace,
    Unbounded,
    ValidationError,
)

# Relative interior margin: points closer than this (times body scale) to the
# boundary are treated as non-interior, keeping log-ratio values well conditioned.
INTERIOR_MARGIN = 1e-9

# Relative tolerance for deciding that a facet/tangent plane is active at a
# boundary point.
ACTIVE_TOL = 1e-9

# Relative ray-exit tolerance for support-oracle bodies.
ORACLE_EXIT_TOL = 1e-12

_UNIT_TOL = 1e-12


def _as_vec(x, dim: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValidationError(f"expected a 1-d coordinate array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError("coordinates must be finite")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {v.shape[0]}")
    return v


def _unit(v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValidationError("zero vector has no direction")
    return v / n


@dataclass(frozen=True)
class Hyperplane:
    """Oriented hyperplane {p : normal.p = offset}.

    The normal is unit length and points away from the body, so the body-side
    halfspace is {p : normal.p < offset}.
    """

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = _as_vec(self.normal)
        if abs(np.linalg.norm(n) - 1.0) > _UNIT_TOL:
            raise ValidationError("hyperplane normal must be unit length within 1e-12")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return self.normal.shape[0]

    def signed_gap(self, x) -> float:
        """offset - normal.x; positive strictly inside the body-side halfspace."""
        return self.offset - float(self.normal @ _as_vec(x, self.dim))


@dataclass(frozen=True)
class BoundaryHit:
    """Exit of a ray through the boundary: point, ray parameter, active planes."""

    point: np.ndarray
    t_exit: float
    active: tuple[Hyperplane, ...]


class ConvexBody:
    """Common query surface; see module docstring for the three realizations."""

    dim: int
    scale: float
    interior_point: np.ndarray

    # realization hooks; eps_rel is the relative interior margin ----------
    def _contains(self, x: np.ndarray, eps_rel: float) -> bool:
        raise NotImplementedError

    def _ray_exit(self, x: np.ndarray, xi: np.ndarray):
        raise NotImplementedError

    def _support(self, u: np.ndarray) -> float:
        raise NotImplementedError

    def _supporting_at(self, b: np.ndarray) -> tuple[Hyperplane, ...]:
        raise NotImplementedError


def _chebyshev_center(normals: np.ndarray, offsets: np.ndarray) -> tuple[np.ndarray, float]:
    """Interior witness for N p <= o via the (box-capped) largest inscribed ball."""
    from scipy.optimize import linprog

    m, d = normals.shape
    box = 10.0 * (1.0 + float(np.max(np.abs(offsets))))
    c = np.zeros(d + 1)
    c[-1] = -1.0  # maximize the radius
    a_ub = np.hstack([normals, np.ones((m, 1))])
    bounds = [(-box, box)] * d + [(0.0, box)]
    res = linprog(c, A_ub=a_ub, b_ub=offsets, bounds=bounds, method="highs")
    if not res.success:
        raise ValidationError("halfspace intersection has empty interior")
    return res.x[:d], float(res.x[d])


class HalfspacePolytope(ConvexBody):
    """Intersection of finitely many open halfspaces {normal.p < offset}."""

    def __init__(self, halfspaces, interior_point=None):
        hs = []
        for h in halfspaces:
            if not isinstance(h, Hyperplane):
                h = Hyperplane(np.asarray(h[0], dtype=float), float(h[1]))
            hs.append(h)
        if not hs:
            raise ValidationError("polytope needs at least one halfspace")
        d = hs[0].dim
        for h in hs:
            if h.dim != d:
                raise DimensionMismatch("halfspace dimensions disagree")
        self.halfspaces = tuple(hs)
        self.normals = np.stack([h.normal for h in hs])
        self.offsets = np.array([h.offset for h in hs])
        self.dim = d
        self.scale = max(float(np.max(np.abs(self.offsets))), 1.0)
        if interior_point is None:
            center, radius = _chebyshev_center(self.normals, self.offsets)
            if radius <= 1e-12 * self.scale:
                raise ValidationError("halfspace intersection has empty interior")
            interior_point = center
        w = _as_vec(interior_point, d)
        if not self._contains(w, INTERIOR_MARGIN):
            raise ValidationError("witness point is not interior to the polytope")
        self.interior_point = w
        self._vertices = None
        self._bounded = None

    # -- hooks ----------------------------------------------------------
    def _contains(self, x, eps_rel):
        return bool(np.all(self.normals @ x < self.offsets - eps_rel * self.scale))

    def _ray_exit(self, x, xi):
        speed = self.normals @ xi
        gaps = self.offsets - self.normals @ x
        fwd = speed > 0.0
        if not np.any(fwd):
            return None
        t_all = np.where(fwd, gaps / np.where(fwd, speed, 1.0), np.inf)
        t = float(np.min(t_all))
        point = x + t * xi
        resid = np.abs(self.normals @ point - self.offsets)
        active = tuple(
            h for h, r in zip(self.halfspaces, resid) if r <= ACTIVE_TOL * self.scale
        )
        return BoundaryHit(point=point, t_exit=t, active=active)

    def _support(self, u):
        if self.dim <= 3:
            if not self.is_bounded() and self._recession_gain(u) > 1e-9:
                raise Unbounded("support is infinite in a recession direction")
            verts = self.vertices()
            if verts.shape[0] == 0:
                raise NumericFailure("no vertices found for support evaluation")
            return float(np.max(verts @ u))
        from scipy.optimize import linprog

        res = linprog(-u, A_ub=self.normals, b_ub=self.offsets, bounds=[(None, None)] * self.dim, method="highs")
        if res.status == 3:
            raise Unbounded("support is infinite in a recession direction")
        if not res.success:
            raise NumericFailure(f"support LP failed: {res.message}")
        return float(-res.fun)

    def _supporting_at(self, b):
        resid = self.normals @ b - self.offsets
        if float(np.max(resid)) > ACTIVE_TOL * self.scale:
            raise PointNotOnBoundary("point lies outside the polytope")
        active = tuple(
            h for h, r in zip(self.halfspaces, resid) if abs(r) <= ACTIVE_TOL * self.scale
        )
        if not active:
            raise PointNotOnBoundary("point is interior, no facet is active")
        return active

    # -- polytope-specific helpers ---------------------------------------
    def _recession_gain(self, u) -> float:
        """max u.xi over the (box-capped) recession cone; > 0 means unbounded in u."""
        from scipy.optimize import linprog

        res = linprog(
            -u,
            A_ub=self.normals,
            b_ub=np.zeros(len(self.offsets)),
            bounds=[(-1.0, 1.0)] * self.dim,
            method="highs",
        )
        if not res.success:
            raise NumericFailure(f"recession LP failed: {res.message}")
        return float(-res.fun)

    def is_bounded(self) -> bool:
        if self._bounded is None:
            gains = [self._recession_gain(e) for e in np.eye(self.dim)]
            gains += [self._recession_gain(-e) for e in np.eye(self.dim)]
            self._bounded = max(gains) <= 1e-9
        return self._bounded

    def vertices(self) -> np.ndarray:
        """Enumerate vertices by solving all d-subsets of facet equations (d <= 3)."""
        if self._vertices is not None:
            return self._vertices
        if self.dim > 3:
            raise NumericFailure("vertex enumeration is limited to d <= 3")
        m, d = self.normals.shape
        tol = ACTIVE_TOL * self.scale
        found = []
        for idx in itertools.combinations(range(m), d):
            a = self.normals[list(idx)]
            if abs(np.linalg.det(a)) < 1e-12:
                continue
            v = np.linalg.solve(a, self.offsets[list(idx)])
            if np.all(self.normals @ v <= self.offsets + tol):
                found.append(v)
        if found:
            arr = np.array(found)
            # dedupe corners produced by several facet subsets
            keys = np.round(arr / max(tol, 1e-12), 0)
            _, keep = np.unique(keys, axis=0, return_index=True)
            arr = arr[np.sort(keep)]
        else:
            arr = np.zeros((0, d))
        self._vertices = arr
        return arr

    def vertices_ccw(self) -> np.ndarray:
        """2-d vertices ordered counterclockwise around the witness point."""
        if self.dim != 2:
            raise DimensionMismatch("ccw ordering is a 2-d operation")
        verts = self.vertices()
        rel = verts - self.interior_point
        order = np.argsort(np.arctan2(rel[:, 1], rel[:, 0]))
        return verts[order]


class Ellipsoid(ConvexBody):
    """Image of the unit ball under p = center + frame @ diag(radii) @ w."""

    def __init__(self, center, radii, axes=None):
        c = _as_vec(center)
        r = _as_vec(radii, c.shape[0])
        if np.any(r <= 0):
            raise ValidationError("ellipsoid radii must be positive")
        d = c.shape[0]
        if axes is None:
            frame = np.eye(d)
        else:
            frame = np.asarray(axes, dtype=float).T  # rows of `axes` are the axis directions
            if frame.shape != (d, d):
                raise DimensionMismatch("axes must form a d x d frame")
            if np.max(np.abs(frame.T @ frame - np.eye(d))) > 1e-9:
                raise ValidationError("axes must be orthonormal")
        self.center = c
        self.radii = r
        self.frame = frame
        self.dim = d
        self.scale = max(float(np.max(np.abs(c))), float(np.max(r)), 1.0)
        self.interior_point = c

    def _pullback(self, x):
        return (self.frame.T @ (x - self.center)) / self.radii

    def _quadratic(self, x) -> float:
        y = self._pullback(x)
        return float(y @ y)

    def _contains(self, x, eps_rel):
        # margin applied to the pullback norm, so eps_rel is a distance margin
        return self._quadratic(x) < (1.0 - eps_rel) ** 2

    def _ray_exit(self, x, xi):
        y0 = self._pullback(x)
        eta = (self.frame.T @ xi) / self.radii
        a = float(eta @ eta)
        b = float(y0 @ eta)
        c0 = float(y0 @ y0) - 1.0
        disc = b * b - a * c0
        t = (-b + math.sqrt(disc)) / a
        point = x + t * xi
        return BoundaryHit(point=point, t_exit=float(t), active=(self.tangent_at(point),))

    def tangent_at(self, b) -> Hyperplane:
        grad = self.frame @ ((self.frame.T @ (b - self.center)) / self.radii**2)
        n = _unit(grad)
        return Hyperplane(n, float(n @ b))

    def _support(self, u):
        w = self.radii * (self.frame.T @ u)
        return float(u @ self.center + np.linalg.norm(w))

    def support_point(self, u) -> np.ndarray:
        w = self.radii * (self.frame.T @ u)
        return self.center + self.frame @ (self.radii * w / np.linalg.norm(w))

    def _supporting_at(self, b):
        plane = self.tangent_at(b)
        gap = self._support(plane.normal) - float(plane.normal @ b)
        if abs(gap) > ACTIVE_TOL * self.scale:
            raise PointNotOnBoundary("point is not on the ellipsoid boundary")
        return (plane,)


def _sphere_probes(dim: int, count: int) -> np.ndarray:
    if dim == 2:
        ang = 2.0 * np.pi * np.arange(count) / count
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if dim == 3:
        # Fibonacci sphere, deterministic
        i = np.arange(count) + 0.5
        phi = np.arccos(1.0 - 2.0 * i / count)
        theta = np.pi * (1.0 + 5.0**0.5) * i
        return np.stack(
            [np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)], axis=1
        )
    raise DimensionMismatch("support-oracle bodies are limited to d in {2, 3}")


class SupportOracle(ConvexBody):
    """Convex body given by its support function h and support-point map.

    ``support_fn(u) -> float`` returns sup over the body of u.p for unit u
    (may return inf for recession directions). ``support_point_fn(u)`` returns
    the maximizing boundary point (the gradient of h where h is finite).
    """

    def __init__(self, support_fn, support_point_fn, dim, interior_point, scale=None, probes=None):
        if dim not in (2, 3):
            raise DimensionMismatch("support-oracle bodies are limited to d in {2, 3}")
        self.h = support_fn
        self.support_point = support_point_fn
        self.dim = dim
        self._probe_dirs = _sphere_probes(dim, probes or (64 if dim == 2 else 192))
        if scale is None:
            vals = [abs(self.h(u)) for u in self._probe_dirs if math.isfinite(self.h(u))]
            scale = max(max(vals, default=1.0), 1.0)
        self.scale = float(scale)
        w = _as_vec(interior_point, dim)
        if not self._contains(w, INTERIOR_MARGIN):
            raise ValidationError("witness point is not interior to the oracle body")
        self.interior_point = w

    def margin(self, p) -> tuple[float, np.ndarray]:
        """max over unit u of u.p - h(u), with the maximizing direction.

        Negative inside (minus the depth), positive outside (the distance).
        Probe directions seed a projected gradient ascent; the ascent gradient
        is p - support_point(u).
        """
        vals = np.array([float(u @ p) - self.h(u) for u in self._probe_dirs])
        finite = np.isfinite(vals)
        if not np.any(finite):
            raise NumericFailure("support oracle returned no finite values")
        order = np.argsort(vals[finite])[::-1][:4]
        starts = self._probe_dirs[finite][order]
        best_val, best_u = -np.inf, None
        for u in starts:
            u = u.copy()
            val = float(u @ p) - self.h(u)
            step = 1.0
            for _ in range(120):
                grad = p - np.asarray(self.support_point(u), dtype=float)
                tang = grad - (grad @ u) * u
                gn = float(np.linalg.norm(tang))
                if gn <= 1e-13 * self.scale:
                    break
                improved = False
                while step > 1e-18:
                    cand = _unit(u + step * tang)
                    cval = float(cand @ p) - self.h(cand)
                    if cval > val:
                        u, val = cand, cval
                        step *= 2.0
                        improved = True
                        break
                    step *= 0.5
                if not improved:
                    break
            if val > best_val:
                best_val, best_u = val, u
        return best_val, best_u

    def _contains(self, x, eps_rel):
        return self.margin(x)[0] < -eps_rel * self.scale

    def _ray_exit(self, x, xi):
        speed = self._probe_dirs @ xi
        h_vals = np.array([self.h(u) for u in self._probe_dirs])
        fwd = (speed > 1e-12) & np.isfinite(h_vals)
        if not np.any(fwd):
            return None
        t_hi = float(np.min((h_vals[fwd] - self._probe_dirs[fwd] @ x) / speed[fwd]))
        t_hi *= 1.0 + 1e-9
        t_lo = 0.0
        m_hi, u_hi = self.margin(x + t_hi * xi)
        if m_hi < 0.0:
            raise NumericFailure("oracle ray exit failed to bracket the boundary")
        tol = ORACLE_EXIT_TOL * self.scale
        while t_hi - t_lo > 1e-7 * self.scale:
            mid = 0.5 * (t_lo + t_hi)
            if self.margin(x + mid * xi)[0] < 0.0:
                t_lo = mid
            else:
                t_hi = mid
        # Newton polish on the margin along the ray; d(margin)/dt = u*.xi
        t = 0.5 * (t_lo + t_hi)
        for _ in range(40):
            m, u_star = self.margin(x + t * xi)
            slope = float(u_star @ xi)
            if slope <= 0:
                break
            t_new = t - m / slope
            t_new = min(max(t_new, t_lo), t_hi)
            if abs(t_new - t) <= tol:
                t = t_new
                break
            t = t_new
        point = x + t * xi
        _, u_star = self.margin(point)
        plane = Hyperplane(u_star, self.h(u_star))
        return BoundaryHit(point=point, t_exit=float(t), active=(plane,))

    def _support(self, u):
        val = self.h(u)
        if not math.isfinite(val):
            raise Unbounded("support oracle is infinite in this direction")
        return float(val)

    def _supporting_at(self, b):
        m, u_star = self.margin(b)
        if abs(m) > ACTIVE_TOL * self.scale:
            raise PointNotOnBoundary("point is not on the oracle body boundary")
        return (Hyperplane(u_star, self.h(u_star)),)


# ---------------------------------------------------------------------------
# module operations
# ---------------------------------------------------------------------------

def contains_interior(body: ConvexBody, x) -> bool:
    """True iff x lies in the open interior with relative margin INTERIOR_MARGIN."""
    x = _as_vec(x, body.dim)
    return body._contains(x, INTERIOR_MARGIN)


def distance_to_hyperplane(x, plane: Hyperplane) -> float:
    """Euclidean distance from x (strictly inside the halfspace) to the plane."""
    gap = plane.signed_gap(x)
    if gap <= 0.0:
        raise PointOutsideHalfspace("point is not strictly inside the halfspace")
    return gap


def foot(x, plane: Hyperplane) -> np.ndarray:
    """Nearest-point projection of x onto the hyperplane."""
    x = _as_vec(x, plane.dim)
    return x + plane.signed_gap(x) * plane.normal


def ray_exit(body: ConvexBody, x, xi) -> BoundaryHit | None:
    """First boundary crossing of the ray x + t*xi, t > 0.

    Returns None when the ray stays inside forever (recession direction of an
    unbounded body). t_exit is measured in units of |xi|.
    """
    x = _as_vec(x, body.dim)
    xi = _as_vec(xi, body.dim)
    if float(np.linalg.norm(xi)) == 0.0:
        raise ValidationError("ray direction must be nonzero")
    if not contains_interior(body, x):
        raise PointNotInterior("ray origin must be interior")
    return body._ray_exit(x, xi)


def supporting_hyperplanes_at(body: ConvexBody, b) -> tuple[Hyperplane, ...]:
    """All supporting hyperplanes active at boundary point b (up to ACTIVE_TOL)."""
    b = _as_vec(b, body.dim)
    return body._supporting_at(b)


def support_function(body: ConvexBody, u) -> float:
    """sup over the body of u.p for a unit direction u; raises Unbounded."""
    u = _unit(_as_vec(u, body.dim))
    return body._support(u)


def radial_function(body: ConvexBody, x, xi) -> float:
    """Distance from interior x to the boundary along xi; inf for recession rays."""
    hit = ray_exit(body, x, xi)
    return math.inf if hit is None else hit.t_exit


def affine_image(body: ConvexBody, a, b) -> ConvexBody:
    """Image of the body under p -> a @ p + b (a invertible)."""
    a = np.asarray(a, dtype=float)
    b = _as_vec(b, body.dim)
    if isinstance(body, HalfspacePolytope):
        a_inv_t = np.linalg.inv(a).T
        planes = []
        for h in body.halfspaces:
            n = a_inv_t @ h.normal
            s = float(np.linalg.norm(n))
            planes.append(Hyperplane(n / s, (h.offset + float(n @ b)) / s))
        return HalfspacePolytope(planes, interior_point=a @ body.interior_point + b)
    if isinstance(body, Ellipsoid):
        m = body.frame @ np.diag(body.radii**2) @ body.frame.T
        m2 = a @ m @ a.T
        evals, evecs = np.linalg.eigh(m2)
        return Ellipsoid(a @ body.center + b, np.sqrt(evals), axes=evecs.T)
    raise ValidationError("affine images are defined for polytopes and ellipsoids")


def unit_ball(dim: int = 2) -> Ellipsoid:
    """The unit disk/ball centered at the origin."""
    return Ellipsoid(np.zeros(dim), np.ones(dim))


def box(dim: int = 2, half_width: float = 1.0) -> HalfspacePolytope:
    """The axis-aligned cube [-half_width, half_width]^dim."""
    planes = []
    for i in range(dim):
        for s in (1.0, -1.0):
            n = np.zeros(dim)
            n[i] = s
            planes.append(Hyperplane(n, half_width))
    return HalfspacePolytope(planes, interior_point=np.zeros(dim))
