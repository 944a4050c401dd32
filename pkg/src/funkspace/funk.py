"""Funk and Hilbert metrics on Euclidean convex bodies.

Three routes to the same number on a convex body: ``funk_f1`` measures the
log-ratio of distances to the boundary point where the ray from x through y
exits; ``funk_f2`` takes the supremum of log-ratios of distances to
supporting hyperplanes; ``funk_f3`` minimizes the Finsler length of paths
between the points. ``hilbert`` is the arithmetic symmetrization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._quad import integrate_unit_segments
from .bodies import (
    BoundaryHit,
    ConvexBody,
    Ellipsoid,
    HalfspacePolytope,
    Hyperplane,
    SupportOracle,
    _as_vec,
    _unit,
    contains_interior,
    distance_to_hyperplane,
    radial_function,
    ray_exit,
)
from .errors import (
    FiniteHitsRequired,
    NumericFailure,
    PointNotInterior,
    PointOutsideHalfspace,
    ValidationError,
)

# supremum search over unit normals on smooth bodies
N_STARTS = 32
GRAD_TOL = 1e-10
_F2_SEED = 0x5F2

# path machinery
PATH_QUAD_TOL = 1e-9
DESCENT_TOL = 1e-10


@dataclass(frozen=True)
class FunkValue:
    """A metric evaluation: the number, which formulation produced it, and
    where the extremum was attained (a hyperplane for F2, a boundary hit for
    F1). ``raw`` carries the unclamped supremum for F2 on unbounded bodies."""

    value: float
    formulation: str
    attained_at: Hyperplane | BoundaryHit | None = None
    raw: float | None = None


@dataclass(frozen=True)
class PiecewisePath:
    """Piecewise-linear path through the knots, unit parameter per segment."""

    knots: tuple

    def __post_init__(self):
        pts = tuple(_as_vec(k) for k in self.knots)
        if len(pts) < 2:
            raise ValidationError("a path needs at least two knots")
        d = pts[0].shape[0]
        for p in pts:
            if p.shape[0] != d:
                raise ValidationError("path knots must share one dimension")
        for a, b in zip(pts, pts[1:]):
            if np.array_equal(a, b):
                raise ValidationError("consecutive path knots must be distinct")
        object.__setattr__(self, "knots", pts)


def _require_interior(body: ConvexBody, *points):
    for p in points:
        if not contains_interior(body, p):
            raise PointNotInterior("point must be interior to the body")


def funk_f1(body: ConvexBody, x, y) -> FunkValue:
    """Funk distance via the boundary exit of the ray from x through y.

    Zero when x = y, and zero when the ray never exits (unbounded body), the
    weak-metric convention for recession rays.
    """
    x = _as_vec(x, body.dim)
    y = _as_vec(y, body.dim)
    _require_interior(body, x, y)
    gap = float(np.linalg.norm(y - x))
    if gap == 0.0:
        return FunkValue(0.0, "F1")
    hit = ray_exit(body, x, (y - x) / gap)
    if hit is None:
        return FunkValue(0.0, "F1")
    return FunkValue(math.log(hit.t_exit / (hit.t_exit - gap)), "F1", attained_at=hit)


def _f2_polytope(body: HalfspacePolytope, x, y) -> FunkValue:
    dx = body.offsets - body.normals @ x
    dy = body.offsets - body.normals @ y
    ratios = np.log(dx) - np.log(dy)
    i = int(np.argmax(ratios))
    raw = float(ratios[i])
    return FunkValue(max(0.0, raw), "F2", attained_at=body.halfspaces[i], raw=raw)


def _support_and_gradient(body, u_rows: np.ndarray):
    """h(u) and grad h(u) = support point, vectorized where the body allows."""
    if isinstance(body, Ellipsoid):
        w = (u_rows @ body.frame) * body.radii
        s = np.linalg.norm(w, axis=1)
        h = u_rows @ body.center + s
        grad = body.center + ((w * body.radii) / s[:, None]) @ body.frame.T
        return h, grad
    h = np.empty(u_rows.shape[0])
    grad = np.empty_like(u_rows)
    for i, u in enumerate(u_rows):
        h[i] = body.h(u)
        grad[i] = body.support_point(u) if math.isfinite(h[i]) else 0.0
    return h, grad


def _log_ratio_and_gradient(body, x, y, u_rows):
    h, grad_h = _support_and_gradient(body, u_rows)
    px = h - u_rows @ x
    py = h - u_rows @ y
    ok = np.isfinite(h) & (px > 0) & (py > 0)
    g = np.where(ok, np.log(np.where(ok, px, 1.0)) - np.log(np.where(ok, py, 1.0)), -np.inf)
    grad = np.where(
        ok[:, None],
        (grad_h - x) / np.where(ok, px, 1.0)[:, None] - (grad_h - y) / np.where(ok, py, 1.0)[:, None],
        0.0,
    )
    return g, grad, ok


def _log_ratio_hessian(body: Ellipsoid, x, y, u_rows):
    """Analytic ambient Hessian rows of the log-ratio for an ellipsoid."""
    q = body.frame @ np.diag(body.radii**2) @ body.frame.T
    qu = u_rows @ q
    s = np.sqrt(np.sum(u_rows * qu, axis=1))
    h = u_rows @ body.center + s
    grad_h = body.center + qu / s[:, None]
    hess_h = q[None, :, :] / s[:, None, None] - qu[:, :, None] * qu[:, None, :] / (
        s**3
    )[:, None, None]
    px = (h - u_rows @ x)[:, None, None]
    py = (h - u_rows @ y)[:, None, None]
    gx = (grad_h - x)[:, :, None]
    gy = (grad_h - y)[:, :, None]
    return (
        hess_h * (1.0 / px - 1.0 / py)
        - gx * np.swapaxes(gx, 1, 2) / px**2
        + gy * np.swapaxes(gy, 1, 2) / py**2
    )


def _tangent_bases(u_rows):
    """Orthonormal bases of the tangent spaces u-perp, shape (n, d, d-1)."""
    n, d = u_rows.shape
    if d == 2:
        b = np.stack([-u_rows[:, 1], u_rows[:, 0]], axis=1)
        return b[:, :, None]
    if d == 3:
        helper = np.eye(3)[np.argmin(np.abs(u_rows), axis=1)]
        b1 = np.cross(u_rows, helper)
        b1 /= np.linalg.norm(b1, axis=1, keepdims=True)
        b2 = np.cross(u_rows, b1)
        return np.stack([b1, b2], axis=2)
    bases = np.empty((n, d, d - 1))
    eye = np.eye(d)
    most = np.argmax(np.abs(u_rows), axis=1)
    for i in range(n):
        m = np.empty((d, d))
        m[:, 0] = u_rows[i]
        m[:, 1:] = eye[:, [j for j in range(d) if j != most[i]]]
        q, _ = np.linalg.qr(m)
        bases[i] = q[:, 1:]
    return bases


def _ascend_sphere(body, x, y, u0: np.ndarray, gtol: float = GRAD_TOL, iters: int = 60):
    """Multistart ascent of the supporting-plane log-ratio over unit normals.

    Damped Riemannian Newton with a gradient fallback, run on all starts at
    once. Returns final values, directions and per-start convergence flags
    (tangential gradient below gtol).
    """
    u = u0 / np.linalg.norm(u0, axis=1, keepdims=True)
    n, d = u.shape
    val, grad, ok = _log_ratio_and_gradient(body, x, y, u)
    converged = np.zeros(n, dtype=bool)
    analytic = isinstance(body, Ellipsoid)
    for _ in range(iters):
        tang = grad - np.sum(grad * u, axis=1, keepdims=True) * u
        gn = np.linalg.norm(tang, axis=1)
        converged |= ok & (gn <= gtol)
        act = np.flatnonzero(ok & ~converged)
        if act.size == 0:
            break
        ua = u[act]
        bases = _tangent_bases(ua)
        gamma = np.einsum("nd,ndk->nk", grad[act], bases)
        if analytic:
            hfull = _log_ratio_hessian(body, x, y, ua)
            hb = np.einsum("nde,nek->ndk", hfull, bases)
        else:
            eps = 1e-6
            hb = np.empty((act.size, d, d - 1))
            for k in range(d - 1):
                up = ua + eps * bases[:, :, k]
                um = ua - eps * bases[:, :, k]
                _, gp, _ = _log_ratio_and_gradient(body, x, y, up / np.linalg.norm(up, axis=1, keepdims=True))
                _, gm, _ = _log_ratio_and_gradient(body, x, y, um / np.linalg.norm(um, axis=1, keepdims=True))
                hb[:, :, k] = (gp - gm) / (2.0 * eps)
        ht = np.einsum("ndj,ndk->njk", bases, hb)
        ht = 0.5 * (ht + np.swapaxes(ht, 1, 2))
        ht -= np.einsum("nd,nd->n", grad[act], ua)[:, None, None] * np.eye(d - 1)
        # Newton step where the reduced Hessian is safely negative definite
        step = gamma.copy()
        evals = np.linalg.eigvalsh(ht)
        neg = evals[:, -1] < -1e-14
        if np.any(neg):
            step[neg] = np.linalg.solve(-ht[neg], gamma[neg][..., None])[..., 0]
        direction = np.einsum("ndk,nk->nd", bases, step)
        # backtracking: accept the first scale that does not decrease the value
        scale = np.ones(act.size)
        accepted = np.zeros(act.size, dtype=bool)
        for _ in range(25):
            rows = np.flatnonzero(~accepted)
            trial = ua[rows] + scale[rows, None] * direction[rows]
            trial /= np.linalg.norm(trial, axis=1, keepdims=True)
            tval, tgrad, tok = _log_ratio_and_gradient(body, x, y, trial)
            good = tok & (tval >= val[act[rows]] - 1e-15)
            if np.any(good):
                taken = act[rows[good]]
                u[taken] = trial[good]
                val[taken] = tval[good]
                grad[taken] = tgrad[good]
                accepted[rows[good]] = True
            if np.all(accepted):
                break
            scale[~accepted] *= 0.5
            if np.max(scale[~accepted]) < 1e-14:
                break
        stalled = act[~accepted]
        if stalled.size:
            converged[stalled] = True  # no move possible at machine scale
    return val, u, (converged | (ok & (np.linalg.norm(
        grad - np.sum(grad * u, axis=1, keepdims=True) * u, axis=1) <= gtol))) & ok


def funk_f2(body: ConvexBody, x, y) -> FunkValue:
    """Funk distance as the supremum of supporting-plane distance log-ratios.

    Exact facet maximum on polytopes. On ellipsoids and support oracles the
    supremum is searched by multistart ascent over unit normals, seeded with
    the exit-ray normals plus N_STARTS fixed pseudo-random directions, so the
    result is deterministic and certified >= the exit-ray bound. ``raw`` is
    the unclamped supremum, ``value`` is max(0, raw).
    """
    x = _as_vec(x, body.dim)
    y = _as_vec(y, body.dim)
    _require_interior(body, x, y)
    if isinstance(body, HalfspacePolytope):
        return _f2_polytope(body, x, y)
    if np.array_equal(x, y):
        return FunkValue(0.0, "F2", raw=0.0)
    starts = []
    gap = float(np.linalg.norm(y - x))
    hit = ray_exit(body, x, (y - x) / gap)
    if hit is not None:
        starts.extend(h.normal for h in hit.active)
    rng = np.random.default_rng(_F2_SEED)
    rand = rng.standard_normal((N_STARTS, body.dim))
    starts = np.vstack([np.stack(starts), rand]) if starts else rand
    vals, dirs, converged = _ascend_sphere(body, x, y, starts)
    if not np.any(converged):
        raise NumericFailure("no ascent start converged in the F2 supremum search")
    finite = vals > -np.inf
    i = int(np.argmax(np.where(finite, vals, -np.inf)))
    raw = float(vals[i])
    u_star = dirs[i]
    plane = Hyperplane(_unit(u_star), float(body._support(_unit(u_star))))
    return FunkValue(max(0.0, raw), "F2", attained_at=plane, raw=raw)


def finsler_norm(body: ConvexBody, x, xi) -> float:
    """Minkowski functional of the body seen from x: |xi| over the radial
    distance to the boundary along xi (zero for recession directions)."""
    x = _as_vec(x, body.dim)
    xi = _as_vec(xi, body.dim)
    _require_interior(body, x)
    speed = float(np.linalg.norm(xi))
    if speed == 0.0:
        return 0.0
    r = radial_function(body, x, xi / speed)
    return 0.0 if math.isinf(r) else speed / r


def finsler_norm_supports(body: HalfspacePolytope, x, xi) -> float:
    """Clamped supporting-plane form of the Finsler norm, exact on polytopes.

    Independent of the ray-exit route; used to cross-check finsler_norm.
    """
    x = _as_vec(x, body.dim)
    xi = _as_vec(xi, body.dim)
    _require_interior(body, x)
    gaps = body.offsets - body.normals @ x
    return max(0.0, float(np.max((body.normals @ xi) / gaps)))


def _finsler_batch(body: ConvexBody, pts: np.ndarray, vels: np.ndarray) -> np.ndarray:
    """finsler_norm for row-stacked (point, velocity) pairs."""
    if isinstance(body, HalfspacePolytope):
        gaps = body.offsets[None, :] - pts @ body.normals.T
        speed = vels @ body.normals.T
        t = np.where(speed > 0.0, gaps / np.where(speed > 0.0, speed, 1.0), np.inf)
        r = np.min(t, axis=1)
        return np.where(np.isinf(r), 0.0, 1.0 / r)
    if isinstance(body, Ellipsoid):
        y0 = ((pts - body.center) @ body.frame) / body.radii
        eta = (vels @ body.frame) / body.radii
        a = np.sum(eta * eta, axis=1)
        b = np.sum(y0 * eta, axis=1)
        c0 = np.sum(y0 * y0, axis=1) - 1.0
        still = a == 0.0
        a_safe = np.where(still, 1.0, a)
        t = (-b + np.sqrt(b * b - a_safe * c0)) / a_safe
        return np.where(still, 0.0, 1.0 / t)
    out = np.empty(pts.shape[0])
    for i in range(pts.shape[0]):
        out[i] = finsler_norm(body, pts[i], vels[i])
    return out


def funk_path_length(body: ConvexBody, path: PiecewisePath, tol: float = PATH_QUAD_TOL) -> float:
    """Finsler length of a piecewise-linear path, adaptive Gauss-Legendre per
    segment to absolute tolerance ``tol``."""
    knots = [_as_vec(k, body.dim) for k in path.knots]
    _require_interior(body, *knots)
    a = np.stack(knots[:-1])
    b = np.stack(knots[1:])

    def eval_batch(seg_idx, t):
        pts = a[seg_idx] + t[:, None] * (b[seg_idx] - a[seg_idx])
        return _finsler_batch(body, pts, b[seg_idx] - a[seg_idx])

    return float(np.sum(integrate_unit_segments(eval_batch, a.shape[0], tol)))


def _segment_lengths(body, a_pts: np.ndarray, b_pts: np.ndarray, tol) -> np.ndarray:
    """Finsler lengths of the row-paired straight segments a -> b."""

    def eval_batch(seg_idx, t):
        pts = a_pts[seg_idx] + t[:, None] * (b_pts[seg_idx] - a_pts[seg_idx])
        return _finsler_batch(body, pts, b_pts[seg_idx] - a_pts[seg_idx])

    return integrate_unit_segments(eval_batch, a_pts.shape[0], tol)


def _descend_path(body, x, y, knots, tol, max_sweeps=60):
    """Coordinate descent over knot positions; per-knot axis line searches."""
    k, d = knots.shape
    pts = [x] + [knots[i] for i in range(k)] + [y]
    seg = _segment_lengths(body, np.stack(pts[:-1]), np.stack(pts[1:]), tol)
    steps = np.full((k, d), 0.25 * float(np.linalg.norm(y - x)) / (k + 1))
    for _ in range(max_sweeps):
        gained = 0.0
        for i in range(k):
            prev_pt, next_pt = pts[i], pts[i + 2]
            for c in range(d):
                base = pts[i + 1]
                cur = seg[i] + seg[i + 1]
                deltas = steps[i, c] * np.array([1.0, -1.0, 0.5, -0.5, 0.25, -0.25])
                cands = np.repeat(base[None, :], deltas.size, axis=0)
                cands[:, c] += deltas
                keep = np.array([contains_interior(body, p) for p in cands])
                keep &= ~np.all(np.isclose(cands, prev_pt), axis=1)
                keep &= ~np.all(np.isclose(cands, next_pt), axis=1)
                if not np.any(keep):
                    steps[i, c] *= 0.4
                    continue
                cands = cands[keep]
                n = cands.shape[0]
                halves = _segment_lengths(
                    body,
                    np.concatenate([np.repeat(prev_pt[None, :], n, axis=0), cands]),
                    np.concatenate([cands, np.repeat(next_pt[None, :], n, axis=0)]),
                    tol,
                )
                totals = halves[:n] + halves[n:]
                j = int(np.argmin(totals))
                if totals[j] < cur:
                    gained += cur - totals[j]
                    pts[i + 1] = cands[j]
                    seg[i] = halves[j]
                    seg[i + 1] = halves[n + j]
                    steps[i, c] *= 1.6
                else:
                    steps[i, c] *= 0.4
        if gained < DESCENT_TOL:
            break
    return float(np.sum(seg)), np.stack(pts[1:-1]) if k else np.zeros((0, d))


def funk_f3(body: ConvexBody, x, y, knot_count: int = 5, restarts: int = 8, seed: int = 0) -> FunkValue:
    """Funk distance as the infimum of Finsler path length.

    Searches piecewise-linear paths with ``knot_count`` movable interior
    knots by coordinate descent, starting from the straight segment plus
    ``restarts`` random perturbations of it. The straight segment is always a
    candidate, so the result never exceeds its length.
    """
    x = _as_vec(x, body.dim)
    y = _as_vec(y, body.dim)
    _require_interior(body, x, y)
    if np.array_equal(x, y):
        return FunkValue(0.0, "F3")
    base = np.stack(
        [x + (i + 1) / (knot_count + 1) * (y - x) for i in range(knot_count)]
    ) if knot_count else np.zeros((0, body.dim))
    rng = np.random.default_rng([seed, 0xF3])
    inits = [base]
    sigma = 0.1 * float(np.linalg.norm(y - x))
    for _ in range(restarts):
        pert = rng.standard_normal(base.shape) * sigma
        cand = base + pert
        for _ in range(40):
            if all(contains_interior(body, p) for p in cand):
                break
            pert *= 0.5
            cand = base + pert
        else:
            cand = base
        inits.append(cand)
    best = math.inf
    for init in inits:
        val, _ = _descend_path(body, x, y, init.copy(), PATH_QUAD_TOL)
        best = min(best, val)
    return FunkValue(best, "F3")


def hilbert(body: ConvexBody, x, y) -> FunkValue:
    """Hilbert distance: the mean of the two Funk distances."""
    f_xy = funk_f1(body, x, y)
    f_yx = funk_f1(body, y, x)
    return FunkValue(0.5 * (f_xy.value + f_yx.value), "Hilbert")


def cross_ratio_log(body: ConvexBody, x, y) -> float:
    """Log cross ratio of x, y and the two boundary exits of their line.

    Equals funk_f1(x, y) + funk_f1(y, x); requires both rays to exit.
    """
    x = _as_vec(x, body.dim)
    y = _as_vec(y, body.dim)
    _require_interior(body, x, y)
    if np.array_equal(x, y):
        return 0.0
    gap = float(np.linalg.norm(y - x))
    hit_xy = ray_exit(body, x, (y - x) / gap)
    hit_yx = ray_exit(body, y, (x - y) / gap)
    if hit_xy is None or hit_yx is None:
        raise FiniteHitsRequired("both rays must exit the body")
    b1, b2 = hit_xy.point, hit_yx.point
    return math.log(
        (np.linalg.norm(x - b1) * np.linalg.norm(y - b2))
        / (np.linalg.norm(y - b1) * np.linalg.norm(x - b2))
    )


def derivative_check(body: ConvexBody, x, line, t: float, plane: Hyperplane):
    """Closed-form first/second t-derivatives of log(d(x, plane)/d(s(t), plane))
    along the line s(t) = p0 + t*v. The second derivative is the square of the
    first whenever v is normalized against the plane gap, and is nonnegative
    always."""
    p0, v = line
    p0 = _as_vec(p0, plane.dim)
    v = _as_vec(v, plane.dim)
    x = _as_vec(x, plane.dim)
    if plane.signed_gap(x) <= 0.0:
        raise PointOutsideHalfspace("reference point is outside the halfspace")
    s = p0 + t * v
    gap = plane.signed_gap(s)
    if gap <= 0.0:
        raise PointOutsideHalfspace("line point is outside the halfspace")
    d1 = float(plane.normal @ v) / gap
    return d1, d1 * d1


@dataclass(frozen=True)
class ConvexityReport:
    values: np.ndarray
    second_differences: np.ndarray
    all_nonneg: bool


def convexity_profile(body: ConvexBody, x, line, t_grid, reversed_orientation: bool = False, tol: float = 1e-9) -> ConvexityReport:
    """Centered second differences of the Funk value along a sampled line.

    Evaluates F(x, s(t)) on the grid, or F(s(t), x) when
    ``reversed_orientation`` is set.
    """
    p0, v = line
    p0 = _as_vec(p0, body.dim)
    v = _as_vec(v, body.dim)
    t_grid = np.asarray(t_grid, dtype=float)
    h = np.diff(t_grid)
    if h.size and np.max(np.abs(h - h[0])) > 1e-12:
        raise ValidationError("t_grid must be uniformly spaced")
    vals = []
    for t in t_grid:
        s = p0 + t * v
        f = funk_f1(body, s, x) if reversed_orientation else funk_f1(body, x, s)
        vals.append(f.value)
    vals = np.array(vals)
    sd = vals[:-2] - 2.0 * vals[1:-1] + vals[2:]
    return ConvexityReport(values=vals, second_differences=sd, all_nonneg=bool(np.all(sd >= -tol)))


def hilbert_midpoint(body: ConvexBody, a, b, tol: float = 1e-10) -> np.ndarray:
    """Hilbert midpoint of a and b along their straight segment (the Hilbert
    geodesic), located by bisection until the two half-distances agree."""
    a = _as_vec(a, body.dim)
    b = _as_vec(b, body.dim)
    _require_interior(body, a, b)
    if np.array_equal(a, b):
        return a.copy()
    lo, hi = 0.0, 1.0
    for _ in range(200):
        s = 0.5 * (lo + hi)
        m = a + s * (b - a)
        diff = hilbert(body, a, m).value - hilbert(body, m, b).value
        if abs(diff) <= tol:
            return m
        if diff < 0.0:
            lo = s
        else:
            hi = s
    raise NumericFailure("Hilbert midpoint bisection did not reach tolerance")
