"""Funk-type metrics on geodesically convex domains of the hyperbolic plane.

On a domain bounded by finitely many complete geodesics, the three Euclidean
formulations split into distinct quantities: ``wp_f2`` (supremum of
boundary-distance log-ratios), ``phi1`` (log-ratio of distances to the first
boundary hit by the ray through the two points) with its induced length
metric estimated by ``wp_f1_estimate``, and the Finsler-style length infimum
estimated by ``wp_f3_estimate``. They obey F1 <= F2 <= F3 rather than
coinciding; the negative curvature is what separates them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._quad import integrate_unit_segments
from .errors import ValidationError
from .hyperbolic import (
    GeodesicDomain,
    HTangent,
    _J,
    check_hpoint,
    check_tangent,
    domain_contains,
    exp_map,
    h_dist,
    hpoint,
    log_map,
    mdot,
    ray_hit_geodesic,
    require_in_domain,
)

LENGTH_QUAD_TOL = 1e-8
DESCENT_TOL = 1e-9
FIRST_HIT_TIE = 1e-12


@dataclass(frozen=True)
class ModelFunkValue:
    """Metric evaluation on the hyperbolic model.

    ``raw`` is the unclamped supremum where one exists; ``attained_at`` is
    the index of the extremal boundary geodesic; ``nonneg_violated`` flags a
    negative raw value (possible with finitely many boundaries)."""

    value: float
    formulation: str
    raw: float | None = None
    attained_at: int | None = None
    nonneg_violated: bool = False


@dataclass(frozen=True)
class HPiecewisePath:
    """Piecewise-geodesic path through hyperboloid-model knots."""

    knots: tuple

    def __post_init__(self):
        pts = tuple(check_hpoint(k) for k in self.knots)
        if len(pts) < 2:
            raise ValidationError("a path needs at least two knots")
        for a, b in zip(pts, pts[1:]):
            if np.array_equal(a, b):
                raise ValidationError("consecutive path knots must be distinct")
        object.__setattr__(self, "knots", pts)


def _boundary_dists(domain: GeodesicDomain, p) -> np.ndarray:
    a = domain.normal_rows @ (np.asarray(p) * _J)
    return np.arcsinh(-a)


def wp_f2(domain: GeodesicDomain, x, y) -> ModelFunkValue:
    """Supremum over boundary geodesics of log(d(x, s) / d(y, s)).

    Exact maximum over the finite boundary list. ``value`` is the clamp
    max(0, raw); the raw supremum already satisfies the triangle inequality.
    """
    x = check_hpoint(x)
    y = check_hpoint(y)
    require_in_domain(domain, x, y)
    ratios = np.log(_boundary_dists(domain, x)) - np.log(_boundary_dists(domain, y))
    i = int(np.argmax(ratios))
    raw = float(ratios[i])
    return ModelFunkValue(
        max(0.0, raw), "F2", raw=raw, attained_at=i, nonneg_violated=raw < 0.0
    )


def first_boundary_hit(domain: GeodesicDomain, x, xi: HTangent):
    """Earliest meeting of the ray exp_x(s xi) with any boundary geodesic.

    Returns (point, s, index) or None. Ties within FIRST_HIT_TIE go to the
    smaller boundary index (the meeting point coincides anyway).
    """
    hits = []
    for idx, line in enumerate(domain.boundaries):
        res = ray_hit_geodesic(x, xi, line)
        if res is not None:
            hits.append((res[1], idx, res[0]))
    if not hits:
        return None
    s_min = min(h[0] for h in hits)
    s, idx, point = min((h for h in hits if h[0] <= s_min + FIRST_HIT_TIE), key=lambda h: h[1])
    return point, s, idx


def phi1(domain: GeodesicDomain, x, y) -> ModelFunkValue:
    """Log-ratio of distances from x and y to the first boundary geodesic hit
    by the ray from x through y; zero when the ray escapes the domain."""
    x = check_hpoint(x)
    y = check_hpoint(y)
    require_in_domain(domain, x, y)
    tangent, _ = log_map(x, y)
    hit = first_boundary_hit(domain, x, tangent)
    if hit is None:
        return ModelFunkValue(0.0, "phi1")
    point, _, idx = hit
    return ModelFunkValue(
        math.log(h_dist(x, point) / h_dist(y, point)), "phi1", attained_at=idx
    )


def p_tilde(domain: GeodesicDomain, x, xi: HTangent) -> float:
    """Supremum over boundaries of <normal_field(x, s), xi> / d(x, s).

    Linear pieces, so the supremum is convex and positively homogeneous in
    xi; the raw value may be negative with finitely many boundaries.
    """
    x = check_hpoint(x)
    base, vec = check_tangent(xi, unit=False)
    require_in_domain(domain, x)
    a = domain.normal_rows @ (x * _J)
    pair = domain.normal_rows @ (vec * _J)
    terms = pair / (np.sqrt(1.0 + a * a) * np.arcsinh(-a))
    return float(np.max(terms))


def p_hat(domain: GeodesicDomain, x, xi: HTangent) -> float:
    """|xi| over the arclength to the first boundary hit along xi; zero when
    the ray escapes. Reciprocal of the distance to the domain boundary along
    the ray."""
    x = check_hpoint(x)
    base, vec = check_tangent(xi, unit=False)
    require_in_domain(domain, x)
    speed = math.sqrt(mdot(vec, vec))
    if speed == 0.0:
        return 0.0
    a = domain.normal_rows @ (x * _J)
    b = domain.normal_rows @ (vec * _J)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(b > 0.0, -a * speed / np.where(b > 0.0, b, 1.0), np.inf)
    valid = (ratio > 0.0) & (ratio < 1.0)
    if not np.any(valid):
        return 0.0
    s_min = float(np.min(np.arctanh(ratio[valid])))
    return speed / s_min


def _p_tilde_rows(domain, pts, vels):
    a = (pts * _J) @ domain.normal_rows.T
    pair = (vels * _J) @ domain.normal_rows.T
    return np.max(pair / (np.sqrt(1.0 + a * a) * np.arcsinh(-a)), axis=1)


def _p_hat_rows(domain, pts, vels):
    speed = np.sqrt(np.maximum(np.sum(vels * vels * _J, axis=1), 0.0))
    a = (pts * _J) @ domain.normal_rows.T
    b = (vels * _J) @ domain.normal_rows.T
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(b > 0.0, -a * speed[:, None] / np.where(b > 0.0, b, 1.0), np.inf)
    valid = (ratio > 0.0) & (ratio < 1.0)
    s = np.where(valid, np.arctanh(np.where(valid, ratio, 0.5)), np.inf)
    s_min = np.min(s, axis=1)
    return np.where(np.isinf(s_min), 0.0, speed / s_min)


def _segment_data(points_a, points_b):
    """Start point, unit tangent and arclength for each geodesic segment."""
    starts, tangents, lengths = [], [], []
    for a, b in zip(points_a, points_b):
        d = h_dist(a, b)
        if d < 1e-15:
            starts.append(a)
            tangents.append(np.zeros(3))
            lengths.append(0.0)
        else:
            tan, dist = log_map(a, b)
            starts.append(a)
            tangents.append(tan.vec)
            lengths.append(dist)
    return np.stack(starts), np.stack(tangents), np.array(lengths)


def _integrate_paths(domain, seg_starts, seg_tangents, seg_lengths, kind, tol):
    rows = _p_tilde_rows if kind == "tilde" else _p_hat_rows

    def eval_batch(seg_idx, t):
        arc = t * seg_lengths[seg_idx]
        s0 = seg_starts[seg_idx]
        v0 = seg_tangents[seg_idx]
        pts = s0 * np.cosh(arc)[:, None] + v0 * np.sinh(arc)[:, None]
        norms = np.sqrt(np.maximum(-np.sum(pts * pts * _J, axis=1), 1e-300))
        pts = pts / norms[:, None]
        vels = (s0 * np.sinh(arc)[:, None] + v0 * np.cosh(arc)[:, None]) * seg_lengths[
            seg_idx
        ][:, None]
        return rows(domain, pts, vels)

    return integrate_unit_segments(eval_batch, seg_starts.shape[0], tol)


def _path_length(domain, path: HPiecewisePath, kind, tol) -> float:
    knots = [check_hpoint(k) for k in path.knots]
    require_in_domain(domain, *knots)
    s, v, l = _segment_data(knots[:-1], knots[1:])
    live = l > 0.0
    if not np.any(live):
        return 0.0
    vals = _integrate_paths(domain, s[live], v[live], l[live], kind, tol)
    return float(np.sum(vals))


def length_tilde(domain: GeodesicDomain, path: HPiecewisePath, tol: float = LENGTH_QUAD_TOL) -> float:
    """Integral of p_tilde along the piecewise-geodesic path (raw integrand,
    may be negative)."""
    return _path_length(domain, path, "tilde", tol)


def length_hat(domain: GeodesicDomain, path: HPiecewisePath, tol: float = LENGTH_QUAD_TOL) -> float:
    """Integral of p_hat along the piecewise-geodesic path (nonnegative)."""
    return _path_length(domain, path, "hat", tol)


def _geodesic_chart_knots(x, y, k):
    """Chart coordinates of k equally spaced interior knots of the segment."""
    if k == 0:
        return np.zeros((0, 2))
    tangent, dist = log_map(x, y)
    pts = [exp_map(tangent, dist * (i + 1) / (k + 1)) for i in range(k)]
    return np.array([[p[0], p[1]] for p in pts])


def _lift(chart_pt):
    return hpoint(chart_pt[0], chart_pt[1])


def _descend_hyperbolic_path(domain, x, y, chart_knots, kind, tol, max_sweeps=40):
    k = chart_knots.shape[0]
    pts = [x] + [_lift(chart_knots[i]) for i in range(k)] + [y]

    def pair_lengths(prev_pt, cand_rows, next_pt):
        n = cand_rows.shape[0]
        a = np.concatenate([np.repeat(prev_pt[None, :], n, axis=0), cand_rows])
        b = np.concatenate([cand_rows, np.repeat(next_pt[None, :], n, axis=0)])
        s, v, l = _segment_data(list(a), list(b))
        out = np.zeros(2 * n)
        live = l > 0.0
        if np.any(live):
            out[live] = _integrate_paths(domain, s[live], v[live], l[live], kind, tol)
        return out[:n], out[n:]

    s, v, l = _segment_data(pts[:-1], pts[1:])
    seg = np.zeros(k + 1)
    live = l > 0.0
    if np.any(live):
        seg[live] = _integrate_paths(domain, s[live], v[live], l[live], kind, tol)
    chart = chart_knots.copy()
    steps = np.full((k, 2), 0.2 * max(h_dist(x, y), 0.1) / (k + 1))
    for _ in range(max_sweeps):
        gained = 0.0
        for i in range(k):
            prev_pt, next_pt = pts[i], pts[i + 2]
            for c in range(2):
                cur = seg[i] + seg[i + 1]
                deltas = steps[i, c] * np.array([1.0, -1.0, 0.5, -0.5, 0.25, -0.25])
                cand_chart = np.repeat(chart[i][None, :], deltas.size, axis=0)
                cand_chart[:, c] += deltas
                cands = np.stack([_lift(cc) for cc in cand_chart])
                keep = np.array([domain_contains(domain, p) for p in cands])
                keep &= ~np.all(np.isclose(cands, prev_pt), axis=1)
                keep &= ~np.all(np.isclose(cands, next_pt), axis=1)
                if not np.any(keep):
                    steps[i, c] *= 0.4
                    continue
                cand_chart = cand_chart[keep]
                cands = cands[keep]
                first, second = pair_lengths(prev_pt, cands, next_pt)
                totals = first + second
                j = int(np.argmin(totals))
                if totals[j] < cur:
                    gained += cur - totals[j]
                    pts[i + 1] = cands[j]
                    chart[i] = cand_chart[j]
                    seg[i] = first[j]
                    seg[i + 1] = second[j]
                    steps[i, c] *= 1.6
                else:
                    steps[i, c] *= 0.4
        if gained < DESCENT_TOL:
            break
    return float(np.sum(seg))


def _estimate(domain, x, y, kind, formulation, k, restarts, seed) -> ModelFunkValue:
    x = check_hpoint(x)
    y = check_hpoint(y)
    require_in_domain(domain, x, y)
    if np.array_equal(x, y):
        return ModelFunkValue(0.0, formulation)
    base = _geodesic_chart_knots(x, y, k)
    rng = np.random.default_rng([seed, 0xE5])
    inits = [base]
    sigma = 0.1 * max(h_dist(x, y), 0.05)
    for _ in range(restarts):
        pert = rng.standard_normal(base.shape) * sigma
        cand = base + pert
        for _ in range(40):
            if all(domain_contains(domain, _lift(cc)) for cc in cand):
                break
            pert *= 0.5
            cand = base + pert
        else:
            cand = base
        inits.append(cand)
    best = math.inf
    for init in inits:
        best = min(best, _descend_hyperbolic_path(domain, x, y, init.copy(), kind, LENGTH_QUAD_TOL))
    return ModelFunkValue(best, formulation, nonneg_violated=best < 0.0)


def wp_f1_estimate(domain: GeodesicDomain, x, y, knot_count: int = 5, restarts: int = 8, seed: int = 0) -> ModelFunkValue:
    """Upper estimate of the first-hit length metric: minimizes the p_hat
    length over piecewise-geodesic paths with movable knots. The geodesic
    segment is always a candidate, so the estimate never exceeds phi1."""
    return _estimate(domain, x, y, "hat", "F1est", knot_count, restarts, seed)


def wp_f3_estimate(domain: GeodesicDomain, x, y, knot_count: int = 5, restarts: int = 8, seed: int = 0) -> ModelFunkValue:
    """Upper estimate of the p_tilde length infimum over piecewise-geodesic
    paths; every candidate length bounds the boundary-distance supremum from
    above, so the estimate stays >= the raw wp_f2 value."""
    return _estimate(domain, x, y, "tilde", "F3est", knot_count, restarts, seed)


def wp_hilbert(domain: GeodesicDomain, x, y) -> ModelFunkValue:
    """Arithmetic symmetrization of the raw boundary-distance supremum."""
    f_xy = wp_f2(domain, x, y)
    f_yx = wp_f2(domain, y, x)
    val = 0.5 * (f_xy.raw + f_yx.raw)
    return ModelFunkValue(val, "Hilbert", raw=val, nonneg_violated=val < 0.0)
