"""Batched adaptive Gauss-Legendre quadrature over [0, 1] parameter segments."""

from __future__ import annotations

import numpy as np

from .errors import NumericFailure

_ORDER = 10
_gl_nodes, _gl_weights = np.polynomial.legendre.leggauss(_ORDER)
_T01 = 0.5 * (_gl_nodes + 1.0)
_W01 = 0.5 * _gl_weights


def integrate_unit_segments(eval_batch, n_segments: int, tol: float, max_depth: int = 28) -> np.ndarray:
    """Integrate f over t in [0, 1] for each of n_segments segments.

    ``eval_batch(seg_idx, t)`` takes flat int/float arrays of equal length and
    returns the integrand values. ``tol`` is the absolute tolerance per
    segment; subintervals inherit it proportionally to their width. The
    estimate on each subinterval is order-10 Gauss-Legendre, accepted when the
    two-half refinement agrees within the inherited tolerance.
    """
    total = np.zeros(n_segments)
    seg = np.arange(n_segments)
    lo = np.zeros(n_segments)
    hi = np.ones(n_segments)
    for depth in range(max_depth + 1):
        if seg.size == 0:
            return total
        h = hi - lo
        mid = lo + 0.5 * h
        # coarse nodes, then the two half panels
        t_c = lo[:, None] + h[:, None] * _T01
        t_l = lo[:, None] + 0.5 * h[:, None] * _T01
        t_r = mid[:, None] + 0.5 * h[:, None] * _T01
        t_all = np.concatenate([t_c, t_l, t_r], axis=1)
        idx = np.repeat(seg, 3 * _ORDER)
        vals = np.asarray(eval_batch(idx, t_all.ravel()), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise NumericFailure("non-finite integrand value in path quadrature")
        vals = vals.reshape(seg.size, 3 * _ORDER)
        i_c = h * (vals[:, :_ORDER] @ _W01)
        i_f = 0.5 * h * (vals[:, _ORDER : 2 * _ORDER] @ _W01 + vals[:, 2 * _ORDER :] @ _W01)
        err = np.abs(i_f - i_c)
        ok = err <= tol * np.maximum(h, 1e-300)
        np.add.at(total, seg[ok], i_f[ok])
        bad = ~ok
        if not np.any(bad):
            return total
        seg = np.repeat(seg[bad], 2)
        lo = np.stack([lo[bad], mid[bad]], axis=1).ravel()
        hi = np.stack([mid[bad], hi[bad]], axis=1).ravel()
    raise NumericFailure(f"quadrature did not converge within depth {max_depth}")
