"""Planar Bezier evaluation and polyline self-intersection tests.

Everything here works on (N, 2) float arrays. Curves are evaluated by de
Casteljau subdivision, which is numerically stable and exact at the
endpoints. The self-intersection predicate runs robust orientation tests
with an epsilon of 1e-9 on bbox-normalized coordinates; collinear overlaps
count as intersections, segments that merely share an adjacent endpoint do
not.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

EPS = 1e-9


def bezier_point(polygon: np.ndarray, t: float) -> np.ndarray:
    """Evaluate the Bezier curve of ``polygon`` at parameter ``t``.

    ``polygon`` is the full control polygon, shape (n, 2) with n >= 2.
    Returns a (2,) point. Exact at t=0 and t=1.
    """
    p = np.asarray(polygon, dtype=float)
    if p.ndim != 2 or p.shape[0] < 2 or p.shape[1] != 2:
        raise ValueError(f"control polygon must be (n>=2, 2), got {p.shape}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"parameter t={t} outside [0, 1]")
    b = p.copy()
    n = len(b)
    for j in range(1, n):
        b[: n - j] = (1.0 - t) * b[: n - j] + t * b[1 : n - j + 1]
    return b[0]


def sample_curve(polygon: np.ndarray, segments: int) -> np.ndarray:
    """Sample the curve at ``segments + 1`` uniform parameter values.

    Vectorized de Casteljau over all parameters at once; rows 0 and -1 are
    bit-equal to the first and last control point.
    """
    p = np.asarray(polygon, dtype=float)
    if p.ndim != 2 or p.shape[0] < 2 or p.shape[1] != 2:
        raise ValueError(f"control polygon must be (n>=2, 2), got {p.shape}")
    if segments < 1:
        raise ValueError("segments must be >= 1")
    ts = np.linspace(0.0, 1.0, segments + 1)
    n = len(p)
    b = np.repeat(p[np.newaxis, :, :], len(ts), axis=0)
    w = ts[:, np.newaxis, np.newaxis]
    for j in range(1, n):
        b[:, : n - j] = (1.0 - w[:, 0:1]) * b[:, : n - j] + w * b[:, 1 : n - j + 1]
    out = b[:, 0]
    out[0] = p[0]
    out[-1] = p[-1]
    return out


def _segment_arrays(points: np.ndarray, closed: bool):
    """Segment endpoints with degenerate (near-zero length) segments dropped."""
    pts = np.asarray(points, dtype=float)
    starts = pts[:-1]
    ends = pts[1:]
    if closed:
        starts = np.vstack([starts, pts[-1:]])
        ends = np.vstack([ends, pts[:1]])
    keep = np.linalg.norm(ends - starts, axis=1) > 1e-12
    return starts[keep], ends[keep]


@lru_cache(maxsize=64)
def _pair_indices(m: int, closed: bool):
    """Non-adjacent segment index pairs for an m-segment chain."""
    ii, jj = np.triu_indices(m, k=1)
    adjacent = jj - ii == 1
    if closed:
        adjacent |= (ii == 0) & (jj == m - 1)
    keep = ~adjacent
    out = ii[keep].copy(), jj[keep].copy()
    out[0].setflags(write=False)
    out[1].setflags(write=False)
    return out


def is_self_intersecting(points: np.ndarray, closed: bool = False) -> bool:
    """True iff any two non-adjacent segments of the chain intersect.

    Proper crossings, T-junctions and collinear overlaps all count;
    consecutive segments sharing an endpoint (including the closing wrap
    for ``closed=True``) do not. Coordinates are normalized to the bbox
    before the orientation tests so the epsilon is scale-free. Pairs whose
    segment boxes are disjoint are rejected before any orientation math.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"polyline must be (n, 2), got {pts.shape}")
    if len(pts) < 3:
        return False
    lo = pts.min(axis=0)
    span = float(max((pts.max(axis=0) - lo).max(), 1e-30))
    norm = (pts - lo) / span

    a, b = _segment_arrays(norm, closed)
    m = len(a)
    if m < 3:
        return False

    # Adjacency is decided on the filtered list: consecutive kept segments
    # share an endpoint, possibly through dropped zero-length segments.
    ii, jj = _pair_indices(m, closed)
    if len(ii) == 0:
        return False

    seg_lo = np.minimum(a, b) - EPS
    seg_hi = np.maximum(a, b) + EPS
    near = (
        (seg_lo[ii, 0] <= seg_hi[jj, 0])
        & (seg_lo[jj, 0] <= seg_hi[ii, 0])
        & (seg_lo[ii, 1] <= seg_hi[jj, 1])
        & (seg_lo[jj, 1] <= seg_hi[ii, 1])
    )
    if not near.any():
        return False
    ii, jj = ii[near], jj[near]

    p1, p2 = a[ii], b[ii]
    q1, q2 = a[jj], b[jj]

    def orient(p, q, r):
        u = q - p
        v = r - p
        cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
        return np.where(np.abs(cross) <= EPS, 0.0, np.sign(cross))

    o1 = orient(p1, p2, q1)
    o2 = orient(p1, p2, q2)
    o3 = orient(q1, q2, p1)
    o4 = orient(q1, q2, p2)

    proper = (o1 * o2 < 0) & (o3 * o4 < 0)
    if proper.any():
        return True

    def on_segment(p, q, r):
        # r collinear with pq assumed; containment with epsilon slack.
        lo = np.minimum(p, q) - EPS
        hi = np.maximum(p, q) + EPS
        return np.all((r >= lo) & (r <= hi), axis=1)

    touch = (
        ((o1 == 0) & on_segment(p1, p2, q1))
        | ((o2 == 0) & on_segment(p1, p2, q2))
        | ((o3 == 0) & on_segment(q1, q2, p1))
        | ((o4 == 0) & on_segment(q1, q2, p2))
    )
    return bool(touch.any())
