"""Planar polygon primitives shared by the mesh and element modules."""

import numpy as np
from scipy.optimize import linprog


def signed_area(points):
    """Signed area of a polygon loop (positive for counter-clockwise)."""
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_area(points):
    """Unsigned area of a simple polygon."""
    return abs(signed_area(points))


def polygon_centroid(points):
    """Area centroid of a simple polygon (shoelace-based formula)."""
    x, y = points[:, 0], points[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    if a == 0.0:
        raise ValueError("degenerate polygon: zero area")
    cx = float(((x + xn) * cross).sum() / (6.0 * a))
    cy = float(((y + yn) * cross).sum() / (6.0 * a))
    return np.array([cx, cy])


def polygon_diameter(points):
    """Largest pairwise vertex distance."""
    diff = points[:, None, :] - points[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=-1).max()))


def _clip_halfplane(poly, a, b, tol):
    """Clip a convex polygon to the half-plane left of the directed line a->b."""
    if len(poly) == 0:
        return poly
    d = b - a
    dist = (poly[:, 0] - a[0]) * d[1] - (poly[:, 1] - a[1]) * d[0]
    dist = -dist  # left of a->b means cross(d, p - a) >= 0
    out = []
    n = len(poly)
    for i in range(n):
        j = (i + 1) % n
        di, dj = dist[i], dist[j]
        if di >= -tol:
            out.append(poly[i])
        if (di > tol and dj < -tol) or (di < -tol and dj > tol):
            t = di / (di - dj)
            out.append(poly[i] + t * (poly[j] - poly[i]))
    return np.array(out) if out else np.empty((0, 2))


def kernel_polygon(points):
    """Kernel of a simple CCW polygon: intersection of its edge half-planes.

    The kernel is the (convex, possibly empty) set of points that see the
    whole polygon.  Computed by clipping the bounding box against the
    half-plane to the left of every directed edge.
    """
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    pad = 0.5 * max(hi[0] - lo[0], hi[1] - lo[1], 1e-300)
    box = np.array([[lo[0] - pad, lo[1] - pad],
                    [hi[0] + pad, lo[1] - pad],
                    [hi[0] + pad, hi[1] + pad],
                    [lo[0] - pad, hi[1] + pad]])
    scale = max(hi[0] - lo[0], hi[1] - lo[1])
    tol = 1e-14 * max(scale, 1.0) ** 2
    ker = box
    n = len(points)
    for i in range(n):
        ker = _clip_halfplane(ker, points[i], points[(i + 1) % n], tol)
        if len(ker) == 0:
            break
    return ker


def inscribed_ball(points):
    """Center and radius of the largest ball inside the polygon kernel.

    Solves the Chebyshev-center linear program over the edge half-planes:
    maximize r subject to n_e . c - r >= n_e . a_e for every edge, where
    n_e is the inward unit normal.  Returns (center, 0.0) when the kernel
    is empty (polygon not star-shaped).
    """
    n = len(points)
    rows, rhs = [], []
    for i in range(n):
        a = points[i]
        d = points[(i + 1) % n] - a
        ln = np.hypot(d[0], d[1])
        if ln == 0.0:
            raise ValueError("zero-length polygon edge")
        nin = np.array([-d[1], d[0]]) / ln  # inward for CCW loops
        rows.append([-nin[0], -nin[1], 1.0])
        rhs.append(-float(nin @ a))
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    res = linprog(c=[0.0, 0.0, -1.0], A_ub=np.array(rows), b_ub=np.array(rhs),
                  bounds=[(lo[0], hi[0]), (lo[1], hi[1]), (0.0, None)],
                  method="highs")
    if not res.success or res.x[2] <= 0.0:
        return points.mean(axis=0), 0.0
    return np.array(res.x[:2]), float(res.x[2])


def _orient(p, q, r):
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _on_segment(p, q, r):
    """True if r lies on the closed segment pq, assuming p, q, r collinear."""
    return (min(p[0], q[0]) <= r[0] <= max(p[0], q[0])
            and min(p[1], q[1]) <= r[1] <= max(p[1], q[1]))


def segments_intersect(p1, p2, q1, q2):
    """Closed-segment intersection test (includes collinear overlap)."""
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and \
       ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _on_segment(q1, q2, p1):
        return True
    if d2 == 0 and _on_segment(q1, q2, p2):
        return True
    if d3 == 0 and _on_segment(p1, p2, q1):
        return True
    if d4 == 0 and _on_segment(p1, p2, q2):
        return True
    return False


def is_simple_polygon(points):
    """True if the loop has no repeated vertices and no edge crossings.

    Collinear consecutive edges (inserted midpoints) are legal; edges that
    double back onto their predecessor are not.
    """
    n = len(points)
    if n < 3:
        return False
    for i in range(n):
        j = (i + 1) % n
        if np.array_equal(points[i], points[j]):
            return False
    for i in range(n):
        a1, a2 = points[i], points[(i + 1) % n]
        # a spike: next edge reverses direction along the same line
        b1, b2 = points[(i + 1) % n], points[(i + 2) % n]
        if _orient(a1, a2, b2) == 0:
            u = a2 - a1
            v = b2 - b1
            if u @ v < 0:
                return False
        for k in range(i + 1, n):
            if k == i or (k + 1) % n == i or k == (i + 1) % n:
                continue  # adjacent edges share a vertex by construction
            c1, c2 = points[k], points[(k + 1) % n]
            if segments_intersect(a1, a2, c1, c2):
                return False
    return True


def fan_quadrature(points, center):
    """Quadrature exact for quadratics on a simple polygon.

    Fans the polygon into (signed) triangles from ``center`` and applies the
    three-midpoint rule on each: weights |T|/3 at the edge midpoints.  Signed
    triangle areas make the rule exact for any simple polygon regardless of
    star-shapedness of the fan.

    Returns (points (3m, 2), weights (3m,)).
    """
    n = len(points)
    pts = np.empty((3 * n, 2))
    wts = np.empty(3 * n)
    for i in range(n):
        v0 = points[i]
        v1 = points[(i + 1) % n]
        a = 0.5 * ((v0[0] - center[0]) * (v1[1] - center[1])
                   - (v0[1] - center[1]) * (v1[0] - center[0]))
        pts[3 * i] = 0.5 * (center + v0)
        pts[3 * i + 1] = 0.5 * (v0 + v1)
        pts[3 * i + 2] = 0.5 * (v1 + center)
        wts[3 * i:3 * i + 3] = a / 3.0
    return pts, wts
