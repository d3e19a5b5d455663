"""Polygonal meshes of the unit square and the L-shaped domain.

Generators cover structured squares and triangles, the small-edge variants
obtained by inserting every edge midpoint as a polygon vertex, seeded
deformations of the interior vertices, and Lloyd-relaxed Voronoi tilings.
Meshes are immutable value objects: vertices, counter-clockwise cell loops,
and tagged boundary edges.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Voronoi, cKDTree

from .geometry import (
    inscribed_ball,
    is_simple_polygon,
    kernel_polygon,
    polygon_diameter,
    signed_area,
)

SQUARE_FAMILIES = ("squares", "triangles", "triangles_midpoint",
                   "deformed_squares", "deformed_triangles_midpoint",
                   "voronoi")
LSHAPE_FAMILIES = ("squares", "triangles", "triangles_midpoint",
                   "deformed_squares", "deformed_triangles_midpoint")

DIRICHLET = "dirichlet"
NEUMANN = "neumann"
_TAGS = (DIRICHLET, NEUMANN)


class PolygonalMesh:
    """Immutable polygonal mesh: vertices, CCW cell loops, tagged boundary.

    Attributes
    ----------
    vertices : ndarray, shape (nv, 2)
    cells : list of int ndarrays
        Vertex-index loops, counter-clockwise, at least 3 vertices each.
    boundary : list of ((i, j), tag)
        Undirected boundary edges with tag 'dirichlet' or 'neumann'.
    """

    def __init__(self, vertices, cells, boundary):
        self.vertices = np.ascontiguousarray(np.asarray(vertices, dtype=float))
        self.cells = [np.asarray(c, dtype=np.int64) for c in cells]
        self.boundary = [((int(e[0]), int(e[1])), str(tag)) for e, tag in boundary]

    @property
    def num_vertices(self):
        return len(self.vertices)

    @property
    def num_cells(self):
        return len(self.cells)

    def cell_points(self, k):
        """Coordinates of cell k as an (n, 2) array."""
        return self.vertices[self.cells[k]]

    def total_area(self):
        return sum(signed_area(self.cell_points(k)) for k in range(self.num_cells))

    def boundary_vertices(self, tag=None):
        """Set of vertex indices on boundary edges (optionally of one tag)."""
        out = set()
        for (i, j), t in self.boundary:
            if tag is None or t == tag:
                out.add(i)
                out.add(j)
        return out

    def copy(self):
        return PolygonalMesh(self.vertices.copy(),
                             [c.copy() for c in self.cells],
                             list(self.boundary))


# ---------------------------------------------------------------------------
# structured generators


def _boundary_edges_from_cells(cells):
    """Edges used by exactly one cell, in deterministic first-seen order."""
    directed = set()
    order = []
    for cell in cells:
        n = len(cell)
        for k in range(n):
            e = (int(cell[k]), int(cell[(k + 1) % n]))
            directed.add(e)
            order.append(e)
    out = []
    for i, j in order:
        if (j, i) not in directed:
            out.append((i, j))
    return out


def _insert_edge_midpoints(vertices, cells):
    """Insert the midpoint of every cell edge as a new polygon vertex.

    Each n-gon becomes a 2n-gon with collinear small edges; geometry is
    unchanged.  Midpoint indices are assigned in first-seen edge order so the
    output is deterministic.
    """
    verts = list(vertices)
    mid = {}
    new_cells = []
    for cell in cells:
        n = len(cell)
        loop = []
        for k in range(n):
            a, b = int(cell[k]), int(cell[(k + 1) % n])
            key = (min(a, b), max(a, b))
            if key not in mid:
                mid[key] = len(verts)
                verts.append(0.5 * (vertices[a] + vertices[b]))
            loop.append(a)
            loop.append(mid[key])
        new_cells.append(np.array(loop, dtype=np.int64))
    return np.array(verts), new_cells


def _structured_grid(n, domain):
    """Vertex grid and kept (i, j) cell indices for the requested domain.

    The grid step is 1/n; the unit square keeps all n*n cells, the L-shape
    (0,2)^2 minus its upper-right unit quadrant keeps 3*n*n of the (2n)^2.
    """
    m = n if domain == "square" else 2 * n
    idx = -np.ones((m + 1, m + 1), dtype=np.int64)
    verts = []
    grid_ij = []
    for j in range(m + 1):
        for i in range(m + 1):
            if domain == "lshape" and i > n and j > n:
                continue  # vertex only used by removed quadrant
            idx[i, j] = len(verts)
            verts.append((i / n, j / n))
            grid_ij.append((i, j))
    kept = []
    for j in range(m):
        for i in range(m):
            if domain == "lshape" and i >= n and j >= n:
                continue
            kept.append((i, j))
    return np.array(verts, dtype=float), idx, kept, grid_ij, m


def _interior_mask(grid_ij, n, m, domain):
    mask = []
    for i, j in grid_ij:
        if domain == "square":
            on_bnd = i == 0 or j == 0 or i == m or j == m
        else:
            on_bnd = (i == 0 or j == 0 or i == m or j == m
                      or (i == n and j >= n) or (j == n and i >= n))
        mask.append(not on_bnd)
    return np.array(mask, dtype=bool)


def _generate_structured(n, family, domain, seed):
    verts, idx, kept, grid_ij, m = _structured_grid(n, domain)

    deformed = family.startswith("deformed_")
    base = family[len("deformed_"):] if deformed else family
    if deformed:
        rng = np.random.default_rng(seed)
        amp = 0.1 / n
        interior = _interior_mask(grid_ij, n, m, domain)
        for v in range(len(verts)):
            if interior[v]:
                verts[v] += rng.uniform(-amp, amp, size=2)

    cells = []
    if base == "squares":
        for i, j in kept:
            cells.append(np.array([idx[i, j], idx[i + 1, j],
                                   idx[i + 1, j + 1], idx[i, j + 1]]))
    elif base in ("triangles", "triangles_midpoint"):
        for i, j in kept:
            v00, v10 = idx[i, j], idx[i + 1, j]
            v11, v01 = idx[i + 1, j + 1], idx[i, j + 1]
            cells.append(np.array([v00, v10, v11]))
            cells.append(np.array([v00, v11, v01]))
        if base == "triangles_midpoint":
            verts, cells = _insert_edge_midpoints(verts, cells)
    else:
        raise ValueError(f"unknown mesh family {family!r}")

    boundary = [(e, DIRICHLET) for e in _boundary_edges_from_cells(cells)]
    return PolygonalMesh(verts, cells, boundary)


# ---------------------------------------------------------------------------
# Voronoi generator


def _clipped_voronoi_regions(points):
    """Voronoi cells of ``points`` clipped exactly to the unit square.

    Mirrors the seeds across the four walls so every original cell is a
    bounded region whose wall edges lie on the square boundary.
    """
    x, y = points[:, 0], points[:, 1]
    mirrored = np.vstack([
        points,
        np.column_stack([-x, y]),
        np.column_stack([2.0 - x, y]),
        np.column_stack([x, -y]),
        np.column_stack([x, 2.0 - y]),
    ])
    vor = Voronoi(mirrored)
    regions = []
    for p in range(len(points)):
        region = vor.regions[vor.point_region[p]]
        if -1 in region or len(region) < 3:
            raise RuntimeError("unbounded Voronoi region despite mirroring")
        poly = vor.vertices[region]
        if signed_area(poly) < 0:
            poly = poly[::-1]
        regions.append(poly)
    return regions


def _polygon_centroid_safe(poly):
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    if a == 0.0:
        return poly.mean(axis=0)
    return np.array([((x + xn) * cross).sum() / (6 * a),
                     ((y + yn) * cross).sum() / (6 * a)])


def _generate_voronoi(n, seed, cell_count, lloyd_sweeps=2):
    if cell_count is None:
        cell_count = n * n
    if cell_count < 1:
        raise ValueError("voronoi cell_count must be >= 1")
    rng = np.random.default_rng(seed)
    points = rng.random((cell_count, 2))
    for _ in range(lloyd_sweeps):
        regions = _clipped_voronoi_regions(points)
        points = np.array([_polygon_centroid_safe(p) for p in regions])
        np.clip(points, 1e-6, 1.0 - 1e-6, out=points)
    regions = _clipped_voronoi_regions(points)

    # snap near-wall coordinates exactly onto the walls
    snapped = []
    for poly in regions:
        q = poly.copy()
        for wall in (0.0, 1.0):
            q[np.abs(q[:, 0] - wall) < 1e-9, 0] = wall
            q[np.abs(q[:, 1] - wall) < 1e-9, 1] = wall
        snapped.append(q)

    # weld shared vertices into a global list
    all_pts = np.vstack(snapped)
    tree = cKDTree(all_pts)
    groups = tree.query_ball_point(all_pts, r=1e-9)
    canon = np.arange(len(all_pts))
    for i, grp in enumerate(groups):
        canon[i] = min(grp)
    remap = {}
    verts = []
    offsets = np.cumsum([0] + [len(p) for p in snapped])
    cells = []
    for c, poly in enumerate(snapped):
        loop = []
        for k in range(len(poly)):
            key = int(canon[offsets[c] + k])
            if key not in remap:
                remap[key] = len(verts)
                verts.append(all_pts[key])
            vid = remap[key]
            if not loop or loop[-1] != vid:
                loop.append(vid)
        if len(loop) > 1 and loop[0] == loop[-1]:
            loop.pop()
        if len(loop) < 3:
            raise RuntimeError("degenerate Voronoi cell after welding")
        cells.append(np.array(loop, dtype=np.int64))

    boundary = [(e, DIRICHLET) for e in _boundary_edges_from_cells(cells)]
    return PolygonalMesh(np.array(verts), cells, boundary)


# ---------------------------------------------------------------------------
# public generators


def generate_square_mesh(n, family, seed=0, cell_count=None):
    """Mesh the unit square (0,1)^2 with ``n`` polygons per boundary side.

    Parameters
    ----------
    n : int
        Subdivisions per side (refinement parameter; the mesh size used for
        convergence fits is h = 1/n).
    family : str
        One of 'squares', 'triangles', 'triangles_midpoint',
        'deformed_squares', 'deformed_triangles_midpoint', 'voronoi'.
        The midpoint families insert every edge midpoint of the parent
        triangulation as a polygon vertex, producing collinear small edges.
        Deformed families jitter interior vertices by a seeded uniform
        perturbation of amplitude 0.1/n.  'voronoi' builds a seeded Voronoi
        tiling with two Lloyd relaxation sweeps.
    seed : int
        RNG seed for the deformed and voronoi families.
    cell_count : int, optional
        Voronoi generator count (default n*n).

    Returns
    -------
    PolygonalMesh with every boundary edge tagged 'dirichlet'.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if family not in SQUARE_FAMILIES:
        raise ValueError(f"unknown mesh family {family!r}; "
                         f"expected one of {SQUARE_FAMILIES}")
    if family == "voronoi":
        return _generate_voronoi(n, seed, cell_count)
    return _generate_structured(n, family, "square", seed)


def generate_lshape_mesh(n, family, seed=0):
    """Mesh the L-shaped domain (0,2)^2 minus [1,2)^2, area 3.

    ``n`` is the number of polygons per unit boundary side; each of the three
    unit squares is subdivided n-by-n.  Families are the structured ones of
    :func:`generate_square_mesh` (no 'voronoi').  All boundary edges are
    tagged 'dirichlet'.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if family not in LSHAPE_FAMILIES:
        raise ValueError(f"unknown mesh family {family!r}; "
                         f"expected one of {LSHAPE_FAMILIES}")
    return _generate_structured(n, family, "lshape", seed)


def retag_boundary(mesh, tagger):
    """Return a copy of ``mesh`` with boundary tags reassigned.

    ``tagger(p, q)`` receives the two endpoint coordinates of each boundary
    edge and must return 'dirichlet' or 'neumann'.
    """
    out = mesh.copy()
    boundary = []
    for (i, j), _ in mesh.boundary:
        tag = tagger(mesh.vertices[i], mesh.vertices[j])
        if tag not in _TAGS:
            raise ValueError(f"invalid boundary tag {tag!r}")
        boundary.append(((i, j), tag))
    out.boundary = boundary
    return out


def tag_bottom_dirichlet(mesh, tol=1e-12):
    """Tag edges on y = 0 'dirichlet' and the remaining boundary 'neumann'."""
    def tagger(p, q):
        return DIRICHLET if abs(p[1]) <= tol and abs(q[1]) <= tol else NEUMANN
    return retag_boundary(mesh, tagger)


# ---------------------------------------------------------------------------
# validation


def validate_mesh(mesh):
    """Check the mesh invariants; raise ValueError on the first violation.

    Verifies finite coordinates, no duplicate vertices within 1e-12, simple
    CCW positive-area cell loops, and that every edge is either shared by
    exactly two cells (with opposite orientation) or is a tagged boundary
    edge.
    """
    verts = mesh.vertices
    if not np.all(np.isfinite(verts)):
        raise ValueError("non-finite vertex coordinates")
    if len(verts) >= 2:
        tree = cKDTree(verts)
        pairs = tree.query_pairs(1e-12)
        if pairs:
            i, j = sorted(next(iter(pairs)))
            raise ValueError(f"duplicate vertices {i} and {j} (within 1e-12)")
    directed = {}
    for k, cell in enumerate(mesh.cells):
        if len(cell) < 3:
            raise ValueError(f"cell {k} has fewer than 3 vertices")
        if cell.min() < 0 or cell.max() >= len(verts):
            raise ValueError(f"cell {k} references vertex {int(cell.max())} "
                             f"out of range (0..{len(verts) - 1})")
        if len(np.unique(cell)) != len(cell):
            raise ValueError(f"cell {k} repeats a vertex")
        pts = verts[cell]
        a = signed_area(pts)
        if a == 0.0:
            raise ValueError(f"cell {k} is degenerate (zero area)")
        if a < 0.0:
            raise ValueError(f"cell {k} is clockwise")
        if not is_simple_polygon(pts):
            raise ValueError(f"cell {k} is self-intersecting")
        n = len(cell)
        for t in range(n):
            e = (int(cell[t]), int(cell[(t + 1) % n]))
            if e in directed:
                raise ValueError(f"edge {e} appears twice with the same "
                                 "orientation")
            directed[e] = k
    boundary_set = {}
    for (i, j), tag in mesh.boundary:
        if tag not in _TAGS:
            raise ValueError(f"invalid boundary tag {tag!r}")
        key = (min(i, j), max(i, j))
        if key in boundary_set:
            raise ValueError(f"boundary edge {key} listed twice")
        boundary_set[key] = tag
    for (i, j) in directed:
        if (j, i) in directed:
            continue  # interior edge, opposite orientation present
        if (min(i, j), max(i, j)) not in boundary_set:
            raise ValueError(f"edge ({i}, {j}) used once but not tagged as "
                             "boundary")
    used = {(min(i, j), max(i, j)) for (i, j) in directed}
    for key in boundary_set:
        i, j = key
        if key not in used:
            raise ValueError(f"boundary edge {key} not used by any cell")
        if (i, j) in directed and (j, i) in directed:
            raise ValueError(f"boundary edge {key} is shared by two cells")
    return mesh


# ---------------------------------------------------------------------------
# quality report


@dataclass
class MeshQualityReport:
    """Per-cell shape metrics for the star-shapedness assumptions.

    h : cell diameters.
    rho : radius of the largest ball inscribed in each cell's kernel
        (rho == 0 flags a non-star-shaped cell).
    gamma_min : min over cells of rho/h, the star-shapedness constant.
    n_max : largest cell edge count.
    min_edge_ratio : min over cells and edges of |e|/h.
    c_h : max over cells of log(1 + h/h_min_edge), the small-edge constant.
    centroid_in_kernel : whether the area centroid sees the whole cell
        (required by the centroid-fan quadrature).
    """
    h: np.ndarray
    rho: np.ndarray
    gamma_min: float
    n_max: int
    min_edge_ratio: float
    c_h: float
    centroid_in_kernel: np.ndarray = field(repr=False, default=None)

    @property
    def mesh_size(self):
        return float(self.h.max())


def _point_in_convex(poly, p, tol):
    if len(poly) == 0:
        return False
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) < -tol:
            return False
    return True


def quality_report(mesh):
    """Compute shape metrics for every cell; degenerate cells raise."""
    validate_mesh(mesh)
    nc = mesh.num_cells
    h = np.empty(nc)
    rho = np.empty(nc)
    cent_ok = np.empty(nc, dtype=bool)
    min_edge_ratio = np.inf
    c_h = 0.0
    n_max = 0
    for k in range(nc):
        pts = mesh.cell_points(k)
        h[k] = polygon_diameter(pts)
        _, rho[k] = inscribed_ball(pts)
        edges = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        min_edge_ratio = min(min_edge_ratio, float(edges.min() / h[k]))
        c_h = max(c_h, float(np.log1p(h[k] / edges.min())))
        n_max = max(n_max, len(pts))
        ker = kernel_polygon(pts)
        x, y = pts[:, 0], pts[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        cross = x * yn - xn * y
        a = 0.5 * cross.sum()
        centroid = np.array([((x + xn) * cross).sum() / (6 * a),
                             ((y + yn) * cross).sum() / (6 * a)])
        cent_ok[k] = _point_in_convex(ker, centroid, 1e-12 * h[k])
    gamma_min = float((rho / h).min())
    return MeshQualityReport(h=h, rho=rho, gamma_min=gamma_min, n_max=n_max,
                             min_edge_ratio=min_edge_ratio, c_h=c_h,
                             centroid_in_kernel=cent_ok)


# ---------------------------------------------------------------------------
# JSON input/output


def _fmt(x):
    return f"{x:.17g}"


def write_mesh(mesh, path):
    """Write the mesh as JSON with 17-significant-digit coordinates.

    Schema: {"vertices": [[x, y], ...], "cells": [[i0, i1, ...], ...],
    "boundary": [{"edge": [i, j], "tag": "dirichlet"|"neumann"}, ...]}.
    Indices are 0-based; write followed by read is the identity.
    """
    lines = ['{', '"vertices": [']
    nv = mesh.num_vertices
    for i, (x, y) in enumerate(mesh.vertices):
        sep = "," if i < nv - 1 else ""
        lines.append(f"[{_fmt(x)}, {_fmt(y)}]{sep}")
    lines.append('],')
    lines.append('"cells": [')
    for k, cell in enumerate(mesh.cells):
        sep = "," if k < mesh.num_cells - 1 else ""
        lines.append("[" + ", ".join(str(int(v)) for v in cell) + f"]{sep}")
    lines.append('],')
    lines.append('"boundary": [')
    nb = len(mesh.boundary)
    for b, ((i, j), tag) in enumerate(mesh.boundary):
        sep = "," if b < nb - 1 else ""
        lines.append(f'{{"edge": [{i}, {j}], "tag": "{tag}"}}{sep}')
    lines.append(']')
    lines.append('}')
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh(path):
    """Read a mesh JSON file, validating and normalizing orientation.

    Clockwise cell loops are re-oriented counter-clockwise; invalid vertex
    indices, self-intersecting loops, and duplicate vertices raise
    ValueError.
    """
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("vertices", "cells", "boundary"):
        if key not in doc:
            raise ValueError(f"mesh file missing {key!r} array")
    verts = np.asarray(doc["vertices"], dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 2:
        raise ValueError("vertices must be an array of [x, y] pairs")
    cells = []
    for raw in doc["cells"]:
        cell = np.asarray(raw, dtype=np.int64)
        if len(cell) and (cell.min() < 0 or cell.max() >= len(verts)):
            raise ValueError(f"cell references vertex {int(cell.max())} out "
                             f"of range (0..{len(verts) - 1})")
        if signed_area(verts[cell]) < 0:
            cell = cell[::-1].copy()
        cells.append(cell)
    boundary = []
    for item in doc["boundary"]:
        edge = item["edge"]
        boundary.append(((int(edge[0]), int(edge[1])), str(item["tag"])))
    mesh = PolygonalMesh(verts, cells, boundary)
    return validate_mesh(mesh)
