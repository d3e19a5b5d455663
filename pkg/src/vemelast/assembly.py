"""Global DOF numbering, Dirichlet elimination, and sparse assembly."""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse as sps

from .local import element_geometry, local_matrices
from .mesh import DIRICHLET


@dataclass(frozen=True)
class BcSpec:
    """Boundary-condition mode.

    'clamped_all' constrains both components at every boundary vertex;
    'dirichlet_on_tagged' constrains only vertices on boundary edges tagged
    'dirichlet' (the rest of the boundary is traction-free).  Only
    homogeneous data is supported; constrained rows and columns are
    eliminated so the eigenvalues are not polluted by penalty artifacts.
    """
    mode: str = "clamped_all"

    def __post_init__(self):
        if self.mode not in ("clamped_all", "dirichlet_on_tagged"):
            raise ValueError(f"unknown bc mode {self.mode!r}")


@dataclass
class DofMap:
    """Vertex-to-dof table: entry (v, c) is the free dof id or -1."""
    vertex_dofs: np.ndarray
    free_count: int

    @property
    def constrained_count(self):
        return self.vertex_dofs.size - self.free_count

    def expand(self, free_values):
        """Scatter a free-dof vector to per-vertex (nv, 2) displacements,
        zeros at constrained entries."""
        out = np.zeros(self.vertex_dofs.shape)
        mask = self.vertex_dofs >= 0
        out[mask] = free_values[self.vertex_dofs[mask]]
        return out


def build_dof_map(mesh, bc):
    """Number the free dofs contiguously, vertex-major then component.

    ``bc=None`` constrains nothing (useful for assembling the raw forms).
    """
    nv = mesh.num_vertices
    constrained = np.zeros(nv, dtype=bool)
    if bc is not None:
        if bc.mode == "clamped_all":
            fixed = mesh.boundary_vertices()
        else:
            if not any(tag == DIRICHLET for _, tag in mesh.boundary):
                raise ValueError("bc requires 'dirichlet'-tagged boundary "
                                 "edges but the mesh has none")
            fixed = mesh.boundary_vertices(DIRICHLET)
        constrained[list(fixed)] = True
    vertex_dofs = -np.ones((nv, 2), dtype=np.int64)
    nid = 0
    for v in range(nv):
        if not constrained[v]:
            vertex_dofs[v, 0] = nid
            vertex_dofs[v, 1] = nid + 1
            nid += 2
    return DofMap(vertex_dofs=vertex_dofs, free_count=nid)


@dataclass
class GlobalSystem:
    """Assembled stiffness and mass on the free dofs, plus the dof map."""
    K: sps.csr_matrix
    M: sps.csr_matrix
    dof_map: DofMap

    @property
    def free_count(self):
        return self.dof_map.free_count


def _canonical_csr(rows, cols, vals, size):
    """Sum duplicate entries in a canonical order.

    Triplets are sorted by (row, col, value) before reduction, so the result
    is bitwise independent of the order elements were visited in.
    """
    rows = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    vals = np.concatenate(vals) if vals else np.empty(0)
    order = np.lexsort((vals, cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    if len(rows):
        new_group = np.empty(len(rows), dtype=bool)
        new_group[0] = True
        new_group[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        starts = np.flatnonzero(new_group)
        summed = np.add.reduceat(vals, starts)
        rows, cols, vals = rows[starts], cols[starts], summed
    return sps.csr_matrix((vals, (rows, cols)), shape=(size, size))


def assemble(mesh, material, scheme="dofi_dofi", beta=1.0, bc=BcSpec(),
             cells=None):
    """Assemble the stabilized stiffness K and the mass M on the free dofs.

    Element matrices are computed cell by cell in index order and scattered
    into triplet lists; duplicates are summed in a canonical order so the
    assembled matrices are exactly symmetric and bitwise reproducible.
    Dirichlet dofs are eliminated (homogeneous data, so no load
    modification).  ``cells`` restricts assembly to a subset of cell
    indices, which keeps the forms additive over cell partitions.

    Raises ValueError when no free dofs remain (an eigensolve would be
    impossible) or when ``beta`` is not positive.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    dof_map = build_dof_map(mesh, bc)
    if dof_map.free_count == 0:
        raise ValueError("boundary conditions leave no free dofs; "
                         "the eigenproblem is empty")
    if bc is not None and dof_map.constrained_count == 0:
        warnings.warn("no constrained dofs: K will be singular "
                      "(rigid motions)", stacklevel=2)
    k_rows, k_cols, k_vals = [], [], []
    m_rows, m_cols, m_vals = [], [], []
    cell_ids = range(mesh.num_cells) if cells is None else cells
    for k in cell_ids:
        cell = mesh.cells[k]
        geom = element_geometry(mesh.vertices[cell])
        ops = local_matrices(geom, material, scheme=scheme, beta=beta)
        gdofs = dof_map.vertex_dofs[cell].reshape(-1)
        free = gdofs >= 0
        idx = gdofs[free]
        rows = np.repeat(idx, len(idx))
        cols = np.tile(idx, len(idx))
        k_rows.append(rows)
        k_cols.append(cols)
        k_vals.append(ops.K[np.ix_(free, free)].reshape(-1))
        m_rows.append(rows.copy())
        m_cols.append(cols.copy())
        m_vals.append(ops.M[np.ix_(free, free)].reshape(-1))
    n = dof_map.free_count
    K = _canonical_csr(k_rows, k_cols, k_vals, n)
    M = _canonical_csr(m_rows, m_cols, m_vals, n)
    return GlobalSystem(K=K, M=M, dof_map=dof_map)


def write_matrix_market(system, prefix):
    """Dump K and M in Matrix Market coordinate format for external checks."""
    scipy.io.mmwrite(f"{prefix}_K.mtx", sps.coo_matrix(system.K),
                     symmetry="symmetric")
    scipy.io.mmwrite(f"{prefix}_M.mtx", sps.coo_matrix(system.M),
                     symmetry="symmetric")
