"""Legacy-VTK export of meshes and displacement eigenmodes."""

import numpy as np


def _fmt(x):
    return f"{x:.17g}"


def write_modes_vtk(mesh, dof_map, modes, path, names=None, title="vemelast"):
    """Write an ASCII legacy-VTK unstructured grid with one vector field
    per mode.

    Parameters
    ----------
    mesh : PolygonalMesh
    dof_map : DofMap
        Used to scatter free-dof eigenvectors to vertices; constrained
        (Dirichlet) vertices carry exactly (0, 0).
    modes : sequence of free-dof vectors
        Each is scaled to unit maximum displacement magnitude before export.
    names : sequence of str, optional
        Field names; defaults to mode_1, mode_2, ...
    title : str
        Second header line; callers embed the run configuration here.

    Points are written with 17 significant digits so re-importing them
    reproduces the mesh vertices bitwise.
    """
    nv = mesh.num_vertices
    if names is None:
        names = [f"mode_{i + 1}" for i in range(len(modes))]
    lines = ["# vtk DataFile Version 2.0", title[:255], "ASCII",
             "DATASET UNSTRUCTURED_GRID", f"POINTS {nv} double"]
    for x, y in mesh.vertices:
        lines.append(f"{_fmt(x)} {_fmt(y)} 0")
    total = sum(len(c) + 1 for c in mesh.cells)
    lines.append(f"CELLS {mesh.num_cells} {total}")
    for cell in mesh.cells:
        lines.append(str(len(cell)) + " " + " ".join(str(int(v)) for v in cell))
    lines.append(f"CELL_TYPES {mesh.num_cells}")
    lines.extend(["7"] * mesh.num_cells)  # VTK_POLYGON
    lines.append(f"POINT_DATA {nv}")
    for name, vec in zip(names, modes):
        disp = dof_map.expand(np.asarray(vec, dtype=float))
        mag = np.hypot(disp[:, 0], disp[:, 1]).max()
        if mag > 0:
            disp = disp / mag
        lines.append(f"VECTORS {name} double")
        for ux, uy in disp:
            lines.append(f"{_fmt(ux)} {_fmt(uy)} 0")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_vtk_points(path):
    """Parse the POINTS block back out of a legacy-VTK file (for checks)."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    for i, line in enumerate(lines):
        if line.startswith("POINTS"):
            n = int(line.split()[1])
            pts = [tuple(float(t) for t in lines[i + 1 + k].split()[:2])
                   for k in range(n)]
            return np.array(pts)
    raise ValueError("no POINTS block found")
