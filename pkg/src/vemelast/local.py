"""Element-local virtual element operators for lowest-order elasticity.

Per polygon this module builds the degrees-of-freedom matrix of the linear
vector polynomial basis, the elastic energy projector onto that basis, the
consistency stiffness, two stabilization variants acting on the
non-polynomial remainder, and the mass matrix of the projected fields.

Degrees of freedom are the two displacement components at the polygon
vertices, interleaved: dof 2*i is the x-component at vertex i, dof 2*i + 1
the y-component.  The polynomial basis has both components spanning
{1, (x - x_E)/h_E, (y - y_E)/h_E} with x_E the centroid and h_E the
diameter, giving 6 basis fields ordered x-components first.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import (
    fan_quadrature,
    polygon_centroid,
    polygon_diameter,
    signed_area,
)

SCHEMES = ("dofi_dofi", "trace")


@dataclass(frozen=True)
class ElementGeometry:
    """Polygon data consumed by the local operator routines.

    vertices are CCW; normals are outward unit normals per edge, tangents
    unit CCW tangents, and edge k joins vertex k to vertex k+1 (mod n).
    """
    vertices: np.ndarray
    area: float
    centroid: np.ndarray
    diameter: float
    edge_lengths: np.ndarray
    normals: np.ndarray
    tangents: np.ndarray

    @property
    def num_vertices(self):
        return len(self.vertices)


def element_geometry(polygon):
    """Area, centroid, diameter, and edge data of a simple CCW polygon.

    Raises ValueError for zero or negative (clockwise) area and for
    zero-length edges.  Collinear vertices are legal and leave area,
    centroid, and diameter unchanged.
    """
    pts = np.asarray(polygon, dtype=float)
    area = signed_area(pts)
    if area <= 0.0:
        raise ValueError("polygon must be counter-clockwise with positive area")
    d = np.roll(pts, -1, axis=0) - pts
    lengths = np.hypot(d[:, 0], d[:, 1])
    if lengths.min() == 0.0:
        raise ValueError("polygon has a zero-length edge")
    tangents = d / lengths[:, None]
    normals = np.column_stack([tangents[:, 1], -tangents[:, 0]])
    return ElementGeometry(vertices=pts, area=float(area),
                           centroid=polygon_centroid(pts),
                           diameter=polygon_diameter(pts),
                           edge_lengths=lengths, normals=normals,
                           tangents=tangents)


@dataclass(frozen=True)
class LocalOperators:
    """Local matrices of one element.

    D : (2n, 6) degrees of freedom of the 6 polynomial basis fields.
    PiStar : (6, 2n) polynomial coefficients of the energy projection of
        each dof basis function; PiStar @ D is the identity on coefficients.
    Kc : (2n, 2n) consistency stiffness (projected energy).
    S : (2n, 2n) stabilization, already sandwiched by (I - D PiStar).
    M : (2n, 2n) mass of the projected fields.
    alpha : trace(Kc) / 2, the stabilization scaling.
    K : Kc + beta * alpha * S, the stabilized stiffness.
    """
    D: np.ndarray
    PiStar: np.ndarray
    Kc: np.ndarray
    S: np.ndarray
    M: np.ndarray
    alpha: float
    K: np.ndarray


def _monomials_at(geom, points):
    """Values of the scaled monomials (1, xi, eta) at given points."""
    xi = (points[:, 0] - geom.centroid[0]) / geom.diameter
    eta = (points[:, 1] - geom.centroid[1]) / geom.diameter
    return np.column_stack([np.ones(len(points)), xi, eta])


def basis_dof_matrix(geom):
    """DOF values D of the 6 polynomial basis fields, shape (2n, 6)."""
    n = geom.num_vertices
    mono = _monomials_at(geom, geom.vertices)
    D = np.zeros((2 * n, 6))
    D[0::2, 0:3] = mono
    D[1::2, 3:6] = mono
    return D


def _poly_strain_data(geom, mat):
    """Constant strain data of the basis: Gram G and stresses sigma_a."""
    h = geom.diameter
    eps = np.zeros((6, 2, 2))
    div = np.zeros(6)
    grads = ((0.0, 0.0), (1.0 / h, 0.0), (0.0, 1.0 / h))
    for comp in (0, 1):
        for m, g in enumerate(grads):
            a = 3 * comp + m
            dp = np.zeros((2, 2))
            dp[comp, :] = g
            eps[a] = 0.5 * (dp + dp.T)
            div[a] = dp[0, 0] + dp[1, 1]
    G = geom.area * (2.0 * mat.mu_s * np.einsum("aij,bij->ab", eps, eps)
                     + mat.lambda_s * np.outer(div, div))
    sigma = 2.0 * mat.mu_s * eps + mat.lambda_s * div[:, None, None] * np.eye(2)
    return G, sigma


def _boundary_functionals(geom):
    """Trapezoid weights of the boundary constraints, shape (3, 2n).

    Row 0 integrates v . t over the boundary (equals the cell integral of
    the rotation for the virtual fields), rows 1 and 2 the boundary average
    of each component.  Exact for piecewise-linear edge traces.
    """
    n = geom.num_vertices
    C = np.zeros((3, 2 * n))
    for k in range(n):
        w = 0.5 * geom.edge_lengths[k]
        for v in (k, (k + 1) % n):
            C[0, 2 * v] += w * geom.tangents[k, 0]
            C[0, 2 * v + 1] += w * geom.tangents[k, 1]
            C[1, 2 * v] += w
            C[2, 2 * v + 1] += w
    return C


def projector(geom, mat):
    """Energy projector onto linear vector polynomials, as (D, PiStar).

    Column i of PiStar solves a^E(Pi phi_i, p) = a^E(phi_i, p) for every
    linear p, with the right side reduced to the boundary integral of
    (sigma(p) n) . phi_i (the stresses of linear fields are constant and
    divergence-free, and the trapezoid rule is exact on the piecewise-linear
    traces).  The rank-3 rigid kernel is fixed by matching the boundary
    integral of v . t and the boundary averages, assembled as one augmented
    system solved by dense LU with partial pivoting.
    """
    D = basis_dof_matrix(geom)
    G, sigma = _poly_strain_data(geom, mat)
    n = geom.num_vertices

    B = np.zeros((6, 2 * n))
    for k in range(n):
        w = 0.5 * geom.edge_lengths[k]
        traction = sigma @ geom.normals[k]  # (6, 2)
        for v in (k, (k + 1) % n):
            B[:, 2 * v] += w * traction[:, 0]
            B[:, 2 * v + 1] += w * traction[:, 1]

    C_dof = _boundary_functionals(geom)
    C_poly = C_dof @ D

    A = np.zeros((9, 9))
    A[:6, :6] = G
    A[:6, 6:] = C_poly.T
    A[6:, :6] = C_poly
    rhs = np.vstack([B, C_dof])
    try:
        sol = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as err:
        raise ValueError("singular projector system; degenerate polygon") from err
    return D, sol[:6]


def _monomial_mass(geom, rho):
    """H with H_ab = rho * integral of p_a . p_b, exact degree-2 quadrature."""
    pts, wts = fan_quadrature(geom.vertices, geom.centroid)
    mono = _monomials_at(geom, pts)
    Hs = rho * (mono.T * wts) @ mono
    H = np.zeros((6, 6))
    H[:3, :3] = Hs
    H[3:, 3:] = Hs
    return H


def _raw_stabilization(geom, scheme):
    n = geom.num_vertices
    if scheme == "dofi_dofi":
        return np.eye(2 * n)
    if scheme == "trace":
        # squared tangential differences along each edge, weighted h_E/|e|
        S = np.zeros((2 * n, 2 * n))
        h = geom.diameter
        for k in range(n):
            a, b = k, (k + 1) % n
            coef = h / geom.edge_lengths[k]
            for c in (0, 1):
                i, j = 2 * a + c, 2 * b + c
                S[i, i] += coef
                S[j, j] += coef
                S[i, j] -= coef
                S[j, i] -= coef
        return S
    raise ValueError(f"unknown stabilization scheme {scheme!r}; "
                     f"expected one of {SCHEMES}")


def _sym(A):
    return 0.5 * (A + A.T)


def local_matrices(geom, mat, scheme="dofi_dofi", beta=1.0):
    """All local operators of one element.

    Parameters
    ----------
    geom : ElementGeometry
    mat : Material
    scheme : 'dofi_dofi' or 'trace'
        'dofi_dofi' stabilizes with the plain inner product of vertex
        values; 'trace' with the edge-length-scaled inner product of the
        tangential derivatives of the boundary traces.
    beta : float
        Extra multiplier on the stabilization (must be positive); the
        baseline recipe scales the raw form by alpha = trace(Kc) / 2.

    Both stabilizations act on the remainder (I - Pi)v, so they vanish
    identically on polynomial dof vectors and the projected energy is
    reproduced exactly (patch test).  The mass matrix uses the projected
    fields; for lowest order the value projection computable from the dofs
    coincides with the energy projection.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    D, PiStar = projector(geom, mat)
    G, _ = _poly_strain_data(geom, mat)
    Kc = _sym(PiStar.T @ G @ PiStar)
    S_raw = _raw_stabilization(geom, scheme)
    P_rem = np.eye(2 * geom.num_vertices) - D @ PiStar
    S = _sym(P_rem.T @ S_raw @ P_rem)
    alpha = 0.5 * float(np.trace(Kc))
    K = _sym(Kc + beta * alpha * S)
    H = _monomial_mass(geom, mat.rho)
    M = _sym(PiStar.T @ H @ PiStar)
    return LocalOperators(D=D, PiStar=PiStar, Kc=Kc, S=S, M=M,
                          alpha=alpha, K=K)
