"""Generalized symmetric eigensolver for the smallest vibration modes.

Solves K w = kappa M w with K symmetric positive definite and M symmetric
positive semidefinite.  The problem is transformed through a factorization
of K (never of M, which may be rank deficient): with K = L L^T the matrix
A = L^{-1} M L^{-T} has eigenvalues theta = 1/kappa, so the smallest finite
kappa are the largest theta.  Pairs with theta below a rank cutoff
correspond to infinite kappa and are discarded.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps
import scipy.sparse.linalg as spla

DENSE_LIMIT = 600
RANK_CUTOFF = 1e-10


@dataclass
class Spectrum:
    """Ascending finite eigenvalues, frequencies, and normalized modes.

    eigenvectors hold one free-dof column per retained pair, normalized to
    w^T M w = 1 with the first nonzero component positive; residuals are the
    relative norms ||K w - kappa M w|| / ||K w||.
    """
    eigenvalues: np.ndarray
    frequencies: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    discarded: int = 0


_NOT_SPD = ("stiffness matrix is not positive definite; "
            "check boundary conditions and assembly")


def _solve_dense(K, M, m):
    Kd = K.toarray() if sps.issparse(K) else np.asarray(K, dtype=float)
    Md = M.toarray() if sps.issparse(M) else np.asarray(M, dtype=float)
    try:
        L = sla.cholesky(Kd, lower=True)
    except sla.LinAlgError as err:
        raise ValueError(_NOT_SPD) from err
    Y = sla.solve_triangular(L, Md, lower=True)
    A = sla.solve_triangular(L, Y.T, lower=True)
    A = 0.5 * (A + A.T)
    theta, Q = sla.eigh(A)
    theta = theta[::-1]          # descending: smallest kappa first
    Q = Q[:, ::-1]
    cutoff = RANK_CUTOFF * max(theta[0], 0.0)
    finite = theta > cutoff
    discarded = int(np.sum(~finite))
    theta = theta[finite][:m]
    Q = Q[:, finite][:, :m]
    kappa = 1.0 / theta
    W = sla.solve_triangular(L.T, Q, lower=False)
    return kappa, W, discarded


def _solve_sparse(K, M, m):
    n = K.shape[0]
    v0 = np.random.default_rng(1234).standard_normal(n)  # fixed start vector
    try:
        kappa, W = spla.eigsh(K, k=m, M=M, sigma=0.0, which="LM", v0=v0)
    except RuntimeError as err:
        if "factor" in str(err).lower() or "singular" in str(err).lower():
            raise ValueError(_NOT_SPD) from err
        raise
    order = np.argsort(kappa)
    return kappa[order], W[:, order], 0


def solve_smallest(system, m=10, tol=1e-8, method="auto"):
    """The m smallest finite eigenpairs of K w = kappa M w.

    Parameters
    ----------
    system : GlobalSystem (or any object with .K and .M sparse matrices)
    m : int
        Number of eigenpairs requested.  If fewer finite eigenvalues exist,
        the achievable count is returned with a warning.
    tol : float
        Accepted relative residual ||K w - kappa M w|| / ||K w||.
    method : 'auto', 'dense', or 'sparse'
        'dense' reduces A = L^{-1} M L^{-T} and takes its largest
        eigenvalues; 'sparse' extracts the same pairs with shift-invert
        Lanczos iteration around zero using a sparse LU of K.  'auto'
        chooses by problem size.  Both are deterministic for fixed input.

    Returns
    -------
    Spectrum with ascending eigenvalues kappa, frequencies omega = sqrt(kappa),
    M-orthonormal eigenvectors with canonical sign, and residual norms.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    K, M = system.K, system.M
    n = K.shape[0]
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT or m >= n - 1 else "sparse"
    if method == "dense" or m >= n - 1:
        kappa, W, discarded = _solve_dense(K, M, m)
    elif method == "sparse":
        kappa, W, discarded = _solve_sparse(K, M, m)
    else:
        raise ValueError(f"unknown method {method!r}")

    if len(kappa) < m:
        warnings.warn(f"only {len(kappa)} finite eigenvalues exist "
                      f"({m} requested)", stacklevel=2)
    if np.any(kappa <= 0):
        raise ValueError("nonpositive eigenvalue computed; "
                         "check boundary conditions and assembly")

    # normalize in the mass inner product and fix signs
    residuals = np.empty(len(kappa))
    for i in range(len(kappa)):
        w = W[:, i]
        mnorm = float(w @ (M @ w))
        if mnorm > 0:
            w = w / np.sqrt(mnorm)
        nz = np.flatnonzero(np.abs(w) > 1e-12 * np.abs(w).max())
        if len(nz) and w[nz[0]] < 0:
            w = -w
        W[:, i] = w
        kw = K @ w
        residuals[i] = float(np.linalg.norm(kw - kappa[i] * (M @ w))
                             / np.linalg.norm(kw))
    if np.any(residuals > tol):
        raise RuntimeError(f"eigensolver residual {residuals.max():.3e} "
                           f"exceeds tol {tol:.3e}")
    return Spectrum(eigenvalues=kappa, frequencies=np.sqrt(kappa),
                    eigenvectors=W, residuals=residuals, discarded=discarded)
