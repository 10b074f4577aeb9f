"""Bilinear finite elements for the pulled-back Neumann problem on ``[0, 1]^2``.

The discrete problem is ``K x = mu M x`` with

    K_ab = int_Q <A grad phi_a, grad phi_b>,    M_ab = int_Q w phi_a phi_b

on a uniform ``n x n`` mesh of bilinear quadrilaterals.  No boundary rows are
removed: the Neumann condition is natural, so ``mu_1 = 0`` with the constant
vector as eigenvector and ``eigenvalues[1], eigenvalues[2]`` are ``mu_2, mu_3``.

Nodes are numbered ``j * (n + 1) + i`` for the node at ``(s, t) = (i/n, j/n)``,
i.e. ``s`` runs fastest.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh
from scipy.sparse.linalg import norm as sparse_norm

from .exceptions import SolverFailure
from .transform import FormCoefficients, form_for

__all__ = [
    "Grid",
    "EigenResult",
    "Extrapolated",
    "assemble",
    "lowest_eigenpairs",
    "solve_domain",
    "extrapolate",
    "extrapolated_eigenvalues",
    "rayleigh_quotient",
    "nodal_interpolant",
    "write_matrix",
    "read_matrix",
]

# (n+1)^2 <= DENSE_LIMIT is solved with a dense symmetric-definite eigensolver
DENSE_LIMIT = 300
RESIDUAL_TOL = 1e-8
MAX_K = 10


@dataclass(frozen=True)
class Grid:
    """Uniform ``n x n`` quadrilateral mesh of the unit square."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"grid needs n >= 2 cells per side, got {self.n}")

    @property
    def h(self):
        return 1.0 / self.n

    @property
    def num_nodes(self):
        return (self.n + 1) ** 2

    def nodes(self):
        """Node coordinates ``(s, t)`` as two flat arrays in global order."""
        x = np.linspace(0.0, 1.0, self.n + 1)
        S, T = np.meshgrid(x, x)
        return S.ravel(), T.ravel()

    def connectivity(self):
        n = self.n
        i, j = np.meshgrid(np.arange(n), np.arange(n))
        i, j = i.ravel(), j.ravel()
        base = j * (n + 1) + i
        return np.stack([base, base + 1, base + n + 2, base + n + 1], axis=1)


@lru_cache(maxsize=None)
def _reference(order):
    """Gauss points/weights on ``[0, 1]^2`` with bilinear values and gradients."""
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    xi, eta = (a.ravel() for a in np.meshgrid(x, x))
    wq = np.outer(w, w).ravel()
    phi = np.stack([(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta], axis=1)
    grad = np.stack(
        [
            np.stack([-(1 - eta), -(1 - xi)], axis=1),
            np.stack([1 - eta, -xi], axis=1),
            np.stack([eta, xi], axis=1),
            np.stack([-eta, 1 - xi], axis=1),
        ],
        axis=1,
    )
    return xi, eta, wq, phi, grad


def _scatter(grid, local):
    conn = grid.connectivity()
    rows = np.repeat(conn, 4, axis=1).ravel()
    cols = np.tile(conn, (1, 4)).ravel()
    N = grid.num_nodes
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(N, N)).tocsr()
    mat.sum_duplicates()
    return ((mat + mat.T) * 0.5).tocsr()


def _assemble_general(F, grid, order):
    xi, eta, wq, phi, grad = _reference(order)
    n, h = grid.n, grid.h
    i, j = np.meshgrid(np.arange(n), np.arange(n))
    S = (i.ravel()[:, None] + xi[None, :]) * h
    T = (j.ravel()[:, None] + eta[None, :]) * h
    A = np.asarray(F.matrix_field(S, T))
    w = np.asarray(F.weight(S, T))
    Ke = np.einsum("q,qai,eqij,qbj->eab", wq, grad, A, grad, optimize=True)
    Me = h * h * np.einsum("q,eq,qa,qb->eab", wq, w, phi, phi, optimize=True)
    return _scatter(grid, Ke), _scatter(grid, Me)


@lru_cache(maxsize=16)
def _constant_parts(n):
    """Stiffness pieces for unit coefficients, used to build constant-A matrices."""
    grid = Grid(n)
    xi, eta, wq, phi, grad = _reference(2)
    parts = []
    for E in (np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([[0.0, 0.0], [0.0, 1.0]]), np.array([[0.0, 1.0], [1.0, 0.0]])):
        ke = np.einsum("q,qai,ij,qbj->ab", wq, grad, E, grad)
        parts.append(_scatter(grid, np.broadcast_to(ke, (n * n, 4, 4))))
    me = grid.h**2 * np.einsum("q,qa,qb->ab", wq, phi, phi)
    mass = _scatter(grid, np.broadcast_to(me, (n * n, 4, 4)))
    return parts, mass


def assemble(F: FormCoefficients, grid: Grid, order=None):
    """Stiffness ``K`` and weighted mass ``M`` as symmetric CSR matrices.

    Uses 2x2 Gauss quadrature for constant coefficients and 3x3 otherwise.
    """
    if not isinstance(grid, Grid):
        grid = Grid(grid)
    if F.is_constant and order in (None, 2):
        (kss, ktt, kst), mass = _constant_parts(grid.n)
        A = F.constant_matrix
        K = A[0, 0] * kss + A[1, 1] * ktt + A[0, 1] * kst
        return K.tocsr(), (F.constant_weight * mass).tocsr()
    if order is None:
        order = 3
    return _assemble_general(F, grid, order)


@dataclass
class EigenResult:
    """Lowest generalized eigenpairs, ascending; ``eigenvalues[0]`` is ~0."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    n: int | None
    residuals: np.ndarray

    @property
    def mu2(self):
        return float(self.eigenvalues[1])

    @property
    def mu3(self):
        return float(self.eigenvalues[2])


def _residuals(K, M, vals, vecs):
    R = K @ vecs - (M @ vecs) * vals[None, :]
    return np.linalg.norm(R, axis=0) / np.linalg.norm(vecs, axis=0)


def lowest_eigenpairs(K, M, k=4, n=None):
    """Smallest ``k`` eigenpairs of ``K x = mu M x``.

    Small systems use a dense symmetric-definite solve; larger ones use ARPACK
    in shift-invert mode about a shift just below zero.

    Raises
    ------
    SolverFailure
        If any residual ``||K x - mu M x|| / ||x||`` exceeds ``1e-8`` relative
        to ``||K|| + |mu| ||M||``.
    """
    if not 1 <= k <= MAX_K:
        raise ValueError(f"k must be in 1..{MAX_K}")
    N = K.shape[0]
    if N <= DENSE_LIMIT:
        vals, vecs = scipy.linalg.eigh(K.toarray(), M.toarray(), subset_by_index=[0, k - 1])
    else:
        scale = K.diagonal().sum() / M.diagonal().sum()
        sigma = -1e-8 * scale
        # fixed start vector: ARPACK's default is random, which breaks byte-identical output
        v0 = np.random.default_rng(N).uniform(0.5, 1.5, N)
        try:
            vals, vecs = eigsh(K.tocsc(), k=k, M=M.tocsc(), sigma=sigma, which="LM", tol=1e-13, v0=v0)
        except ArpackNoConvergence as exc:
            raise SolverFailure(f"ARPACK did not converge: {exc}") from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    res = _residuals(K, M, vals, vecs)
    knorm = sparse_norm(K, 1)
    mnorm = sparse_norm(M, 1)
    limit = RESIDUAL_TOL * (knorm + np.abs(vals) * mnorm)
    if not np.all(res <= limit):
        raise SolverFailure(f"eigen residuals {res} exceed tolerance {limit}")
    return EigenResult(vals, vecs, n, res)


def solve_domain(domain, n=48, k=4):
    """Neumann eigenvalues of ``domain`` via its pullback to the unit square."""
    grid = Grid(n)
    F = form_for(domain)
    K, M = assemble(F, grid)
    return lowest_eigenpairs(K, M, k, n=n)


def extrapolate(value_n, value_2n):
    """Richardson step for ``O(h^2)`` convergence.

    Returns ``((4 v_2n - v_n) / 3, |v_2n - v_n| / 3)``; works elementwise on arrays.
    """
    a = np.asarray(value_n, dtype=float)
    b = np.asarray(value_2n, dtype=float)
    est = (4.0 * b - a) / 3.0
    err = np.abs(b - a) / 3.0
    if est.ndim == 0:
        return float(est), float(err)
    return est, err


@dataclass
class Extrapolated:
    """Eigenvalues from grids ``n`` and ``2n`` with their Richardson estimate."""

    values: np.ndarray
    errors: np.ndarray
    coarse: np.ndarray
    fine: np.ndarray
    n: int

    @property
    def mu2(self):
        return float(self.values[1])

    @property
    def mu3(self):
        return float(self.values[2])

    @property
    def mu2_err(self):
        return float(self.errors[1])

    @property
    def mu3_err(self):
        return float(self.errors[2])


def extrapolated_eigenvalues(domain, n=24, k=3):
    """Solve on ``n`` and ``2n`` and extrapolate each eigenvalue index."""
    coarse = solve_domain(domain, n, k).eigenvalues
    fine = solve_domain(domain, 2 * n, k).eigenvalues
    est, err = extrapolate(coarse, fine)
    return Extrapolated(est, err, coarse, fine, n)


def nodal_interpolant(grid, fn):
    s, t = grid.nodes()
    return fn(s, t)


def rayleigh_quotient(K, M, x):
    return float(x @ (K @ x)) / float(x @ (M @ x))


def write_matrix(path, mat, n):
    """Write the lower triangle of a symmetric matrix as ``i j value`` lines.

    The header line is ``n rows nnz`` with ``n`` the grid resolution and
    ``nnz`` the number of stored (lower-triangle) entries; indices are 0-based.
    """
    low = sp.tril(mat).tocoo()
    order = np.lexsort((low.col, low.row))
    with open(path, "w") as fh:
        fh.write(f"{n} {mat.shape[0]} {low.nnz}\n")
        for r, c, v in zip(low.row[order], low.col[order], low.data[order]):
            fh.write(f"{r} {c} {v:.17g}\n")


def read_matrix(path):
    """Inverse of :func:`write_matrix`; returns ``(matrix, n)``."""
    with open(path) as fh:
        n, rows, nnz = (int(v) for v in fh.readline().split())
        data = np.loadtxt(fh, ndmin=2)
    if data.shape[0] != nnz:
        raise ValueError(f"expected {nnz} entries, found {data.shape[0]}")
    r, c, v = data[:, 0].astype(int), data[:, 1].astype(int), data[:, 2]
    low = sp.coo_matrix((v, (r, c)), shape=(rows, rows)).tocsr()
    diag = sp.diags(low.diagonal())
    return (low + low.T - diag).tocsr(), n
