"""Assembly of the mixed saddle-point system at degree k with weight alpha.

The block operator is

    [ A    B^T ] [u]   [ F ]
    [ B   -C   ] [p] = [ G ]

with A = D_k^T M_{k+1} D_k (zero at the top degree), B = D_{k-1}^T M_k and
C = alpha M_{k-1}.  The minus signs sit so that the assembled block matrix
is symmetric; G already carries the negation of the p-load functional.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import simplex_quadrature
from .derham import whitney_basis_values
from .sparse import SparseMatrix, symmetrized

_LOAD_QUAD_DEGREE = 4


@dataclass
class SaddleSystem:
    k: int
    alpha: float
    A: SparseMatrix
    Bmat: SparseMatrix
    C: SparseMatrix
    F: np.ndarray
    G: np.ndarray

    @property
    def ndof_u(self):
        return self.A.nrows

    @property
    def ndof_p(self):
        return self.C.nrows

    def block_matrix(self):
        """Assembled symmetric block operator [[A, B^T], [B, -C]]."""
        nu, npp = self.ndof_u, self.ndof_p
        ra, ca, va = self.A.triplets()
        rb, cb, vb = self.Bmat.triplets()
        rc, cc, vc = self.C.triplets()
        rows = np.concatenate([ra, cb, rb + nu, rc + nu])
        cols = np.concatenate([ca, rb + nu, cb, cc + nu])
        vals = np.concatenate([va, vb, vb, -vc])
        return SparseMatrix.from_triplets(nu + npp, nu + npp, (rows, cols, vals))

    def block_rhs(self):
        return np.concatenate([self.F, self.G])


def system_blocks(cx, k):
    """The alpha-independent blocks (A, Bmat) at degree k."""
    n = cx.dim
    if not 1 <= k <= n:
        raise ValueError(f"degree k must satisfy 1 <= k <= {n}, got {k}")
    nk = cx.num_dofs(k)
    if k == n:
        a = SparseMatrix.zeros(nk, nk)
    else:
        d = cx.coboundary[k]
        a = symmetrized(d.transpose().matmul(cx.mass[k + 1].matmul(d)))
    dq = cx.coboundary[k - 1]
    bmat = dq.transpose().matmul(cx.mass[k])
    return a, bmat


def assemble_system(cx, k, alpha):
    """Saddle system without right-hand side (F and G are zero vectors)."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    a, bmat = system_blocks(cx, k)
    c = cx.mass[k - 1].scaled(alpha)
    return SaddleSystem(k=k, alpha=float(alpha), A=a, Bmat=bmat, C=c,
                        F=np.zeros(a.nrows), G=np.zeros(c.nrows))


def standard_load(dim, degree):
    """The benchmark load family for a form of the given degree.

    Scalar proxies (degree 0 and n) get sum_i sin(2 pi x_i); vector proxies
    get the field whose every component is that same sum.
    """
    def scalar(points):
        return np.sin(2.0 * np.pi * points).sum(axis=1)

    if degree in (0, dim):
        return scalar

    def vector(points):
        s = scalar(points)
        return np.repeat(s[:, None], dim, axis=1)

    return vector


def assemble_load_vector(cx, degree, load, quad_degree=_LOAD_QUAD_DEGREE):
    """Integrals of a proxy field against the Whitney basis of one degree.

    ``load`` maps an (P, dim) array of points to (P,) values for scalar
    proxies or (P, dim) values for vector proxies; ``None`` gives zeros.
    """
    mesh = cx.mesh
    n = mesh.dim
    nk = cx.num_dofs(degree)
    if load is None:
        return np.zeros(nk)
    if load == "standard":
        load = standard_load(n, degree)
    bary, w = simplex_quadrature(n, quad_degree)
    vals = whitney_basis_values(mesh, degree, bary)          # (C, Q, L, ncomp)
    pts = np.einsum("qj,cjd->cqd", bary, mesh.vertices[mesh.cells])
    nc, nq = pts.shape[:2]
    f = np.asarray(load(pts.reshape(nc * nq, n)), dtype=np.float64)
    ncomp = vals.shape[3]
    if ncomp == 1:
        if f.shape != (nc * nq,):
            raise ValueError(
                f"scalar load must return shape ({nc * nq},), got {f.shape}")
        f = f.reshape(nc, nq, 1)
    else:
        if f.shape != (nc * nq, n):
            raise ValueError(
                f"vector load must return shape ({nc * nq}, {n}), got {f.shape}")
        f = f.reshape(nc, nq, n)
    local = np.einsum("q,cqlj,cqj->cl", w, vals, f, optimize=True)
    local *= mesh.cell_volumes()[:, None]
    ids = mesh.cell_subsimplex_ids(degree)
    return np.bincount(ids.ravel(), weights=local.ravel(), minlength=nk)


def assemble_rhs(cx, k, load_u, load_p, quad_degree=_LOAD_QUAD_DEGREE):
    """Right-hand side (F, G) for loads tested against degrees k and k-1.

    G is negated on assembly: the second block row of the symmetric system
    carries the p-load with a minus sign.
    """
    n = cx.dim
    if not 1 <= k <= n:
        raise ValueError(f"degree k must satisfy 1 <= k <= {n}, got {k}")
    f = assemble_load_vector(cx, k, load_u, quad_degree)
    g = -assemble_load_vector(cx, k - 1, load_p, quad_degree)
    return f, g
