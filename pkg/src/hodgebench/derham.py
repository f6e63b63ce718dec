"""Discrete de Rham complexes built from lowest-order Whitney forms.

The complex is realized purely in coefficient space: per degree k a mass
matrix M_k (the L2 Gram matrix of the Whitney basis) and an integer
coboundary matrix D_k with entries in {-1, 0, +1}.  The bases are the
classical unit-integral Whitney family,

* degree 0:      barycentric hat functions,
* degree 1:      edge fields  l_a grad l_b - l_b grad l_a,
* degree 2 (3D): face fields  2 (l_a gb x gc + l_b gc x ga + l_c ga x gb),
* degree n:      cellwise constants 1/(signed volume),

so that applying D_k to a coefficient vector gives exactly the coefficients
of the (analytic) derivative of the represented field.  The signed-volume
normalization at the top degree is what keeps that identity integer-exact
with simplices stored in increasing vertex order.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DenseSizeError
from .quadrature import simplex_quadrature
from .sparse import DENSE_CAP, SparseMatrix

_MASS_QUAD_DEGREE = 2


def _gradients(mesh):
    """Barycentric gradients per cell: (C, dim+1, dim)."""
    verts = mesh.vertices
    cells = mesh.cells
    edge = verts[cells[:, 1:]] - verts[cells[:, :1]]      # (C, dim, dim)
    inv = np.linalg.inv(edge)
    grads = np.empty((cells.shape[0], mesh.dim + 1, mesh.dim))
    grads[:, 1:, :] = np.transpose(inv, (0, 2, 1))
    grads[:, 0, :] = -grads[:, 1:, :].sum(axis=1)
    return grads


def whitney_basis_values(mesh, k, bary):
    """Whitney k-form proxy values at barycentric points.

    Returns an array of shape (C, Q, L, ncomp) where L is the number of
    local k-faces and ncomp is 1 for scalar proxies (k = 0 and k = n) and
    dim for vector proxies.
    """
    n = mesh.dim
    if not 0 <= k <= n:
        raise ValueError(f"form degree {k} out of range 0..{n}")
    bary = np.asarray(bary, dtype=np.float64)
    nc = mesh.num_cells
    nq = bary.shape[0]
    if k == 0:
        vals = np.broadcast_to(bary[None, :, :, None], (nc, nq, n + 1, 1))
        return np.ascontiguousarray(vals)
    if k == n:
        const = 1.0 / mesh.signed_cell_volumes()
        vals = np.broadcast_to(const[:, None, None, None], (nc, nq, 1, 1))
        return np.ascontiguousarray(vals)
    grads = _gradients(mesh)
    combos = list(combinations(range(n + 1), k + 1))
    if k == 1:
        a = np.array([c[0] for c in combos])
        b = np.array([c[1] for c in combos])
        vals = (bary[None, :, a, None] * grads[:, None, b, :]
                - bary[None, :, b, None] * grads[:, None, a, :])
        return vals
    if k == 2 and n == 3:
        a = np.array([c[0] for c in combos])
        b = np.array([c[1] for c in combos])
        c_ = np.array([c[2] for c in combos])
        cross_bc = np.cross(grads[:, b, :], grads[:, c_, :])
        cross_ca = np.cross(grads[:, c_, :], grads[:, a, :])
        cross_ab = np.cross(grads[:, a, :], grads[:, b, :])
        vals = 2.0 * (bary[None, :, a, None] * cross_bc[:, None, :, :]
                      + bary[None, :, b, None] * cross_ca[:, None, :, :]
                      + bary[None, :, c_, None] * cross_ab[:, None, :, :])
        return vals
    raise ValueError(f"unsupported form degree {k} in dimension {n}")


def mass_matrix(mesh, k, quad_degree=_MASS_QUAD_DEGREE):
    """L2 mass matrix of the Whitney k-form basis.

    Products of lowest-order proxies are polynomials of degree at most two,
    so the default quadrature is already exact; higher degrees are accepted
    for cross-checks.
    """
    n = mesh.dim
    if not 0 <= k <= n:
        raise ValueError(f"form degree {k} out of range 0..{n}")
    vols = mesh.cell_volumes()
    if np.any(vols <= 0.0):
        raise ValueError("assembly error: degenerate cell with zero volume")
    nk = mesh.num_subsimplices(k)
    if k == n:
        # constants normalized to unit integral: diagonal 1/volume
        return SparseMatrix.from_diagonal(1.0 / vols)
    bary, w = simplex_quadrature(n, quad_degree)
    vals = whitney_basis_values(mesh, k, bary)
    local = np.einsum("q,cqei,cqfi->cef", w, vals, vals, optimize=True)
    # exact local symmetry regardless of the contraction path
    local = 0.5 * (local + np.transpose(local, (0, 2, 1)))
    local *= vols[:, None, None]
    ids = mesh.cell_subsimplex_ids(k)
    nloc = ids.shape[1]
    rows = np.repeat(ids, nloc, axis=1).ravel()
    cols = np.tile(ids, (1, nloc)).ravel()
    return SparseMatrix.from_triplets(nk, nk, (rows, cols, local.ravel()))


def coboundary(mesh, k):
    """Signed incidence matrix realizing the exterior derivative at degree k.

    Row sigma has entry (-1)^j on the face of sigma obtained by deleting its
    j-th vertex (vertices in increasing order).
    """
    n = mesh.dim
    if not 0 <= k <= n - 1:
        raise ValueError(f"coboundary degree {k} out of range 0..{n - 1}")
    upper = mesh.subsimplices(k + 1)
    lookup = mesh.subsimplex_index(k)
    nup = upper.shape[0]
    nlow = mesh.num_subsimplices(k)
    rows = []
    cols = []
    vals = []
    upper_list = upper.tolist()
    for j in range(k + 2):
        sign = 1.0 if j % 2 == 0 else -1.0
        for ri, simplex in enumerate(upper_list):
            face = tuple(simplex[:j] + simplex[j + 1:])
            rows.append(ri)
            cols.append(lookup[face])
            vals.append(sign)
    return SparseMatrix.from_triplets(nup, nlow, (np.array(rows), np.array(cols),
                                                  np.array(vals)))


class DeRhamComplex:
    """Mass and coboundary matrices of a mesh, one pair per degree."""

    def __init__(self, mesh, mass, cob):
        self.mesh = mesh
        self.mass = list(mass)
        self.coboundary = list(cob)
        if len(self.mass) != mesh.dim + 1 or len(self.coboundary) != mesh.dim:
            raise ValueError("complex tables do not match the mesh dimension")

    @classmethod
    def build(cls, mesh):
        mass = [mass_matrix(mesh, k) for k in range(mesh.dim + 1)]
        cob = [coboundary(mesh, k) for k in range(mesh.dim)]
        return cls(mesh, mass, cob)

    @property
    def dim(self):
        return self.mesh.dim

    def num_dofs(self, k):
        return self.mesh.num_subsimplices(k)

    def __repr__(self):
        dims = ", ".join(str(self.num_dofs(k)) for k in range(self.dim + 1))
        return f"<DeRhamComplex dim={self.dim} dofs=({dims})>"


def build_complex(mesh):
    return DeRhamComplex.build(mesh)


@dataclass(frozen=True)
class ExactnessReport:
    """Rank data of the discrete complex.

    ``cohomology[k]`` is dim ker(D_k) - rank(D_{k-1}); on a contractible
    domain it must be 1 at degree 0 (the constants) and 0 above.
    ``dd_nnz[k]`` counts structurally surviving entries of D_{k+1} D_k and
    must vanish identically since the products run in integer arithmetic.
    """

    dims: tuple
    ranks: tuple
    cohomology: tuple
    dd_nnz: tuple

    @property
    def is_exact(self):
        expected = (1,) + (0,) * (len(self.cohomology) - 1)
        return self.cohomology == expected and all(z == 0 for z in self.dd_nnz)


def check_exactness(cx, cap=DENSE_CAP):
    """Verify exactness of the complex by dense rank computations."""
    n = cx.dim
    dims = tuple(cx.num_dofs(k) for k in range(n + 1))
    if max(dims) > cap:
        raise DenseSizeError(
            f"exactness check needs dense ranks; size {max(dims)} exceeds cap {cap}")
    ranks = tuple(int(np.linalg.matrix_rank(cx.coboundary[k].to_dense()))
                  for k in range(n))
    cohomology = []
    for k in range(n + 1):
        kernel_dim = dims[k] - (ranks[k] if k < n else 0)
        image_dim = ranks[k - 1] if k >= 1 else 0
        cohomology.append(kernel_dim - image_dim)
    dd = tuple(cx.coboundary[k + 1].matmul(cx.coboundary[k]).nnz
               for k in range(n - 1))
    return ExactnessReport(dims=dims, ranks=ranks, cohomology=tuple(cohomology),
                           dd_nnz=dd)
