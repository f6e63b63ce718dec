"""Deterministic sparse linear algebra.

CSR storage with order-independent triplet assembly, a sparse symmetric LDLt
factorization behind a minimum-degree ordering, and small dense generalized
eigensolvers.  Reductions run in a fixed order everywhere so that repeated
runs (and permuted inputs) produce bitwise-identical results; that property
is what makes the benchmark's iteration counts and CSV output reproducible.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DenseSizeError, NotSPDError

DENSE_CAP = 2000

_SYMMETRY_RTOL = 1e-12
_PIVOT_RTOL = 1e-14


def _dedup_triplets(rows, cols, vals, drop_zeros):
    """Sort triplets by (row, col, value) and sum duplicates.

    Sorting duplicate values before summation makes the result independent
    of the order triplets were supplied in, down to the last bit.
    """
    order = np.lexsort((vals, cols, rows))
    rows = rows[order]
    cols = cols[order]
    vals = vals[order]
    boundary = np.empty(rows.shape[0], dtype=bool)
    boundary[0] = True
    np.logical_or(rows[1:] != rows[:-1], cols[1:] != cols[:-1], out=boundary[1:])
    starts = np.flatnonzero(boundary)
    sums = np.add.reduceat(vals, starts)
    rows = rows[starts]
    cols = cols[starts]
    if drop_zeros:
        keep = sums != 0.0
        rows, cols, sums = rows[keep], cols[keep], sums[keep]
    return rows, cols, sums


class SparseMatrix:
    """Compressed-sparse-row matrix with deterministic assembly.

    Column indices are strictly increasing within each row.  Instances are
    immutable by convention: operations return new matrices.
    """

    __slots__ = ("nrows", "ncols", "indptr", "indices", "data")

    def __init__(self, nrows, ncols, indptr, indices, data):
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.data = np.asarray(data, dtype=np.float64)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_triplets(cls, nrows, ncols, triplets):
        """Assemble from (row, col, value) triplets; duplicates are summed.

        Accepts an iterable of 3-tuples or a (rows, cols, values) triple of
        arrays.  Entries that cancel to exactly zero are dropped.
        """
        if isinstance(triplets, tuple) and len(triplets) == 3:
            rows, cols, vals = triplets
            rows = np.asarray(rows, dtype=np.int64).ravel()
            cols = np.asarray(cols, dtype=np.int64).ravel()
            vals = np.asarray(vals, dtype=np.float64).ravel()
        else:
            trip = list(triplets)
            if trip:
                rows = np.array([t[0] for t in trip], dtype=np.int64)
                cols = np.array([t[1] for t in trip], dtype=np.int64)
                vals = np.array([t[2] for t in trip], dtype=np.float64)
            else:
                rows = np.empty(0, dtype=np.int64)
                cols = np.empty(0, dtype=np.int64)
                vals = np.empty(0)
        if rows.shape[0] != cols.shape[0] or rows.shape[0] != vals.shape[0]:
            raise ValueError("triplet arrays must have equal length")
        if rows.shape[0] == 0:
            return cls.zeros(nrows, ncols)
        if rows.min() < 0 or rows.max() >= nrows or cols.min() < 0 or cols.max() >= ncols:
            raise ValueError(
                f"triplet index out of range for {nrows}x{ncols} matrix"
            )
        rows, cols, vals = _dedup_triplets(rows, cols, vals, drop_zeros=True)
        return cls._from_sorted_triplets(nrows, ncols, rows, cols, vals)

    @classmethod
    def _from_sorted_triplets(cls, nrows, ncols, rows, cols, vals):
        indptr = np.zeros(nrows + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=nrows), out=indptr[1:])
        return cls(nrows, ncols, indptr, cols, vals)

    @classmethod
    def zeros(cls, nrows, ncols):
        return cls(nrows, ncols, np.zeros(nrows + 1, dtype=np.int64),
                   np.empty(0, dtype=np.int64), np.empty(0))

    @classmethod
    def identity(cls, n):
        return cls.from_diagonal(np.ones(n))

    @classmethod
    def from_diagonal(cls, diag):
        diag = np.asarray(diag, dtype=np.float64)
        n = diag.shape[0]
        idx = np.arange(n, dtype=np.int64)
        return cls(n, n, np.arange(n + 1, dtype=np.int64), idx, diag.copy())

    # -- queries -----------------------------------------------------------

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def nnz(self):
        return self.data.shape[0]

    def is_integer_valued(self):
        return self.nnz == 0 or bool(np.all(self.data == np.rint(self.data)))

    def to_dense(self):
        out = np.zeros((self.nrows, self.ncols))
        rows = np.repeat(np.arange(self.nrows), np.diff(self.indptr))
        out[rows, self.indices] = self.data
        return out

    def diagonal(self):
        d = np.zeros(min(self.nrows, self.ncols))
        rows = np.repeat(np.arange(self.nrows), np.diff(self.indptr))
        on_diag = rows == self.indices
        d[rows[on_diag]] = self.data[on_diag]
        return d

    def triplets(self):
        rows = np.repeat(np.arange(self.nrows, dtype=np.int64), np.diff(self.indptr))
        return rows, self.indices.copy(), self.data.copy()

    # -- algebra -----------------------------------------------------------

    def matvec(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.ncols,):
            raise ValueError(f"matvec: expected vector of length {self.ncols}, got {x.shape}")
        return kernels.csr_matvec(self.indptr, self.indices, self.data, x)

    def rmatvec(self, x):
        """x^T M as a vector (equals transpose().matvec(x) without the copy)."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.nrows,):
            raise ValueError(f"rmatvec: expected vector of length {self.nrows}, got {x.shape}")
        rows = np.repeat(np.arange(self.nrows), np.diff(self.indptr))
        return np.bincount(self.indices, weights=self.data * x[rows],
                           minlength=self.ncols)

    def transpose(self):
        rows = np.repeat(np.arange(self.nrows, dtype=np.int64), np.diff(self.indptr))
        order = np.lexsort((rows, self.indices))
        return SparseMatrix._from_sorted_triplets(
            self.ncols, self.nrows, self.indices[order], rows[order], self.data[order])

    def scaled(self, s):
        return SparseMatrix(self.nrows, self.ncols, self.indptr.copy(),
                            self.indices.copy(), self.data * float(s))

    def matmul(self, other):
        """Sparse-sparse product self @ other.

        Exact zeros produced by cancellation are dropped only when both
        operands are integer-valued, so that d d = 0 yields a structurally
        empty matrix while floating-point patterns stay value-independent.
        """
        if not isinstance(other, SparseMatrix):
            raise TypeError("matmul expects a SparseMatrix")
        if self.ncols != other.nrows:
            raise ValueError(
                f"matmul: dimension mismatch {self.shape} @ {other.shape}")
        if self.nnz == 0 or other.nnz == 0:
            return SparseMatrix.zeros(self.nrows, other.ncols)
        arows = np.repeat(np.arange(self.nrows, dtype=np.int64), np.diff(self.indptr))
        brow_len = np.diff(other.indptr)
        lens = brow_len[self.indices]
        total = int(lens.sum())
        if total == 0:
            return SparseMatrix.zeros(self.nrows, other.ncols)
        # expand every (i,k) against row k of other using a ranges construction
        ends = np.cumsum(lens)
        offsets = np.repeat(ends - lens, lens)
        pos = np.arange(total, dtype=np.int64) - offsets + np.repeat(
            other.indptr[self.indices], lens)
        rows = np.repeat(arows, lens)
        cols = other.indices[pos]
        vals = np.repeat(self.data, lens) * other.data[pos]
        drop = self.is_integer_valued() and other.is_integer_valued()
        rows, cols, vals = _dedup_triplets(rows, cols, vals, drop_zeros=drop)
        return SparseMatrix._from_sorted_triplets(self.nrows, other.ncols, rows, cols, vals)

    def add_scaled(self, other, s):
        """self + s * other (patterns are merged)."""
        if not isinstance(other, SparseMatrix):
            raise TypeError("add_scaled expects a SparseMatrix")
        if self.shape != other.shape:
            raise ValueError(
                f"add_scaled: shape mismatch {self.shape} vs {other.shape}")
        ra, ca, va = self.triplets()
        rb, cb, vb = other.triplets()
        rows = np.concatenate([ra, rb])
        cols = np.concatenate([ca, cb])
        vals = np.concatenate([va, float(s) * vb])
        if rows.shape[0] == 0:
            return SparseMatrix.zeros(*self.shape)
        drop = (self.is_integer_valued() and other.is_integer_valued()
                and float(s).is_integer())
        rows, cols, vals = _dedup_triplets(rows, cols, vals, drop_zeros=drop)
        return SparseMatrix._from_sorted_triplets(self.nrows, self.ncols, rows, cols, vals)

    def __matmul__(self, other):
        if isinstance(other, SparseMatrix):
            return self.matmul(other)
        return self.matvec(other)

    def __repr__(self):
        return f"<SparseMatrix {self.nrows}x{self.ncols}, nnz={self.nnz}>"


# -- module-level aliases matching the operation vocabulary ----------------

def from_triplets(nrows, ncols, triplets):
    return SparseMatrix.from_triplets(nrows, ncols, triplets)


def spmv(m, x):
    return m.matvec(x)


def transpose(m):
    return m.transpose()


def spgemm(a, b):
    return a.matmul(b)


def add_scaled(a, b, s):
    return a.add_scaled(b, s)


def symmetrized(m):
    """0.5 (M + M^T) with bitwise-exact symmetry.

    Both the (i, j) and (j, i) entries sum the same value pair, so the
    result is symmetric down to the last bit; used to make assembled
    operator products exactly symmetric before factorization.
    """
    return m.add_scaled(m.transpose(), 1.0).scaled(0.5)


# -- fill-reducing ordering -------------------------------------------------

def min_degree_ordering(matrix):
    """Minimum-degree permutation of a symmetric sparse pattern.

    Quotient-graph formulation with element absorption and the standard
    approximate external degree bound d(v) <= |adj| + |front \\ v| +
    sum_e |L_e \\ front|; ties break on the lowest index so the ordering is
    deterministic.  Returns ``perm`` with perm[new] = old.
    """
    n = matrix.nrows
    if matrix.ncols != n:
        raise ValueError("ordering requires a square matrix")
    indptr, indices = matrix.indptr, matrix.indices
    adj = []
    for i in range(n):
        s = set(indices[indptr[i]:indptr[i + 1]].tolist())
        s.discard(i)
        adj.append(s)
    var_elems = [set() for _ in range(n)]
    elem_members = {}
    degree = [len(adj[i]) for i in range(n)]
    heap = [(degree[i], i) for i in range(n)]
    heapq.heapify(heap)
    alive = np.ones(n, dtype=bool)
    perm = np.empty(n, dtype=np.int64)
    count = 0
    while count < n:
        d, p = heapq.heappop(heap)
        if not alive[p] or d != degree[p]:
            continue
        alive[p] = False
        perm[count] = p
        count += 1
        front = set(adj[p])
        for e in var_elems[p]:
            front |= elem_members[e]
        front.discard(p)
        # overlap counts |L_e intersect front| for every element touching the
        # front; elements fully inside it are absorbed along with those of p
        overlap = {}
        for v in front:
            for e in var_elems[v]:
                overlap[e] = overlap.get(e, 0) + 1
        absorbed = set(var_elems[p])
        for e, cnt in overlap.items():
            if e not in absorbed and cnt == len(elem_members[e]):
                absorbed.add(e)
        front_size = len(front)
        for v in front:
            av = adj[v]
            av.discard(p)
            if len(av) <= front_size:
                adj[v] = av = {u for u in av if u not in front}
            else:
                av -= front
            ve = var_elems[v]
            ve -= absorbed
            ve.add(p)
            ext = 0
            for e in ve:
                if e != p:
                    ext += len(elem_members[e]) - overlap[e]
            dnew = len(av) + (front_size - 1) + ext
            degree[v] = dnew
            heapq.heappush(heap, (dnew, v))
        for e in absorbed:
            if e in elem_members:
                del elem_members[e]
        elem_members[p] = front
        adj[p] = None
        var_elems[p] = None
    return perm


# -- sparse LDLt -------------------------------------------------------------

@dataclass
class SymbolicLDLT:
    """Pattern-level work shared across factorizations with equal sparsity."""

    n: int
    perm: np.ndarray
    iperm: np.ndarray
    indptr: np.ndarray          # permuted CSR pattern
    indices: np.ndarray
    gather: np.ndarray          # permuted data = symmetrized data[gather]
    parent: np.ndarray
    lp: np.ndarray              # column pointers of L


@dataclass
class SymmetricFactorization:
    """LDLt factors of a permuted SPD matrix: P M P^T = L D L^T."""

    perm: np.ndarray
    iperm: np.ndarray
    lp: np.ndarray
    li: np.ndarray
    lx: np.ndarray
    d: np.ndarray

    @property
    def n(self):
        return self.d.shape[0]

    def solve(self, b):
        b = np.asarray(b, dtype=np.float64)
        if b.shape != (self.n,):
            raise ValueError(f"solve: expected vector of length {self.n}")
        y = kernels.ldlt_solve(self.lp, self.li, self.lx, self.d, b[self.perm])
        x = np.empty(self.n)
        x[self.perm] = y
        return x


def _symmetrize_checked(m):
    if m.nrows != m.ncols:
        raise ValueError("factorization requires a square matrix")
    t = m.transpose()
    diff = m.add_scaled(t, -1.0)
    scale = float(np.max(np.abs(m.data))) if m.nnz else 0.0
    asym = float(np.max(np.abs(diff.data))) if diff.nnz else 0.0
    if scale > 0.0 and asym > _SYMMETRY_RTOL * scale:
        raise ValueError(
            f"matrix is not symmetric: max asymmetry {asym:.3e} exceeds "
            f"{_SYMMETRY_RTOL:.0e} * max entry {scale:.3e}")
    return m.add_scaled(t, 1.0).scaled(0.5)


def analyze(m):
    """Symbolic phase: ordering, permuted pattern, elimination tree.

    The result can be reused by ``ldlt_factorize`` for any matrix with the
    same sparsity pattern (the situation in parameter sweeps, where only the
    weighting of the two assembled terms changes).
    """
    s = _symmetrize_checked(m)
    n = s.nrows
    perm = min_degree_ordering(s)
    iperm = np.empty(n, dtype=np.int64)
    iperm[perm] = np.arange(n, dtype=np.int64)
    rows, cols, _ = s.triplets()
    prow = iperm[rows]
    pcol = iperm[cols]
    order = np.lexsort((pcol, prow))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(prow, minlength=n), out=indptr[1:])
    indices = pcol[order]
    parent, lnz = kernels.ldlt_symbolic(n, indptr, indices)
    lp = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(lnz, out=lp[1:])
    return SymbolicLDLT(n=n, perm=perm, iperm=iperm, indptr=indptr,
                        indices=indices, gather=order, parent=parent, lp=lp)


def ldlt_factorize(m, symbolic=None):
    """Sparse LDLt factorization of a symmetric positive definite matrix.

    The matrix is symmetrized first and must be symmetric to within 1e-12
    relative; a pivot at or below 1e-14 * max|diag| raises ``NotSPDError``.
    """
    s = _symmetrize_checked(m)
    if symbolic is None:
        symbolic = analyze(s)
    elif symbolic.n != s.nrows or symbolic.gather.shape[0] != s.nnz:
        raise ValueError("symbolic factorization does not match matrix pattern")
    data = s.data[symbolic.gather]
    diag = s.diagonal()
    maxdiag = float(np.max(np.abs(diag))) if diag.shape[0] else 0.0
    floor = _PIVOT_RTOL * maxdiag
    li, lx, d, fail = kernels.ldlt_numeric(
        symbolic.n, symbolic.indptr, symbolic.indices, data,
        symbolic.parent, symbolic.lp, floor)
    if fail >= 0:
        raise NotSPDError(
            f"non-positive pivot {d[fail]:.3e} at elimination step {fail} "
            f"(threshold {floor:.3e}); matrix is not positive definite")
    return SymmetricFactorization(perm=symbolic.perm, iperm=symbolic.iperm,
                                  lp=symbolic.lp, li=li, lx=lx, d=d)


# -- dense generalized eigenproblems ----------------------------------------

def _check_dense_pair(a, b, cap):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("A must be square")
    if b.shape != a.shape:
        raise ValueError("A and B must have matching shapes")
    if a.shape[0] > cap:
        raise DenseSizeError(
            f"dense eigenproblem of size {a.shape[0]} exceeds cap {cap}")
    return a, b


def dense_generalized_eigpairs(a, b, cap=DENSE_CAP):
    """Eigenpairs of A x = lambda B x for symmetric A and SPD B.

    Solved by Cholesky reduction to a standard symmetric problem; the
    eigenvalues come back ascending and the eigenvectors are B-orthonormal.
    """
    a, b = _check_dense_pair(a, b, cap)
    try:
        chol = np.linalg.cholesky(b)
    except np.linalg.LinAlgError as exc:
        raise ValueError("B is not symmetric positive definite") from exc
    tmp = np.linalg.solve(chol, a)
    c = np.linalg.solve(chol, tmp.T)
    c = 0.5 * (c + c.T)
    w, y = np.linalg.eigh(c)
    x = np.linalg.solve(chol.T, y)
    return w, x


def dense_generalized_eigs(a, b, cap=DENSE_CAP):
    """Eigenvalues of A x = lambda B x, ascending (see eigpairs)."""
    return dense_generalized_eigpairs(a, b, cap)[0]
