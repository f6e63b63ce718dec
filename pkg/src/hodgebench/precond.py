"""Parameter-robust block-diagonal preconditioner.

Both blocks are SPD sums of a mass matrix and a stiffness-like term,

    P_V = (1+alpha)^-1 M_k     + D_k^T M_{k+1} D_k        (mass only at k = n)
    P_Q = alpha M_{k-1} + (1+alpha) D_{k-1}^T M_k D_{k-1}

applied exactly through sparse LDLt factorizations, so the observed
iteration counts isolate the quality of the operator itself rather than of
an inner solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .saddle import system_blocks
from .sparse import (SparseMatrix, SymmetricFactorization, ldlt_factorize,
                     symmetrized)


def preconditioner_matrices(cx, k, alpha):
    """The two SPD block matrices (PV, PQ); pattern is alpha-independent."""
    n = cx.dim
    if not 1 <= k <= n:
        raise ValueError(f"degree k must satisfy 1 <= k <= {n}, got {k}")
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    a, _ = system_blocks(cx, k)
    pv = a.add_scaled(cx.mass[k], 1.0 / (1.0 + alpha))
    dq = cx.coboundary[k - 1]
    s0 = symmetrized(dq.transpose().matmul(cx.mass[k].matmul(dq)))
    pq = s0.scaled(1.0 + alpha).add_scaled(cx.mass[k - 1], alpha)
    return pv, pq


@dataclass
class BlockPreconditioner:
    alpha: float
    pv_matrix: SparseMatrix
    pq_matrix: SparseMatrix
    pv: SymmetricFactorization
    pq: SymmetricFactorization

    @classmethod
    def from_matrices(cls, pv_matrix, pq_matrix, alpha,
                      pv_symbolic=None, pq_symbolic=None):
        """Factor the given SPD blocks; symbolic data may be reused across
        factorizations with identical sparsity (e.g. an alpha sweep)."""
        pv = ldlt_factorize(pv_matrix, pv_symbolic)
        pq = ldlt_factorize(pq_matrix, pq_symbolic)
        return cls(alpha=float(alpha), pv_matrix=pv_matrix, pq_matrix=pq_matrix,
                   pv=pv, pq=pq)

    @property
    def ndof_u(self):
        return self.pv.n

    @property
    def ndof_p(self):
        return self.pq.n

    def apply(self, r):
        """Exact block-diagonal solve of a stacked residual."""
        r = np.asarray(r, dtype=np.float64)
        total = self.ndof_u + self.ndof_p
        if r.shape != (total,):
            raise ValueError(
                f"apply: expected stacked vector of length {total}, got {r.shape}")
        return np.concatenate([self.pv.solve(r[:self.ndof_u]),
                               self.pq.solve(r[self.ndof_u:])])


def build_preconditioner(cx, k, alpha):
    pv_mat, pq_mat = preconditioner_matrices(cx, k, alpha)
    return BlockPreconditioner.from_matrices(pv_mat, pq_mat, alpha)
