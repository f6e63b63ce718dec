"""Numpy fallback kernels.

Same contracts as the compiled backend in ``_ckern.pyx``.  Row/column loops
that carry sequential dependencies stay in Python; the inner updates are
vectorized per segment so the fallback remains usable on benchmark-sized
problems, just slower.
"""

import numpy as np

BACKEND = "python"


def csr_matvec(indptr, indices, data, x):
    n = indptr.shape[0] - 1
    y = np.zeros(n)
    if data.shape[0] == 0:
        return y
    prod = data * x[indices]
    starts = indptr[:-1]
    nonempty = indptr[1:] > starts
    # reduceat yields garbage for empty segments and rejects out-of-range
    # offsets; clip and mask instead of looping.
    offs = np.minimum(starts, prod.shape[0] - 1)
    sums = np.add.reduceat(prod, offs)
    y[nonempty] = sums[nonempty]
    return y


def ldlt_symbolic(n, Ap, Ai):
    """Elimination tree and per-column counts of the L factor.

    The matrix is given as full symmetric CSR with sorted indices; row k
    restricted to indices < k is column k of the upper triangle.
    """
    parent = np.full(n, -1, dtype=np.int64)
    lnz = np.zeros(n, dtype=np.int64)
    flag = np.empty(n, dtype=np.int64)
    for k in range(n):
        flag[k] = k
        for p in range(Ap[k], Ap[k + 1]):
            i = Ai[p]
            if i >= k:
                break
            while flag[i] != k:
                if parent[i] == -1:
                    parent[i] = k
                lnz[i] += 1
                flag[i] = k
                i = parent[i]
    return parent, lnz


def ldlt_numeric(n, Ap, Ai, Ax, parent, Lp, pivot_floor):
    """Up-looking LDLt numeric factorization.

    Returns (Li, Lx, D, fail) where fail is the index of the first pivot at
    or below ``pivot_floor`` (-1 on success).  L is unit lower triangular in
    CSC layout with column pointers ``Lp`` fixed by the symbolic phase.
    """
    nnz = int(Lp[n])
    Li = np.empty(nnz, dtype=np.int64)
    Lx = np.empty(nnz)
    D = np.empty(n)
    Y = np.zeros(n)
    flag = np.empty(n, dtype=np.int64)
    fill = np.zeros(n, dtype=np.int64)
    pattern = np.empty(n, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    for k in range(n):
        top = n
        flag[k] = k
        dk = 0.0
        for p in range(Ap[k], Ap[k + 1]):
            i = Ai[p]
            if i > k:
                break
            if i == k:
                dk += Ax[p]
                continue
            Y[i] += Ax[p]
            depth = 0
            while flag[i] != k:
                stack[depth] = i
                depth += 1
                flag[i] = k
                i = parent[i]
            while depth > 0:
                depth -= 1
                top -= 1
                pattern[top] = stack[depth]
        D[k] = dk
        while top < n:
            i = pattern[top]
            top += 1
            yi = Y[i]
            Y[i] = 0.0
            s = Lp[i]
            e = s + fill[i]
            if e > s:
                Y[Li[s:e]] -= Lx[s:e] * yi
            lki = yi / D[i]
            D[k] -= lki * yi
            Li[e] = k
            Lx[e] = lki
            fill[i] += 1
        if D[k] <= pivot_floor:
            return Li, Lx, D, k
    return Li, Lx, D, -1


def ldlt_solve(Lp, Li, Lx, D, b):
    n = D.shape[0]
    x = b.copy()
    for j in range(n):
        s, e = Lp[j], Lp[j + 1]
        if e > s:
            x[Li[s:e]] -= Lx[s:e] * x[j]
    x /= D
    for j in range(n - 1, -1, -1):
        s, e = Lp[j], Lp[j + 1]
        if e > s:
            x[j] -= Lx[s:e] @ x[Li[s:e]]
    return x
