# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: CSR matvec and sparse LDLt numeric factorization/solve.

Contracts mirror ``pykern``; see there for documentation.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"

ctypedef cnp.int64_t idx_t
ctypedef cnp.float64_t val_t


def csr_matvec(indptr, indices, data, x):
    cdef idx_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef idx_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef val_t[::1] dv = np.ascontiguousarray(data, dtype=np.float64)
    cdef val_t[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = ip.shape[0] - 1
    out = np.zeros(n)
    cdef val_t[::1] ov = out
    cdef Py_ssize_t i, p
    cdef val_t acc
    for i in range(n):
        acc = 0.0
        for p in range(ip[i], ip[i + 1]):
            acc += dv[p] * xv[ix[p]]
        ov[i] = acc
    return out


def ldlt_symbolic(n, Ap, Ai):
    cdef Py_ssize_t nn = n
    cdef idx_t[::1] ap = np.ascontiguousarray(Ap, dtype=np.int64)
    cdef idx_t[::1] ai = np.ascontiguousarray(Ai, dtype=np.int64)
    parent_arr = np.full(nn, -1, dtype=np.int64)
    lnz_arr = np.zeros(nn, dtype=np.int64)
    flag_arr = np.empty(nn, dtype=np.int64)
    cdef idx_t[::1] parent = parent_arr
    cdef idx_t[::1] lnz = lnz_arr
    cdef idx_t[::1] flag = flag_arr
    cdef Py_ssize_t k, p
    cdef idx_t i
    for k in range(nn):
        flag[k] = k
        for p in range(ap[k], ap[k + 1]):
            i = ai[p]
            if i >= k:
                break
            while flag[i] != k:
                if parent[i] == -1:
                    parent[i] = k
                lnz[i] += 1
                flag[i] = k
                i = parent[i]
    return parent_arr, lnz_arr


def ldlt_numeric(n, Ap, Ai, Ax, parent, Lp, pivot_floor):
    cdef Py_ssize_t nn = n
    cdef idx_t[::1] ap = np.ascontiguousarray(Ap, dtype=np.int64)
    cdef idx_t[::1] ai = np.ascontiguousarray(Ai, dtype=np.int64)
    cdef val_t[::1] ax = np.ascontiguousarray(Ax, dtype=np.float64)
    cdef idx_t[::1] par = np.ascontiguousarray(parent, dtype=np.int64)
    cdef idx_t[::1] lp = np.ascontiguousarray(Lp, dtype=np.int64)
    cdef val_t floor = pivot_floor
    cdef Py_ssize_t nnz = lp[nn]
    li_arr = np.empty(nnz, dtype=np.int64)
    lx_arr = np.empty(nnz)
    d_arr = np.empty(nn)
    cdef idx_t[::1] li = li_arr
    cdef val_t[::1] lx = lx_arr
    cdef val_t[::1] d = d_arr
    y_arr = np.zeros(nn)
    cdef val_t[::1] y = y_arr
    flag_arr = np.empty(nn, dtype=np.int64)
    fill_arr = np.zeros(nn, dtype=np.int64)
    pattern_arr = np.empty(nn, dtype=np.int64)
    stack_arr = np.empty(nn, dtype=np.int64)
    cdef idx_t[::1] flag = flag_arr
    cdef idx_t[::1] fill = fill_arr
    cdef idx_t[::1] pattern = pattern_arr
    cdef idx_t[::1] stack = stack_arr
    cdef Py_ssize_t k, p, top, depth, s, e, q
    cdef idx_t i
    cdef val_t dk, yi, lki
    for k in range(nn):
        top = nn
        flag[k] = k
        dk = 0.0
        for p in range(ap[k], ap[k + 1]):
            i = ai[p]
            if i > k:
                break
            if i == k:
                dk += ax[p]
                continue
            y[i] += ax[p]
            depth = 0
            while flag[i] != k:
                stack[depth] = i
                depth += 1
                flag[i] = k
                i = par[i]
            while depth > 0:
                depth -= 1
                top -= 1
                pattern[top] = stack[depth]
        d[k] = dk
        while top < nn:
            i = pattern[top]
            top += 1
            yi = y[i]
            y[i] = 0.0
            s = lp[i]
            e = s + fill[i]
            for q in range(s, e):
                y[li[q]] -= lx[q] * yi
            lki = yi / d[i]
            d[k] -= lki * yi
            li[e] = k
            lx[e] = lki
            fill[i] += 1
        if d[k] <= floor:
            return li_arr, lx_arr, d_arr, k
    return li_arr, lx_arr, d_arr, -1


def ldlt_solve(Lp, Li, Lx, D, b):
    cdef idx_t[::1] lp = np.ascontiguousarray(Lp, dtype=np.int64)
    cdef idx_t[::1] li = np.ascontiguousarray(Li, dtype=np.int64)
    cdef val_t[::1] lx = np.ascontiguousarray(Lx, dtype=np.float64)
    cdef val_t[::1] d = np.ascontiguousarray(D, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0]
    x = np.array(b, dtype=np.float64, copy=True)
    cdef val_t[::1] xv = x
    cdef Py_ssize_t j, p
    cdef val_t xj, acc
    for j in range(n):
        xj = xv[j]
        for p in range(lp[j], lp[j + 1]):
            xv[li[p]] -= lx[p] * xj
    for j in range(n):
        xv[j] /= d[j]
    for j in range(n - 1, -1, -1):
        acc = xv[j]
        for p in range(lp[j], lp[j + 1]):
            acc -= lx[p] * xv[li[p]]
        xv[j] = acc
    return x
