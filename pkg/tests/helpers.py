"""Independent oracles used by the test suite.

Deliberately written against different algorithms than the package: tensor
Gauss-Legendre quadrature through the Duffy transform instead of symmetric
simplex rules, scalar loops instead of vectorized assembly, Gaussian
elimination instead of SVD ranks, and characteristic-polynomial root
finding instead of LAPACK eigensolves.
"""

from itertools import combinations
from math import factorial

import numpy as np


# -- quadrature oracle: Duffy-transformed Gauss-Legendre ---------------------

def duffy_quadrature(dim, points_per_axis=12):
    """Barycentric points and unit-sum weights on the reference simplex."""
    x, w = np.polynomial.legendre.leggauss(points_per_axis)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    if dim == 2:
        pts = []
        wts = []
        for u, wu in zip(x, w):
            for v, wv in zip(x, w):
                xi = (u * (1.0 - v), u * v)
                pts.append((1.0 - xi[0] - xi[1], xi[0], xi[1]))
                wts.append(wu * wv * u)
        scale = factorial(2)
    elif dim == 3:
        pts = []
        wts = []
        for u, wu in zip(x, w):
            for v, wv in zip(x, w):
                for t, wt in zip(x, w):
                    xi = (u, v * (1.0 - u), t * (1.0 - u) * (1.0 - v))
                    pts.append((1.0 - xi[0] - xi[1] - xi[2], xi[0], xi[1], xi[2]))
                    wts.append(wu * wv * wt * (1.0 - u) ** 2 * (1.0 - v))
        scale = factorial(3)
    else:
        raise ValueError("dim must be 2 or 3")
    return np.array(pts), np.array(wts) * scale


def exact_bary_monomial(dim, exponents, volume=None):
    """Exact integral of a barycentric monomial over a simplex.

    integral of prod lam_i^{a_i} = n! vol prod(a_i!) / (n + sum a)!
    """
    if volume is None:
        volume = 1.0 / factorial(dim)
    a = list(exponents)
    num = factorial(dim) * volume
    for ai in a:
        num *= factorial(ai)
    return num / factorial(dim + sum(a))


# -- independent Whitney evaluation ------------------------------------------

def simplex_gradients(verts):
    """Barycentric gradients of one simplex, scalar implementation."""
    verts = np.asarray(verts, dtype=float)
    dim = verts.shape[1]
    edge = np.array([verts[i + 1] - verts[0] for i in range(dim)])
    inv = np.linalg.inv(edge)
    grads = np.zeros((dim + 1, dim))
    for i in range(dim):
        grads[i + 1] = inv[:, i]
    grads[0] = -grads[1:].sum(axis=0)
    return grads


def signed_volume(verts):
    verts = np.asarray(verts, dtype=float)
    dim = verts.shape[1]
    edge = np.array([verts[i + 1] - verts[0] for i in range(dim)])
    return np.linalg.det(edge) / factorial(dim)


def whitney_eval(verts, k, lam):
    """Values of all local Whitney k-form proxies at one barycentric point.

    Returns a list over local faces; entries are floats for k in {0, n} and
    length-dim arrays otherwise.
    """
    verts = np.asarray(verts, dtype=float)
    dim = verts.shape[1]
    grads = simplex_gradients(verts)
    if k == 0:
        return [lam[i] for i in range(dim + 1)]
    if k == dim:
        return [1.0 / signed_volume(verts)]
    if k == 1:
        out = []
        for a, b in combinations(range(dim + 1), 2):
            out.append(lam[a] * grads[b] - lam[b] * grads[a])
        return out
    if k == 2 and dim == 3:
        out = []
        for a, b, c in combinations(range(dim + 1), 3):
            out.append(2.0 * (lam[a] * np.cross(grads[b], grads[c])
                              + lam[b] * np.cross(grads[c], grads[a])
                              + lam[c] * np.cross(grads[a], grads[b])))
        return out
    raise ValueError(f"unsupported degree {k} in dimension {dim}")


def whitney_mass_oracle(verts, k, points_per_axis=12):
    """Local Whitney mass matrix by brute-force high-order quadrature."""
    verts = np.asarray(verts, dtype=float)
    dim = verts.shape[1]
    bary, w = duffy_quadrature(dim, points_per_axis)
    vol = abs(signed_volume(verts))
    nloc = len(whitney_eval(verts, k, bary[0]))
    m = np.zeros((nloc, nloc))
    for lam, wq in zip(bary, w):
        vals = whitney_eval(verts, k, lam)
        for e in range(nloc):
            for f in range(nloc):
                m[e, f] += wq * np.dot(np.atleast_1d(vals[e]),
                                       np.atleast_1d(vals[f])) * vol
    return m


def whitney_derivative_eval(verts, k, coeffs):
    """Analytic derivative of a Whitney k-field as a constant-per-cell value.

    Returns the curl (2D scalar / 3D vector) for k = 1 and the divergence
    scalar for k = dim - 1 in 3D; for k = 0 returns the constant gradient.
    All lowest-order Whitney derivatives are cellwise constant.
    """
    verts = np.asarray(verts, dtype=float)
    dim = verts.shape[1]
    grads = simplex_gradients(verts)
    coeffs = np.asarray(coeffs, dtype=float)
    if k == 0:
        out = np.zeros(dim)
        for i in range(dim + 1):
            out += coeffs[i] * grads[i]
        return out
    if k == 1 and dim == 2:
        out = 0.0
        for idx, (a, b) in enumerate(combinations(range(3), 2)):
            out += coeffs[idx] * 2.0 * (grads[a][0] * grads[b][1]
                                        - grads[a][1] * grads[b][0])
        return out
    if k == 1 and dim == 3:
        out = np.zeros(3)
        for idx, (a, b) in enumerate(combinations(range(4), 2)):
            out += coeffs[idx] * 2.0 * np.cross(grads[a], grads[b])
        return out
    if k == 2 and dim == 3:
        out = 0.0
        for idx, (a, b, c) in enumerate(combinations(range(4), 3)):
            out += coeffs[idx] * 6.0 * np.dot(grads[a], np.cross(grads[b], grads[c]))
        return out
    raise ValueError(f"unsupported degree {k} in dimension {dim}")


# -- linear-algebra oracles ---------------------------------------------------

def gauss_rank(a, tol=1e-9):
    """Rank by Gaussian elimination with partial pivoting."""
    a = np.array(a, dtype=float)
    nrows, ncols = a.shape
    rank = 0
    for col in range(ncols):
        if rank == nrows:
            break
        piv = rank + int(np.argmax(np.abs(a[rank:, col])))
        if abs(a[piv, col]) <= tol:
            continue
        a[[rank, piv]] = a[[piv, rank]]
        a[rank] = a[rank] / a[rank, col]
        for r in range(nrows):
            if r != rank and a[r, col] != 0.0:
                a[r] = a[r] - a[r, col] * a[rank]
        rank += 1
    return rank


def charpoly_generalized_eigs(a, b):
    """Eigenvalues of A x = lambda B x via det(A - lambda B) root finding.

    The determinant polynomial is recovered by interpolation at sample
    points, then solved with the companion-matrix root finder.  Only viable
    for small well-separated problems, which is the point: it shares no
    code path with a Cholesky-reduction eigensolver.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.shape[0]
    scale = max(np.abs(a).max() / max(np.abs(b).max(), 1e-30), 1.0)
    nodes = np.cos(np.pi * (2 * np.arange(n + 1) + 1) / (2.0 * (n + 1)))
    nodes = 3.0 * scale * nodes
    dets = np.array([np.linalg.det(a - t * b) for t in nodes])
    coeffs = np.polyfit(nodes, dets, n)
    roots = np.roots(coeffs)
    return np.sort(roots.real)


def random_simplex(dim, rng, min_volume=0.05):
    """Random nondegenerate simplex with unit-scale edge lengths."""
    while True:
        verts = rng.standard_normal((dim + 1, dim))
        if abs(signed_volume(verts)) >= min_volume:
            return verts
