"""Symmetric quadrature on simplices.

Rules come from the Grundmann-Moller family, which provides arbitrary odd
polynomial exactness in any dimension from one closed formula.  Weights are
returned normalized to sum to one, so integrating f over a physical cell is
``volume * weights @ f(points)``.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial

import numpy as np


def _compositions(total, parts):
    """All tuples of ``parts`` non-negative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


@lru_cache(maxsize=None)
def _grundmann_moller(dim, s):
    """Rule of degree 2s+1 on the unit ``dim``-simplex; weights sum to 1."""
    d = 2 * s + 1
    points = []
    weights = []
    for i in range(s + 1):
        denom = d + dim - 2 * i
        w = (-1.0) ** i * 2.0 ** (-2 * s) * float(denom) ** d / (
            factorial(i) * factorial(d + dim - i))
        for beta in _compositions(s - i, dim + 1):
            points.append([(2 * b + 1) / denom for b in beta])
            weights.append(w)
    bary = np.array(points)
    wts = np.array(weights) * factorial(dim)
    bary.setflags(write=False)
    wts.setflags(write=False)
    return bary, wts


def simplex_quadrature(dim, degree):
    """Barycentric points and unit-sum weights exact for the given degree."""
    if dim < 1:
        raise ValueError("dim must be at least 1")
    if degree < 0:
        raise ValueError("degree must be non-negative")
    # smallest s with 2s+1 >= degree
    return _grundmann_moller(dim, degree // 2)
