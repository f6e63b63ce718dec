import numpy as np
import pytest

from hodgebench import simplex_quadrature

from helpers import duffy_quadrature, exact_bary_monomial


def _monomials_up_to(dim, degree):
    if dim == 2:
        for a in range(degree + 1):
            for b in range(degree + 1 - a):
                for c in range(degree + 1 - a - b):
                    yield (a, b, c)
    else:
        for a in range(degree + 1):
            for b in range(degree + 1 - a):
                for c in range(degree + 1 - a - b):
                    for d in range(degree + 1 - a - b - c):
                        yield (a, b, c, d)


@pytest.mark.parametrize("dim", [2, 3])
@pytest.mark.parametrize("degree", [2, 4, 6, 8])
def test_rule_exact_for_barycentric_monomials(dim, degree):
    bary, w = simplex_quadrature(dim, degree)
    assert abs(w.sum() - 1.0) < 1e-13
    for expo in _monomials_up_to(dim, degree):
        approx = (w * np.prod(bary ** np.array(expo), axis=1)).sum()
        # weights are normalized to the cell volume, so compare on volume 1
        exact = exact_bary_monomial(dim, expo, volume=1.0)
        assert abs(approx - exact) < 1e-13, (expo, approx, exact)


@pytest.mark.parametrize("dim", [2, 3])
def test_matches_duffy_oracle_on_random_polynomial(dim):
    rng = np.random.default_rng(7)
    coeffs = {expo: rng.standard_normal() for expo in _monomials_up_to(dim, 4)}

    def poly(bary):
        return sum(c * np.prod(bary ** np.array(e), axis=1)
                   for e, c in coeffs.items())

    bary_a, w_a = simplex_quadrature(dim, 6)
    bary_b, w_b = duffy_quadrature(dim)
    va = (w_a * poly(bary_a)).sum()
    vb = (w_b * poly(bary_b)).sum()
    assert abs(va - vb) < 1e-12


def test_invalid_arguments():
    with pytest.raises(ValueError):
        simplex_quadrature(0, 2)
    with pytest.raises(ValueError):
        simplex_quadrature(2, -1)
