import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from doublepoint.errors import SingularForm
from doublepoint.linalg import (DEFAULT_TOL, Subspace, ToleranceConfig, eigen_multiset, gram_rank,
                                intersect, multiset_equal, numerical_rank, restricted_gram,
                                skew_complement, span_sum, subspace_combine, symmetrize_conjugates)
from doublepoint.randgen import random_form

# R^4 with coordinates (x1, x2, y1, y2)
OMEGA = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]], dtype=float)
E = np.eye(4)
X1, X2, Y1, Y2 = (E[:, [i]] for i in range(4))


def span(*cols):
    return Subspace(np.hstack(cols))


def test_rank_examples():
    assert numerical_rank(np.eye(2)) == 2
    assert numerical_rank(np.zeros((2, 2))) == 0
    assert numerical_rank(np.array([[1.0, 1.0], [1.0, 1.0 + 1e-15]])) == 1


def test_tolerance_validation():
    with pytest.raises(ValueError):
        ToleranceConfig(rank_tol=0.0)
    with pytest.raises(ValueError):
        ToleranceConfig(rank_tol=1.5)
    with pytest.raises(ValueError):
        ToleranceConfig(eig_pair_tol=-1e-6)


def test_skew_complement_examples():
    c = skew_complement(span(X1), OMEGA)
    assert c.equals(span(X1, X2, Y2))
    assert skew_complement(Subspace.whole(4), OMEGA).dim == 0
    lag = span(X1, X2)
    assert skew_complement(lag, OMEGA).equals(lag)


def test_skew_complement_singular():
    with pytest.raises(SingularForm):
        skew_complement(span(X1), np.zeros((4, 4)))


def test_combine_examples():
    assert subspace_combine("sum", span(X1), span(Y1)).dim == 2
    assert subspace_combine("intersect", span(X1, X2), span(X2, Y1)).equals(span(X2))
    u = span(X1, Y2)
    assert intersect(u, u).equals(u)


def test_restricted_gram_examples():
    assert np.array_equal(restricted_gram(OMEGA, span(X1, Y1)), [[0, 1], [-1, 0]])
    assert np.array_equal(restricted_gram(OMEGA, span(X1, X2)), np.zeros((2, 2)))
    lam = 2.0
    mu = OMEGA.copy()
    mu[0, 1], mu[1, 0] = 1.0, -1.0
    mu[2, 3], mu[3, 2] = 1 / lam, -1 / lam
    g = restricted_gram(mu, Subspace.whole(4))
    assert g[0, 1] == 1 and g[2, 3] == 0.5 and g[0, 2] == 1 and g[1, 3] == 1
    assert g[0, 3] == 0 and g[1, 2] == 0


def test_eigen_examples():
    assert np.allclose(eigen_multiset(np.eye(2)), [1, 1])
    assert np.allclose(sorted(eigen_multiset(np.array([[0.0, 1.0], [-1.0, 0.0]])), key=lambda z: z.imag),
                       [-1j, 1j])
    j4 = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    b = 4 * j4 @ np.diag([2.0, 2.0, 3.0, 3.0])
    vals = eigen_multiset(0.25 * np.linalg.solve(j4, b))
    assert np.allclose(np.sort(vals.real), [2, 2, 3, 3]) and np.all(vals.imag == 0)


def test_multiset_equal_examples():
    tol = ToleranceConfig(rank_tol=1e-9, eig_pair_tol=1e-9)
    assert multiset_equal([2, 3], [3, 2])
    assert multiset_equal([2], [2 + 1e-12], tol)
    assert not multiset_equal([2, 3], [2])
    assert not multiset_equal([2], [2.1])


def test_symmetrize_exact_conjugates():
    vals = symmetrize_conjugates([1 + 2j, 1 - 2.0000001j, 3 + 1e-12j])
    conj = np.sort_complex(np.conj(vals))
    assert np.array_equal(np.sort_complex(vals), conj)
    assert 3.0 in vals.real and np.all(vals[vals.real == 3.0].imag == 0)


matrices = st.integers(0, 2**32 - 1).map(np.random.default_rng)


@settings(max_examples=60, deadline=None)
@given(matrices, st.integers(1, 4), st.integers(0, 8), st.integers(0, 8))
def test_grassmann_identity(rng, n, a, b):
    dim = 2 * n
    a, b = min(a, dim), min(b, dim)
    u = Subspace.span(rng.standard_normal((dim, a))) if a else Subspace.zero(dim)
    v = Subspace.span(rng.standard_normal((dim, b))) if b else Subspace.zero(dim)
    assert span_sum(u, v).dim + intersect(u, v).dim == u.dim + v.dim


@settings(max_examples=60, deadline=None)
@given(matrices, st.integers(1, 5), st.integers(0, 10))
def test_double_complement(rng, n, k):
    k = min(k, 2 * n)
    mu = random_form(n, rng)
    u = Subspace.span(rng.standard_normal((2 * n, k))) if k else Subspace.zero(2 * n)
    c = skew_complement(u, mu)
    assert u.dim + c.dim == 2 * n
    assert skew_complement(c, mu).equals(u)


@settings(max_examples=60, deadline=None)
@given(matrices, st.integers(1, 6))
def test_restricted_gram_is_skew(rng, k):
    mu = random_form(3, rng)
    g = restricted_gram(mu, Subspace.span(rng.standard_normal((6, min(k, 6)))))
    assert np.array_equal(g, -g.T)


@settings(max_examples=60, deadline=None)
@given(matrices, st.integers(1, 8))
def test_eigen_multiset_conjugate_closed(rng, m):
    vals = eigen_multiset(rng.standard_normal((m, m)))
    assert np.array_equal(np.sort_complex(vals), np.sort_complex(np.conj(vals)))


@settings(max_examples=60, deadline=None)
@given(matrices, st.integers(1, 6))
def test_multiset_equal_symmetric(rng, m):
    a = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    b = rng.permutation(a) * (1 + rng.choice([0.0, 1e-7, 1e-5], size=m))
    assert multiset_equal(a, b) == multiset_equal(b, a)


def test_gram_rank_ignores_roundoff():
    # a Lagrangian plane in a badly scaled basis still has rank 0
    u = Subspace.span(np.hstack([X1 * 1e-3, X1 + X2]))
    assert gram_rank(OMEGA, u, DEFAULT_TOL) == 0
