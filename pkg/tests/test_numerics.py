import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from laminar.errors import NonSquare, NotSymmetric, Singular
from laminar.numerics import (det, eig_general, eig_symmetric, eigvals, hessenberg, inverse, lu_factor,
                              solve_linear, spectra_match)
from oracles import dense_eigvals, multiset_close, sym_eigvals

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def square(max_n=8):
    return st.integers(1, max_n).flatmap(lambda n: arrays(float, (n, n), elements=finite))


def test_eig_symmetric_swap():
    d = eig_symmetric([[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(d.values, [-1, 1], atol=1e-14)


def test_eig_symmetric_identity():
    assert np.allclose(eig_symmetric(np.eye(4)).values, 1.0)


def test_eig_symmetric_quotient_2x2():
    a = b = 0.25
    wbar = np.array([[a, 1 - a], [1 - b, b]])
    # symmetric here because a == b
    assert np.allclose(eig_symmetric(wbar).values, [a + b - 1, 1.0], atol=1e-14)


def test_eig_symmetric_vectors_orthonormal(rng):
    m = rng.normal(size=(20, 20))
    m = m + m.T
    d = eig_symmetric(m)
    v = d.vectors
    assert np.allclose(v.T @ v, np.eye(20), atol=1e-12)
    assert np.allclose(m @ v, v * d.values, atol=1e-11)
    assert np.all(np.diff(d.values) >= 0)


def test_eig_symmetric_rejects():
    with pytest.raises(NotSymmetric):
        eig_symmetric([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(NonSquare):
        eig_symmetric(np.zeros((2, 3)))


def test_eig_general_rotation():
    v = eig_general([[0.0, -1.0], [1.0, 0.0]]).values
    assert multiset_close(v, [1j, -1j], 1e-14)


def test_eig_general_triangular():
    v = eig_general([[2.0, 5.0], [0.0, 3.0]]).values
    assert multiset_close(v, [2, 3], 1e-14)


def test_eig_general_worked_example_A(lin, hill, hss):
    from laminar.kinetics import hill_A_eigs_closed_form
    ev = eig_general(lin.A).values
    assert multiset_close(ev, hill_A_eigs_closed_form(hill.params, hss[0]), 1e-9)


def test_eig_general_dimension_cap():
    with pytest.raises(Exception):
        eig_general(np.eye(80))
    assert eig_general(np.eye(80), max_dim=None).values.size == 80


def test_hessenberg_similar(rng):
    m = rng.normal(size=(9, 9))
    h = hessenberg(m)
    assert np.allclose(np.tril(h, -2), 0)
    assert multiset_close(dense_eigvals(h), dense_eigvals(m), 1e-9)


def test_solve_examples(rng):
    b = rng.normal(size=4)
    assert np.allclose(solve_linear(np.eye(4), b), b)
    assert np.allclose(solve_linear([[2.0, 0.0], [0.0, 4.0]], [2.0, 8.0]), [1.0, 2.0])
    m = rng.normal(size=(5, 5)) + 5 * np.eye(5)
    x = solve_linear(m, b[:3].tolist() + [1.0, 2.0])
    assert np.max(np.abs(m @ x - np.r_[b[:3], 1.0, 2.0])) < 1e-12


def test_singular():
    with pytest.raises(Singular):
        solve_linear([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0])
    assert det([[1.0, 2.0], [2.0, 4.0]]) == 0.0
    with pytest.raises(Singular):
        inverse(np.zeros((3, 3)))


def test_inverse(rng):
    m = rng.normal(size=(6, 6)) + 4 * np.eye(6)
    assert np.allclose(inverse(m) @ m, np.eye(6), atol=1e-12)


@given(st.integers(2, 9), st.integers(0, 2 ** 32 - 1))
def test_symmetric_permutation_invariance(n, seed):
    r = np.random.default_rng(seed)
    m = r.normal(size=(n, n))
    m = m + m.T
    perm = r.permutation(n)
    a = eig_symmetric(m).values
    b = eig_symmetric(m[np.ix_(perm, perm)]).values
    assert np.max(np.abs(a - b)) < 1e-9


@given(st.integers(1, 10), st.integers(0, 2 ** 32 - 1))
def test_general_agrees_with_symmetric(n, seed):
    r = np.random.default_rng(seed)
    m = r.normal(size=(n, n))
    m = m + m.T
    g = eig_general(m).values
    assert np.max(np.abs(g.imag)) < 1e-8
    assert np.max(np.abs(np.sort(g.real) - eig_symmetric(m).values)) < 1e-8


@given(st.integers(1, 10), st.integers(0, 2 ** 32 - 1))
def test_lu_det_matches_eigen_product(n, seed):
    r = np.random.default_rng(seed)
    m = r.normal(size=(n, n))
    d = det(m)
    p = np.prod(eig_general(m).values)
    assert abs(d - p.real) <= 1e-7 * max(1.0, abs(d))
    assert abs(p.imag) <= 1e-7 * max(1.0, abs(d))


@given(square())
def test_general_against_numpy(m):
    assert spectra_match(eig_general(m).values, dense_eigvals(m), 1e-6 * (1 + np.abs(m).max()))


@given(st.integers(1, 30), st.integers(0, 2 ** 32 - 1))
def test_symmetric_against_numpy(n, seed):
    m = np.random.default_rng(seed).normal(size=(n, n))
    m = m + m.T
    assert np.max(np.abs(eig_symmetric(m).values - sym_eigvals(m))) < 1e-10


def test_eigvals_dispatch():
    m = np.array([[2.0, 1.0], [1.0, 2.0]])
    assert np.allclose(eigvals(m), [1, 3])
    assert multiset_close(eigvals([[0.0, 1.0], [-1.0, 0.0]]), [1j, -1j], 1e-14)


def test_lu_factor_records_singular_column():
    lu = lu_factor([[1.0, 2.0], [2.0, 4.0]])
    assert lu.singular_at is not None


@given(square())
def test_symmetric_any_scale(m):
    s = m + m.T
    assert np.max(np.abs(eig_symmetric(s).values - sym_eigvals(s)), initial=0) <= 1e-10 * (1 + np.abs(s).max())


def test_tiny_scale_general():
    m = np.full((3, 3), 9e-166)
    assert multiset_close(eig_general(m).values, [0, 0, 2.7e-165], 1e-170)
