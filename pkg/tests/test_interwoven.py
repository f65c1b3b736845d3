import numpy as np
import pytest
from hypothesis import given, strategies as st

from laminar.errors import NegativeEntry, NonSquare, Singular
from laminar.interwoven import (block_diag, block_diagonalize, interweave, interwoven_det, interwoven_inverse,
                                interwoven_power, interwoven_spectrum, interwoven_trace, is_irreducible, kron_dense,
                                selector, tau)
from oracles import kron_sum, multiset_close, strongly_connected

A = np.array([[1.0, 2.0], [3.0, 4.0]])
B = np.array([[5.0, 6.0], [7.0, 8.0]])
EXAMPLE_P = np.array([[1, 0, 2, 0],
                      [0, 5, 0, 6],
                      [3, 0, 4, 0],
                      [0, 7, 0, 8]], float)

dims = st.tuples(st.integers(1, 3), st.integers(1, 6), st.integers(0, 2 ** 32 - 1))


def random_constructors(r, n, seed):
    g = np.random.default_rng(seed)
    return [g.normal(size=(n, n)) for _ in range(r)]


def test_single_constructor_is_identity_map():
    w = np.arange(9.0).reshape(3, 3)
    assert np.array_equal(interweave([w]).dense, w)


def test_two_by_two_example():
    p = interweave([A, B])
    assert np.array_equal(p.dense, EXAMPLE_P)
    order, blocks = block_diagonalize(p)
    assert np.array_equal(blocks[0], A) and np.array_equal(blocks[1], B)
    assert np.array_equal(order, [0, 2, 1, 3])


def test_identity_constructors():
    assert np.array_equal(interweave([np.eye(3), np.eye(3)]).dense, np.eye(6))


def test_r1_block_diagonalize_identity_permutation():
    w = np.random.default_rng(0).normal(size=(4, 4))
    order, blocks = block_diagonalize(interweave([w]))
    assert np.array_equal(order, np.arange(4)) and np.array_equal(blocks[0], w)


def test_round_trip_r3_n4():
    cons = random_constructors(3, 4, 7)
    p = interweave(cons)
    order, blocks = block_diagonalize(p)
    assert all(np.array_equal(b, c) for b, c in zip(blocks, cons))
    q = np.eye(12)[:, order]
    assert np.array_equal(q.T @ p.dense @ q, _blockdiag(blocks))
    assert np.array_equal(p.dense[np.ix_(order, order)], _blockdiag(blocks))


def _blockdiag(blocks):
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n))
    k = 0
    for b in blocks:
        out[k:k + b.shape[0], k:k + b.shape[0]] = b
        k += b.shape[0]
    return out


def test_tau_is_permutation():
    r, n = 3, 5
    assert sorted(tau(x, r, n) for x in range(1, r * n + 1)) == list(range(1, r * n + 1))
    assert tau(1, r, n) == 1 and tau(2, r, n) == n + 1


def test_spectrum_example():
    w1 = np.array([[0.0, 1.0], [1.0, 0.0]])
    w2 = np.array([[0.5, 0.5], [0.0, 1.0]])
    v = interwoven_spectrum(interweave([w1, w2])).values
    assert multiset_close(v, [-1, 0.5, 1, 1], 1e-12)
    assert multiset_close(v, np.linalg.eigvals(interweave([w1, w2]).dense), 1e-12)


def test_spectrum_repetition():
    w = np.array([[2.0, 1.0], [1.0, 3.0]])
    v = interwoven_spectrum(interweave([w, w, w])).values
    ev = np.linalg.eigvalsh(w)
    assert np.allclose(v, np.repeat(ev, 3))


def test_row_stochastic_eigenvalue_one():
    g = np.random.default_rng(3)
    cons = [g.uniform(0.1, 1, size=(4, 4)) for _ in range(3)]
    cons = [c / c.sum(1, keepdims=True) for c in cons]
    v = interwoven_spectrum(interweave(cons)).values
    assert np.sum(np.abs(v - 1) < 1e-10) >= 3


def test_inverse_examples():
    p = interweave([np.eye(3), np.eye(3)])
    assert np.array_equal(interwoven_inverse(p).dense, p.dense)
    inv = interwoven_inverse(interweave([np.diag([2.0, 4.0]), np.diag([5.0, 10.0])]))
    assert np.allclose(inv.constructors[0], np.diag([0.5, 0.25]))
    assert np.allclose(inv.constructors[1], np.diag([0.2, 0.1]))


def test_inverse_singular_index():
    with pytest.raises(Singular) as ei:
        interwoven_inverse(interweave([np.eye(2), np.ones((2, 2))]))
    assert ei.value.index == 1


def test_power_examples():
    p = interweave([A, B])
    assert np.array_equal(interwoven_power(p, 1).dense, p.dense)
    assert np.allclose(interwoven_power(p, 2).dense, EXAMPLE_P @ EXAMPLE_P)
    cyc = np.roll(np.eye(5), 1, axis=1)
    assert np.array_equal(interwoven_power(interweave([cyc, cyc]), 5).dense, np.eye(10))
    with pytest.raises(ValueError):
        interwoven_power(p, 0)


def test_irreducibility_examples():
    pos = np.random.default_rng(1).uniform(0.1, 1, size=(3, 3))
    p = interweave([pos, pos])
    assert not is_irreducible(p.dense)
    qs = [np.full((2, 2), 0.5) for _ in range(3)]
    assert is_irreducible(p.dense @ block_diag(qs))
    assert not is_irreducible(np.triu(np.ones((4, 4))))
    with pytest.raises(NegativeEntry):
        is_irreducible(-np.eye(2))


def test_mismatched_constructors():
    with pytest.raises(NonSquare):
        interweave([np.eye(2), np.eye(3)])
    with pytest.raises(NonSquare):
        interweave([])


def test_constructors_are_read_only():
    w = np.eye(2)
    p = interweave([w])
    w[0, 0] = 5.0
    assert p.constructors[0][0, 0] == 1.0
    with pytest.raises(ValueError):
        p.constructors[0][0, 0] = 2.0


def test_selector():
    assert np.array_equal(selector(1, 3), np.diag([0.0, 1.0, 0.0]))


@given(dims)
def test_dense_matches_kron_oracle(d):
    cons = random_constructors(*d)
    p = interweave(cons)
    assert np.array_equal(p.dense, kron_sum(cons))
    assert np.array_equal(p.dense, kron_dense(cons))


@given(dims)
def test_trace_identity(d):
    cons = random_constructors(*d)
    assert abs(interwoven_trace(interweave(cons)) - np.trace(kron_sum(cons))) < 1e-10


@given(dims)
def test_determinant_identity(d):
    cons = random_constructors(*d)
    ref = np.linalg.det(kron_sum(cons))
    got = interwoven_det(interweave(cons))
    assert abs(got - ref) <= 1e-8 * max(abs(ref), 1e-12)


@given(dims)
def test_spectrum_union(d):
    cons = random_constructors(*d)
    v = interwoven_spectrum(interweave(cons)).values
    assert multiset_close(v, np.linalg.eigvals(kron_sum(cons)), 1e-7)


@given(dims)
def test_apply_preserves_slots(d):
    r, n, seed = d
    cons = random_constructors(r, n, seed)
    p = interweave(cons)
    y = np.random.default_rng(seed + 1).normal(size=n * r)
    u = p.apply(y)
    assert np.allclose(u, p.dense @ y)
    # perturbing signal j outputs only moves signal j inputs
    for j in range(r):
        dy = np.zeros(n * r)
        dy[j::r] = 1.0
        du = p.apply(y + dy) - u
        others = [k for k in range(r) if k != j]
        for k in others:
            assert np.all(du[k::r] == 0)


@given(dims)
def test_positive_blocks_make_irreducible(d):
    r, n, seed = d
    g = np.random.default_rng(seed)
    cons = [g.uniform(0.1, 1, size=(n, n)) for _ in range(r)]
    p = interweave(cons)
    if r >= 2:
        assert not is_irreducible(p.dense) and not strongly_connected(p.dense)
    q = block_diag([g.uniform(0.1, 1, size=(r, r)) for _ in range(n)])
    assert is_irreducible(p.dense @ q) and strongly_connected(p.dense @ q)
