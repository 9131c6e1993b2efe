import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from homflow import (
    align_operator_family,
    simultaneous_orthogonalize,
    span_rank,
)


def check_postconditions(V, res, tol=1e-9):
    n = V.shape[0]
    scale = max(1.0, float(np.max(np.linalg.norm(V, axis=1))))
    # A orthogonal, and z really is A applied to the input rows
    assert np.max(np.abs(res.A @ res.A.T - np.eye(n))) <= 1e-10
    assert np.array_equal(res.z, res.A @ V)
    # rows past the span dimension vanish
    if res.m < n:
        assert np.max(np.linalg.norm(res.z[res.m:], axis=1)) <= tol * scale
    # surviving rows are pairwise orthogonal with the reported lengths
    if res.m:
        top = res.z[:res.m]
        gram = top @ top.T
        off = gram - np.diag(np.diag(gram))
        assert np.max(np.abs(off)) <= tol * scale**2
        assert np.all(res.c > 0)
        assert np.all(np.diff(res.c) <= 1e-12 * res.c[:-1] + 1e-15)  # descending
        assert np.allclose(np.diag(gram), res.c, rtol=1e-9, atol=1e-9 * scale**2)
    else:
        assert res.c.size == 0
    # permutation really permutes 0..n-1
    assert sorted(res.permutation.tolist()) == list(range(n))


@settings(max_examples=80, deadline=None)
@given(hnp.arrays(np.float64, st.tuples(st.integers(1, 7), st.integers(1, 7)),
                  elements=st.floats(-5, 5, allow_nan=False, width=64)))
def test_postconditions_on_arbitrary_families(V):
    res = simultaneous_orthogonalize(V)
    check_postconditions(V, res)


def test_gram_eigenvalues_match_singular_values():
    rng = np.random.default_rng(3)
    for _ in range(40):
        n, d = int(rng.integers(1, 8)), int(rng.integers(1, 8))
        V = rng.standard_normal((n, d))
        res = simultaneous_orthogonalize(V)
        sv = np.linalg.svd(V, compute_uv=False)
        expect = (sv[sv > 1e-10] ** 2)
        assert res.m == expect.size
        assert np.allclose(res.c, expect, rtol=1e-8, atol=1e-10)


def test_rank_deficient_families():
    rng = np.random.default_rng(5)
    for _ in range(30):
        d = int(rng.integers(2, 7))
        m_true = int(rng.integers(1, d))
        extra = int(rng.integers(1, 4))
        base = rng.standard_normal((m_true, d))
        dep = rng.uniform(-2, 2, size=(extra, m_true)) @ base
        V = np.vstack([base, dep])
        order = rng.permutation(V.shape[0])
        V = V[order]
        res = simultaneous_orthogonalize(V)
        assert res.m == m_true
        check_postconditions(V, res)
        # the chosen prefix really is independent
        prefix = V[res.permutation[:res.m]]
        assert span_rank(prefix) == res.m


def test_edge_cases():
    # all-zero family: nothing to do
    V = np.zeros((3, 4))
    res = simultaneous_orthogonalize(V)
    assert res.m == 0
    assert np.array_equal(res.A, np.eye(3))
    assert res.c.size == 0

    # single vector
    res1 = simultaneous_orthogonalize(np.array([[3.0, 4.0]]))
    assert res1.m == 1
    assert res1.c[0] == pytest.approx(25.0, rel=1e-12)

    # duplicated vector collapses to rank one
    v = np.array([1.0, -2.0, 0.5])
    res2 = simultaneous_orthogonalize(np.vstack([v, v]))
    assert res2.m == 1
    assert np.linalg.norm(res2.z[1]) <= 1e-12

    # one ambient dimension
    res3 = simultaneous_orthogonalize(np.array([[2.0], [-1.0], [0.5]]))
    assert res3.m == 1
    check_postconditions(np.array([[2.0], [-1.0], [0.5]]), res3)

    with pytest.raises(ValueError):
        simultaneous_orthogonalize(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        simultaneous_orthogonalize(np.zeros(3))


def test_determinism():
    rng = np.random.default_rng(7)
    V = rng.standard_normal((5, 4))
    V[4] = V[0] - 2 * V[2]
    r1 = simultaneous_orthogonalize(V)
    r2 = simultaneous_orthogonalize(V.copy())
    assert np.array_equal(r1.A, r2.A)
    assert np.array_equal(r1.z, r2.z)
    assert np.array_equal(r1.permutation, r2.permutation)


def test_align_operator_family_preserves_structure():
    rng = np.random.default_rng(11)
    d = 4
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    ops = [Q @ np.diag(rng.standard_normal(d)) @ Q.T for _ in range(3)]
    v = rng.standard_normal(d)
    fam = align_operator_family(ops, v)
    m = fam.ortho.m
    for Y in fam.operators:
        assert np.allclose(Y, Y.T, atol=1e-12)
    for i in range(3):
        for j in range(i + 1, 3):
            comm = fam.operators[i] @ fam.operators[j] \
                - fam.operators[j] @ fam.operators[i]
            assert np.max(np.abs(comm)) <= 1e-10
    # images are the orthogonalized stack
    assert np.allclose(fam.vectors, fam.ortho.z, atol=1e-12)
    gram = fam.vectors[:m] @ fam.vectors[:m].T
    assert np.max(np.abs(gram - np.diag(np.diag(gram)))) <= 1e-9
    if m < 3:
        assert np.max(np.abs(fam.vectors[m:])) <= 1e-9


def test_align_operator_family_validation():
    with pytest.raises(ValueError):
        align_operator_family([np.zeros((2, 3))], np.zeros(2))
    with pytest.raises(ValueError):
        align_operator_family([np.eye(2)], np.zeros(3))


def test_span_rank():
    rng = np.random.default_rng(13)
    V = rng.standard_normal((3, 5))
    assert span_rank(V) == 3
    assert span_rank(np.vstack([V, V[0] + V[1]])) == 3
    assert span_rank(np.zeros((4, 3))) == 0
    assert span_rank(np.array([[1.0, 0.0], [1.0, 1e-14]])) == 1
    assert span_rank(np.array([[1.0, 0.0], [1.0, 1e-14]]), tol=1e-16) == 2
    with pytest.raises(ValueError):
        span_rank(np.zeros(3))
