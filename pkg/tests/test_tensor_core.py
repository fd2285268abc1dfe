import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import charpoly_eigenvalues, ptrace_loop
from qcatn.tensor_core import (
    DenseCapError,
    DenseOperator,
    LowRankOperator,
    anc,
    apply_local,
    eigh,
    identity,
    local_op,
    partial_trace,
    phys,
    relative_residual,
    tensor_all,
    tensor_product,
    weyl_basis,
    weyl_basis_on,
)


def rand_op(rng, dims):
    D = int(np.prod(dims))
    return rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))


@given(
    dims=st.lists(st.integers(2, 3), min_size=1, max_size=3),
    seed=st.integers(0, 2**32 - 1),
    data=st.data(),
)
def test_partial_trace_matches_index_loops(dims, seed, data):
    rng = np.random.default_rng(seed)
    labels = [phys(k) for k in range(len(dims))]
    X = rand_op(rng, dims)
    keep = sorted(data.draw(st.sets(st.integers(0, len(dims) - 1))))
    gone = [labels[i] for i in range(len(dims)) if i not in keep]
    got = partial_trace(DenseOperator(labels, X, dims), gone).data
    np.testing.assert_allclose(got, ptrace_loop(X, dims, keep), atol=1e-10)


def test_partial_trace_composes():
    rng = np.random.default_rng(3)
    labels = [phys(0), phys(1), anc(0), anc(1)]
    op = DenseOperator(labels, rand_op(rng, [2] * 4), [2] * 4)
    a = partial_trace(partial_trace(op, [phys(1)]), [anc(0)])
    b = partial_trace(op, [anc(0), phys(1)])
    assert relative_residual(a.data, b.data) < 1e-13


def test_canonical_order_is_enforced():
    rng = np.random.default_rng(0)
    A, B = rand_op(rng, [2]), rand_op(rng, [3])
    forward = DenseOperator([phys(0), anc(0)], np.kron(A, B), [2, 3])
    backward = DenseOperator([anc(0), phys(0)], np.kron(B, A), [3, 2])
    np.testing.assert_allclose(forward.data, backward.data)
    assert backward.support == (phys(0), anc(0))
    # physical block sorts ahead of every ancilla
    op = DenseOperator([anc(0), phys(1)], np.eye(4))
    assert op.support == (phys(1), anc(0))


def test_tensor_product_and_overlap():
    rng = np.random.default_rng(1)
    P = DenseOperator([phys(0)], rand_op(rng, [2]))
    Q = DenseOperator([phys(1)], rand_op(rng, [2]))
    PQ = tensor_product(P, Q)
    assert abs(PQ.trace() - P.trace() * Q.trace()) < 1e-12
    np.testing.assert_allclose(partial_trace(PQ, [phys(1)]).data, P.data * Q.trace())
    with pytest.raises(ValueError):
        tensor_product(P, P)
    assert tensor_all([P, Q]).support == (phys(0), phys(1))


def test_embed_and_algebra():
    X = local_op(1, [[0, 1], [1, 0]])
    full = X.embed([phys(0), phys(1), phys(2)], 2)
    np.testing.assert_allclose(full.data, np.kron(np.kron(np.eye(2), [[0, 1], [1, 0]]), np.eye(2)))
    assert (full @ full - identity(full.support, 2)).norm() < 1e-14
    assert full.is_unitary() and full.is_hermitian()


@pytest.mark.parametrize("n", [3, 11])
def test_psd_checks_both_paths(n):
    # n = 11 exceeds the eigenvalue cutoff and goes through Cholesky
    rng = np.random.default_rng(2)
    g = rng.standard_normal((2**n, 6)) + 1j * rng.standard_normal((2**n, 6))
    rho = DenseOperator([phys(k) for k in range(n)], g @ g.conj().T)
    assert rho.is_psd()
    bad = rho.data.copy()
    bad[0, 0] -= 1e3
    assert not DenseOperator(rho.support, bad).is_psd()


def test_eigh_reconstructs_and_rejects_non_hermitian():
    rng = np.random.default_rng(5)
    g = rand_op(rng, [2, 2])
    H = DenseOperator([phys(0), phys(1)], g + g.conj().T)
    w, v = eigh(H)
    assert np.all(np.diff(w) <= 0)
    assert relative_residual(H.data, (v * w) @ v.conj().T) < 1e-12
    with pytest.raises(ValueError):
        eigh(DenseOperator([phys(0)], [[0, 1], [0, 0]]))


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 4))
def test_eigh_against_characteristic_polynomial(seed, n):
    rng = np.random.default_rng(seed)
    g = rng.integers(-4, 5, (n, n)) + 1j * rng.integers(-4, 5, (n, n))
    H = g + g.conj().T
    D = 2 ** int(np.ceil(np.log2(n)))
    pad = np.zeros((D, D), dtype=complex)
    pad[:n, :n] = H
    w = eigh(DenseOperator([phys(k) for k in range(int(np.log2(D)))], pad)).values
    ref = sorted(charpoly_eigenvalues(pad), reverse=True)
    np.testing.assert_allclose(w, ref, atol=1e-8)


def test_low_rank_matches_dense():
    rng = np.random.default_rng(7)
    labels = [phys(0), phys(1), anc(0), anc(1)]
    F = rng.standard_normal((16, 3)) + 1j * rng.standard_normal((16, 3))
    lr = LowRankOperator(labels, F, [2] * 4)
    dense = lr.to_dense()
    assert abs(lr.trace() - dense.trace()) < 1e-12
    for keep in ([phys(0)], [phys(1), anc(1)], [anc(0), phys(0), phys(1)]):
        np.testing.assert_allclose(lr.reduce_to(keep).to_dense().data, dense.reduce_to(keep).data, atol=1e-12)
    np.testing.assert_allclose(
        np.sort(lr.eigvals())[::-1][:3], np.linalg.eigvalsh(dense.data)[::-1][:3], atol=1e-12
    )


def test_apply_local_matches_dense_embedding():
    rng = np.random.default_rng(8)
    support = [phys(0), phys(1), anc(0), anc(1)]
    vec = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    op = DenseOperator([anc(1), phys(0)], rand_op(rng, [2, 2]))
    got = apply_local(vec, support, [2] * 4, op)
    want = op.embed(support, 2).data @ vec
    np.testing.assert_allclose(got, want, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_weyl_basis_orthogonal(d):
    basis = weyl_basis(d)
    G = np.array([[np.trace(a.conj().T @ b) for b in basis] for a in basis])
    np.testing.assert_allclose(G, d * np.eye(d * d), atol=1e-12)
    ops = list(weyl_basis_on([phys(0), phys(1)], d))
    assert len(ops) == d**4


def test_dense_cap(monkeypatch):
    monkeypatch.setenv("QCATN_DENSE_CAP", "8")
    with pytest.raises(DenseCapError, match="cap 8"):
        identity([phys(k) for k in range(4)], 2)


def test_json_roundtrip():
    rng = np.random.default_rng(9)
    op = DenseOperator([phys(0), anc(0)], rand_op(rng, [2, 2]))
    back = DenseOperator.from_json(op.to_json())
    assert back.support == op.support
    np.testing.assert_allclose(back.data, op.data)


def test_relative_residual_zero_pair():
    z = np.zeros((2, 2))
    assert relative_residual(z, z) == 0.0
    assert relative_residual(z, np.eye(2)) == float("inf")
