import numpy as np
import pytest

from phonon_qst.hilbert import (
    Operator,
    QuantumState,
    SpaceSignature,
    annihilation,
    basis_state,
    embed,
    identity,
    partial_trace,
    sigma_minus,
    sigma_z,
)


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_annihilation_qubit_sized():
    assert np.array_equal(annihilation(2).matrix, np.array([[0, 1], [0, 0]], dtype=complex))


def test_annihilation_sqrt_rule():
    mat = annihilation(3).matrix
    expected = np.zeros((3, 3), dtype=complex)
    expected[0, 1] = 1.0
    expected[1, 2] = np.sqrt(2.0)
    assert np.array_equal(mat, expected)
    assert abs(mat[1, 2] - 1.41421356) < 1e-8


def test_annihilation_truncated_commutator():
    a = annihilation(4)
    comm = a @ a.dag() - a.dag() @ a
    assert np.allclose(comm.matrix, np.diag([1.0, 1.0, 1.0, -3.0]), atol=1e-14)


@pytest.mark.parametrize("dim", [0, 1])
def test_annihilation_rejects_small_dim(dim):
    with pytest.raises(ValueError):
        annihilation(dim)


@pytest.mark.parametrize("dim", [2, 3, 5, 8])
def test_number_operator_diagonal(dim):
    a = annihilation(dim)
    num = (a.dag() @ a).matrix
    assert np.allclose(num, np.diag(np.arange(dim, dtype=float)), atol=1e-14)


def test_signature_validation():
    with pytest.raises(ValueError):
        SpaceSignature(())
    with pytest.raises(ValueError):
        SpaceSignature((2, 1, 2))
    sig = SpaceSignature.cavity_phonon_qubit(2, 6)
    assert sig.dims == (2, 6, 2)
    assert sig.total_dim == 24


def test_flat_index_row_major():
    sig = SpaceSignature((2, 3, 2))
    assert sig.flat_index((0, 0, 0)) == 0
    assert sig.flat_index((0, 0, 1)) == 1
    assert sig.flat_index((0, 1, 0)) == 2
    assert sig.flat_index((1, 0, 0)) == 6
    with pytest.raises(ValueError):
        sig.flat_index((0, 3, 0))
    with pytest.raises(ValueError):
        sig.flat_index((0, 0))


def test_embed_identity_any_slot():
    sig = SpaceSignature((2, 3, 2))
    for slot, dim in enumerate(sig.dims):
        lifted = embed(identity(dim), slot, sig)
        assert np.array_equal(lifted.matrix, np.eye(12, dtype=complex))


def test_embed_sigma_minus_last_slot():
    sig = SpaceSignature((2, 2, 2))
    lifted = embed(sigma_minus(), 2, sig)
    expected = np.kron(np.eye(4, dtype=complex), sigma_minus().matrix)
    assert np.array_equal(lifted.matrix, expected)


def test_embed_commutator_consistency():
    sig = SpaceSignature((2, 3, 2))
    a = annihilation(3)
    lifted = embed(a, 1, sig)
    comm_embedded = lifted @ lifted.dag() - lifted.dag() @ lifted
    comm_local = a @ a.dag() - a.dag() @ a
    assert np.allclose(comm_embedded.matrix, embed(comm_local, 1, sig).matrix, atol=1e-14)


def test_embed_preserves_hermiticity():
    rng = np.random.default_rng(3)
    sig = SpaceSignature((2, 3, 2))
    for slot, dim in enumerate(sig.dims):
        raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        herm = Operator(SpaceSignature((dim,)), raw + raw.conj().T)
        lifted = embed(herm, slot, sig)
        assert np.abs(lifted.matrix - lifted.matrix.conj().T).max() <= 1e-14


def test_embed_disjoint_slots_commute_exactly():
    rng = np.random.default_rng(4)
    sig = SpaceSignature((2, 3, 2))
    op0 = Operator(SpaceSignature((2,)), rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    op2 = Operator(SpaceSignature((2,)), rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    left = embed(op0, 0, sig) @ embed(op2, 2, sig)
    right = embed(op2, 2, sig) @ embed(op0, 0, sig)
    assert np.array_equal(left.matrix, right.matrix)


def test_embed_dimension_mismatch():
    sig = SpaceSignature((2, 3, 2))
    with pytest.raises(ValueError):
        embed(annihilation(2), 1, sig)
    with pytest.raises(ValueError):
        embed(annihilation(3), 3, sig)


def test_partial_trace_product_state():
    rng = np.random.default_rng(5)
    sig = SpaceSignature((2, 3, 2))
    rho_c = random_density(rng, 2)
    rho_m = random_density(rng, 3)
    rho_q = random_density(rng, 2)
    state = QuantumState.mixed(sig, np.kron(np.kron(rho_c, rho_m), rho_q))
    reduced = partial_trace(state, keep=(0, 2))
    assert reduced.signature.dims == (2, 2)
    assert np.allclose(reduced.density, np.kron(rho_c, rho_q), atol=1e-12)


def test_partial_trace_maximally_mixed():
    sig = SpaceSignature((2, 3, 2))
    state = QuantumState.mixed(sig, np.eye(12, dtype=complex) / 12.0)
    reduced = partial_trace(state, keep=(0, 2))
    assert np.allclose(reduced.density, np.eye(4, dtype=complex) / 4.0, atol=1e-14)


def test_partial_trace_bell_like():
    # (|0>_c |1>_m + |1>_c |0>_m)/sqrt(2), qubit in |g>: tracing the phonon
    # leaves the cavity maximally mixed and the qubit pure.
    sig = SpaceSignature((2, 2, 2))
    vec = np.zeros(8, dtype=complex)
    vec[sig.flat_index((0, 1, 0))] = 1.0 / np.sqrt(2.0)
    vec[sig.flat_index((1, 0, 0))] = 1.0 / np.sqrt(2.0)
    state = QuantumState.pure(sig, vec).to_density()
    reduced = partial_trace(state, keep=(0, 2))
    gg = np.zeros((2, 2), dtype=complex)
    gg[0, 0] = 1.0
    expected = np.kron(np.diag([0.5, 0.5]).astype(complex), gg)
    assert np.allclose(reduced.density, expected, atol=1e-14)


def test_partial_trace_preserves_trace_hermiticity_positivity():
    rng = np.random.default_rng(6)
    sig = SpaceSignature((2, 3, 2))
    for _ in range(20):
        state = QuantumState.mixed(sig, random_density(rng, 12))
        for keep in [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)]:
            reduced = partial_trace(state, keep=keep)
            assert abs(np.trace(reduced.density) - 1.0) <= 1e-12
            assert np.abs(reduced.density - reduced.density.conj().T).max() <= 1e-12
            assert np.linalg.eigvalsh(reduced.density)[0] >= -1e-10


def test_partial_trace_rejects_pure_and_bad_slots():
    sig = SpaceSignature((2, 2, 2))
    pure = basis_state(sig, (0, 0, 0))
    with pytest.raises(ValueError):
        partial_trace(pure, keep=(0,))
    mixed = pure.to_density()
    with pytest.raises(ValueError):
        partial_trace(mixed, keep=())
    with pytest.raises(ValueError):
        partial_trace(mixed, keep=(3,))


def test_quantum_state_invariants():
    sig = SpaceSignature((2,))
    with pytest.raises(ValueError):
        QuantumState.pure(sig, [1.0, 0.5])
    with pytest.raises(ValueError):
        QuantumState.mixed(sig, np.diag([0.7, 0.7]))
    with pytest.raises(ValueError):
        QuantumState.mixed(sig, np.array([[0.5, 0.5], [0.0, 0.5]]))
    with pytest.raises(ValueError):
        QuantumState(sig, vector=np.array([1.0, 0.0]), density=np.eye(2) / 2)


def test_basis_state_and_conversion():
    sig = SpaceSignature((2, 3, 2))
    state = basis_state(sig, (1, 0, 1))
    idx = sig.flat_index((1, 0, 1))
    assert state.vector[idx] == 1.0
    rho = state.to_density()
    assert rho.density[idx, idx] == 1.0
    assert abs(np.trace(rho.density) - 1.0) < 1e-15


def test_operator_algebra_and_immutability():
    sig = SpaceSignature((2,))
    sz = sigma_z()
    assert sz.is_hermitian()
    with pytest.raises(ValueError):
        Operator(sig, np.zeros((3, 3)))
    other = Operator(SpaceSignature((3,)), np.eye(3))
    with pytest.raises(ValueError):
        sz @ other
    with pytest.raises(ValueError):
        sz.matrix[0, 0] = 5.0
    scaled = 2.0 * sz - sz
    assert np.array_equal(scaled.matrix, sz.matrix)
