import itertools

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from paulitomo import qstate as q

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)


def brute_partial_trace(rho, keep, n):
    """Explicit summation over the traced indices."""
    traced = [i for i in range(n) if i not in keep]
    dk = 2 ** len(keep)
    out = np.zeros((dk, dk), dtype=complex)
    for a in range(dk):
        for b in range(dk):
            abits = format(a, f"0{len(keep)}b")
            bbits = format(b, f"0{len(keep)}b")
            for t in range(2 ** len(traced)):
                tbits = format(t, f"0{len(traced)}b")
                row, col = ["0"] * n, ["0"] * n
                for pos, bit in zip(keep, abits):
                    row[pos] = bit
                for pos, bit in zip(keep, bbits):
                    col[pos] = bit
                for pos, bit in zip(traced, tbits):
                    row[pos] = col[pos] = bit
                out[a, b] += rho[int("".join(row), 2), int("".join(col), 2)]
    return out


def test_pauli_matrix_examples():
    np.testing.assert_array_equal(q.pauli_matrix("Z"), np.diag([1, -1]))
    np.testing.assert_array_equal(q.pauli_matrix("II"), np.eye(4))
    xz = np.array([[0, 0, 1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, -1, 0, 0]])
    np.testing.assert_array_equal(q.pauli_matrix("XZ"), xz)


@pytest.mark.parametrize("p", q.all_paulis(2) + ["XYZ", "YYI"])
def test_pauli_matrix_hermitian_unitary(p):
    m = q.pauli_matrix(p)
    np.testing.assert_allclose(m, m.conj().T)
    np.testing.assert_allclose(m @ m, np.eye(len(m)), atol=1e-15)


def test_pauli_weight_and_index_roundtrip():
    assert q.pauli_weight("IXIZ") == 2
    for i, p in enumerate(q.all_paulis(3)):
        assert q.pauli_index(p) == i
        assert q.pauli_from_index(i, 3) == p
        assert q.pauli_weights(3)[i] == q.pauli_weight(p)
    with pytest.raises(ValueError):
        q.pauli_weight("XA")


def test_expectation_examples():
    assert q.expectation(q.maximally_mixed(1), "X") == pytest.approx(0, abs=1e-15)
    assert q.expectation(q.basis_state("0"), "Z") == pytest.approx(1)
    rho = (I2 + 0.3 * X + 0.4 * Z) / 2
    assert q.expectation(rho, "X") == pytest.approx(0.3, abs=1e-12)
    assert q.expectation(rho, "Z") == pytest.approx(0.4, abs=1e-12)
    with pytest.raises(ValueError):
        q.expectation(rho, "XX")


def test_pauli_decompose_examples():
    d = q.pauli_decompose_dict(q.maximally_mixed(1))
    assert d == pytest.approx({"I": 1, "X": 0, "Y": 0, "Z": 0})
    d = q.pauli_decompose_dict(q.basis_state("0"))
    assert d == pytest.approx({"I": 1, "X": 0, "Y": 0, "Z": 1})


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pauli_decompose_matches_direct_traces(n):
    rho = q.random_mixed(n, 2**n, seed=n)
    alpha = q.pauli_decompose(rho)
    direct = [np.trace(rho @ q.pauli_matrix(p)).real for p in q.all_paulis(n)]
    np.testing.assert_allclose(alpha, direct, atol=1e-12)
    assert alpha[0] == pytest.approx(1)


@pytest.mark.parametrize("seed", range(5))
def test_pauli_reassembly_roundtrip(seed):
    rho = q.random_mixed(2, 3, seed)
    alpha = q.pauli_decompose(rho)
    rebuilt = sum(a * q.pauli_matrix(p) for a, p in zip(alpha, q.all_paulis(2))) / 4
    np.testing.assert_allclose(rebuilt, rho, atol=1e-10)
    np.testing.assert_allclose(q.from_pauli_coefficients(alpha, 2) / 4, rho, atol=1e-10)


def test_partial_trace_examples():
    a = q.random_mixed(1, 2, 1)
    b = q.random_mixed(2, 4, 2)
    np.testing.assert_allclose(q.partial_trace(np.kron(a, b), [0]), a, atol=1e-14)
    np.testing.assert_allclose(q.partial_trace(np.kron(a, b), [1, 2]), b, atol=1e-14)
    bell = np.zeros((4, 4))
    bell[np.ix_([0, 3], [0, 3])] = 0.5
    np.testing.assert_allclose(q.partial_trace(bell, [0]), np.eye(2) / 2)


@pytest.mark.parametrize("keep", [(0, 2), (1,), (0, 1, 2), (), (1, 2)])
def test_partial_trace_matches_brute_force(keep):
    rho = q.random_mixed(3, 8, 11)
    np.testing.assert_allclose(q.partial_trace(rho, keep), brute_partial_trace(rho, keep, 3), atol=1e-12)


def test_partial_trace_rejects_bad_subsets():
    rho = q.maximally_mixed(3)
    for bad in [(3,), (1, 0), (1, 1), (-1,)]:
        with pytest.raises(ValueError):
            q.partial_trace(rho, bad)


def test_one_norm_examples():
    rho = q.random_mixed(2, 4, 3)
    assert q.one_norm_distance(rho, rho) == pytest.approx(0, abs=1e-14)
    assert q.one_norm_distance(q.basis_state("0"), q.basis_state("1")) == pytest.approx(2)
    with pytest.raises(ValueError):
        q.one_norm_distance(rho, q.maximally_mixed(1))
    with pytest.raises(ValueError):
        q.one_norm_distance(np.array([[0, 1], [0, 0]]), q.maximally_mixed(1))


@pytest.mark.parametrize("seed", range(6))
def test_one_norm_matches_general_eigensolver(seed):
    n = 1 + seed % 3
    a = q.random_mixed(n, 2**n, seed)
    b = q.random_pure(n, seed + 100)
    # general (non-Hermitian) LAPACK path as an independent route
    ref = np.sum(np.abs(scipy.linalg.eigvals(a - b)))
    assert q.one_norm_distance(a, b) == pytest.approx(ref, rel=1e-9)


def test_frobenius_examples():
    assert q.frobenius_norm(np.zeros((2, 2))) == 0
    assert q.frobenius_norm(np.eye(4)) == pytest.approx(2)
    assert q.frobenius_norm((I2 + Z) / 2) == pytest.approx(1)


def test_make_state_examples():
    np.testing.assert_allclose(q.make_state("maximally_mixed", 2), np.eye(4) / 4)
    expected = np.zeros((4, 4))
    expected[1, 1] = 1
    np.testing.assert_array_equal(q.make_state("basis:01"), expected)
    rho = q.make_state(q.StateSpec("random_mixed", 2, rank=4, seed=7))
    q.check_density_matrix(rho)
    np.testing.assert_array_equal(rho, q.make_state("random_mixed:4:7", 2))
    assert np.linalg.matrix_rank(q.random_mixed(3, 2, 5), tol=1e-10) == 2
    g = q.make_state("ghz", 3)
    assert g[0, 7] == pytest.approx(0.5)
    assert not g.flags.writeable


@pytest.mark.parametrize("text", ["ghz", "basis:01a", "random_pure", "nope:1", "random_mixed:1:2:3"])
def test_make_state_rejects_invalid(text):
    with pytest.raises(ValueError):
        q.make_state(text, None if text == "ghz" else 2)


def test_state_spec_string_roundtrip():
    for text in ["maximally_mixed", "basis:0110", "ghz", "random_pure:3", "random_mixed:2:9"]:
        spec = q.StateSpec.parse(text, 4)
        assert q.StateSpec.parse(str(spec), 4) == spec


def test_check_density_matrix_rejects():
    with pytest.raises(ValueError):
        q.check_density_matrix(np.diag([1.2, -0.2]))
    with pytest.raises(ValueError):
        q.check_density_matrix(np.eye(2))
    with pytest.raises(ValueError):
        q.check_density_matrix(np.eye(3) / 3)
    assert q.is_density_matrix(q.ghz(2))


# --------------------------------------------------------------------------
# properties over a randomized corpus

states = st.builds(
    lambda n, rank, seed, pure: q.random_pure(n, seed) if pure else q.random_mixed(n, min(rank, 2**n), seed),
    st.integers(1, 3),
    st.integers(1, 8),
    st.integers(0, 2**32 - 1),
    st.booleans(),
)


@settings(max_examples=40, deadline=None)
@given(states, st.data())
def test_expectations_bounded(rho, data):
    n = q.num_qubits(rho)
    p = data.draw(st.sampled_from(q.all_paulis(n)))
    assert -1 - 1e-12 <= q.expectation(rho, p) <= 1 + 1e-12


@settings(max_examples=40, deadline=None)
@given(states, st.data())
def test_partial_trace_keeps_invariants(rho, data):
    n = q.num_qubits(rho)
    keep = data.draw(st.sets(st.integers(0, n - 1), min_size=1).map(sorted))
    red = q.partial_trace(rho, keep)
    q.check_density_matrix(red)
    assert np.trace(red).real == pytest.approx(1, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_one_norm_metric_properties(n, seed):
    a, b, c = (q.random_mixed(n, 2**n, seed + i) for i in range(3))
    dab = q.one_norm_distance(a, b)
    assert dab == pytest.approx(q.one_norm_distance(b, a), abs=1e-12)
    assert 0 <= dab <= 2 + 1e-12
    assert dab <= q.one_norm_distance(a, c) + q.one_norm_distance(c, b) + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1), st.data())
def test_one_norm_monotone_under_partial_trace(n, seed, data):
    rho = q.random_mixed(n, 2**n, seed)
    sigma = q.random_pure(n, seed + 1)
    keep = data.draw(st.sets(st.integers(0, n - 1), min_size=1).map(sorted))
    reduced = q.one_norm_distance(q.partial_trace(rho, keep), q.partial_trace(sigma, keep))
    assert reduced <= q.one_norm_distance(rho, sigma) + 1e-12


def test_pauli_basis_is_orthogonal():
    paulis = [q.pauli_matrix(p) for p in q.all_paulis(2)]
    for (i, a), (j, b) in itertools.product(enumerate(paulis), repeat=2):
        assert np.trace(a @ b) == pytest.approx(4 if i == j else 0)
