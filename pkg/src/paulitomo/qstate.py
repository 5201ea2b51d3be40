"""Dense linear algebra for small qubit systems.

States are plain ``numpy`` complex arrays of shape ``(2**n, 2**n)``. Qubit 0 is
the leftmost tensor factor (most significant index bit). Pauli strings are
ordinary ``str`` objects over ``"IXYZ"``; their integer index is the base-4
number formed by the letter codes ``I=0, X=1, Y=2, Z=3``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 12

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = -1e-9

PAULI_LETTERS = "IXYZ"

# standard convention: Y = [[0, -i], [i, 0]]
PAULIS = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
PAULIS.setflags(write=False)


def num_qubits(a: np.ndarray) -> int:
    """Return n for a square ``2**n`` matrix, raising ``ValueError`` otherwise."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    dim = a.shape[0]
    n = dim.bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits exceeds the supported maximum of {MAX_QUBITS}")
    return n


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return bool(np.all(np.isfinite(a))) and bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def check_density_matrix(rho: np.ndarray) -> np.ndarray:
    """Validate the density-matrix invariants and return ``rho`` as a complex array.

    Raises:
        ValueError: if ``rho`` is not square of power-of-two size, not Hermitian,
            not unit trace, or has an eigenvalue below ``PSD_TOL``.
    """
    rho = np.asarray(rho, dtype=complex)
    num_qubits(rho)
    if not is_hermitian(rho):
        raise ValueError("matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > TRACE_TOL:
        raise ValueError(f"trace {np.trace(rho).real:.3g} is not 1")
    lam = np.linalg.eigvalsh(rho)
    if lam[0] < PSD_TOL:
        raise ValueError(f"minimum eigenvalue {lam[0]:.3g} is negative")
    return rho


def is_density_matrix(rho: np.ndarray) -> bool:
    try:
        check_density_matrix(rho)
    except ValueError:
        return False
    return True


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


# --------------------------------------------------------------------------
# Pauli strings

def check_pauli(p: str, n: int | None = None) -> str:
    if not isinstance(p, str) or any(c not in PAULI_LETTERS for c in p) or not p:
        raise ValueError(f"invalid Pauli string {p!r}")
    if n is not None and len(p) != n:
        raise ValueError(f"Pauli string {p!r} has length {len(p)}, expected {n}")
    return p


def pauli_weight(p: str) -> int:
    """Number of non-identity letters."""
    return sum(c != "I" for c in check_pauli(p))


def pauli_index(p: str) -> int:
    idx = 0
    for c in check_pauli(p):
        idx = 4 * idx + PAULI_LETTERS.index(c)
    return idx


def pauli_from_index(idx: int, n: int) -> str:
    letters = []
    for _ in range(n):
        idx, r = divmod(idx, 4)
        letters.append(PAULI_LETTERS[r])
    return "".join(reversed(letters))


def all_paulis(n: int) -> list[str]:
    """All 4**n Pauli strings in index order."""
    return ["".join(t) for t in itertools.product(PAULI_LETTERS, repeat=n)]


@lru_cache(maxsize=None)
def pauli_weights(n: int) -> np.ndarray:
    """Weights of all Pauli strings of length n, indexed by Pauli index."""
    w = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        w = (w[:, None] + np.array([0, 1, 1, 1])[None, :]).ravel()
    w.setflags(write=False)
    return w


def pauli_matrix(p: str) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of the tensor product of single-qubit Paulis."""
    check_pauli(p)
    return reduce(np.kron, (PAULIS[PAULI_LETTERS.index(c)] for c in p))


def expectation(rho: np.ndarray, p: str) -> float:
    """Return ``tr(rho P)``; the imaginary part must vanish within tolerance."""
    rho = np.asarray(rho, dtype=complex)
    check_pauli(p, num_qubits(rho))
    val = np.trace(rho @ pauli_matrix(p))
    if abs(val.imag) > HERMITIAN_TOL * max(1.0, rho.shape[0]):
        raise ValueError("expectation has a non-negligible imaginary part; is rho Hermitian?")
    return float(val.real)


def pauli_decompose(rho: np.ndarray) -> np.ndarray:
    """Coefficients ``alpha_P = tr(rho P)`` for all Pauli strings, in index order.

    Contracts one qubit at a time, so the cost is ``O(n * 4**n * ...)`` rather
    than building ``4**n`` dense matrices. Use ``all_paulis(n)`` for labels.
    """
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho)
    # interleave (a1, b1, a2, b2, ...) so each qubit's row/col axes are adjacent
    t = rho.reshape((2,) * (2 * n))
    t = t.transpose([ax for i in range(n) for ax in (i, n + i)])
    # tr(rho P) = sum_ab rho[a, b] P[b, a]
    pt = PAULIS.transpose(0, 2, 1)
    for _ in range(n):
        t = np.tensordot(t, pt, axes=([0, 1], [1, 2]))
    return np.ascontiguousarray(t.reshape(4**n).real)


def pauli_decompose_dict(rho: np.ndarray) -> dict[str, float]:
    n = num_qubits(rho)
    return dict(zip(all_paulis(n), pauli_decompose(rho).tolist()))


def from_pauli_coefficients(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Return ``sum_P coeffs[P] * P``, the inverse of ``pauli_decompose`` up to ``2**n``."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape != (4**n,):
        raise ValueError(f"expected {4**n} coefficients, got shape {coeffs.shape}")
    if n == 0:
        return coeffs.reshape(1, 1).astype(complex)
    t = coeffs.astype(complex).reshape((4,) * n)
    for _ in range(n):
        t = np.tensordot(t, PAULIS, axes=([0], [0]))
    # axes are now (a1, b1, a2, b2, ...)
    t = t.transpose([2 * i for i in range(n)] + [2 * i + 1 for i in range(n)])
    return t.reshape(2**n, 2**n)


# --------------------------------------------------------------------------
# Subsets, partial trace, norms

def check_subset(keep: Iterable[int], n: int) -> tuple[int, ...]:
    keep = tuple(int(i) for i in keep)
    if any(b <= a for a, b in zip(keep, keep[1:])):
        raise ValueError(f"subset {keep} must be strictly increasing")
    if keep and (keep[0] < 0 or keep[-1] >= n):
        raise ValueError(f"subset {keep} has indices outside [0, {n})")
    return keep


def partial_trace(rho: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Reduced matrix on the qubits in ``keep`` (any square ``2**n`` operator)."""
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho)
    keep = check_subset(keep, n)
    traced = [i for i in range(n) if i not in keep]
    dk, dt = 2 ** len(keep), 2 ** len(traced)
    t = rho.reshape((2,) * (2 * n))
    order = list(keep) + traced + [n + i for i in keep] + [n + i for i in traced]
    t = t.transpose(order).reshape(dk, dt, dk, dt)
    return np.trace(t, axis1=1, axis2=3)


def one_norm_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Sum of absolute eigenvalues of ``a - b`` (trace norm without the 1/2)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    num_qubits(a)
    if not (is_hermitian(a) and is_hermitian(b)):
        raise ValueError("one_norm_distance requires Hermitian inputs")
    d = a - b
    d = (d + d.conj().T) / 2
    return float(np.sum(np.abs(np.linalg.eigvalsh(d))))


def frobenius_norm(a: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(np.asarray(a)) ** 2)))


# --------------------------------------------------------------------------
# Test states

def maximally_mixed(n: int) -> np.ndarray:
    return _frozen(np.eye(2**n) / 2**n)


def basis_state(bits: str) -> np.ndarray:
    if not bits or any(c not in "01" for c in bits):
        raise ValueError(f"invalid bit string {bits!r}")
    rho = np.zeros((2 ** len(bits),) * 2, dtype=complex)
    i = int(bits, 2)
    rho[i, i] = 1
    return _frozen(rho)


def ghz(n: int) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return _frozen(np.outer(psi, psi.conj()))


def random_pure(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    psi /= np.linalg.norm(psi)
    return _frozen(np.outer(psi, psi.conj()))


def random_mixed(n: int, rank: int, seed: int) -> np.ndarray:
    """``G G^dagger / tr(G G^dagger)`` for a complex Gaussian ``2**n x rank`` factor G."""
    if rank < 1:
        raise ValueError("rank must be >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((2**n, rank)) + 1j * rng.standard_normal((2**n, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return _frozen(rho / np.trace(rho).real)


STATE_KINDS = ("maximally_mixed", "basis", "ghz", "random_pure", "random_mixed")


@dataclass(frozen=True)
class StateSpec:
    """Recipe for a test state.

    ``kind`` is one of ``STATE_KINDS``. ``bits`` is used by ``basis``; ``seed``
    by the random kinds; ``rank`` by ``random_mixed`` (defaults to full rank).
    """

    kind: str
    n: int
    bits: str | None = None
    rank: int | None = None
    seed: int | None = None

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "StateSpec":
        """Parse ``kind[:arg[:arg]]``.

        Accepted forms: ``maximally_mixed``, ``basis:0101``, ``ghz``,
        ``random_pure:SEED``, ``random_mixed:SEED`` or ``random_mixed:RANK:SEED``.
        """
        kind, *args = text.strip().split(":")
        try:
            if kind == "basis":
                (bits,) = args
                if n is not None and len(bits) != n:
                    raise ValueError(f"basis state {bits!r} does not have {n} qubits")
                return cls(kind, len(bits), bits=bits)
            if n is None:
                raise ValueError(f"state {text!r} needs a qubit count")
            if kind in ("maximally_mixed", "ghz") and not args:
                return cls(kind, n)
            if kind == "random_pure":
                (seed,) = args
                return cls(kind, n, seed=int(seed))
            if kind == "random_mixed":
                if len(args) == 1:
                    return cls(kind, n, rank=2**n, seed=int(args[0]))
                rank, seed = args
                return cls(kind, n, rank=int(rank), seed=int(seed))
        except ValueError as err:
            raise ValueError(f"invalid state spec {text!r}: {err}") from None
        raise ValueError(f"invalid state spec {text!r}")

    def __str__(self) -> str:
        if self.kind == "basis":
            return f"basis:{self.bits}"
        if self.kind == "random_pure":
            return f"random_pure:{self.seed}"
        if self.kind == "random_mixed":
            return f"random_mixed:{self.rank}:{self.seed}"
        return self.kind


def make_state(spec: StateSpec | str, n: int | None = None) -> np.ndarray:
    """Build the (read-only) density matrix described by ``spec``."""
    if isinstance(spec, str):
        spec = StateSpec.parse(spec, n)
    if not 1 <= spec.n <= MAX_QUBITS:
        raise ValueError(f"qubit count {spec.n} outside [1, {MAX_QUBITS}]")
    if spec.kind == "maximally_mixed":
        return maximally_mixed(spec.n)
    if spec.kind == "basis":
        if spec.bits is None or len(spec.bits) != spec.n:
            raise ValueError("basis state needs a bit string of length n")
        return basis_state(spec.bits)
    if spec.kind == "ghz":
        return ghz(spec.n)
    if spec.kind == "random_pure" and spec.seed is not None:
        return random_pure(spec.n, spec.seed)
    if spec.kind == "random_mixed" and spec.seed is not None:
        return random_mixed(spec.n, spec.rank or 2**spec.n, spec.seed)
    raise ValueError(f"invalid state spec {spec!r}")
