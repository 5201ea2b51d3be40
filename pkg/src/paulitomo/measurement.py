"""Pauli-basis measurements: exact outcome statistics, seeded sampling, shot algebra.

Outcome convention: bit ``s_i = 0`` is the +1 eigenvalue of the i-th basis
letter, ``1`` the -1 eigenvalue. Qubit 0 is the most significant outcome bit,
so outcome index ``int(bits, 2)`` enumerates outcomes lexicographically.

Shot stream files hold one shot per line, ``<basis letters>\\t<outcome bits>``,
ASCII, e.g. ``XYZ\\t011``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache, reduce
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .qstate import PAULIS, check_pauli, check_subset, num_qubits

BASIS_LETTERS = "XYZ"

# rows are the bras <e_0|, <e_1| of the +1 / -1 eigenvectors of X, Y, Z
_EIGEN_BRAS = np.array(
    [
        np.array([[1, 1], [1, -1]]) / np.sqrt(2),
        np.array([[1, 1j], [1, -1j]]).conj() / np.sqrt(2),
        np.eye(2),
    ],
    dtype=complex,
)


def check_basis(basis: str, n: int | None = None) -> str:
    if not isinstance(basis, str) or not basis or any(c not in BASIS_LETTERS for c in basis):
        raise ValueError(f"invalid measurement basis {basis!r}")
    if n is not None and len(basis) != n:
        raise ValueError(f"basis {basis!r} has length {len(basis)}, expected {n}")
    return basis


def all_bases(n: int) -> list[str]:
    """All 3**n bases in lexicographic order (``X...X``, ``X...XY``, ...)."""
    return ["".join(t) for t in itertools.product(BASIS_LETTERS, repeat=n)]


def basis_codes(basis: str) -> np.ndarray:
    return np.array([BASIS_LETTERS.index(c) for c in check_basis(basis)], dtype=np.int8)


def basis_from_codes(codes: Sequence[int]) -> str:
    return "".join(BASIS_LETTERS[int(c)] for c in codes)


@dataclass(frozen=True)
class Shot:
    basis: str
    outcome: str

    def __post_init__(self):
        check_basis(self.basis)
        if len(self.outcome) != len(self.basis) or any(c not in "01" for c in self.outcome):
            raise ValueError(f"outcome {self.outcome!r} does not match basis {self.basis!r}")


class ShotBatch:
    """Array-backed sequence of shots.

    ``bases`` holds letter codes (0=X, 1=Y, 2=Z) and ``outcomes`` holds bits,
    both of shape ``(num_shots, n)``.
    """

    def __init__(self, bases: np.ndarray, outcomes: np.ndarray):
        bases = np.asarray(bases, dtype=np.int8)
        outcomes = np.asarray(outcomes, dtype=np.uint8)
        if bases.ndim != 2 or bases.shape != outcomes.shape:
            raise ValueError("bases and outcomes must be equal-shape 2-D arrays")
        if bases.size and (bases.min() < 0 or bases.max() > 2 or outcomes.max() > 1):
            raise ValueError("basis codes must be in {0,1,2} and outcome bits in {0,1}")
        bases.setflags(write=False)
        outcomes.setflags(write=False)
        self.bases = bases
        self.outcomes = outcomes

    @classmethod
    def from_shots(cls, shots: Iterable[Shot], n: int | None = None) -> "ShotBatch":
        shots = list(shots)
        if not shots:
            return cls(np.zeros((0, n or 0)), np.zeros((0, n or 0)))
        bases = [basis_codes(s.basis) for s in shots]
        outcomes = [[int(c) for c in s.outcome] for s in shots]
        return cls(np.array(bases), np.array(outcomes))

    @classmethod
    def concatenate(cls, batches: Sequence["ShotBatch"]) -> "ShotBatch":
        return cls(
            np.concatenate([b.bases for b in batches]),
            np.concatenate([b.outcomes for b in batches]),
        )

    @property
    def n(self) -> int:
        return self.bases.shape[1]

    def __len__(self) -> int:
        return self.bases.shape[0]

    def __getitem__(self, i: int) -> Shot:
        return Shot(basis_from_codes(self.bases[i]), "".join(map(str, self.outcomes[i])))

    def __iter__(self) -> Iterator[Shot]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ShotBatch):
            return NotImplemented
        return np.array_equal(self.bases, other.bases) and np.array_equal(self.outcomes, other.outcomes)

    def restrict(self, subset: Sequence[int]) -> "ShotBatch":
        """Keep only the basis letters and outcome bits at ``subset``."""
        subset = check_subset(subset, self.n)
        return ShotBatch(self.bases[:, subset], self.outcomes[:, subset])

    def outcome_indices(self) -> np.ndarray:
        return _bits_to_index(self.outcomes)

    def basis_indices(self) -> np.ndarray:
        """Base-3 index of each shot's basis (lexicographic over ``XYZ``)."""
        k = self.n
        weights = 3 ** np.arange(k - 1, -1, -1, dtype=np.int64)
        return self.bases.astype(np.int64) @ weights


def as_batch(shots: ShotBatch | Iterable[Shot]) -> ShotBatch:
    return shots if isinstance(shots, ShotBatch) else ShotBatch.from_shots(shots)


def _bits_to_index(bits: np.ndarray) -> np.ndarray:
    k = bits.shape[1]
    weights = 2 ** np.arange(k - 1, -1, -1, dtype=np.int64)
    return bits.astype(np.int64) @ weights


def _index_to_bits(idx: np.ndarray, n: int) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


# --------------------------------------------------------------------------
# Exact statistics

def outcome_distribution(rho: np.ndarray, basis: str) -> np.ndarray:
    """Probabilities of all ``2**n`` outcomes when measuring ``basis`` on ``rho``.

    ``p(s) = <e_s| rho |e_s>`` with ``|e_s>`` the product eigenvector selected by
    the outcome bits. Tiny negative round-off is clipped to zero.
    """
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho)
    check_basis(basis, n)
    v = reduce(np.kron, (_EIGEN_BRAS[BASIS_LETTERS.index(c)] for c in basis))
    p = np.sum((v @ rho) * v.conj(), axis=1).real
    if p.min() < -1e-12:
        raise ValueError("negative outcome probability; is rho positive semidefinite?")
    p = np.clip(p, 0.0, None)
    if abs(p.sum() - 1) > 1e-10:
        raise ValueError(f"outcome probabilities sum to {p.sum():.12g}")
    return p


def _cdf(p: np.ndarray) -> np.ndarray:
    c = np.cumsum(p)
    c /= c[-1]
    c[-1] = 1.0
    return c


class OutcomeSampler:
    """Inverse-CDF sampler for one state, caching each basis distribution."""

    def __init__(self, rho: np.ndarray):
        self.rho = np.asarray(rho, dtype=complex)
        self.n = num_qubits(self.rho)
        self._cdfs: dict[str, np.ndarray] = {}
        self._table: np.ndarray | None = None

    def distribution(self, basis: str) -> np.ndarray:
        return np.diff(self.cdf(basis), prepend=0.0)

    def cdf(self, basis: str) -> np.ndarray:
        c = self._cdfs.get(basis)
        if c is None:
            c = _cdf(outcome_distribution(self.rho, basis))
            self._cdfs[basis] = c
        return c

    def cdf_table(self) -> np.ndarray:
        """CDFs of all ``3**n`` bases stacked in basis-index order."""
        if self._table is None:
            self._table = np.stack([self.cdf(b) for b in all_bases(self.n)])
        return self._table

    def sample_indices(self, basis: str, size: int, rng: np.random.Generator) -> np.ndarray:
        """Outcome indices of ``size`` shots in ``basis``, one uniform draw per shot."""
        return np.searchsorted(self.cdf(basis), rng.random(size), side="right")

    def sample_fixed(self, basis: str, size: int, rng: np.random.Generator) -> ShotBatch:
        idx = self.sample_indices(basis, size, rng)
        bases = np.broadcast_to(basis_codes(basis), (size, self.n))
        return ShotBatch(bases, _index_to_bits(idx, self.n))

    def sample_random(self, size: int, rng: np.random.Generator) -> ShotBatch:
        """``size`` shots, each in an independent uniformly random basis.

        Draws all basis letters first, then one uniform per shot.
        """
        codes = rng.integers(0, 3, size=(size, self.n), dtype=np.int8)
        u = rng.random(size)
        bidx = codes.astype(np.int64) @ (3 ** np.arange(self.n - 1, -1, -1, dtype=np.int64))
        table = self.cdf_table()
        idx = np.empty(size, dtype=np.int64)
        order = np.argsort(bidx, kind="stable")
        bounds = np.searchsorted(bidx[order], np.arange(3**self.n + 1))
        for b in range(3**self.n):
            sel = order[bounds[b]:bounds[b + 1]]
            if sel.size:
                idx[sel] = np.searchsorted(table[b], u[sel], side="right")
        return ShotBatch(codes, _index_to_bits(idx, self.n))


def sample_shot(rho: np.ndarray, basis: str, rng: np.random.Generator) -> Shot:
    n = num_qubits(rho)
    check_basis(basis, n)
    p = outcome_distribution(rho, basis)
    i = int(np.searchsorted(_cdf(p), rng.random(), side="right"))
    return Shot(basis, format(i, f"0{n}b"))


def random_basis(n: int, rng: np.random.Generator) -> str:
    if n < 1:
        raise ValueError("n must be >= 1")
    return basis_from_codes(rng.integers(0, 3, size=n))


# --------------------------------------------------------------------------
# Compatibility algebra

def is_compatible(q: str, basis: str) -> bool:
    """True iff every non-identity letter of ``q`` matches ``basis``."""
    check_pauli(q, len(check_basis(basis)))
    return all(a == "I" or a == b for a, b in zip(q, basis))


def shot_sign(q: str, shot: Shot) -> int:
    """The +-1 sample of ``tr(rho Q)`` that ``shot`` provides."""
    if not is_compatible(q, shot.basis):
        raise ValueError(f"Pauli {q!r} is not compatible with basis {shot.basis!r}")
    parity = sum(int(b) for a, b in zip(q, shot.outcome) if a != "I")
    return -1 if parity % 2 else 1


@lru_cache(maxsize=None)
def sign_matrix(n: int) -> np.ndarray:
    """``W[mask, s] = (-1)**popcount(mask & s)``; row ``mask`` selects the kept positions."""
    h = np.array([[1, 1], [1, -1]], dtype=np.int64)
    w = reduce(np.kron, [h] * n) if n else np.ones((1, 1), dtype=np.int64)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def compatible_pauli_indices(n: int) -> np.ndarray:
    """Pauli indices compatible with each basis: shape ``(3**n, 2**n)``.

    Entry ``[b, mask]`` is the index of the Pauli that keeps the letters of
    basis ``b`` at the positions set in ``mask`` (MSB = qubit 0) and puts ``I``
    elsewhere.
    """
    masks = _index_to_bits(np.arange(2**n), n).astype(np.int64)  # (2^n, n)
    codes = np.array(list(itertools.product(range(3), repeat=n)), dtype=np.int64).reshape(3**n, n)
    place = 4 ** np.arange(n - 1, -1, -1, dtype=np.int64)
    out = ((codes[:, None, :] + 1) * masks[None, :, :]) @ place
    out.setflags(write=False)
    return out


def ic_povm() -> list[np.ndarray]:
    """The six-outcome single-qubit POVM ``{(I +- X)/6, (I +- Y)/6, (I +- Z)/6}``."""
    return [(PAULIS[0] + sign * PAULIS[j]) / 6 for j in (1, 2, 3) for sign in (1, -1)]


def check_povm(elements: Sequence[np.ndarray], tol: float = 1e-12) -> list[np.ndarray]:
    """Validate a POVM: PSD elements summing to the identity."""
    elements = [np.asarray(e, dtype=complex) for e in elements]
    if not elements:
        raise ValueError("empty POVM")
    dim = elements[0].shape[0]
    for e in elements:
        if e.shape != (dim, dim) or np.max(np.abs(e - e.conj().T)) > tol:
            raise ValueError("POVM elements must be Hermitian and equally sized")
        if np.linalg.eigvalsh(e)[0] < -tol:
            raise ValueError("POVM element is not positive semidefinite")
    if np.max(np.abs(sum(elements) - np.eye(dim))) > tol:
        raise ValueError("POVM elements do not sum to the identity")
    return elements


def povm_probabilities(rho: np.ndarray, elements: Sequence[np.ndarray]) -> np.ndarray:
    """``tr(rho M_i)`` for a product POVM applying ``elements`` to every qubit.

    Outcomes are indexed lexicographically with qubit 0 most significant.
    """
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho)
    elements = check_povm(elements)
    probs = []
    for combo in itertools.product(elements, repeat=n):
        probs.append(np.trace(rho @ reduce(np.kron, combo)).real)
    return np.clip(np.array(probs), 0.0, None)


# --------------------------------------------------------------------------
# Shot stream files

def write_shots(path: str | Path, shots: ShotBatch | Iterable[Shot]) -> None:
    batch = as_batch(shots)
    letters = np.array(list(BASIS_LETTERS))[batch.bases]
    bits = batch.outcomes.astype(str)
    lines = ["".join(b) + "\t" + "".join(o) + "\n" for b, o in zip(letters, bits)]
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.writelines(lines)


def read_shots(path: str | Path) -> ShotBatch:
    shots = []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                basis, outcome = line.split("\t")
                shots.append(Shot(basis, outcome))
            except ValueError as err:
                raise ValueError(f"{path}:{lineno}: malformed shot record {line!r}") from err
    return ShotBatch.from_shots(shots)
