"""Full-state tomography from all ``3**n`` Pauli bases with shot reuse.

Every shot in basis ``P`` yields a +-1 sample for each of the ``2**n`` Pauli
strings obtained by replacing letters of ``P`` with ``I``. After ``m`` shots per
basis a weight-``w`` Pauli has ``m * 3**(n - w)`` samples, and the estimate is

    sigma = sum_Q (mu_Q / count_Q) * Q / 2**n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .measurement import (
    OutcomeSampler,
    Shot,
    ShotBatch,
    all_bases,
    as_batch,
    basis_codes,
    compatible_pauli_indices,
    sign_matrix,
)
from .qstate import (
    all_paulis,
    check_pauli,
    frobenius_norm,
    from_pauli_coefficients,
    is_hermitian,
    num_qubits,
    one_norm_distance,
    pauli_index,
)


def ceil_tol(x: float) -> int:
    """Ceiling that ignores float noise just above an integer (e.g. ``log(e)``)."""
    return math.ceil(x - 1e-9 * max(1.0, abs(x)))


def shots_per_basis(n: int, epsilon: float, delta: float) -> int:
    """``ceil(16 * 10**n * ln(1/delta) / (3**n * epsilon**2))``, at least 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < epsilon <= 2:
        raise ValueError(f"epsilon must lie in (0, 2], got {epsilon}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    m = 16 * 10**n * math.log(1 / delta) / (3**n * epsilon**2)
    return max(1, ceil_tol(m))


@dataclass(frozen=True)
class TomographyPlan:
    n: int
    epsilon: float
    delta: float
    m: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0 < self.epsilon <= 2:
            raise ValueError(f"epsilon must lie in (0, 2], got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.m < 1:
            raise ValueError("m must be >= 1")

    @classmethod
    def from_targets(cls, n: int, epsilon: float, delta: float) -> "TomographyPlan":
        return cls(n, epsilon, delta, shots_per_basis(n, epsilon, delta))

    @property
    def total_copies(self) -> int:
        return self.m * 3**self.n


class PauliAccumulator:
    """Running sign sums ``mu`` and compatible-shot counts for all ``4**n`` Paulis.

    Arrays are indexed by Pauli index (see ``qstate.pauli_index``).
    Accumulators merge with ``+``.
    """

    def __init__(self, n: int):
        self.n = n
        self.mu = np.zeros(4**n, dtype=np.int64)
        self.count = np.zeros(4**n, dtype=np.int64)

    def add_shot(self, shot: Shot) -> "PauliAccumulator":
        if len(shot.basis) != self.n:
            raise ValueError(f"shot has {len(shot.basis)} qubits, accumulator has {self.n}")
        counts = np.zeros(2**self.n, dtype=np.int64)
        counts[int(shot.outcome, 2)] = 1
        return self.add_counts(shot.basis, counts)

    def add_counts(self, basis: str, counts: np.ndarray) -> "PauliAccumulator":
        """Add a histogram of outcome indices observed in one basis."""
        if len(basis) != self.n:
            raise ValueError(f"basis {basis!r} does not have {self.n} qubits")
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (2**self.n,):
            raise ValueError(f"expected {2**self.n} outcome counts, got shape {counts.shape}")
        b = int(basis_codes(basis).astype(np.int64) @ (3 ** np.arange(self.n - 1, -1, -1)))
        q = compatible_pauli_indices(self.n)[b]  # distinct within a basis
        self.mu[q] += sign_matrix(self.n) @ counts
        self.count[q] += counts.sum()
        return self

    def add_batch(self, shots: ShotBatch | Iterable[Shot]) -> "PauliAccumulator":
        batch = as_batch(shots)
        if len(batch) == 0:
            return self
        if batch.n != self.n:
            raise ValueError(f"shots have {batch.n} qubits, accumulator has {self.n}")
        flat = batch.basis_indices() * 2**self.n + batch.outcome_indices()
        table = np.bincount(flat, minlength=6**self.n).reshape(3**self.n, 2**self.n)
        self._add_table(table)
        return self

    def _add_table(self, table: np.ndarray) -> None:
        # table[b, s]: number of shots in basis b with outcome s
        signed = table @ sign_matrix(self.n).T  # [b, mask]
        totals = np.broadcast_to(table.sum(axis=1)[:, None], signed.shape)
        q = compatible_pauli_indices(self.n)
        size = 4**self.n
        self.mu += np.bincount(q.ravel(), weights=signed.ravel(), minlength=size).round().astype(np.int64)
        self.count += np.bincount(q.ravel(), weights=totals.ravel(), minlength=size).round().astype(np.int64)

    def __add__(self, other: "PauliAccumulator") -> "PauliAccumulator":
        if other.n != self.n:
            raise ValueError("cannot merge accumulators of different sizes")
        out = PauliAccumulator(self.n)
        out.mu = self.mu + other.mu
        out.count = self.count + other.count
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliAccumulator):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.mu, other.mu)
            and np.array_equal(self.count, other.count)
        )

    def get(self, q: str) -> tuple[int, int]:
        """``(mu, count)`` for Pauli string ``q``."""
        i = pauli_index(check_pauli(q, self.n))
        return int(self.mu[i]), int(self.count[i])

    def as_dict(self) -> dict[str, tuple[int, int]]:
        return {p: (int(m), int(c)) for p, m, c in zip(all_paulis(self.n), self.mu, self.count)}

    def estimates(self) -> np.ndarray:
        if np.any(self.count == 0):
            missing = all_paulis(self.n)[int(np.argmax(self.count == 0))]
            raise ValueError(f"no compatible shots for Pauli {missing!r}")
        return self.mu / self.count


def accumulate(acc: PauliAccumulator, shot: Shot) -> PauliAccumulator:
    """Add one shot to ``acc`` (in place) and return it."""
    return acc.add_shot(shot)


def reconstruct_from_expectations(expectations: np.ndarray, n: int) -> np.ndarray:
    """``sum_Q e_Q * Q / 2**n`` for per-Pauli estimates ``e`` in index order."""
    expectations = np.asarray(expectations, dtype=float)
    sigma = from_pauli_coefficients(expectations, n) / 2**n
    return (sigma + sigma.conj().T) / 2


def reconstruct(acc: PauliAccumulator) -> np.ndarray:
    """The raw (Hermitian, unit trace, possibly non-PSD) estimate."""
    return reconstruct_from_expectations(acc.estimates(), acc.n)


def project_to_physical(sigma: np.ndarray) -> np.ndarray:
    """Clip negative eigenvalues to zero and renormalize the trace."""
    sigma = np.asarray(sigma, dtype=complex)
    num_qubits(sigma)
    if not is_hermitian(sigma, tol=1e-8):
        raise ValueError("project_to_physical requires a Hermitian matrix")
    lam, vec = np.linalg.eigh((sigma + sigma.conj().T) / 2)
    lam = np.clip(lam, 0.0, None)
    if lam.sum() <= 0:
        raise ValueError("matrix has no positive eigenvalue to keep")
    lam /= lam.sum()
    out = (vec * lam) @ vec.conj().T
    return (out + out.conj().T) / 2


def run_full_tomography(
    rho: np.ndarray,
    plan: TomographyPlan,
    rng: np.random.Generator,
    *,
    physical: bool = False,
    keep_shots: bool = False,
) -> tuple[np.ndarray, dict]:
    """Measure ``plan.m`` shots in each basis (lexicographic order) and reconstruct.

    Returns ``(sigma, diagnostics)``. Diagnostics hold the one-norm and
    Frobenius errors against ``rho``, the number of consumed copies, the
    accumulator, and, with ``keep_shots``, the full shot stream as a
    ``ShotBatch``. With ``physical`` the returned sigma (and the errors) use
    ``project_to_physical``.
    """
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho)
    if plan.n != n:
        raise ValueError(f"plan is for {plan.n} qubits, state has {n}")
    sampler = OutcomeSampler(rho)
    acc = PauliAccumulator(n)
    batches = []
    for basis in all_bases(n):
        if keep_shots:
            batch = sampler.sample_fixed(basis, plan.m, rng)
            batches.append(batch)
            acc.add_batch(batch)
        else:
            idx = sampler.sample_indices(basis, plan.m, rng)
            acc.add_counts(basis, np.bincount(idx, minlength=2**n))
    sigma = reconstruct(acc)
    if physical:
        sigma = project_to_physical(sigma)
    diagnostics = {
        "trace_error": one_norm_distance(rho, sigma),
        "frobenius_error": frobenius_norm(rho - sigma),
        "shots": plan.total_copies,
        "accumulator": acc,
    }
    if keep_shots:
        diagnostics["shots_record"] = ShotBatch.concatenate(batches)
    return sigma, diagnostics


def tomography_from_shots(shots: ShotBatch | Iterable[Shot], n: int | None = None) -> np.ndarray:
    """Reconstruct from a recorded shot stream (e.g. read with ``read_shots``)."""
    batch = as_batch(shots)
    acc = PauliAccumulator(batch.n if n is None else n)
    acc.add_batch(batch)
    return reconstruct(acc)
