"""Dense pure-state kernels for multi-qubit systems.

Basis convention (fixed everywhere in the package): party ``i`` (1-indexed)
owns bit ``i - 1`` of the basis index, so the bitstring ``a = (a_1, ..., a_n)``
maps to index ``sum(a_i * 2**(i - 1))`` (little-endian).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, sqrt
from typing import Iterable, Sequence

import numpy as np

MAX_SYSTEM_QUBITS = 14
MAX_COMBINED_QUBITS = 24

NORM_TOL = 1e-12
OPERATOR_TOL = 1e-12
IMAG_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_D = np.array([[1, 1], [1, -1]], dtype=complex) / sqrt(2)
HADAMARD = PAULI_D

INVOLUTION_KINDS = ("X", "Z", "D", "I")
PROJECTOR_KINDS = ("P0", "P1")


class DomainError(ValueError):
    """Raised for arguments outside an operation's documented domain."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    """Complex amplitude vector over ``n_qubits`` qubits.

    ``normalized`` is a claim checked at construction; branch vectors produced
    by operator application are deliberately left unnormalized.
    """

    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)
    normalized: bool = False

    def __post_init__(self):
        if self.n_qubits < 0 or self.n_qubits > MAX_COMBINED_QUBITS:
            raise DomainError(f"n_qubits={self.n_qubits} outside [0, {MAX_COMBINED_QUBITS}]")
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.shape[0] != 2**self.n_qubits:
            raise DomainError(
                f"expected {2**self.n_qubits} amplitudes for {self.n_qubits} qubits, got {amps.shape[0]}"
            )
        if self.normalized and abs(np.vdot(amps, amps).real - 1.0) > NORM_TOL:
            raise DomainError("state flagged normalized but <psi|psi> != 1")
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "PureState":
        nrm = self.norm()
        if nrm == 0.0:
            raise DomainError("cannot normalize the zero vector")
        return PureState(self.n_qubits, self.amplitudes / nrm, normalized=True)

    def with_phase(self, phase: complex) -> "PureState":
        return PureState(self.n_qubits, self.amplitudes * phase, normalized=self.normalized)

    def __add__(self, other: "PureState") -> "PureState":
        _check_same_size(self, other)
        return PureState(self.n_qubits, self.amplitudes + other.amplitudes)

    def __sub__(self, other: "PureState") -> "PureState":
        _check_same_size(self, other)
        return PureState(self.n_qubits, self.amplitudes - other.amplitudes)

    def scaled(self, factor: complex) -> "PureState":
        return PureState(self.n_qubits, self.amplitudes * factor)


def _check_same_size(a: PureState, b: PureState) -> None:
    if a.n_qubits != b.n_qubits:
        raise DomainError(f"dimension mismatch: {a.n_qubits} vs {b.n_qubits} qubits")


@dataclass(frozen=True, eq=False)
class LocalObservable:
    """A 2x2 Hermitian operator acting on one party's qubit."""

    party: int
    kind: str
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.party < 1:
            raise DomainError(f"party index must be >= 1, got {self.party}")
        if self.kind not in INVOLUTION_KINDS + PROJECTOR_KINDS:
            raise DomainError(f"unknown observable kind {self.kind!r}")
        m = _frozen(self.matrix)
        if m.shape != (2, 2):
            raise DomainError(f"observable matrix must be 2x2, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > OPERATOR_TOL:
            raise DomainError(f"{self.kind} on party {self.party} is not Hermitian")
        target = I2 if self.kind in INVOLUTION_KINDS else m
        if np.max(np.abs(m @ m - target)) > OPERATOR_TOL:
            what = "an involution" if self.kind in INVOLUTION_KINDS else "idempotent"
            raise DomainError(f"{self.kind} on party {self.party} is not {what}")
        object.__setattr__(self, "matrix", m)


def projector(z: LocalObservable, outcome: int) -> LocalObservable:
    """Projector ``(I + (-1)**outcome Z) / 2`` onto an outcome of ``z``."""
    if outcome not in (0, 1):
        raise DomainError(f"projector outcome must be 0 or 1, got {outcome}")
    sign = 1 - 2 * outcome
    return LocalObservable(z.party, f"P{outcome}", (I2 + sign * z.matrix) / 2)


@dataclass(frozen=True)
class SettingProduct:
    """Tensor product of local observables on distinct parties."""

    factors: tuple[LocalObservable, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        parties = [f.party for f in factors]
        if len(set(parties)) != len(parties):
            raise DomainError(f"setting repeats a party: {parties}")
        object.__setattr__(self, "factors", factors)


def basis_index(bits: Sequence[int]) -> int:
    """Little-endian index of the bitstring ``(a_1, ..., a_n)``."""
    return sum(int(b) << i for i, b in enumerate(bits))


def index_bits(index: int, n: int) -> tuple[int, ...]:
    return tuple((index >> i) & 1 for i in range(n))


def bitstring(index: int, n: int) -> str:
    """Party-ordered bitstring ``"a_1 a_2 ... a_n"`` for a basis index."""
    return "".join(str(b) for b in index_bits(index, n))


def parse_bitstring(s: str) -> int:
    return basis_index([int(c) for c in s])


def basis_state(bits: Sequence[int]) -> PureState:
    n = len(bits)
    amps = np.zeros(2**n, dtype=complex)
    amps[basis_index(bits)] = 1.0
    return PureState(n, amps, normalized=True)


def weight_k_indices(n: int, k: int) -> np.ndarray:
    idx = np.arange(2**n)
    weights = np.zeros(2**n, dtype=np.int64)
    for i in range(n):
        weights += (idx >> i) & 1
    return idx[weights == k]


def hamming_weights(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    weights = np.zeros(2**n, dtype=np.int64)
    for i in range(n):
        weights += (idx >> i) & 1
    return weights


def dicke_state(n: int, k: int, max_qubits: int = MAX_SYSTEM_QUBITS) -> PureState:
    """Equal superposition of all weight-``k`` strings on ``n`` qubits."""
    if not 1 <= k <= n - 1:
        raise DomainError(f"Dicke state needs 1 <= k <= n-1, got n={n}, k={k}")
    if n > max_qubits:
        raise DomainError(f"n={n} exceeds the configured cap of {max_qubits} qubits")
    amps = np.zeros(2**n, dtype=complex)
    amps[weight_k_indices(n, k)] = 1.0 / sqrt(comb(n, k))
    return PureState(n, amps, normalized=True)


def apply_matrix(vec: np.ndarray, matrix: np.ndarray, bit: int, n: int) -> np.ndarray:
    """Apply a 2x2 matrix to ``bit`` of a raw little-endian amplitude array."""
    view = vec.reshape(2 ** (n - 1 - bit), 2, 2**bit)
    return np.einsum("ij,ajb->aib", matrix, view).reshape(-1)


def apply_local(op: LocalObservable, state: PureState) -> PureState:
    if op.party > state.n_qubits:
        raise DomainError(f"party {op.party} out of range for {state.n_qubits} qubits")
    out = apply_matrix(state.amplitudes, op.matrix, op.party - 1, state.n_qubits)
    return PureState(state.n_qubits, out)


def apply_setting(setting: SettingProduct, state: PureState) -> PureState:
    for op in setting.factors:
        state = apply_local(op, state)
    return state


def apply_sequence(ops: Iterable[LocalObservable], state: PureState) -> PureState:
    """Apply ``ops`` right-to-left, i.e. as the operator product written in order."""
    for op in reversed(list(ops)):
        state = apply_local(op, state)
    return state


def inner(a: PureState, b: PureState) -> complex:
    _check_same_size(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def expectation(state: PureState, setting: SettingProduct) -> float:
    """Real correlator ``<psi| prod factors |psi>``."""
    if not state.normalized:
        raise DomainError("expectation requires a normalized state")
    value = inner(state, apply_setting(setting, state))
    if abs(value.imag) > IMAG_TOL:
        raise DomainError(f"correlator has imaginary part {value.imag:.3e}; setting is not Hermitian")
    return value.real


def append_ancillas(state: PureState, m: int) -> PureState:
    """``state`` tensored with ``|0>^m``; ancillas take the next ``m`` bits."""
    if m < 0:
        raise DomainError("ancilla count must be nonnegative")
    total = state.n_qubits + m
    if total > MAX_COMBINED_QUBITS:
        raise DomainError(f"{total} qubits exceeds the combined cap of {MAX_COMBINED_QUBITS}")
    amps = np.zeros(2**total, dtype=complex)
    amps[: 2**state.n_qubits] = state.amplitudes
    return PureState(total, amps, normalized=state.normalized)
