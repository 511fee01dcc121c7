"""Local swap isometry, its outputs, and distances to the ideal Dicke output.

The isometry output lives on ``N`` system qubits plus ``N`` ancillas. It is
kept as a map from ancilla bitstring (party order ``a_1..a_N``) to the
unnormalized system branch ``X^a P^a |psi>``; the dense 2N-qubit vector is
only built by the circuit simulation.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, sqrt
from typing import NamedTuple

import numpy as np

from .core import (
    HADAMARD,
    PAULI_D,
    PAULI_X,
    PAULI_Z,
    DomainError,
    LocalObservable,
    PureState,
    append_ancillas,
    apply_local,
    apply_matrix,
    apply_sequence,
    bitstring,
    dicke_state,
    index_bits,
    inner,
    parse_bitstring,
    weight_k_indices,
)
from .experiment import ExperimentSpec
from .statistics import cyclic_order, weight_strings

BRANCH_CUTOFF = 1e-14
IDEAL_MATRICES = {"X": PAULI_X, "Z": PAULI_Z, "D": PAULI_D}


class DegenerateInputError(DomainError):
    """The junk branch vanishes, so no junk state can be extracted."""


@dataclass(frozen=True, eq=False)
class IsometryOutput:
    n: int
    k: int
    branches: dict[str, PureState]

    @classmethod
    def from_matrix(cls, n: int, k: int, rows: np.ndarray, cutoff: float = BRANCH_CUTOFF) -> "IsometryOutput":
        branches = {}
        for anc in range(2**n):
            if np.linalg.norm(rows[anc]) > cutoff:
                branches[bitstring(anc, n)] = PureState(n, rows[anc])
        return cls(n, k, branches)

    def matrix(self) -> np.ndarray:
        """Dense ``(ancilla, system)`` amplitude array."""
        rows = np.zeros((2**self.n, 2**self.n), dtype=complex)
        for key, branch in self.branches.items():
            rows[parse_bitstring(key)] = branch.amplitudes
        return rows

    def norm(self) -> float:
        return float(np.sqrt(sum(b.norm() ** 2 for b in self.branches.values())))

    def branch_norms(self) -> dict[str, float]:
        return {key: b.norm() for key, b in sorted(self.branches.items())}

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "branches": {
                key: [[float(z.real), float(z.imag)] for z in self.branches[key].amplitudes]
                for key in sorted(self.branches)
            },
        }


def max_branch_difference(a: IsometryOutput, b: IsometryOutput) -> float:
    return float(np.max(np.abs(a.matrix() - b.matrix())))


def formula_rows(exp: ExperimentSpec, state: PureState | None = None) -> np.ndarray:
    """Rows ``X_1^{a_1}..X_N^{a_N} P_1^{a_1}..P_N^{a_N} |state>`` for every ancilla string."""
    state = exp.state if state is None else state
    n = exp.n
    xs = [exp.observable(p, "X") for p in range(1, n + 1)]
    projs = [(exp.projector(p, 0), exp.projector(p, 1)) for p in range(1, n + 1)]
    rows = np.zeros((2**n, 2**n), dtype=complex)
    for anc in range(2**n):
        bits = index_bits(anc, n)
        ops = [xs[i] for i in range(n) if bits[i]] + [projs[i][bits[i]] for i in range(n)]
        rows[anc] = apply_sequence(ops, state).amplitudes
    return rows


def apply_isometry_formula(exp: ExperimentSpec) -> IsometryOutput:
    return IsometryOutput.from_matrix(exp.n, exp.k, formula_rows(exp))


def _apply_controlled(vec: np.ndarray, matrix: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    tensor = vec.reshape([2] * n).copy()
    ctrl_axis, tgt_axis = n - 1 - control, n - 1 - target
    sel = [slice(None)] * n
    sel[ctrl_axis] = 1
    sub = tensor[tuple(sel)]
    # dropping the control axis shifts later axes down by one
    axis = tgt_axis - (tgt_axis > ctrl_axis)
    sub = np.moveaxis(np.tensordot(matrix, sub, axes=([1], [axis])), 0, axis)
    tensor[tuple(sel)] = sub
    return tensor.reshape(-1)


def circuit_vector(exp: ExperimentSpec) -> np.ndarray:
    """Dense ``2N``-qubit output of the per-party H, CZ, H, CX circuit.

    The ancilla of party ``i`` sits on bit ``N + i - 1``.
    """
    n = exp.n
    total = 2 * n
    vec = append_ancillas(exp.state, n).amplitudes.copy()
    for party in range(1, n + 1):
        anc, sysbit = n + party - 1, party - 1
        vec = apply_matrix(vec, HADAMARD, anc, total)
        vec = _apply_controlled(vec, exp.observable(party, "Z").matrix, anc, sysbit, total)
        vec = apply_matrix(vec, HADAMARD, anc, total)
        vec = _apply_controlled(vec, exp.observable(party, "X").matrix, anc, sysbit, total)
    return vec


def apply_isometry_circuit(exp: ExperimentSpec) -> IsometryOutput:
    rows = circuit_vector(exp).reshape(2**exp.n, 2**exp.n)
    return IsometryOutput.from_matrix(exp.n, exp.k, rows)


def junk_branch(exp: ExperimentSpec) -> PureState:
    """``X_1..X_k P^1_1..P^1_k P^0_{k+1}..P^0_N |psi>`` (unnormalized)."""
    n, k = exp.n, exp.k
    ops = [exp.observable(p, "X") for p in range(1, k + 1)]
    ops += [exp.projector(p, 1 if p <= k else 0) for p in range(1, n + 1)]
    return apply_sequence(ops, exp.state)


def ideal_theta(exp: ExperimentSpec) -> tuple[PureState, IsometryOutput]:
    """Junk branch and the output with that branch on every weight-k ancilla string."""
    j = junk_branch(exp)
    branches = {bitstring(int(idx), exp.n): j for idx in weight_k_indices(exp.n, exp.k)}
    return j, IsometryOutput(exp.n, exp.k, branches)


class StateDistance(NamedTuple):
    l2_distance: float
    dicke_fidelity: float


def _aligned_junk(exp: ExperimentSpec, rows: np.ndarray) -> np.ndarray:
    """Normalized junk branch, phased so that <junk (x) D|Phi(psi)> >= 0."""
    j = junk_branch(exp).amplitudes
    nrm = np.linalg.norm(j)
    if nrm <= BRANCH_CUTOFF:
        raise DegenerateInputError("junk branch has zero norm; state has no weight-k support")
    junk = j / nrm
    overlap = np.vdot(np.outer(dicke_state(exp.n, exp.k).amplitudes, junk), rows)
    if abs(overlap) > 0:
        junk = junk * (overlap / abs(overlap))
    return junk


def _distance(rows: np.ndarray, ancilla: np.ndarray, junk: np.ndarray) -> float:
    return float(np.linalg.norm(rows - np.outer(ancilla, junk)))


def state_distance(exp: ExperimentSpec) -> StateDistance:
    rows = formula_rows(exp)
    junk = _aligned_junk(exp, rows)
    dicke = dicke_state(exp.n, exp.k).amplitudes
    fidelity = abs(np.vdot(np.outer(dicke, junk), rows)) ** 2
    return StateDistance(_distance(rows, dicke, junk), float(fidelity))


def best_junk_fidelity(exp: ExperimentSpec) -> float:
    """Fidelity with ``junk (x) D`` maximized over all unit junk vectors (diagnostic)."""
    rows = formula_rows(exp)
    v = dicke_state(exp.n, exp.k).amplitudes.conj() @ rows
    return float(np.vdot(v, v).real)


def ideal_measurement_target(n: int, k: int, party: int, label: str) -> np.ndarray:
    """Ancilla vector ``M* |D_N^k>`` for the ideal spin observable."""
    if label not in IDEAL_MATRICES:
        raise DomainError(f"no ideal counterpart for label {label!r}")
    op = LocalObservable(party, label, IDEAL_MATRICES[label])
    return apply_local(op, dicke_state(n, k)).amplitudes


def certify_measurement(exp: ExperimentSpec, party: int, label: str, junk: np.ndarray | None = None) -> float:
    """``||Phi(M|psi>) - junk (x) M*|D>||`` for one physical observable.

    ``junk`` may be passed to reuse the phase-aligned junk vector of ``exp``.
    """
    m = exp.observable(party, label)
    if junk is None:
        junk = _aligned_junk(exp, formula_rows(exp))
    rows = formula_rows(exp, apply_local(m, exp.state))
    return _distance(rows, ideal_measurement_target(exp.n, exp.k, party, label), junk)


def certify_z_via_sign(exp: ExperimentSpec, party: int) -> float:
    """Z certification distance using ``P^a Z = (-1)^a P^a`` on the state's branches."""
    rows = formula_rows(exp)
    junk = _aligned_junk(exp, rows)
    signs = 1 - 2 * ((np.arange(2**exp.n) >> (party - 1)) & 1)
    return _distance(signs[:, None] * rows, ideal_measurement_target(exp.n, exp.k, party, "Z"), junk)


def measurement_distances(exp: ExperimentSpec) -> dict[str, float]:
    """Certification distance for every assigned observable, keyed ``"party:label"``."""
    junk = _aligned_junk(exp, formula_rows(exp))
    out = {}
    for party in range(1, exp.n + 1):
        for label in sorted(exp.measurements[party]):
            out[f"{party}:{label}"] = certify_measurement(exp, party, label, junk)
    return out


RESIDUAL_FAMILIES = (
    "relabel_x",
    "relabel_z",
    "orthogonality",
    "d_substitution",
    "d_substitution_cyclic",
    "anticommutation",
    "swapping",
)


def identity_residuals(exp: ExperimentSpec) -> dict[str, float]:
    """Max residual of each operator identity the ideal proof relies on."""
    n, k = exp.n, exp.k
    res = dict.fromkeys(RESIDUAL_FAMILIES, 0.0)

    def bump(key, value):
        res[key] = max(res[key], float(value))

    x_n, z_n, d_n = (exp.observable(n, lab) for lab in ("X", "Z", "D"))
    for shift in range(n - 1):
        order = cyclic_order(n, shift)
        c_last = order[-1]
        x_c, z_c = exp.observable(c_last, "X"), exp.observable(c_last, "Z")
        for a in weight_strings(n - 2, k - 1):
            w = apply_sequence([exp.projector(p, b) for p, b in zip(order[:-1], a)], exp.state)
            xc_w, zc_w = apply_local(x_c, w), apply_local(z_c, w)
            xn_w, zn_w, dn_w = apply_local(x_n, w), apply_local(z_n, w), apply_local(d_n, w)
            bump("relabel_x", (xc_w - xn_w).norm())
            bump("relabel_z", (zc_w + zn_w).norm())
            bump("orthogonality", abs(inner(xc_w, zn_w)))
            bump("d_substitution", (dn_w - (xn_w + zn_w).scaled(1 / sqrt(2))).norm())
            bump("d_substitution_cyclic", (dn_w - (xc_w - zc_w).scaled(1 / sqrt(2))).norm())
            anti_n = apply_local(x_n, zn_w) + apply_local(z_n, xn_w)
            anti_c = apply_local(x_c, zc_w) + apply_local(z_c, xc_w)
            bump("anticommutation", max(anti_n.norm(), anti_c.norm()))

    projected = {}
    for a in weight_strings(n, k):
        ops = [exp.projector(p, b) for p, b in zip(range(1, n + 1), a)]
        projected[a] = apply_sequence(ops, exp.state)
    for a, pa in projected.items():
        for i in range(n):
            for j in range(n):
                if a[i] != 0 or a[j] != 1:
                    continue
                swapped = list(a)
                swapped[i], swapped[j] = 1, 0
                lhs = apply_local(exp.observable(j + 1, "X"), pa)
                rhs = apply_local(exp.observable(i + 1, "X"), projected[tuple(swapped)])
                bump("swapping", (lhs - rhs).norm())
    return res


def expected_branch_norm(n: int, k: int) -> float:
    return 1 / sqrt(comb(n, k))
