"""Reference and noisy experiments, coherent noise, and shot sampling."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from math import cos, pi, sin
from typing import Mapping

import numpy as np

from .core import (
    I2,
    OPERATOR_TOL,
    PAULI_D,
    PAULI_X,
    PAULI_Z,
    DomainError,
    LocalObservable,
    PureState,
    SettingProduct,
    apply_matrix,
    dicke_state,
    expectation,
    inner,
    projector,
)

LABELS_ALL = ("X", "Z")
LABEL_FINAL = "D"

NOISE_KINDS = ("none", "state", "rotation", "shots")


def allowed_labels(party: int, n: int) -> tuple[str, ...]:
    return LABELS_ALL + (LABEL_FINAL,) if party == n else LABELS_ALL


@dataclass(frozen=True, eq=False)
class ExperimentSpec:
    """Shared state plus per-party measurement assignment.

    ``measurements[party][label]`` holds the physical observable; parties
    ``1..n-1`` carry X and Z, party ``n`` also carries D.
    """

    n: int
    k: int
    state: PureState
    measurements: Mapping[int, Mapping[str, LocalObservable]] = field(repr=False)

    def __post_init__(self):
        if self.n < 2 or not 1 <= self.k <= self.n - 1:
            raise DomainError(f"invalid (n, k) = ({self.n}, {self.k})")
        if self.state.n_qubits != self.n:
            raise DomainError(f"state has {self.state.n_qubits} qubits, expected {self.n}")
        if not self.state.normalized:
            raise DomainError("experiment state must be normalized")
        if sorted(self.measurements) != list(range(1, self.n + 1)):
            raise DomainError(f"measurements must cover parties 1..{self.n}")
        frozen = {}
        for party in range(1, self.n + 1):
            labels = self.measurements[party]
            if sorted(labels) != sorted(allowed_labels(party, self.n)):
                raise DomainError(
                    f"party {party} must carry labels {allowed_labels(party, self.n)}, got {sorted(labels)}"
                )
            for label, obs in labels.items():
                if obs.party != party or obs.kind != label:
                    raise DomainError(f"observable {obs.kind}@{obs.party} filed under {label}@{party}")
            frozen[party] = dict(labels)
        object.__setattr__(self, "measurements", frozen)

    def observable(self, party: int, label: str) -> LocalObservable:
        try:
            return self.measurements[party][label]
        except KeyError:
            raise DomainError(f"no observable {label!r} assigned to party {party}") from None

    def projector(self, party: int, outcome: int) -> LocalObservable:
        return projector(self.observable(party, "Z"), outcome)


@dataclass(frozen=True)
class NoiseSpec:
    """Coherent noise applied on top of the reference experiment.

    kind ``state``: rotate the state by ``theta`` away from the Dicke state.
    kind ``rotation``: ``rotations`` holds ``(party, label, theta)`` triples.
    kind ``shots``: estimate correlators from ``shots`` samples.
    """

    kind: str = "none"
    theta: float = 0.0
    seed: int | None = None
    rotations: tuple[tuple[int, str, float], ...] = ()
    shots: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise DomainError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.theta <= pi:
            raise DomainError(f"theta={self.theta} outside [0, pi]")
        for _, _, t in self.rotations:
            if not 0.0 <= abs(t) <= pi:
                raise DomainError(f"rotation angle {t} outside [-pi, pi]")
        if self.kind == "shots" and self.shots < 1:
            raise DomainError("shot noise needs shots >= 1")
        if self.kind in ("state", "shots") and self.seed is None:
            raise DomainError(f"noise kind {self.kind!r} requires a seed")

    @property
    def param(self) -> float:
        if self.kind == "state":
            return self.theta
        if self.kind == "rotation":
            return max((abs(t) for _, _, t in self.rotations), default=0.0)
        if self.kind == "shots":
            return float(self.shots)
        return 0.0


def reference_experiment(n: int, k: int) -> ExperimentSpec:
    state = dicke_state(n, k)
    measurements = {}
    for party in range(1, n + 1):
        ops = {"X": LocalObservable(party, "X", PAULI_X), "Z": LocalObservable(party, "Z", PAULI_Z)}
        if party == n:
            ops["D"] = LocalObservable(party, "D", PAULI_D)
        measurements[party] = ops
    return ExperimentSpec(n, k, state, measurements)


def random_unit_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def perturb_state(exp: ExperimentSpec, theta: float, seed: int) -> ExperimentSpec:
    """Rotate the state by ``theta`` towards a seeded direction orthogonal to the Dicke state."""
    if not 0.0 <= theta <= pi / 2:
        raise DomainError(f"theta={theta} outside [0, pi/2]")
    if theta == 0.0:
        return exp
    dicke = dicke_state(exp.n, exp.k)
    rng = np.random.default_rng(seed)
    chi = random_unit_vector(2**exp.n, rng)
    chi = chi - np.vdot(dicke.amplitudes, chi) * dicke.amplitudes
    chi /= np.linalg.norm(chi)
    amps = cos(theta) * dicke.amplitudes + sin(theta) * chi
    amps /= np.linalg.norm(amps)
    return replace(exp, state=PureState(exp.n, amps, normalized=True))


def y_rotation(theta: float) -> np.ndarray:
    c, s = cos(theta / 2), sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rotate_measurement(exp: ExperimentSpec, party: int, label: str, theta: float) -> ExperimentSpec:
    """Conjugate one observable by a Bloch-sphere rotation about y."""
    if party not in exp.measurements or label not in allowed_labels(party, exp.n):
        raise DomainError(f"cannot rotate {label!r} on party {party}")
    r = y_rotation(theta)
    old = exp.observable(party, label)
    new = LocalObservable(party, label, r @ old.matrix @ r.conj().T)
    measurements = {p: dict(ops) for p, ops in exp.measurements.items()}
    measurements[party][label] = new
    return replace(exp, measurements=measurements)


def apply_noise(exp: ExperimentSpec, noise: NoiseSpec) -> ExperimentSpec:
    """Noisy experiment for ``noise``; shot noise leaves the experiment unchanged."""
    if noise.kind == "state":
        return perturb_state(exp, noise.theta, noise.seed)
    if noise.kind == "rotation":
        for party, label, theta in noise.rotations:
            exp = rotate_measurement(exp, party, label, theta)
    return exp


def _check_setting_uses_assignment(exp: ExperimentSpec, setting: SettingProduct) -> None:
    for op in setting.factors:
        if op.party not in exp.measurements:
            raise DomainError(f"setting references unknown party {op.party}")
        if op.kind in ("P0", "P1"):
            allowed = exp.projector(op.party, int(op.kind[1]))
        elif op.kind == "I":
            continue
        else:
            allowed = exp.measurements[op.party].get(op.kind)
        if allowed is None or np.max(np.abs(allowed.matrix - op.matrix)) > OPERATOR_TOL:
            raise DomainError(f"setting uses {op.kind}@{op.party}, which is not the assigned operator")


def outcome_distribution(exp: ExperimentSpec, setting: SettingProduct) -> tuple[np.ndarray, np.ndarray]:
    """Exact outcome values and probabilities of the joint product measurement.

    Each factor is measured in its eigenbasis; returns one (value, probability)
    pair per computational basis string of the rotated state.
    """
    _check_setting_uses_assignment(exp, setting)
    n = exp.n
    amps = exp.state.amplitudes
    values = np.ones(2**n)
    idx = np.arange(2**n)
    for op in setting.factors:
        evals, evecs = np.linalg.eigh(op.matrix)
        amps = apply_matrix(amps, evecs.conj().T, op.party - 1, n)
        values = values * evals[(idx >> (op.party - 1)) & 1]
    probs = np.abs(amps) ** 2
    return values, probs / probs.sum()


def sample_correlator(exp: ExperimentSpec, setting: SettingProduct, shots: int, seed: int) -> float:
    """Empirical mean of ``shots`` product outcomes; ``shots == 0`` means exact."""
    if shots == 0:
        return expectation(exp.state, setting)
    if shots < 0:
        raise DomainError("shots must be nonnegative")
    values, probs = outcome_distribution(exp, setting)
    counts = np.random.default_rng(seed).multinomial(shots, probs)
    return float(counts @ values) / shots


def standard_error(exp: ExperimentSpec, setting: SettingProduct, shots: int) -> float:
    values, probs = outcome_distribution(exp, setting)
    mean = probs @ values
    var = max(probs @ values**2 - mean**2, 0.0)
    return float(np.sqrt(var / shots))


def fidelity_with_dicke(exp: ExperimentSpec) -> float:
    return abs(inner(dicke_state(exp.n, exp.k), exp.state)) ** 2


# --- JSON ---------------------------------------------------------------


def _complex_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def experiment_to_dict(exp: ExperimentSpec) -> dict:
    return {
        "n": exp.n,
        "k": exp.k,
        "state": [_complex_pair(z) for z in exp.state.amplitudes],
        "measurements": {
            str(party): {
                label: [[_complex_pair(z) for z in row] for row in exp.measurements[party][label].matrix]
                for label in allowed_labels(party, exp.n)
            }
            for party in range(1, exp.n + 1)
        },
    }


def experiment_from_dict(doc: dict) -> ExperimentSpec:
    try:
        n, k = int(doc["n"]), int(doc["k"])
        amps = np.array([complex(re, im) for re, im in doc["state"]])
        measurements = {}
        for party_key, labels in doc["measurements"].items():
            party = int(party_key)
            measurements[party] = {
                label: LocalObservable(party, label, np.array([[complex(*z) for z in row] for row in mat]))
                for label, mat in labels.items()
            }
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed experiment document: {exc}") from exc
    return ExperimentSpec(n, k, PureState(n, amps, normalized=True), measurements)


def load_experiment(path) -> ExperimentSpec:
    with open(path) as fh:
        return experiment_from_dict(json.load(fh))


def identity_observable(party: int) -> LocalObservable:
    return LocalObservable(party, "I", I2)
