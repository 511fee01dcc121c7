"""Correlator schedule of the Dicke self-test and deviation extraction."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from math import comb, sqrt

import numpy as np

from .core import DomainError, SettingProduct, apply_local, expectation, hamming_weights, index_bits
from .experiment import ExperimentSpec, sample_correlator

FAMILIES = ("Zbasis", "XX", "ZZ", "XZ", "XD", "ZD")
# (operator on C_{N-1}, operator on A_N) for the correlator families
FAMILY_LABELS = {
    "XX": ("X", "X"),
    "ZZ": ("Z", "Z"),
    "XZ": ("X", "Z"),
    "XD": ("X", "D"),
    "ZD": ("Z", "D"),
}

THREADS_ENV = "DICKE_SELFTEST_THREADS"


def max_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SettingDescriptor:
    """One required correlator.

    For Zbasis, ``a`` assigns an outcome to every party ``A_1..A_N``. For the
    other families ``a`` covers ``C_1..C_{N-2}`` where ``C`` is
    ``(A_1..A_{N-1})`` cyclically shifted by ``shift``.
    """

    family: str
    a: tuple[int, ...]
    shift: int = 0

    def cyclic_parties(self, n: int) -> tuple[int, ...]:
        return cyclic_order(n, self.shift)

    @property
    def a_str(self) -> str:
        return "".join(map(str, self.a))


def cyclic_order(n: int, shift: int) -> tuple[int, ...]:
    """Parties ``(C_1, ..., C_{N-1})`` for a cyclic shift of ``(1, ..., N-1)``."""
    base = list(range(1, n))
    return tuple(base[shift:] + base[:shift])


def weight_strings(length: int, weight: int) -> list[tuple[int, ...]]:
    """All 0/1 tuples of ``length`` with ``weight`` ones, lexicographically sorted."""
    if weight < 0 or weight > length:
        return []
    out = []
    for ones in combinations(range(length), weight):
        s = [0] * length
        for i in ones:
            s[i] = 1
        out.append(tuple(s))
    return sorted(out)


def settings_count(n: int, k: int) -> int:
    return comb(n, k) + 5 * (n - 1) * comb(n - 2, k - 1)


def required_settings(n: int, k: int) -> list[SettingDescriptor]:
    if n < 2 or not 1 <= k <= n - 1:
        raise DomainError(f"invalid (n, k) = ({n}, {k})")
    if k - 1 > n - 2:
        raise DomainError(f"k-1={k - 1} exceeds n-2={n - 2}")
    out = [SettingDescriptor("Zbasis", a) for a in weight_strings(n, k)]
    prefixes = weight_strings(n - 2, k - 1)
    for family in FAMILIES[1:]:
        for shift in range(n - 1):
            out.extend(SettingDescriptor(family, a, shift) for a in prefixes)
    return out


def ideal_value(d: SettingDescriptor, n: int, k: int) -> float:
    c = comb(n, k)
    return {
        "Zbasis": 1 / c,
        "XX": 2 / c,
        "ZZ": -2 / c,
        "XZ": 0.0,
        "XD": sqrt(2) / c,
        "ZD": -sqrt(2) / c,
    }[d.family]


def prefix_projectors(exp: ExperimentSpec, a, parties):
    return [exp.projector(p, bit) for p, bit in zip(parties, a)]


def setting_product(exp: ExperimentSpec, d: SettingDescriptor) -> SettingProduct:
    """Physical operator product for a descriptor, using ``exp``'s observables."""
    n = exp.n
    if d.family == "Zbasis":
        return SettingProduct(tuple(prefix_projectors(exp, d.a, range(1, n + 1))))
    order = d.cyclic_parties(n)
    left, right = FAMILY_LABELS[d.family]
    factors = prefix_projectors(exp, d.a, order[:-1])
    factors.append(exp.observable(order[-1], left))
    factors.append(exp.observable(n, right))
    return SettingProduct(tuple(factors))


@dataclass(frozen=True)
class StatisticsEntry:
    descriptor: SettingDescriptor
    ideal: float
    measured: float

    @property
    def deviation(self) -> float:
        return self.measured - self.ideal


@dataclass(frozen=True)
class StatisticsReport:
    n: int
    k: int
    entries: tuple[StatisticsEntry, ...]

    @property
    def epsilon(self) -> float:
        return max(abs(e.deviation) for e in self.entries)

    @property
    def settings_count(self) -> int:
        return len(self.entries)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "epsilon": self.epsilon,
            "settings_count": self.settings_count,
            "entries": [
                {
                    "family": e.descriptor.family,
                    "shift": e.descriptor.shift,
                    "a": e.descriptor.a_str,
                    "ideal": e.ideal,
                    "measured": e.measured,
                    "deviation": e.deviation,
                }
                for e in self.entries
            ],
        }


CSV_COLUMNS = ("family", "shift", "a", "ideal", "measured", "deviation")


def verify(exp: ExperimentSpec, shots: int = 0, seed: int | None = None) -> StatisticsReport:
    """Evaluate the full schedule; ``shots == 0`` gives exact correlators.

    In sampled mode setting ``i`` draws from the seed ``seed ^ i``.
    """
    if shots and seed is None:
        raise DomainError("sampled verification requires a seed")
    schedule = required_settings(exp.n, exp.k)

    def measure(item):
        ordinal, d = item
        product = setting_product(exp, d)
        if shots == 0:
            return expectation(exp.state, product)
        return sample_correlator(exp, product, shots, seed ^ ordinal)

    workers = max_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            measured = list(pool.map(measure, enumerate(schedule)))
    else:
        measured = [measure(item) for item in enumerate(schedule)]
    entries = tuple(
        StatisticsEntry(d, ideal_value(d, exp.n, exp.k), m) for d, m in zip(schedule, measured)
    )
    return StatisticsReport(exp.n, exp.k, entries)


def zbasis_distribution(exp: ExperimentSpec) -> np.ndarray:
    """Probabilities of every all-parties Z outcome, little-endian order."""
    n = exp.n
    amps = exp.state.amplitudes
    probs = np.empty(2**n)
    for idx in range(2**n):
        v = exp.state
        for party, bit in enumerate(index_bits(idx, n), start=1):
            v = apply_local(exp.projector(party, bit), v)
        probs[idx] = np.vdot(amps, v.amplitudes).real
    return probs


def zbasis_distribution_check(exp: ExperimentSpec) -> float:
    """Largest probability of a Z outcome whose weight differs from ``k``."""
    probs = zbasis_distribution(exp)
    off = probs[hamming_weights(exp.n) != exp.k]
    return float(off.max()) if off.size else 0.0
