"""Closed-form robustness bound and the end-to-end certification report."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from itertools import combinations
from math import comb, factorial, sqrt

from .core import DomainError
from .experiment import ExperimentSpec
from .isometry import best_junk_fidelity, measurement_distances, state_distance
from .statistics import verify

# (2 + 2*sqrt(2)) * sqrt(2), the prefactor between delta1 and the D-substitution error
DELTA1_PREFACTOR = (2 + 2 * sqrt(2)) * sqrt(2)


def _check_nk(n: int, k: int) -> None:
    if n < 2 or not 1 <= k <= n - 1:
        raise DomainError(f"invalid (n, k) = ({n}, {k})")


def swap_count(n: int, k: int) -> int:
    """Swapping-identity applications needed: Gamma(n) / (Gamma(k) Gamma(n-k))."""
    _check_nk(n, k)
    return factorial(n - 1) // (factorial(k - 1) * factorial(n - k - 1))


def swap_count_oracle(n: int, k: int, reference: tuple[int, ...] | None = None) -> int:
    """Sum of Hamming distances / 2 from every weight-k string to ``reference``.

    ``reference`` defaults to ``1^k 0^(n-k)``.
    """
    _check_nk(n, k)
    if n > 20:
        raise DomainError("enumeration limited to n <= 20")
    if reference is None:
        reference = (1,) * k + (0,) * (n - k)
    if len(reference) != n or sum(reference) != k:
        raise DomainError("reference must be a weight-k string of length n")
    total = 0
    for ones in combinations(range(n), k):
        s = [0] * n
        for i in ones:
            s[i] = 1
        total += sum(x != y for x, y in zip(s, reference))
    assert total % 2 == 0
    return total // 2


def branch_norm_estimate(n: int, k: int, eps: float) -> float:
    return sqrt(abs(2 / comb(n, k) - 4 * eps))


def relabel_error(eps: float) -> float:
    return sqrt(6 * abs(eps))


def xz_overlap_bound(n: int, k: int, eps: float) -> float:
    return abs(eps) + branch_norm_estimate(n, k, eps) * relabel_error(eps)


def delta1(n: int, k: int, eps: float) -> float:
    _check_nk(n, k)
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    inner = abs(2 * (sqrt(2) - 4) * eps) + xz_overlap_bound(n, k, eps)
    return DELTA1_PREFACTOR * sqrt(inner)


def theta_norm_gap(c: int, eps: float) -> float:
    """``| sqrt(|1 + c eps|) - 1 |`` without cancellation for small ``eps``."""
    x = 1 + c * eps
    # x - 1 formed without subtracting nearly equal numbers
    diff = c * eps if x >= 0 else -2 - c * eps
    return abs(diff / (sqrt(abs(x)) + 1))


@dataclass(frozen=True)
class BoundBreakdown:
    n: int
    k: int
    epsilon: float
    branch_norm: float
    relabel_error: float
    xz_overlap_bound: float
    delta1: float
    swap_count: int
    first_term: float
    second_term: float
    total: float
    # non-normative: wrong-weight branches bounded by sqrt(eps) instead of eps
    first_term_sqrt_variant: float

    def to_dict(self) -> dict:
        return asdict(self)


def total_bound(n: int, k: int, eps: float) -> BoundBreakdown:
    _check_nk(n, k)
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    c = comb(n, k)
    swaps = swap_count(n, k)
    d1 = delta1(n, k, eps)
    rel = relabel_error(eps)
    wrong_weight = 2**n - c
    swap_part = swaps * (2 * d1 + rel)
    first = wrong_weight * abs(eps) + swap_part
    second = theta_norm_gap(c, eps)
    return BoundBreakdown(
        n=n,
        k=k,
        epsilon=eps,
        branch_norm=branch_norm_estimate(n, k, eps),
        relabel_error=rel,
        xz_overlap_bound=xz_overlap_bound(n, k, eps),
        delta1=d1,
        swap_count=swaps,
        first_term=first,
        second_term=second,
        total=first + second,
        first_term_sqrt_variant=wrong_weight * sqrt(abs(eps)) + swap_part,
    )


@dataclass(frozen=True)
class CertificationReport:
    n: int
    k: int
    epsilon: float
    empirical_distance: float
    dicke_fidelity: float
    best_junk_fidelity: float
    measurement_distances: dict[str, float]
    bound: BoundBreakdown

    @property
    def bound_respected(self) -> bool:
        return self.empirical_distance <= self.bound.total

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "epsilon": self.epsilon,
            "empirical_distance": self.empirical_distance,
            "dicke_fidelity": self.dicke_fidelity,
            "best_junk_fidelity": self.best_junk_fidelity,
            "measurement_distances": dict(sorted(self.measurement_distances.items())),
            "bound": self.bound.to_dict(),
            "bound_respected": self.bound_respected,
        }


def certify(exp: ExperimentSpec, shots: int = 0, seed: int | None = None) -> CertificationReport:
    """Run verification, the isometry, and the bound on one experiment."""
    eps = verify(exp, shots=shots, seed=seed).epsilon
    dist = state_distance(exp)
    return CertificationReport(
        n=exp.n,
        k=exp.k,
        epsilon=eps,
        empirical_distance=dist.l2_distance,
        dicke_fidelity=dist.dicke_fidelity,
        best_junk_fidelity=best_junk_fidelity(exp),
        measurement_distances=measurement_distances(exp),
        bound=total_bound(exp.n, exp.k, eps),
    )
