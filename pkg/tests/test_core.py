from itertools import product
from math import comb, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import kron_operator
from dicke_selftest.core import (
    PAULI_D,
    PAULI_X,
    PAULI_Z,
    DomainError,
    LocalObservable,
    PureState,
    SettingProduct,
    append_ancillas,
    apply_local,
    basis_index,
    basis_state,
    dicke_state,
    expectation,
    inner,
    projector,
)


def X(p):
    return LocalObservable(p, "X", PAULI_X)


def Z(p):
    return LocalObservable(p, "Z", PAULI_Z)


def P(p, a):
    return projector(Z(p), a)


def random_state(n, rng):
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return PureState(n, v / np.linalg.norm(v), normalized=True)


class TestPureState:
    def test_length_checked(self):
        with pytest.raises(DomainError):
            PureState(2, np.ones(3))

    def test_normalized_flag_checked(self):
        with pytest.raises(DomainError):
            PureState(1, np.array([1.0, 1.0]), normalized=True)

    def test_amplitudes_read_only(self):
        s = basis_state([0, 1])
        with pytest.raises(ValueError):
            s.amplitudes[0] = 1.0

    def test_little_endian(self):
        # party 1 owns bit 0
        assert basis_index([1, 0, 0]) == 1
        assert basis_index([0, 0, 1]) == 4
        assert basis_state([0, 1]).amplitudes[2] == 1


class TestLocalObservable:
    @pytest.mark.parametrize("kind,m", [("X", PAULI_X), ("Z", PAULI_Z), ("D", PAULI_D)])
    def test_involutions(self, kind, m):
        op = LocalObservable(1, kind, m)
        assert np.allclose(op.matrix @ op.matrix, np.eye(2), atol=1e-14)

    def test_rejects_non_involution(self):
        with pytest.raises(DomainError):
            LocalObservable(1, "X", PAULI_X * 0.5)

    def test_rejects_non_hermitian(self):
        with pytest.raises(DomainError):
            LocalObservable(1, "X", np.array([[0, 1j], [1j, 0]]))

    def test_projectors_partition_identity(self):
        p0, p1 = P(1, 0), P(1, 1)
        assert np.allclose(p0.matrix + p1.matrix, np.eye(2), atol=1e-14)
        assert np.allclose(p0.matrix @ p0.matrix, p0.matrix, atol=1e-14)

    def test_setting_rejects_repeated_party(self):
        with pytest.raises(DomainError):
            SettingProduct((X(1), Z(1)))


class TestDicke:
    def test_2_1(self):
        amps = dicke_state(2, 1).amplitudes
        assert np.allclose(amps, [0, 1 / sqrt(2), 1 / sqrt(2), 0], atol=1e-15)

    def test_3_1(self):
        amps = dicke_state(3, 1).amplitudes
        assert np.allclose(amps[[1, 2, 4]], 1 / sqrt(3))
        assert np.count_nonzero(amps) == 3

    def test_4_2(self):
        amps = dicke_state(4, 2).amplitudes
        support = [i for i in range(16) if bin(i).count("1") == 2]
        assert np.allclose(amps[support], 1 / sqrt(6))
        assert np.count_nonzero(amps) == 6

    @pytest.mark.parametrize("n,k", [(3, 0), (3, 3), (15, 2)])
    def test_domain(self, n, k):
        with pytest.raises(DomainError):
            dicke_state(n, k)

    @pytest.mark.parametrize("n,k", [(n, k) for n in range(2, 8) for k in range(1, n)])
    def test_permutation_symmetry(self, n, k):
        amps = dicke_state(n, k).amplitudes
        for i in range(n):
            for j in range(i + 1, n):
                perm = np.empty(2**n, dtype=int)
                for idx in range(2**n):
                    bi, bj = (idx >> i) & 1, (idx >> j) & 1
                    swapped = idx & ~((1 << i) | (1 << j)) | (bj << i) | (bi << j)
                    perm[idx] = swapped
                assert np.array_equal(amps[perm], amps)

    @pytest.mark.parametrize("n,k", [(n, k) for n in range(2, 9) for k in range(1, n)])
    def test_single_z_expectation(self, n, k):
        d = dicke_state(n, k)
        for p in range(1, n + 1):
            assert abs(expectation(d, SettingProduct((Z(p),))) - (1 - 2 * k / n)) <= 1e-12


class TestApplyLocal:
    def test_z_sign_flip(self):
        for bits in product((0, 1), repeat=3):
            out = apply_local(Z(1), basis_state(bits))
            assert out.amplitudes[basis_index(bits)] == (-1) ** bits[0]
            assert not out.normalized

    def test_p1_then_p0_is_zero(self, rng):
        s = random_state(3, rng)
        out = apply_local(P(2, 0), apply_local(P(2, 1), s))
        assert np.max(np.abs(out.amplitudes)) == 0

    def test_x_twice(self, rng):
        s = random_state(4, rng)
        out = apply_local(X(3), apply_local(X(3), s))
        assert np.max(np.abs(out.amplitudes - s.amplitudes)) <= 1e-14

    def test_party_out_of_range(self):
        with pytest.raises(DomainError):
            apply_local(X(4), dicke_state(3, 1))

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(1, 6), data=st.data())
    def test_matches_kron(self, n, data):
        party = data.draw(st.integers(1, n))
        seed = data.draw(st.integers(0, 2**32 - 1))
        r = np.random.default_rng(seed)
        m = r.standard_normal((2, 2)) + 1j * r.standard_normal((2, 2))
        m = m + m.conj().T
        evals, evecs = np.linalg.eigh(m)
        m = evecs @ np.diag(np.sign(evals)) @ evecs.conj().T  # Hermitian involution
        state = random_state(n, r)
        got = apply_local(LocalObservable(party, "X", m), state).amplitudes
        want = kron_operator(n, {party: m}) @ state.amplitudes
        assert np.allclose(got, want, atol=1e-13)

    def test_projector_completeness(self, rng):
        n = 4
        s = random_state(n, rng)
        total = np.zeros(2**n, dtype=complex)
        for bits in product((0, 1), repeat=n):
            v = s
            for p, b in enumerate(bits, start=1):
                v = apply_local(P(p, b), v)
            total += v.amplitudes
        assert np.max(np.abs(total - s.amplitudes)) <= 1e-12


class TestExpectation:
    def test_w_projector(self):
        setting = SettingProduct((P(1, 1), P(2, 0), P(3, 0)))
        assert abs(expectation(dicke_state(3, 1), setting) - 1 / 3) <= 1e-14

    def test_dicke42_pxx(self):
        setting = SettingProduct((P(1, 1), P(2, 0), X(3), X(4)))
        assert abs(expectation(dicke_state(4, 2), setting) - 2 / 6) <= 1e-14

    def test_bell_like_zz(self):
        assert abs(expectation(dicke_state(2, 1), SettingProduct((Z(1), Z(2)))) + 1) <= 1e-14

    def test_requires_normalized(self):
        with pytest.raises(DomainError):
            expectation(PureState(1, np.array([2.0, 0.0])), SettingProduct((Z(1),)))

    def test_complex_hermitian_observable(self):
        y = LocalObservable(1, "X", np.array([[0, -1j], [1j, 0]]))
        s = PureState(1, np.array([1, 1j]) / sqrt(2), normalized=True)
        assert abs(expectation(s, SettingProduct((y,))) - 1) <= 1e-14

    def test_global_phase_invariance(self, rng):
        s = random_state(3, rng)
        setting = SettingProduct((X(1), Z(3)))
        phased = s.with_phase(np.exp(0.7j))
        assert abs(expectation(s, setting) - expectation(phased, setting)) <= 1e-14

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_kron(self, seed):
        r = np.random.default_rng(seed)
        n = 5
        s = random_state(n, r)
        setting = SettingProduct((P(2, 1), X(4), Z(5)))
        op = kron_operator(n, {2: P(2, 1).matrix, 4: PAULI_X, 5: PAULI_Z})
        want = np.vdot(s.amplitudes, op @ s.amplitudes).real
        assert abs(expectation(s, setting) - want) <= 1e-13


class TestInner:
    def test_self(self):
        d = dicke_state(4, 2)
        assert abs(inner(d, d) - 1) <= 1e-14

    def test_w_basis(self):
        assert abs(inner(dicke_state(3, 1), basis_state([1, 0, 0])) - 1 / sqrt(3)) <= 1e-15

    def test_disjoint_sectors(self):
        assert inner(dicke_state(4, 1), dicke_state(4, 2)) == 0

    def test_mismatch(self):
        with pytest.raises(DomainError):
            inner(dicke_state(3, 1), dicke_state(4, 1))


class TestAncillas:
    def test_zero(self):
        d = dicke_state(3, 1)
        assert np.array_equal(append_ancillas(d, 0).amplitudes, d.amplitudes)

    def test_one(self):
        s = PureState(1, np.array([0.6, 0.8j]), normalized=True)
        assert np.array_equal(append_ancillas(s, 1).amplitudes, [0.6, 0.8j, 0, 0])

    @pytest.mark.parametrize("m", range(5))
    def test_norm_preserved(self, m):
        d = dicke_state(4, 2)
        assert abs(append_ancillas(d, m).norm() - 1) <= 1e-15

    def test_cap(self):
        with pytest.raises(DomainError):
            append_ancillas(dicke_state(14, 7), 11)

    def test_count_identity(self):
        for n in range(2, 8):
            for k in range(1, n):
                assert np.count_nonzero(dicke_state(n, k).amplitudes) == comb(n, k)
