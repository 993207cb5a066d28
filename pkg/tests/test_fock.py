"""Operator algebra and state-preparation checks for the Fock layer."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kerrlattice.errors import ConfigError
from kerrlattice.fock import (
    FockSpace,
    annihilation,
    coherent_state,
    creation,
    fock_state,
    identity,
    number,
)


class TestOperators:
    @pytest.mark.parametrize("dim", [2, 3, 8, 21])
    def test_commutator_below_cutoff(self, dim):
        # [a, a^dag] = 1 on every level except the top one, where the
        # truncation shows up as -n_max instead of +1.
        a = annihilation(dim)
        comm = a @ creation(dim) - creation(dim) @ a
        expected = np.eye(dim)
        expected[-1, -1] = -(dim - 1)
        np.testing.assert_allclose(comm, expected, atol=1e-14)

    @pytest.mark.parametrize("dim", [2, 5, 16])
    def test_number_is_adag_a(self, dim):
        a = annihilation(dim)
        np.testing.assert_allclose(creation(dim) @ a, number(dim), atol=1e-14)

    def test_annihilation_matrix_elements(self):
        a = annihilation(4)
        expected = np.zeros((4, 4))
        expected[0, 1] = 1.0
        expected[1, 2] = np.sqrt(2.0)
        expected[2, 3] = np.sqrt(3.0)
        np.testing.assert_allclose(a, expected, atol=0)

    def test_number_hermitian_psd(self):
        n = number(12)
        np.testing.assert_allclose(n, n.conj().T, atol=0)
        assert np.all(np.linalg.eigvalsh(n) >= 0)

    def test_hard_core_limit(self):
        space = FockSpace(n_max=1)
        assert space.dim == 2
        np.testing.assert_allclose(space.a, [[0, 1], [0, 0]], atol=0)

    def test_rejects_tiny_dim(self):
        with pytest.raises(ConfigError):
            annihilation(1)
        with pytest.raises(ConfigError):
            FockSpace(n_max=0)

    def test_cached_operators_are_readonly(self):
        a = annihilation(6)
        with pytest.raises(ValueError):
            a[0, 0] = 1.0


class TestStates:
    def test_fock_state_basis(self):
        ket = fock_state(2, 5)
        assert ket[2] == 1.0 and np.linalg.norm(ket) == 1.0

    def test_fock_state_out_of_range(self):
        with pytest.raises(ConfigError):
            fock_state(5, 5)

    def test_vacuum_coherent_state(self):
        ket = coherent_state(0.0, 8)
        np.testing.assert_allclose(ket, fock_state(0, 8), atol=0)

    @given(
        re=st.floats(-1.2, 1.2),
        im=st.floats(-1.2, 1.2),
    )
    @settings(max_examples=40, deadline=None)
    def test_coherent_state_normalized(self, re, im):
        ket = coherent_state(re + 1j * im, 16)
        assert abs(np.linalg.norm(ket) - 1.0) < 1e-12

    def test_coherent_state_is_annihilation_eigenstate(self):
        # With a generous cutoff the truncated state reproduces
        # a|alpha> = alpha|alpha> to high accuracy.
        alpha = 0.7 - 0.4j
        dim = 30
        ket = coherent_state(alpha, dim)
        resid = annihilation(dim) @ ket - alpha * ket
        assert np.linalg.norm(resid) < 1e-10

    def test_coherent_state_mean_occupation(self):
        alpha = 1.1j
        dim = 40
        ket = coherent_state(alpha, dim)
        nbar = np.real(ket.conj() @ number(dim) @ ket)
        assert abs(nbar - abs(alpha) ** 2) < 1e-10

    def test_coherent_amplitude_guard(self):
        # |alpha|^2 must stay below half the cutoff.
        with pytest.raises(ConfigError):
            coherent_state(2.0, 4)
        coherent_state(1.0, 4)  # |alpha|^2 = 1 <= 1.5: fine

    def test_identity(self):
        np.testing.assert_allclose(identity(3), np.eye(3), atol=0)
