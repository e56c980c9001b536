import math

import numpy as np
import pytest

from conftest import basis_state, random_spec, reference_hamiltonian
from dimerchain.engine import commutator_with_sz
from dimerchain.errors import ContractViolation
from dimerchain.hamiltonian import (
    ChainSpec,
    LatticeParams,
    Model,
    build_xx,
    build_xxz,
    chain_block,
    coupling_at,
    effective_couplings,
    sector_indices,
    sector_values,
    total_sz_operator,
)
from dimerchain.numerics import hermitian_eig


def xx(n, delta, j=1.0):
    return ChainSpec(Model.XX, n, j, delta)


def xxz(n, delta, aniso, j=1.0):
    return ChainSpec(Model.XXZ, n, j, delta, aniso)


class TestChainSpec:
    @pytest.mark.parametrize("delta", [-0.1, 1.0, 1.5])
    def test_delta_range(self, delta):
        with pytest.raises(ValueError):
            xx(4, delta)

    def test_protocol_size(self):
        with pytest.raises(ValueError):
            xx(2, 0.5).require_protocol_size()
        with pytest.raises(ValueError):
            xx(5, 0.5).require_protocol_size()
        xx(4, 0.5).require_protocol_size()


class TestCouplingAt:
    def test_pattern(self):
        s = xx(4, 0.8)
        assert coupling_at(1, s) == pytest.approx(1.8)
        assert coupling_at(2, s) == pytest.approx(0.2)
        assert coupling_at(3, s) == pytest.approx(1.8)

    def test_uniform(self):
        assert all(coupling_at(j, xx(6, 0.0)) == 1.0 for j in range(1, 6))

    @pytest.mark.parametrize("j", [0, 4])
    def test_range(self, j):
        with pytest.raises(ValueError):
            coupling_at(j, xx(4, 0.5))


class TestBuilders:
    def test_two_site_xx(self):
        h = build_xx(xx(2, 0.5))
        expected = np.zeros((4, 4))
        expected[1, 2] = expected[2, 1] = 1.5
        np.testing.assert_array_equal(h, expected)
        np.testing.assert_allclose(hermitian_eig(h).eigenvalues, [-1.5, 0, 0, 1.5], atol=1e-14)

    def test_polarized_expectation_zero(self, rng):
        for _ in range(5):
            s = random_spec(rng, 8)
            s = ChainSpec(Model.XX, s.n_sites, s.j_coupling, s.delta)
            assert build_xx(s)[0, 0] == 0

    def test_heisenberg_dimer(self):
        np.testing.assert_allclose(
            hermitian_eig(build_xxz(xxz(2, 0.0, 1.0))).eigenvalues, [-1.5, 0.5, 0.5, 0.5], atol=1e-14
        )

    def test_xxz_reduces_to_xx(self):
        for n in (2, 5, 8):
            np.testing.assert_array_equal(build_xxz(xxz(n, 0.3, 0.0)), build_xx(xx(n, 0.3)))

    def test_ising_limit_neel(self):
        psi = hermitian_eig(build_xxz(xxz(4, 0.0, 10.0))).eigenvectors[:, 0]
        weight = abs(psi[int("0101", 2)]) ** 2 + abs(psi[int("1010", 2)]) ** 2
        assert weight > 0.9

    def test_uniform_xx_spectrum_symmetric(self):
        w = hermitian_eig(build_xx(xx(4, 0.0))).eigenvalues
        np.testing.assert_allclose(np.sort(w), np.sort(-w), atol=1e-12)

    def test_model_guard(self):
        with pytest.raises(ContractViolation):
            build_xx(xxz(4, 0.2, 1.0))
        with pytest.raises(ContractViolation):
            build_xxz(xx(4, 0.2))

    def test_matches_pauli_construction(self, rng):
        for _ in range(12):
            s = random_spec(rng, 7)
            build = build_xx if s.model is Model.XX else build_xxz
            np.testing.assert_allclose(build(s), reference_hamiltonian(s), atol=1e-13)

    def test_sector_block_is_restriction(self, rng):
        s = xxz(6, 0.4, 0.7)
        full = chain_block(s.bond_strengths(), s.zz_anisotropy, 6)
        for sz in sector_values(6):
            idx = sector_indices(6, sz)
            np.testing.assert_array_equal(chain_block(s.bond_strengths(), 0.7, 6, idx), full[np.ix_(idx, idx)])


class TestSymmetries:
    def test_hermitian_and_conserving(self, rng):
        for _ in range(25):
            s = random_spec(rng, 10)
            h = build_xx(s) if s.model is Model.XX else build_xxz(s)
            assert np.max(np.abs(h - h.conj().T)) <= 1e-12
            assert commutator_with_sz(h, s.n_sites) <= 1e-12
            sz = total_sz_operator(s.n_sites)
            if s.n_sites <= 8:
                assert np.max(np.abs(h @ sz - sz @ h)) <= 1e-12

    @staticmethod
    def _profiles(n, d):
        plus = [1 + (-1) ** (j + 1) * d for j in range(1, n)]
        minus = [1 - (-1) ** (j + 1) * d for j in range(1, n)]
        return plus, minus

    @pytest.mark.parametrize("n", [3, 5, 7])
    def test_sign_flip_is_site_reversal_odd(self, rng, n):
        d, aniso = float(rng.uniform(0.1, 0.9)), float(rng.uniform(-2, 2))
        plus, minus = self._profiles(n, d)
        np.testing.assert_allclose(
            np.linalg.eigvalsh(chain_block(plus, aniso, n)),
            np.linalg.eigvalsh(chain_block(minus[::-1], aniso, n)),
            atol=1e-10,
        )

    @pytest.mark.parametrize("n", [4, 6, 8])
    def test_sign_flip_changes_even_spectrum(self, n):
        # even N: strong-weak-...-strong and weak-strong-...-weak are different chains
        plus, minus = self._profiles(n, 0.5)
        w_plus = np.linalg.eigvalsh(chain_block(plus, 0.3, n))
        w_minus = np.linalg.eigvalsh(chain_block(minus[::-1], 0.3, n))
        assert np.max(np.abs(w_plus - w_minus)) > 1e-3

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7, 8])
    def test_site_reversal_invariance(self, rng, n):
        plus, _ = self._profiles(n, float(rng.uniform(0.1, 0.9)))
        aniso = float(rng.uniform(-2, 2))
        np.testing.assert_allclose(
            np.linalg.eigvalsh(chain_block(plus, aniso, n)),
            np.linalg.eigvalsh(chain_block(plus[::-1], aniso, n)),
            atol=1e-10,
        )

    def test_xx_particle_hole(self, rng):
        for n in range(2, 11):
            w = np.linalg.eigvalsh(chain_block(xx(n, float(rng.uniform(0, 0.95))).bond_strengths(), 0.0, n))
            np.testing.assert_allclose(w, -w[::-1], atol=1e-10)


class TestSectors:
    def test_total_sz(self):
        sz = total_sz_operator(4)
        assert sz[0, 0] == 4
        assert sz[int("0101", 2), int("0101", 2)] == 0

    def test_small_sectors(self):
        np.testing.assert_array_equal(sector_indices(2, 0), [1, 2])
        assert len(sector_indices(4, 0)) == 6

    def test_partition(self):
        for n in range(1, 9):
            parts = [sector_indices(n, sz) for sz in sector_values(n)]
            assert sum(len(p) for p in parts) == 2**n
            assert sorted(np.concatenate(parts).tolist()) == list(range(2**n))
            for p, sz in zip(parts, sector_values(n)):
                assert len(p) == math.comb(n, (n - sz) // 2)

    def test_parity(self):
        with pytest.raises(ValueError):
            sector_indices(4, 1)
        with pytest.raises(ValueError):
            sector_indices(4, 6)

    def test_basis_convention(self):
        # site 1 is the most significant bit; |0> is sigma^z = +1
        assert total_sz_operator(2)[int("01", 2), int("01", 2)] == 0
        assert np.argmax(basis_state("10")) == 2


class TestEffectiveCouplings:
    def test_xx_point(self):
        with pytest.warns(UserWarning):
            jz, jp = effective_couplings(LatticeParams(1.0, 1.0, 2.0, 2.0, 1.0))
        assert jz == pytest.approx(0.0, abs=1e-15)
        assert jp == pytest.approx(2.0)

    def test_no_tunneling(self):
        assert effective_couplings(LatticeParams(0, 0, 1, 1, 1)) == (0.0, 0.0)

    def test_single_species(self):
        with pytest.warns(UserWarning):
            jz, jp = effective_couplings(LatticeParams(1.0, 0.0, 1.0, 1.0, 1.0))
        assert jz == pytest.approx(-0.5)
        assert jp == pytest.approx(1.0)

    def test_zero_interaction(self):
        with pytest.raises(ValueError):
            LatticeParams(0.1, 0.1, 0.0, 1.0, 1.0)

    def test_mott_regime_flag(self):
        assert LatticeParams(0.01, 0.02, 1.0, 1.0, 0.5).in_mott_regime
        assert not LatticeParams(0.2, 0.02, 1.0, 1.0, 0.5).in_mott_regime
