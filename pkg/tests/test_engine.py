import numpy as np
import pytest
from scipy.linalg import expm

from conftest import random_spec, random_state, reference_hamiltonian
from dimerchain.engine import (
    Propagator,
    blocked_eig,
    chain_spectrum,
    evolve,
    ground_state,
)
from dimerchain.errors import ContractViolation, DegenerateGroundState, SymmetryViolation
from dimerchain.hamiltonian import ChainSpec, Model, build_hamiltonian
from dimerchain.numerics import evolve_spectral, hermitian_eig, partial_trace


def overlap_up_to_phase(a, b):
    return abs(abs(np.vdot(a, b)) - 1.0)


class TestBlockedEig:
    def test_two_site_xx(self):
        b = blocked_eig(build_hamiltonian(ChainSpec(Model.XX, 2, 1.0, 0.8)), 2)
        by_sz = {s.sz: s.eigenvalues for s in b.sectors}
        np.testing.assert_allclose(by_sz[0], [-1.8, 1.8], atol=1e-14)
        np.testing.assert_allclose(by_sz[2], [0.0])
        np.testing.assert_allclose(by_sz[-2], [0.0])

    def test_diagonal_operator(self, rng):
        d = rng.normal(size=16)
        b = blocked_eig(np.diag(d), 4)
        for s in b.sectors:
            np.testing.assert_allclose(s.eigenvalues, np.sort(d[s.indices]))

    def test_matches_full_diagonalization(self, rng):
        spec = random_spec(rng, 6, 6)
        h = reference_hamiltonian(spec)
        b = blocked_eig(h, 6)
        np.testing.assert_allclose(b.eigenvalues(), hermitian_eig(h).eigenvalues, atol=1e-9)
        assert sorted(np.concatenate([s.indices for s in b.sectors]).tolist()) == list(range(64))

    def test_cached_path_matches_dense(self, rng):
        for _ in range(6):
            spec = random_spec(rng, 8)
            np.testing.assert_allclose(
                chain_spectrum(spec).eigenvalues(),
                np.linalg.eigvalsh(reference_hamiltonian(spec)),
                atol=1e-9,
            )

    def test_symmetry_violation(self):
        h = np.zeros((4, 4))
        h[0, 1] = h[1, 0] = 1.0
        with pytest.raises(SymmetryViolation):
            blocked_eig(h, 2)


class TestGroundState:
    def test_two_site_singlet(self):
        gs = ground_state(ChainSpec(Model.XX, 2, 1.0, 0.8))
        assert gs.energy == pytest.approx(-1.8)
        assert gs.sector_sz == 0
        singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
        assert overlap_up_to_phase(gs.state, singlet) < 1e-12

    def test_strong_dimer_limit(self):
        gs = ground_state(ChainSpec(Model.XX, 4, 1.0, 0.95))
        singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
        assert abs(np.vdot(np.kron(singlet, singlet), gs.state)) ** 2 > 0.99

    def test_ferromagnet_is_degenerate(self):
        spec = ChainSpec(Model.XXZ, 4, 1.0, 0.5, -5.0)
        with pytest.raises(DegenerateGroundState):
            ground_state(spec)
        down = ground_state(spec, "min_sz")
        up = ground_state(spec, "max_sz")
        assert (down.sector_sz, up.sector_sz) == (-4, 4)
        assert abs(up.state[0]) == pytest.approx(1.0)
        assert abs(down.state[-1]) == pytest.approx(1.0)
        assert down.energy == pytest.approx(up.energy)

    def test_variational_bound(self, rng):
        spec = ChainSpec(Model.XXZ, 8, 1.0, 0.6, 0.7)
        gs = ground_state(spec)
        h = build_hamiltonian(spec)
        for _ in range(100):
            phi = random_state(rng, 8)
            assert gs.energy <= np.vdot(phi, h @ phi).real + 1e-9

    def test_energy_matches_expectation(self):
        spec = ChainSpec(Model.XX, 8, 1.3, 0.4)
        gs = ground_state(spec)
        h = build_hamiltonian(spec)
        assert np.vdot(gs.state, h @ gs.state).real == pytest.approx(gs.energy, abs=1e-10)
        assert gs.gap > 0

    def test_phase_convention(self):
        gs = ground_state(ChainSpec(Model.XX, 6, 1.0, 0.5))
        k = np.argmax(np.abs(gs.state))
        assert gs.state[k].real > 0 and abs(gs.state[k].imag) < 1e-15


class TestEvolve:
    def test_zero_time(self, rng):
        spec = ChainSpec(Model.XX, 6, 1.0, 0.3)
        psi = random_state(rng, 6)
        np.testing.assert_allclose(evolve(spec, psi, 0.0), psi, atol=1e-12)

    def test_ground_state_stationary(self):
        spec = ChainSpec(Model.XXZ, 6, 1.0, 0.5, 0.5)
        gs = ground_state(spec)
        out = evolve(spec, gs.state, 3.3)
        assert overlap_up_to_phase(out, gs.state) < 1e-12
        np.testing.assert_allclose(partial_trace(out, [1, 6]), partial_trace(gs.state, [1, 6]), atol=1e-12)

    def test_matches_dense_expm(self, rng):
        spec = random_spec(rng, 6, 6)
        psi = random_state(rng, 6)
        h = reference_hamiltonian(spec)
        for t in (0.7, 4.0):
            np.testing.assert_allclose(evolve(spec, psi, t), expm(-1j * h * t) @ psi, atol=1e-9)

    def test_blocked_vs_dense_spectral(self, rng):
        for n in range(2, 9):
            spec = random_spec(rng, n, n)
            psi = random_state(rng, n)
            dense = hermitian_eig(reference_hamiltonian(spec))
            prop = Propagator(chain_spectrum(spec), psi)
            for t in (0.0, 1.0, 5.0, 20.0):
                np.testing.assert_allclose(prop.state(t), evolve_spectral(dense, psi, t), atol=1e-9)

    def test_conservation(self, rng):
        for n in (4, 7, 10):
            spec = random_spec(rng, n, n)
            blocked = chain_spectrum(spec)
            psi = random_state(rng, n)
            e0 = blocked.expectation(psi)
            states = Propagator(blocked, psi).states(np.array([0.0, 1.0, 5.0, 20.0]))
            for col in states.T:
                assert abs(np.linalg.norm(col) - 1) < 1e-10
                assert abs(blocked.expectation(col) - e0) < 1e-9

    def test_batched_times_match_single(self, rng):
        spec = ChainSpec(Model.XX, 6, 1.0, 0.8)
        prop = Propagator(chain_spectrum(spec), random_state(rng, 6))
        times = np.linspace(0, 10, 7)
        batch = prop.states(times)
        for k, t in enumerate(times):
            np.testing.assert_allclose(batch[:, k], prop.state(t), atol=1e-13)

    def test_dimension_mismatch(self):
        with pytest.raises(ContractViolation):
            evolve(ChainSpec(Model.XX, 4, 1.0, 0.3), np.ones(8) / np.sqrt(8), 1.0)
