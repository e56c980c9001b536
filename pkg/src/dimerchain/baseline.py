"""
Reference scheme: attach an external singlet to the chain and let it spread.

Sites are ordered ``0', 0, 1, ..., N`` (positions 1..N+2 of the extended
register). The pair ``(0', 0)`` starts in ``|psi->``, the chain in its ground
state. At ``t = 0`` site 0 is coupled to site 1 with the chain's own
interaction form; ``0'`` stays idle. The figure of merit is the concurrence
between ``0'`` and ``N``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import BlockedSpectrum, DegeneracyPolicy, Propagator, bond_spectrum, chain_spectrum, ground_state_of
from .errors import CapacityError
from .hamiltonian import ChainSpec, chain_block
from .protocol import SINGLET, TStar, concurrence_batch, default_t_max, maximize_over_time, pair_density_batch

MAX_EXTENDED_SITES = 14


@dataclass(frozen=True)
class AttachedSystemSpec:
    chain: ChainSpec
    attach_coupling: float | None = None
    uniform_chain: bool = False

    def __post_init__(self) -> None:
        if self.attach_coupling is not None and not self.attach_coupling > 0:
            raise ValueError(f"attach_coupling must be positive, got {self.attach_coupling}")

    @property
    def effective_chain(self) -> ChainSpec:
        """The chain actually simulated; dimerization is dropped in uniform mode."""
        if not self.uniform_chain:
            return self.chain
        c = self.chain
        return ChainSpec(c.model, c.n_sites, c.j_coupling, 0.0, c.anisotropy)

    @property
    def coupling(self) -> float:
        """Strength of the 0-1 bond; defaults to the chain's strong bond."""
        if self.attach_coupling is not None:
            return self.attach_coupling
        c = self.effective_chain
        return c.j_coupling * (1.0 + c.delta)

    @property
    def n_total(self) -> int:
        return self.chain.n_sites + 2

    def extended_bonds(self, coupling: float | None = None) -> tuple[float, ...]:
        w = self.coupling if coupling is None else coupling
        return (0.0, w) + self.effective_chain.bond_strengths()


class AttachedRun:
    def __init__(
        self,
        spec: AttachedSystemSpec,
        policy: DegeneracyPolicy | str = DegeneracyPolicy.ERROR,
        coupling: float | None = None,
    ):
        if spec.n_total > MAX_EXTENDED_SITES:
            raise CapacityError(f"attached system has {spec.n_total} sites (max {MAX_EXTENDED_SITES})")
        self.spec = spec
        chain = spec.effective_chain
        self.chain_ground = ground_state_of(chain_spectrum(chain), policy)
        self.psi0 = np.kron(SINGLET, self.chain_ground.state)
        self.blocked: BlockedSpectrum = bond_spectrum(
            spec.extended_bonds(coupling), chain.zz_anisotropy, spec.n_total
        )
        self.propagator = Propagator(self.blocked, self.psi0)

    def hamiltonian(self) -> np.ndarray:
        return chain_block(self.blocked_bonds, self.spec.effective_chain.zz_anisotropy, self.spec.n_total)

    @property
    def blocked_bonds(self) -> tuple[float, ...]:
        return self.spec.extended_bonds()

    def pair_concurrence(self, times: np.ndarray, first: int, second: int) -> np.ndarray:
        """Concurrence between extended positions ``first < second`` (1-based)."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        out = np.empty(times.shape[0])
        for start, states in self.propagator.iter_chunks(times):
            rho = pair_density_batch(states, self.spec.n_total, first, second)
            out[start : start + states.shape[1]] = concurrence_batch(rho)
        return out

    def evaluate(self, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        return np.ones(times.shape[0]), self.pair_concurrence(times, 1, self.spec.n_total)


def build_attached(
    spec: AttachedSystemSpec, policy: DegeneracyPolicy | str = DegeneracyPolicy.ERROR
) -> tuple[np.ndarray, np.ndarray]:
    """Dense extended Hamiltonian on N+2 sites and the initial state."""
    run = AttachedRun(spec, policy)
    return run.hamiltonian().astype(complex), run.psi0


def run_attaching(
    spec: AttachedSystemSpec,
    t_max: float | None = None,
    dt: float = 0.02,
    policy: DegeneracyPolicy | str = DegeneracyPolicy.ERROR,
) -> TStar:
    if t_max is None:
        t_max = default_t_max(spec.chain)
    return maximize_over_time(AttachedRun(spec, policy).evaluate, t_max, dt)
