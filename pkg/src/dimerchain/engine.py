"""
Magnetization-blocked diagonalization, ground states and spectral evolution.

Both model families conserve total ``sigma^z``, so every Hamiltonian here is
diagonalized one sector at a time. Sector spectra for a given bond profile are
cached; the cache is an ``lru_cache`` so concurrent first calls may compute the
same block twice but always store identical values.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractViolation, DegenerateGroundState, SymmetryViolation
from .hamiltonian import ChainSpec, chain_block, magnetization, sector_values
from .numerics import Spectrum, hermitian_eig

COMMUTATOR_TOL = 1e-10
DEGENERACY_RTOL = 1e-10
TIME_CHUNK = 512


class DegeneracyPolicy(str, enum.Enum):
    """What ``ground_state`` does when the lowest level is degenerate.

    ``error`` refuses. ``min_sz`` / ``max_sz`` take the candidate from the
    sector with the smallest / largest total ``sigma^z``; for a ferromagnet
    these are the fully aligned states ``|11...1>`` / ``|00...0>``.
    """

    ERROR = "error"
    MIN_SZ = "min_sz"
    MAX_SZ = "max_sz"


@dataclass(frozen=True)
class SectorSpectrum:
    sz: int
    indices: np.ndarray
    spectrum: Spectrum

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum.eigenvalues

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.spectrum.eigenvectors


@dataclass(frozen=True)
class BlockedSpectrum:
    n_sites: int
    sectors: tuple[SectorSpectrum, ...]

    @property
    def dim(self) -> int:
        return 2**self.n_sites

    def eigenvalues(self) -> np.ndarray:
        """All eigenvalues, sorted ascending."""
        return np.sort(np.concatenate([s.eigenvalues for s in self.sectors]))

    def expectation(self, psi: np.ndarray) -> float:
        e = 0.0
        for s in self.sectors:
            c = s.eigenvectors.conj().T @ psi[s.indices]
            e += float(np.sum(s.eigenvalues * np.abs(c) ** 2))
        return e


@dataclass(frozen=True)
class GroundState:
    energy: float
    state: np.ndarray
    sector_sz: int
    gap: float


def _sector_lists(n_sites: int) -> dict[int, np.ndarray]:
    mags = magnetization(np.arange(2**n_sites), n_sites)
    return {sz: np.flatnonzero(mags == sz) for sz in sector_values(n_sites)}


def commutator_with_sz(h: np.ndarray, n_sites: int) -> float:
    """``max |[H, S_z]|`` using the diagonal form of ``S_z``."""
    mags = magnetization(np.arange(2**n_sites), n_sites)
    diff = mags[None, :] - mags[:, None]
    return float(np.max(np.abs(h * diff))) if h.size else 0.0


def blocked_eig(h: np.ndarray, n_sites: int) -> BlockedSpectrum:
    """Diagonalize a magnetization-conserving dense operator sector by sector."""
    h = np.asarray(h)
    if h.shape != (2**n_sites, 2**n_sites):
        raise ContractViolation(f"operator shape {h.shape} does not match {n_sites} sites")
    err = commutator_with_sz(h, n_sites)
    if err > COMMUTATOR_TOL:
        raise SymmetryViolation(f"operator does not commute with S_z (max |[H,S_z]| = {err:.3e})")
    sectors = tuple(
        SectorSpectrum(sz, idx, hermitian_eig(h[np.ix_(idx, idx)]))
        for sz, idx in _sector_lists(n_sites).items()
    )
    return BlockedSpectrum(n_sites, sectors)


@lru_cache(maxsize=64)
def _bond_spectrum(bonds: tuple[float, ...], zz: float, n_sites: int) -> BlockedSpectrum:
    sectors = tuple(
        SectorSpectrum(sz, idx, hermitian_eig(chain_block(bonds, zz, n_sites, idx)))
        for sz, idx in _sector_lists(n_sites).items()
    )
    return BlockedSpectrum(n_sites, sectors)


def bond_spectrum(bonds: Sequence[float], zz: float, n_sites: int) -> BlockedSpectrum:
    """Cached blocked spectrum of an arbitrary open-chain bond profile."""
    return _bond_spectrum(tuple(float(b) for b in bonds), float(zz), int(n_sites))


def chain_spectrum(spec: ChainSpec) -> BlockedSpectrum:
    return bond_spectrum(spec.bond_strengths(), spec.zz_anisotropy, spec.n_sites)


def ground_state_of(
    blocked: BlockedSpectrum, policy: DegeneracyPolicy | str = DegeneracyPolicy.ERROR
) -> GroundState:
    policy = DegeneracyPolicy(policy)
    levels = sorted(
        (float(e), s.sz, k)
        for s in blocked.sectors
        for k, e in enumerate(s.eigenvalues[:2])
    )
    e0 = levels[0][0]
    gap = levels[1][0] - e0 if len(levels) > 1 else np.inf
    tol = max(DEGENERACY_RTOL * abs(e0), 1e-13)
    candidates = [lv for lv in levels if lv[0] - e0 < tol]
    if len(candidates) > 1:
        if policy is DegeneracyPolicy.ERROR:
            raise DegenerateGroundState(
                f"{len(candidates)} levels within {tol:.1e} of E0={e0:.12g} "
                f"(sectors {sorted({c[1] for c in candidates})})"
            )
        sign = 1 if policy is DegeneracyPolicy.MAX_SZ else -1
        _, sz, k = max(candidates, key=lambda lv: (sign * lv[1], -lv[2]))
    else:
        _, sz, k = candidates[0]
    sector = next(s for s in blocked.sectors if s.sz == sz)
    psi = np.zeros(blocked.dim, dtype=complex)
    psi[sector.indices] = sector.eigenvectors[:, k]
    return GroundState(float(sector.eigenvalues[k]), psi, sz, float(gap))


def ground_state(
    spec: ChainSpec, policy: DegeneracyPolicy | str = DegeneracyPolicy.ERROR
) -> GroundState:
    """Lowest eigenstate of the chain embedded in the full ``2**N`` basis."""
    return ground_state_of(chain_spectrum(spec), policy)


class Propagator:
    """Evaluates ``exp(-iHt) psi0`` for many times from one decomposition."""

    def __init__(self, blocked: BlockedSpectrum, psi0: np.ndarray):
        psi0 = np.asarray(psi0, dtype=complex)
        if psi0.shape != (blocked.dim,):
            raise ContractViolation(
                f"state of length {psi0.shape[0]} does not match 2**{blocked.n_sites}"
            )
        self.blocked = blocked
        self._parts = []
        for s in blocked.sectors:
            c = s.eigenvectors.conj().T @ psi0[s.indices]
            if np.any(np.abs(c) > 0):
                self._parts.append((s, c))

    @property
    def dim(self) -> int:
        return self.blocked.dim

    def state(self, t: float) -> np.ndarray:
        return self.states(np.array([t]))[:, 0]

    def states(self, times: Iterable[float]) -> np.ndarray:
        """Columns are the evolved states at ``times``."""
        times = np.asarray(list(times) if not isinstance(times, np.ndarray) else times, dtype=float)
        out = np.zeros((self.dim, times.shape[0]), dtype=complex)
        for s, c in self._parts:
            phases = np.exp(-1j * np.outer(s.eigenvalues, times)) * c[:, None]
            out[s.indices, :] = s.eigenvectors @ phases
        return out

    def iter_chunks(self, times: np.ndarray, chunk: int = TIME_CHUNK):
        for start in range(0, times.shape[0], chunk):
            yield start, self.states(times[start : start + chunk])


def evolve(spec: ChainSpec, psi0: np.ndarray, t: float) -> np.ndarray:
    return Propagator(chain_spectrum(spec), psi0).state(t)
