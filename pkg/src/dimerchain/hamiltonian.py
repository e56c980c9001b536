"""
Dimerized XX / XXZ chain Hamiltonians with open boundaries.

Bond ``j`` (between sites ``j`` and ``j+1``) carries
``(J/2) (1 + (-1)**(j+1) delta) [XX + YY + aniso * ZZ]``. Matrices are built
directly in the computational basis: the flip-flop part of ``XX + YY`` swaps
antiparallel neighbours with amplitude 2, ``ZZ`` is diagonal.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np

from .errors import ContractViolation


class Model(str, enum.Enum):
    XX = "XX"
    XXZ = "XXZ"


@dataclass(frozen=True)
class ChainSpec:
    """A dimerized chain: model family, size, energy scale, dimerization, anisotropy.

    ``anisotropy`` is ignored (forced to 0 in the Hamiltonian) for the XX model.
    """

    model: Model = Model.XX
    n_sites: int = 8
    j_coupling: float = 1.0
    delta: float = 0.8
    anisotropy: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "n_sites", int(self.n_sites))
        object.__setattr__(self, "j_coupling", float(self.j_coupling))
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "anisotropy", float(self.anisotropy))
        if self.n_sites < 2:
            raise ValueError(f"n_sites must be >= 2, got {self.n_sites}")
        if not self.j_coupling > 0:
            raise ValueError(f"j_coupling must be positive, got {self.j_coupling}")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")
        if not np.isfinite(self.anisotropy):
            raise ValueError("anisotropy must be finite")

    @property
    def zz_anisotropy(self) -> float:
        return self.anisotropy if self.model is Model.XXZ else 0.0

    def bond_strengths(self) -> tuple[float, ...]:
        """``J * (1 + (-1)**(j+1) delta)`` for j = 1..N-1."""
        return tuple(self.j_coupling * coupling_at(j, self) for j in range(1, self.n_sites))

    def require_protocol_size(self) -> None:
        if self.n_sites < 4 or self.n_sites % 2:
            raise ValueError(f"protocol needs an even chain with N >= 4, got N={self.n_sites}")


def coupling_at(j: int, spec: ChainSpec) -> float:
    """Dimerization factor of bond ``j``: strong ``1+delta`` on odd bonds, weak on even."""
    if not 1 <= j <= spec.n_sites - 1:
        raise ValueError(f"bond index {j} out of range 1..{spec.n_sites - 1}")
    return 1.0 + (-1) ** (j + 1) * spec.delta


def site_bits(basis: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    return (basis >> (n_sites - site)) & 1


def magnetization(basis: np.ndarray, n_sites: int) -> np.ndarray:
    """Eigenvalue of ``sum_j sigma^z_j`` for each basis index."""
    basis = np.asarray(basis, dtype=np.int64)
    ones = np.zeros(basis.shape, dtype=np.int64)
    for s in range(1, n_sites + 1):
        ones += site_bits(basis, s, n_sites)
    return n_sites - 2 * ones


def chain_block(
    bonds: Sequence[float], zz: float, n_sites: int, basis: np.ndarray | None = None
) -> np.ndarray:
    """Real symmetric matrix of the open chain restricted to ``basis``.

    ``bonds[j-1]`` is the full strength of bond ``j`` (``J * factor``); ``basis``
    must be an ascending index list closed under the flip-flop moves (a
    magnetization sector or the full space).
    """
    if len(bonds) != n_sites - 1:
        raise ValueError(f"expected {n_sites - 1} bonds, got {len(bonds)}")
    if basis is None:
        basis = np.arange(2**n_sites, dtype=np.int64)
    basis = np.asarray(basis, dtype=np.int64)
    dim = basis.shape[0]
    h = np.zeros((dim, dim))
    diag = np.zeros(dim)
    rows = np.arange(dim)
    for j, w in enumerate(bonds, start=1):
        if w == 0.0:
            continue
        a = site_bits(basis, j, n_sites)
        b = site_bits(basis, j + 1, n_sites)
        same = a == b
        if zz != 0.0:
            diag += 0.5 * w * zz * np.where(same, 1.0, -1.0)
        src = rows[~same]
        mask = (1 << (n_sites - j)) | (1 << (n_sites - j - 1))
        dst = np.searchsorted(basis, basis[src] ^ mask)
        h[src, dst] += w
    h[rows, rows] += diag
    return h


def _dense(spec: ChainSpec) -> np.ndarray:
    return chain_block(spec.bond_strengths(), spec.zz_anisotropy, spec.n_sites).astype(complex)


def build_xx(spec: ChainSpec) -> np.ndarray:
    if spec.model is not Model.XX:
        raise ContractViolation(f"build_xx needs an XX spec, got {spec.model.value}")
    return _dense(spec)


def build_xxz(spec: ChainSpec) -> np.ndarray:
    if spec.model is not Model.XXZ:
        raise ContractViolation(f"build_xxz needs an XXZ spec, got {spec.model.value}")
    return _dense(spec)


def build_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Dense complex Hamiltonian for either model family."""
    return _dense(spec)


def total_sz_operator(n_sites: int) -> np.ndarray:
    if n_sites < 1:
        raise ValueError("n_sites must be >= 1")
    return np.diag(magnetization(np.arange(2**n_sites), n_sites).astype(complex))


def sector_indices(n_sites: int, sz: int) -> np.ndarray:
    """Ascending basis indices whose total ``sigma^z`` equals ``sz``."""
    if abs(sz) > n_sites or (n_sites - sz) % 2:
        raise ValueError(f"sz={sz} is not a valid magnetization for {n_sites} sites")
    idx = np.flatnonzero(magnetization(np.arange(2**n_sites), n_sites) == sz)
    assert idx.shape[0] == comb(n_sites, (n_sites - sz) // 2)
    return idx


def sector_values(n_sites: int) -> list[int]:
    return list(range(-n_sites, n_sites + 1, 2))


@dataclass(frozen=True)
class LatticeParams:
    """Two-species Hubbard parameters of a trapped-atom superlattice."""

    j_up: float
    j_down: float
    u_up: float
    u_down: float
    u_updown: float

    def __post_init__(self) -> None:
        if min(self.u_up, self.u_down, self.u_updown) <= 0:
            raise ValueError("interaction strengths must be positive")
        if min(self.j_up, self.j_down) < 0:
            raise ValueError("tunneling amplitudes must be non-negative")

    @property
    def in_mott_regime(self) -> bool:
        return max(self.j_up, self.j_down) < 0.1 * min(self.u_up, self.u_down, self.u_updown)


def effective_couplings(p: LatticeParams) -> tuple[float, float]:
    """Second-order superexchange couplings ``(j_z, j_perp)``."""
    if min(p.u_up, p.u_down, p.u_updown) <= 0:
        raise ValueError("interaction strengths must be positive")
    if not p.in_mott_regime:
        warnings.warn(
            "tunneling is not small compared with the interactions; "
            "the superexchange expansion may be inaccurate",
            stacklevel=2,
        )
    j_z = (p.j_up**2 + p.j_down**2) / (2 * p.u_updown) - p.j_up**2 / p.u_up - p.j_down**2 / p.u_down
    j_perp = (p.j_up + p.j_down) / p.u_updown
    return j_z, j_perp
