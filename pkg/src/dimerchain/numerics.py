"""
Dense linear-algebra kernels.

States are plain numpy vectors of length ``2**n``. Site ``j`` (1-based) is
stored at bit position ``n - j``, so site 1 is the most significant bit and
basis index ``b`` encodes ``|b_1 b_2 ... b_n>``. ``|0>`` is the ``sigma^z = +1``
state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapacityError, ContractViolation, NumericError

MAX_AXIS = 2**20

HERMITIAN_RTOL = 1e-12
NORM_TOL = 1e-10


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with eigenvectors stored as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _check_finite(*arrays: np.ndarray) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ContractViolation("matrix contains NaN or Inf entries")


def kron(a: np.ndarray, b: np.ndarray, max_axis: int = MAX_AXIS) -> np.ndarray:
    """Kronecker product ``a (x) b`` with a size guard."""
    a = np.atleast_2d(np.asarray(a))
    b = np.atleast_2d(np.asarray(b))
    _check_finite(a, b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > max_axis or cols > max_axis:
        raise CapacityError(f"kron result {rows}x{cols} exceeds {max_axis} per axis")
    return np.kron(a, b)


def hermiticity_error(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def check_hermitian(a: np.ndarray, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {a.shape}")
    _check_finite(a)
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    err = hermiticity_error(a)
    if err > rtol * scale:
        raise ContractViolation(f"matrix is not Hermitian (max |A - A^H| = {err:.3e})")
    return a


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real and positive.

    Near-ties in magnitude (within a relative 1e-9) resolve to the lowest row.
    """
    v = np.array(vectors, copy=True)
    if v.size == 0:
        return v
    mag = np.abs(v)
    peak = mag.max(axis=0)
    pivot = np.argmax(mag >= peak * (1.0 - 1e-9), axis=0)
    cols = np.arange(v.shape[1])
    ref = v[pivot, cols]
    if np.iscomplexobj(v):
        v *= (ref.conj() / np.abs(ref))[None, :]
    else:
        v *= np.sign(ref)[None, :]
    return v


def hermitian_eig(a: np.ndarray) -> Spectrum:
    """Diagonalize a Hermitian matrix.

    Real symmetric input stays real; complex input with vanishing imaginary
    part is demoted to real before calling LAPACK.
    """
    a = check_hermitian(a)
    if np.iscomplexobj(a) and not np.any(a.imag):
        a = a.real
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigh failed for a {a.shape[0]}x{a.shape[0]} matrix: {exc}") from exc
    return Spectrum(eigenvalues=w, eigenvectors=fix_phases(v))


def check_state(psi: np.ndarray, tol: float = NORM_TOL) -> int:
    """Validate a normalized state vector and return its site count."""
    psi = np.asarray(psi)
    if psi.ndim != 1:
        raise ContractViolation(f"state must be a vector, got shape {psi.shape}")
    n = psi.shape[0].bit_length() - 1
    if psi.shape[0] != 2**n or n < 1:
        raise ContractViolation(f"state length {psi.shape[0]} is not a power of two")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise ContractViolation(f"state is not normalized (norm = {norm:.12g})")
    return n


def evolve_spectral(spectrum: Spectrum, psi: np.ndarray, t: float) -> np.ndarray:
    """Return ``exp(-i H t) psi`` using the eigendecomposition of ``H``."""
    psi = np.asarray(psi)
    if psi.shape != (spectrum.dim,):
        raise ContractViolation(
            f"state of length {psi.shape} does not match spectrum dimension {spectrum.dim}"
        )
    v = spectrum.eigenvectors
    coeff = v.conj().T @ psi
    return v @ (np.exp(-1j * spectrum.eigenvalues * t) * coeff)


def _check_sites(keep_sites: Sequence[int], n_sites: int) -> list[int]:
    keep = [int(s) for s in keep_sites]
    if not keep:
        raise ValueError("keep_sites must not be empty")
    if any(s < 1 or s > n_sites for s in keep):
        raise ValueError(f"sites {keep} out of range 1..{n_sites}")
    if len(set(keep)) != len(keep):
        raise ValueError(f"sites {keep} are not distinct")
    return keep


def partial_trace(psi: np.ndarray, keep_sites: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of a pure state on ``keep_sites`` (1-based).

    Output subsystem order follows ``keep_sites``.
    """
    n = check_state(psi)
    keep = _check_sites(keep_sites, n)
    axes = [s - 1 for s in keep]
    rest = [k for k in range(n) if k not in axes]
    t = np.asarray(psi).reshape((2,) * n).transpose(axes + rest)
    m = t.reshape(2 ** len(keep), -1)
    return m @ m.conj().T
