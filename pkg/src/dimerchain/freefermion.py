"""
Free-fermion description of the dimerized XX chain.

After a Jordan-Wigner transformation the XX chain is a hopping problem
``H = c^dag M c`` with a tridiagonal one-particle matrix ``M``. Its numeric
spectrum is the reference; the closed-form dimer-chain spectra (odd N: cosine
formula, even N: roots of a transcendental equation) are evaluated and
compared against it.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import CapacityError
from .hamiltonian import ChainSpec, Model, coupling_at

MAX_MANY_BODY_SITES = 12
ROOT_PANELS = 10_000
ROOT_XTOL = 1e-12


class SpectrumSource(str, enum.Enum):
    NUMERIC = "numeric"
    FORMULA_ODD = "formula_odd"
    FORMULA_EVEN = "formula_even"


@dataclass(frozen=True)
class AdjacencyMatrix:
    """Zero-diagonal symmetric tridiagonal hopping matrix."""

    hoppings: np.ndarray

    @property
    def n(self) -> int:
        return self.hoppings.shape[0] + 1

    def dense(self) -> np.ndarray:
        return np.diag(self.hoppings, 1) + np.diag(self.hoppings, -1)


@dataclass(frozen=True)
class FermionSpectrum:
    lambdas: np.ndarray
    source: SpectrumSource


def adjacency_matrix(spec: ChainSpec) -> AdjacencyMatrix:
    if spec.model is not Model.XX:
        raise ValueError("the free-fermion mapping applies to the XX model only")
    return AdjacencyMatrix(np.array(spec.bond_strengths()))


def spectrum_numeric(m: AdjacencyMatrix) -> FermionSpectrum:
    if m.n == 1:
        lam = np.zeros(1)
    else:
        lam = eigvalsh_tridiagonal(np.zeros(m.n), m.hoppings)
    return FermionSpectrum(np.sort(lam), SpectrumSource.NUMERIC)


def dimer_ratio(spec: ChainSpec) -> float:
    """Weak-to-strong bond ratio ``(1 - delta) / (1 + delta)``."""
    return (1.0 - spec.delta) / (1.0 + spec.delta)


def spectrum_formula_odd(spec: ChainSpec) -> FermionSpectrum:
    n = spec.n_sites
    if n % 2 == 0:
        raise ValueError(f"odd-N formula needs odd N, got {n}")
    r = dimer_ratio(spec)
    scale = spec.j_coupling * (1.0 + spec.delta)
    k = np.arange(1, (n - 1) // 2 + 1)
    radicand = 1 + 2 * r * np.cos(2 * np.pi * k / (n + 1)) + r * r
    pos = scale * np.sqrt(np.clip(radicand, 0.0, None))
    lam = np.concatenate([pos, [0.0], -pos])
    return FermionSpectrum(np.sort(lam), SpectrumSource.FORMULA_ODD)


def xnu_residual(x: np.ndarray | float, n_sites: int, r: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return r * np.sin(n_sites / 2 * x) + np.sin((n_sites / 2 + 1) * x)


@dataclass(frozen=True)
class XnuRoots:
    roots: np.ndarray
    expected: int
    regime: str
    residuals: np.ndarray = field(repr=False)

    @property
    def count(self) -> int:
        return self.roots.shape[0]

    @property
    def deficit(self) -> int:
        return max(0, self.expected - self.count)


def solve_xnu(spec: ChainSpec, panels: int = ROOT_PANELS, xtol: float = ROOT_XTOL) -> XnuRoots:
    """Roots of ``r sin(N x / 2) + sin((N/2 + 1) x) = 0`` inside ``(0, pi)``.

    Sign changes on a uniform grid are bracketed and bisected. The endpoints
    are trivial roots and excluded. For ``r >= (N+2)/N`` one real root turns
    into an edge mode and the count drops by one; ``regime`` records which side
    the chain is on.
    """
    n = spec.n_sites
    if n % 2:
        raise ValueError(f"the x_nu equation applies to even N, got {n}")
    r = dimer_ratio(spec)
    regime = "edge" if r >= (n + 2) / n else "bulk"
    grid = np.linspace(0.0, np.pi, panels + 1)[1:-1]
    f = xnu_residual(grid, n, r)
    roots = []
    exact = np.flatnonzero(f == 0.0)
    roots.extend(grid[exact].tolist())
    brackets = np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)
    for i in brackets:
        lo, hi, flo = grid[i], grid[i + 1], f[i]
        while hi - lo > xtol:
            mid = 0.5 * (lo + hi)
            fm = float(xnu_residual(mid, n, r))
            if fm == 0.0:
                lo = hi = mid
                break
            if np.sign(fm) == np.sign(flo):
                lo, flo = mid, fm
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    roots_arr = np.sort(np.array(roots, dtype=float))
    expected = n // 2 if regime == "bulk" else n // 2 - 1
    return XnuRoots(roots_arr, expected, regime, xnu_residual(roots_arr, n, r))


class EvenVariant(str, enum.Enum):
    """``PRINTED`` uses ``1 + r cos x + r^2``; ``COEFF2`` uses ``1 + 2 r cos x + r^2``."""

    PRINTED = "printed"
    COEFF2 = "coeff2"


@dataclass(frozen=True)
class EvenFormulaReport:
    spectra: dict[EvenVariant, FermionSpectrum]
    deviations: dict[EvenVariant, float]
    roots: XnuRoots
    tolerance: float = 1e-9

    @property
    def matching(self) -> list[EvenVariant]:
        return [v for v, d in self.deviations.items() if d < self.tolerance]

    @property
    def flagged(self) -> bool:
        return not self.matching or self.roots.deficit > 0


def _even_spectrum(spec: ChainSpec, x: np.ndarray, coeff: float) -> FermionSpectrum:
    r = dimer_ratio(spec)
    scale = spec.j_coupling * (1.0 + spec.delta)
    pos = scale * np.sqrt(np.clip(1 + coeff * r * np.cos(x) + r * r, 0.0, None))
    return FermionSpectrum(np.sort(np.concatenate([pos, -pos])), SpectrumSource.FORMULA_EVEN)


def _max_deviation(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        return math.inf
    return float(np.max(np.abs(np.sort(a) - np.sort(b))))


def spectrum_formula_even(spec: ChainSpec) -> EvenFormulaReport:
    """Evaluate both even-N variants and compare each against the numeric spectrum.

    A root-count deficit yields fewer than N values; the deviation is then
    reported as ``inf``.
    """
    roots = solve_xnu(spec)
    reference = spectrum_numeric(adjacency_matrix(_as_xx(spec))).lambdas
    spectra = {
        EvenVariant.PRINTED: _even_spectrum(spec, roots.roots, 1.0),
        EvenVariant.COEFF2: _even_spectrum(spec, roots.roots, 2.0),
    }
    deviations = {v: _max_deviation(s.lambdas, reference) for v, s in spectra.items()}
    return EvenFormulaReport(spectra, deviations, roots)


def _as_xx(spec: ChainSpec) -> ChainSpec:
    if spec.model is Model.XX:
        return spec
    return ChainSpec(Model.XX, spec.n_sites, spec.j_coupling, spec.delta)


def many_body_energies(fs: FermionSpectrum | np.ndarray, max_n: int = MAX_MANY_BODY_SITES) -> np.ndarray:
    """All ``2**n`` occupation sums ``sum_k n_k lambda_k``, ascending."""
    lam = np.asarray(fs.lambdas if isinstance(fs, FermionSpectrum) else fs, dtype=float)
    n = lam.shape[0]
    if n > max_n:
        raise CapacityError(f"{n} modes exceed the many-body limit of {max_n}")
    occ = np.array(list(itertools.product((0, 1), repeat=n)), dtype=float).reshape(-1, n)
    return np.sort(occ @ lam)


def hopping_pattern(spec: ChainSpec) -> list[float]:
    return [coupling_at(j, spec) for j in range(1, spec.n_sites)]
