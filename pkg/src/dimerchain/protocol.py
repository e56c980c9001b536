"""
Rotation-encoding entanglement protocol.

The chain starts in its ground state, sites 1 and N receive the same local
rotation, the chain evolves, sites 2 and N-1 are measured in the computational
basis and the concurrence of the end pair (1, N) is read out. ``find_tstar``
picks the readout time that maximizes the post-selected concurrence.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .engine import DegeneracyPolicy, Propagator, chain_spectrum, ground_state_of
from .errors import ContractViolation, ProtocolFailure, ZeroProbabilityBranch
from .hamiltonian import ChainSpec
from .numerics import check_state, partial_trace

PROB_FLOOR = 1e-12
PSD_TOL = 1e-10
TIE_TOL = 1e-12
RANK_RTOL = 1e-13

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
YY = np.kron(SIGMA_Y, SIGMA_Y)
SINGLET = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True)
class RotationAngles:
    theta: float = math.pi / 2
    phi: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= math.pi + 1e-12:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2 * math.pi:
            raise ValueError(f"phi must lie in [0, 2pi), got {self.phi}")


class Outcome(str, enum.Enum):
    """Computational-basis result on sites (2, N-1)."""

    P00 = "P00"
    P01 = "P01"
    P10 = "P10"
    P11 = "P11"

    @property
    def bits(self) -> tuple[int, int]:
        return int(self.value[1]), int(self.value[2])


def rotation_gate(a: RotationAngles) -> np.ndarray:
    c, s = math.cos(a.theta / 2), math.sin(a.theta / 2)
    return np.array(
        [[c, -np.exp(-1j * a.phi) * s], [np.exp(1j * a.phi) * s, c]], dtype=complex
    )


def apply_local(gate: np.ndarray, site: int, psi: np.ndarray) -> np.ndarray:
    """Apply a single-site unitary to ``site`` (1-based)."""
    gate = np.asarray(gate)
    if gate.shape != (2, 2) or np.max(np.abs(gate @ gate.conj().T - np.eye(2))) > 1e-10:
        raise ContractViolation("gate must be a 2x2 unitary")
    n = check_state(psi)
    if not 1 <= site <= n:
        raise ValueError(f"site {site} out of range 1..{n}")
    t = np.asarray(psi, dtype=complex).reshape(2 ** (site - 1), 2, 2 ** (n - site))
    return np.einsum("ab,ibj->iaj", gate, t).reshape(-1)


def encode(
    gs: np.ndarray,
    angles: RotationAngles,
    n_sites: int,
    last_angles: RotationAngles | None = None,
) -> np.ndarray:
    """Rotate sites 1 and N. ``last_angles`` overrides the rotation on site N."""
    if check_state(gs) != n_sites:
        raise ContractViolation(f"state does not describe {n_sites} sites")
    psi = apply_local(rotation_gate(angles), 1, gs)
    return apply_local(rotation_gate(last_angles or angles), n_sites, psi)


def _project_batch(states: np.ndarray, n_sites: int, outcome: Outcome) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized end-pair density matrices and branch probabilities.

    ``states`` has one state per column; returns ``(rhos[T,4,4], probs[T])``
    where ``rhos`` still carry the branch probability as their trace.
    """
    b2, b3 = outcome.bits
    k = 2 ** (n_sites - 4)
    x = states.T.reshape(-1, 2, 2, k, 2, 2)[:, :, b2, :, b3, :]
    rho = np.einsum("takb,tckd->tabcd", x, x.conj()).reshape(-1, 4, 4)
    probs = np.einsum("tii->t", rho).real
    return rho, probs


def _end_pair_batch(states: np.ndarray, n_sites: int) -> np.ndarray:
    x = states.T.reshape(-1, 2, 2 ** (n_sites - 2), 2)
    return np.einsum("takb,tckd->tabcd", x, x.conj()).reshape(-1, 4, 4)


def pair_density_batch(states: np.ndarray, n_sites: int, first: int, second: int) -> np.ndarray:
    """Reduced density matrices of sites ``first < second`` for each column."""
    x = states.T.reshape(
        -1, 2 ** (first - 1), 2, 2 ** (second - first - 1), 2, 2 ** (n_sites - second)
    )
    return np.einsum("tiajbk,ticjdk->tabcd", x, x.conj()).reshape(-1, 4, 4)


def project_sites(psi: np.ndarray, outcome: Outcome | str, n_sites: int) -> tuple[float, np.ndarray]:
    """Measure sites 2 and N-1; returns the branch probability and the collapsed state."""
    outcome = Outcome(outcome)
    if n_sites < 4:
        raise ValueError("projection on sites 2 and N-1 needs N >= 4")
    if check_state(psi) != n_sites:
        raise ContractViolation(f"state does not describe {n_sites} sites")
    b2, b3 = outcome.bits
    t = np.asarray(psi, dtype=complex).reshape(2, 2, 2 ** (n_sites - 4), 2, 2).copy()
    t[:, 1 - b2] = 0
    t[:, :, :, 1 - b3] = 0
    post = t.reshape(-1)
    prob = float(np.vdot(post, post).real)
    if prob < PROB_FLOOR:
        raise ZeroProbabilityBranch(f"outcome {outcome.value} has probability {prob:.3e}")
    return prob, post / math.sqrt(prob)


def end_pair_density(psi: np.ndarray) -> np.ndarray:
    n = check_state(psi)
    return partial_trace(psi, [1, n])


def concurrence_batch(rhos: np.ndarray) -> np.ndarray:
    """Wootters concurrence of a stack of normalized 4x4 density matrices.

    With ``rho = W W^dag`` (``W`` = eigenvectors scaled by ``sqrt(w)``) the
    numbers entering the concurrence are the singular values of
    ``W^T (Y x Y) W``; their squares are the eigenvalues of
    ``sqrt(rho) rho_tilde sqrt(rho)``. Eigenvalues below ``RANK_RTOL`` times the
    largest are treated as exact zeros so that rounding noise in a
    rank-deficient ``rho`` is not amplified by the square root.
    """
    rhos = np.asarray(rhos, dtype=complex)
    w, v = np.linalg.eigh(rhos)
    floor = RANK_RTOL * w[..., -1:]
    root_w = np.sqrt(np.where(w > floor, w, 0.0))
    wmat = v * root_w[..., None, :]
    tau = wmat.swapaxes(-1, -2) @ YY @ wmat
    lam = np.linalg.svd(tau, compute_uv=False)
    return np.clip(lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3], 0.0, 1.0)


def check_density(rho: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ContractViolation("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ContractViolation(f"density matrix trace is {np.trace(rho).real:.12g}")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ContractViolation("density matrix has negative eigenvalues")
    return rho


def concurrence(rho: np.ndarray) -> float:
    rho = check_density(rho)
    if rho.shape != (4, 4):
        raise ContractViolation(f"concurrence needs a two-qubit state, got {rho.shape}")
    return float(concurrence_batch(rho[None])[0])


def werner_state(p: float) -> np.ndarray:
    return p * np.outer(SINGLET, SINGLET.conj()) + (1 - p) * np.eye(4) / 4


def werner_fit(rho: np.ndarray) -> tuple[float, float]:
    """Werner parameter from the singlet fidelity, plus the trace distance to that Werner state."""
    rho = np.asarray(rho, dtype=complex)
    fidelity = float(np.vdot(SINGLET, rho @ SINGLET).real)
    p = (4 * fidelity - 1) / 3
    residual = 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(rho - werner_state(p)))))
    return p, residual


@dataclass(frozen=True)
class TStar:
    t_star: float
    concurrence: float
    probability: float


@dataclass(frozen=True)
class ProtocolResult:
    spec: ChainSpec
    angles: RotationAngles
    outcome: Outcome | None
    t_star: float
    outcome_probability: float
    concurrence: float
    werner_p: float
    werner_residual: float


class ProtocolRun:
    """Prepared protocol for one chain and one encoding; evaluates any readout time."""

    def __init__(
        self,
        spec: ChainSpec,
        angles: RotationAngles,
        outcome: Outcome | str | None = Outcome.P00,
        policy: DegeneracyPolicy | str = DegeneracyPolicy.ERROR,
        last_angles: RotationAngles | None = None,
    ):
        self.spec = spec
        self.angles = angles
        self.outcome = None if outcome is None else Outcome(outcome)
        if self.outcome is not None:
            spec.require_protocol_size()
        blocked = chain_spectrum(spec)
        self.ground = ground_state_of(blocked, policy)
        self.psi0 = encode(self.ground.state, angles, spec.n_sites, last_angles)
        self.propagator = Propagator(blocked, self.psi0)

    def evaluate(self, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Probabilities and concurrences at ``times``; NaN concurrence marks a dead branch."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        probs = np.empty(times.shape[0])
        conc = np.empty(times.shape[0])
        n = self.spec.n_sites
        for start, states in self.propagator.iter_chunks(times):
            sl = slice(start, start + states.shape[1])
            if self.outcome is None:
                rho = _end_pair_batch(states, n)
                p = np.ones(states.shape[1])
            else:
                rho, p = _project_batch(states, n, self.outcome)
            ok = p >= PROB_FLOOR
            c = np.full(p.shape, np.nan)
            if np.any(ok):
                c[ok] = concurrence_batch(rho[ok] / p[ok, None, None])
            probs[sl] = p
            conc[sl] = c
        return probs, conc

    def at_time(self, t: float) -> tuple[float, float]:
        probs, conc = self.evaluate(np.array([t]))
        if np.isnan(conc[0]):
            raise ZeroProbabilityBranch(
                f"outcome {self.outcome.value} has probability {probs[0]:.3e} at t={t}"
            )
        return float(probs[0]), float(conc[0])

    def find_tstar(self, t_max: float | None = None, dt: float = 0.02) -> TStar:
        if t_max is None:
            t_max = default_t_max(self.spec)
        return maximize_over_time(self.evaluate, t_max, dt)

    def result(self, t_max: float | None = None, dt: float = 0.02) -> ProtocolResult:
        ts = self.find_tstar(t_max, dt)
        p, residual = werner_fit(partial_trace(self.ground.state, [1, 2]))
        return ProtocolResult(
            self.spec, self.angles, self.outcome, ts.t_star, ts.probability, ts.concurrence, p, residual
        )


def maximize_over_time(evaluate, t_max: float, dt: float) -> TStar:
    """Coarse scan on ``[0, t_max]`` then ternary refinement to ``dt/100``.

    ``evaluate(times)`` returns ``(probabilities, concurrences)`` with NaN
    concurrence on dead branches. The earliest coarse maximum wins ties and
    refinement only moves ``t*`` if it improves the value by more than
    ``TIE_TOL``.
    """
    if t_max <= 0 or dt <= 0:
        raise ValueError("t_max and dt must be positive")
    times = np.arange(int(math.floor(t_max / dt + 1e-9)) + 1) * dt
    probs, conc = evaluate(times)
    valid = ~np.isnan(conc)
    if not np.any(valid):
        raise ProtocolFailure("every scanned time lands on a zero-probability branch")
    best = np.nanmax(conc)
    k = int(np.flatnonzero(valid & (conc >= best - TIE_TOL))[0])
    t_best, c_best, p_best = float(times[k]), float(conc[k]), float(probs[k])

    def score(t: float) -> float:
        c = evaluate(np.array([t]))[1][0]
        return -np.inf if np.isnan(c) else float(c)

    lo, hi = max(0.0, t_best - dt), min(t_max, t_best + dt)
    while hi - lo > dt / 100:
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if score(m1) < score(m2):
            lo = m1
        else:
            hi = m2
    t_ref = 0.5 * (lo + hi)
    p_ref, c_ref = evaluate(np.array([t_ref]))
    if not np.isnan(c_ref[0]) and c_ref[0] > c_best + TIE_TOL:
        t_best, c_best, p_best = t_ref, float(c_ref[0]), float(p_ref[0])
    return TStar(t_best, c_best, p_best)


def default_t_max(spec: ChainSpec) -> float:
    return 4.0 * spec.n_sites / spec.j_coupling


def run_at_time(
    spec: ChainSpec,
    angles: RotationAngles,
    outcome: Outcome | str | None,
    t: float,
    policy: DegeneracyPolicy | str = DegeneracyPolicy.ERROR,
) -> tuple[float, float]:
    """(probability, concurrence) of one readout at time ``t``."""
    return ProtocolRun(spec, angles, outcome, policy).at_time(t)


def find_tstar(
    spec: ChainSpec,
    angles: RotationAngles,
    outcome: Outcome | str | None,
    t_max: float | None = None,
    dt: float = 0.02,
    policy: DegeneracyPolicy | str = DegeneracyPolicy.ERROR,
) -> TStar:
    return ProtocolRun(spec, angles, outcome, policy).find_tstar(t_max, dt)


def run_protocol(
    spec: ChainSpec,
    angles: RotationAngles = RotationAngles(),
    outcome: Outcome | str | None = Outcome.P00,
    t_max: float | None = None,
    dt: float = 0.02,
    policy: DegeneracyPolicy | str = DegeneracyPolicy.ERROR,
) -> ProtocolResult:
    return ProtocolRun(spec, angles, outcome, policy).result(t_max, dt)
