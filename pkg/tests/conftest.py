from functools import reduce

import numpy as np
import pytest

from dimerchain.hamiltonian import ChainSpec, Model

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)


def site_op(op, site, n):
    """``op`` on ``site`` (1-based, site 1 leftmost in the Kronecker chain)."""
    ops = [I2] * n
    ops[site - 1] = op
    return reduce(np.kron, ops)


def reference_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Pauli-string construction, independent of the bit-twiddling builder."""
    n = spec.n_sites
    aniso = spec.anisotropy if spec.model is Model.XXZ else 0.0
    h = np.zeros((2**n, 2**n), dtype=complex)
    for j in range(1, n):
        c = 0.5 * spec.j_coupling * (1 + (-1) ** (j + 1) * spec.delta)
        h += c * (site_op(X, j, n) @ site_op(X, j + 1, n) + site_op(Y, j, n) @ site_op(Y, j + 1, n))
        h += c * aniso * site_op(Z, j, n) @ site_op(Z, j + 1, n)
    return h


def random_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def random_spec(rng, n_max=10, n_min=2):
    n = int(rng.integers(n_min, n_max + 1))
    model = Model.XX if rng.random() < 0.5 else Model.XXZ
    return ChainSpec(model, n, float(rng.uniform(0.3, 2.0)), float(rng.uniform(0, 0.99)), float(rng.uniform(-3, 3)))


def random_unitary(rng, d=2):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def basis_state(bits: str) -> np.ndarray:
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1.0
    return psi


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# criterion number -> (passed, detail); filled by test_acceptance, echoed at session end
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
