import numpy as np
import pytest

from oracles import PAULI, embed, pauli_depolarize


def random_density(rng, n):
    dim = 2**n
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return np.ascontiguousarray(rho / np.trace(rho))


def random_unitary(rng, dim):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.mark.parametrize("n,q", [(1, 0), (3, 0), (3, 2), (4, 1)])
def test_unitary_1q_matches_dense(backend, rng, n, q):
    rho = random_density(rng, n)
    u = random_unitary(rng, 2)
    U = embed(u, (q,), n)
    expected = U @ rho @ U.conj().T
    backend.apply_unitary_1q(rho, n, q, u)
    np.testing.assert_allclose(rho, expected, atol=1e-13)


@pytest.mark.parametrize("n,q0,q1", [(2, 0, 1), (2, 1, 0), (3, 2, 0), (4, 1, 3)])
def test_unitary_2q_matches_dense(backend, rng, n, q0, q1):
    rho = random_density(rng, n)
    u = random_unitary(rng, 4)
    U = embed(u, (q0, q1), n)
    expected = U @ rho @ U.conj().T
    backend.apply_unitary_2q(rho, n, q0, q1, u)
    np.testing.assert_allclose(rho, expected, atol=1e-13)


def test_diagonal(backend, rng):
    rho = random_density(rng, 3)
    d = np.exp(1j * rng.uniform(0, 2 * np.pi, 8))
    expected = np.diag(d) @ rho @ np.diag(d).conj().T
    backend.apply_diagonal(rho, d)
    np.testing.assert_allclose(rho, expected, atol=1e-14)


@pytest.mark.parametrize("p", [0.0, 1e-3, 0.3, 0.75, 1.0])
@pytest.mark.parametrize("n,q", [(1, 0), (3, 1)])
def test_depolarize_1q_matches_pauli_sum(backend, rng, n, q, p):
    rho = random_density(rng, n)
    expected = pauli_depolarize(rho, (q,), p, n)
    backend.depolarize_1q(rho, n, q, p)
    np.testing.assert_allclose(rho, expected, atol=1e-13)


@pytest.mark.parametrize("p", [1e-3, 0.5, 15 / 16, 1.0])
@pytest.mark.parametrize("n,q0,q1", [(2, 0, 1), (3, 2, 0), (4, 1, 2)])
def test_depolarize_2q_matches_pauli_sum(backend, rng, n, q0, q1, p):
    rho = random_density(rng, n)
    expected = pauli_depolarize(rho, (q0, q1), p, n)
    backend.depolarize_2q(rho, n, q0, q1, p)
    np.testing.assert_allclose(rho, expected, atol=1e-13)


def test_backends_agree_on_long_sequence(rng):
    from conftest import BACKENDS

    if len(BACKENDS) < 2:
        pytest.skip("compiled extension not built")
    n = 4
    start = random_density(rng, n)
    results = []
    for backend in BACKENDS:
        rho = start.copy()
        local = np.random.default_rng(5)
        for _ in range(60):
            q0, q1 = local.choice(n, 2, replace=False)
            backend.apply_unitary_2q(rho, n, int(q0), int(q1), random_unitary(local, 4))
            backend.depolarize_2q(rho, n, int(q0), int(q1), 0.01)
            backend.apply_unitary_1q(rho, n, int(q1), random_unitary(local, 2))
            backend.depolarize_1q(rho, n, int(q1), 0.001)
        results.append(rho)
    np.testing.assert_allclose(results[0], results[1], atol=1e-12)


def test_pauli_helpers_consistent():
    # Y = i X Z
    np.testing.assert_allclose(PAULI["Y"], 1j * PAULI["X"] @ PAULI["Z"])
