"""Pure NumPy density-matrix kernels.

Every routine updates ``rho`` in place. ``rho`` is a C-contiguous complex128
``(2**n, 2**n)`` array; qubit ``q`` maps to bit ``n - 1 - q`` of the basis
index, so qubit 0 is the leftmost character of a bitstring.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _apply_local(rho, n, qubits, u):
    k = len(qubits)
    tensor = rho.reshape((2,) * (2 * n))
    ut = u.reshape((2,) * (2 * k))
    rows = list(qubits)
    # U acting on the row indices
    out = np.tensordot(ut, tensor, axes=(list(range(k, 2 * k)), rows))
    out = np.moveaxis(out, list(range(k)), rows)
    # rho U^dagger: conj(U) acting on the column indices
    cols = [n + q for q in qubits]
    out = np.tensordot(ut.conj(), out, axes=(list(range(k, 2 * k)), cols))
    out = np.moveaxis(out, list(range(k)), cols)
    rho[...] = out.reshape(rho.shape)


def apply_unitary_1q(rho, n, q, u):
    _apply_local(rho, n, (q,), np.asarray(u, dtype=np.complex128))


def apply_unitary_2q(rho, n, q0, q1, u):
    _apply_local(rho, n, (q0, q1), np.asarray(u, dtype=np.complex128))


def apply_diagonal(rho, diag):
    """rho_ij -> d_i rho_ij conj(d_j) for a full-width diagonal unitary."""
    rho *= np.outer(diag, np.conj(diag))


def _depolarize(rho, n, qubits, p):
    m = len(qubits)
    d = 2**m
    alpha = p * d * d / (d * d - 1)
    tensor = rho.reshape((2,) * (2 * n))
    view = np.moveaxis(
        tensor, list(qubits) + [n + q for q in qubits], list(range(-2 * m, 0))
    )
    local = list(np.ndindex(*(2,) * m))
    trace = sum(view[(...,) + a + a] for a in local)
    view *= 1.0 - alpha
    for a in local:
        view[(...,) + a + a] += (alpha / d) * trace


def depolarize_1q(rho, n, q, p):
    _depolarize(rho, n, (q,), p)


def depolarize_2q(rho, n, q0, q1, p):
    _depolarize(rho, n, (q0, q1), p)
