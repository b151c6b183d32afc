"""Brute-force reference implementations, independent of the package kernels."""

import itertools

import numpy as np

from blockmit.circuit import ALL_KINDS, Circuit, Gate

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def local_matrix(gate):
    """Gate matrices written out by hand (not via Gate.matrix)."""
    s = 1 / np.sqrt(2)
    table = {
        "H": [[s, s], [s, -s]],
        "X": [[0, 1], [1, 0]],
        "Z": [[1, 0], [0, -1]],
        "S": [[1, 0], [0, 1j]],
        "SDG": [[1, 0], [0, -1j]],
        "T": [[1, 0], [0, np.exp(1j * np.pi / 4)]],
        "TDG": [[1, 0], [0, np.exp(-1j * np.pi / 4)]],
        "CX": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
        "CZ": np.diag([1, 1, 1, -1]),
    }
    if gate.kind == "RZ":
        return np.diag([np.exp(-0.5j * gate.angle), np.exp(0.5j * gate.angle)])
    if gate.kind == "MCZ":
        d = np.ones(2 ** len(gate.qubits), dtype=complex)
        d[-1] = -1
        return np.diag(d)
    return np.array(table[gate.kind], dtype=complex)


def embed(local, qubits, n):
    """Full 2^n matrix of ``local`` acting on ``qubits``, built entry by entry."""
    dim = 2**n
    k = len(qubits)
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
        loc_in = int("".join(str(bits[q]) for q in qubits), 2)
        for loc_out in range(2**k):
            amp = local[loc_out, loc_in]
            if amp == 0:
                continue
            out_bits = list(bits)
            for pos, q in enumerate(qubits):
                out_bits[q] = (loc_out >> (k - 1 - pos)) & 1
            row = int("".join(map(str, out_bits)), 2)
            full[row, col] += amp
    return full


def circuit_unitary(circuit):
    u = np.eye(2**circuit.n_qubits, dtype=complex)
    for gate in circuit.gates:
        u = embed(local_matrix(gate), gate.qubits, circuit.n_qubits) @ u
    return u


def ideal_distribution(circuit):
    return np.abs(circuit_unitary(circuit)[:, 0]) ** 2


def pauli_depolarize(rho, support, p, n):
    """(1-p) rho + p/(4^m-1) sum_{P != I} P rho P, with explicit Pauli strings."""
    m = len(support)
    out = (1 - p) * rho
    for labels in itertools.product("IXYZ", repeat=m):
        if set(labels) == {"I"}:
            continue
        local = PAULI[labels[0]]
        for lab in labels[1:]:
            local = np.kron(local, PAULI[lab])
        P = embed(local, support, n)
        out = out + p / (4**m - 1) * P @ rho @ P.conj().T
    return out


def noisy_density(circuit, p1, p2):
    n = circuit.n_qubits
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1
    for gate in circuit.gates:
        U = embed(local_matrix(gate), gate.qubits, n)
        rho = U @ rho @ U.conj().T
        p = p1 if len(gate.qubits) == 1 else p2
        if p:
            rho = pauli_depolarize(rho, gate.qubits, p, n)
    return rho


def random_circuit(rng, n, n_gates, allow_wide=True):
    kinds = sorted(ALL_KINDS if allow_wide else ALL_KINDS - {"MCZ"})
    gates = []
    for _ in range(n_gates):
        kind = kinds[rng.integers(len(kinds))]
        if kind in ("CX", "CZ") and n < 2:
            kind = "H"
        if kind == "MCZ" and n < 2:
            kind = "T"
        if kind in ("CX", "CZ"):
            qubits = tuple(int(q) for q in rng.choice(n, 2, replace=False))
        elif kind == "MCZ":
            width = int(rng.integers(2, n + 1))
            qubits = tuple(int(q) for q in rng.choice(n, width, replace=False))
        else:
            qubits = (int(rng.integers(n)),)
        angle = float(rng.uniform(-np.pi, np.pi)) if kind == "RZ" else 0.0
        gates.append(Gate(kind, qubits, angle))
    return Circuit(n, gates)
