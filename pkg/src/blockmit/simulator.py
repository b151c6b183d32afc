"""Exact density-matrix simulation under per-gate depolarizing noise.

Depolarizing convention: on an ``m``-qubit support the channel is the uniform
mixture of non-identity Pauli strings,

    rho -> (1 - p) rho + p / (4**m - 1) * sum_{P != I} P rho P^dagger,

applied immediately after every gate on exactly that gate's qubits (``p1``
after one-qubit gates, ``p2`` after two-qubit gates). Measurement is ideal.

Shots are drawn by inverse-CDF sampling from the final diagonal using a
Philox (counter-based) generator, so a run is a pure function of
``(circuit, noise, shots, seed)``.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field

import numpy as np

from blockmit import kernels
from blockmit.circuit import Circuit, Gate
from blockmit.errors import NumericalError, ValidationError

log = logging.getLogger(__name__)

MAX_QUBITS = 12
NORM_DRIFT = 1e-8


@dataclass(frozen=True)
class NoiseModel:
    p1: float = 0.0
    p2: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"must lie in [0, 1], got {value}", name)

    @property
    def is_noiseless(self) -> bool:
        return self.p1 == 0.0 and self.p2 == 0.0

    def for_support(self, size: int) -> float:
        return self.p1 if size == 1 else self.p2


NOISELESS = NoiseModel()


@dataclass
class DensityState:
    n_qubits: int
    matrix: np.ndarray

    @classmethod
    def ground(cls, n_qubits: int) -> DensityState:
        _check_width(n_qubits)
        dim = 2**n_qubits
        rho = np.zeros((dim, dim), dtype=np.complex128)
        rho[0, 0] = 1.0
        return cls(n_qubits, rho)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def copy(self) -> DensityState:
        return DensityState(self.n_qubits, self.matrix.copy())

    def probabilities(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()


@dataclass(frozen=True)
class Counts:
    shots: int
    histogram: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if sum(self.histogram.values()) != self.shots:
            raise ValidationError("histogram does not sum to shots", "counts")

    def frequency(self, bitstring: str) -> float:
        return self.histogram.get(bitstring, 0) / self.shots


def bitstring(index: int, n_qubits: int) -> str:
    """Basis index -> bitstring, qubit 0 leftmost."""
    return format(index, f"0{n_qubits}b")


def basis_index(bits: str) -> int:
    return int(bits, 2)


def derive_seed(base_seed: int, *path: int) -> int:
    """Hash ``base_seed`` and an integer path into an independent 64-bit seed."""
    seq = np.random.SeedSequence(int(base_seed), spawn_key=tuple(int(p) for p in path))
    return int(seq.generate_state(1, np.uint64)[0])


def _check_width(n_qubits):
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValidationError(f"supported widths are 1..{MAX_QUBITS}", "n_qubits")


def _check_support(n_qubits, qubits):
    for q in qubits:
        if not 0 <= q < n_qubits:
            raise ValidationError(
                f"qubit {q} outside {n_qubits}-qubit state", "gate.qubits"
            )


def _phase_diagonal(n_qubits, qubits):
    idx = np.arange(2**n_qubits)
    mask = np.ones(idx.shape, dtype=bool)
    for q in qubits:
        mask &= ((idx >> (n_qubits - 1 - q)) & 1).astype(bool)
    diag = np.ones(idx.shape, dtype=np.complex128)
    diag[mask] = -1.0
    return diag


def _apply_gate_inplace(rho, n, gate: Gate):
    q = gate.qubits
    if gate.kind in ("MCZ", "CZ"):
        kernels.apply_diagonal(rho, _phase_diagonal(n, q))
    elif len(q) == 1:
        kernels.apply_unitary_1q(rho, n, q[0], gate.matrix())
    else:
        kernels.apply_unitary_2q(rho, n, q[0], q[1], gate.matrix())


def _depolarize_inplace(rho, n, support, p):
    if p == 0.0:
        return
    if len(support) == 1:
        kernels.depolarize_1q(rho, n, support[0], p)
    elif len(support) == 2:
        kernels.depolarize_2q(rho, n, support[0], support[1], p)
    else:
        raise ValidationError(
            f"depolarizing supports 1 or 2 qubits, got {len(support)}; transpile first",
            "support",
        )


def apply_gate(state: DensityState, gate: Gate) -> DensityState:
    """Return ``U rho U^dagger`` for a single gate (MCZ via its dense diagonal)."""
    _check_support(state.n_qubits, gate.qubits)
    out = state.copy()
    _apply_gate_inplace(out.matrix, out.n_qubits, gate)
    return out


def apply_depolarizing(state: DensityState, support, p: float) -> DensityState:
    support = tuple(support)
    _check_support(state.n_qubits, support)
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"must lie in [0, 1], got {p}", "p")
    if len(set(support)) != len(support):
        raise ValidationError("repeated qubit in support", "support")
    out = state.copy()
    _depolarize_inplace(out.matrix, out.n_qubits, support, p)
    return out


def evolve(circuit: Circuit, noise: NoiseModel = NOISELESS) -> DensityState:
    """Final density matrix of ``circuit`` started from ``|0...0><0...0|``."""
    state = DensityState.ground(circuit.n_qubits)
    rho, n = state.matrix, state.n_qubits
    noisy = not noise.is_noiseless
    for gate in circuit.gates:
        if noisy and len(gate.qubits) > 2:
            raise ValidationError(
                f"{gate.kind} on {len(gate.qubits)} qubits cannot carry noise; "
                "transpile the circuit first",
                "circuit",
            )
        _apply_gate_inplace(rho, n, gate)
        if noisy:
            _depolarize_inplace(rho, n, gate.qubits, noise.for_support(len(gate.qubits)))
    return state


def _normalized(probs):
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if abs(total - 1.0) > NORM_DRIFT:
        raise NumericalError(f"final state trace drifted to {total!r}")
    return probs / total


@functools.lru_cache(maxsize=128)
def final_probabilities(circuit: Circuit, noise: NoiseModel = NOISELESS) -> np.ndarray:
    """Exact outcome distribution (cached; the returned array is read-only)."""
    probs = _normalized(evolve(circuit, noise).probabilities())
    probs.setflags(write=False)
    return probs


def ideal_probabilities(circuit: Circuit) -> np.ndarray:
    return final_probabilities(circuit, NOISELESS)


def sample(probs: np.ndarray, shots: int, seed: int, n_qubits: int) -> Counts:
    if shots < 1:
        raise ValidationError("must be >= 1", "shots")
    rng = np.random.Generator(np.random.Philox(int(seed)))
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    draws = np.searchsorted(cdf, rng.random(shots), side="right")
    tally = np.bincount(draws, minlength=len(probs))
    histogram = {bitstring(i, n_qubits): int(c) for i, c in enumerate(tally) if c}
    return Counts(shots, histogram)


def run(circuit: Circuit, noise: NoiseModel, shots: int, seed: int) -> Counts:
    """Evolve, then draw ``shots`` measurement outcomes."""
    if shots < 1:
        raise ValidationError("must be >= 1", "shots")
    probs = final_probabilities(circuit, noise)
    return sample(probs, shots, seed, circuit.n_qubits)
