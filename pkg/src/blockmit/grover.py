"""Grover circuits, the oracle-plus-diffusion block, and circuit transforms.

Transpilation uses one fixed, ancilla-free scheme so that noisy results are
reproducible:

* ``CZ`` and one-control ``MCZ`` become ``H(t) CX(c, t) H(t)``.
* An ``MCZ`` on ``m >= 3`` qubits is expanded as a phase polynomial. The
  product ``x_1 ... x_m`` is a signed sum of the parities of all nonempty
  qubit subsets, each weighted by ``2**(1 - m)``, so the gate equals a
  product of ``RZ(+-pi / 2**(m-1))`` rotations on subset parities. For each
  qubit ``j`` in turn, the subsets whose largest member is ``j`` are visited
  in reflected Gray-code order, with one ``CX`` into ``j`` between
  neighbouring subsets and one more to uncompute. This costs ``2**m - 2``
  CX and ``2**m - 1`` rotations: 6 CX + 7 T/Tdg for CCZ, 62 CX + 63 RZ for
  six qubits. Rotations of ``+-pi/4`` are emitted as ``T``/``Tdg`` and
  ``+-pi/2`` as ``S``/``Sdg``. Each rotation equals the phase gate only up to
  global phase, which is invisible to density matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from blockmit.circuit import Circuit, Gate
from blockmit.errors import ValidationError


@dataclass(frozen=True)
class GroverSpec:
    n_qubits: int
    target: str
    r: int | None = None
    theta: float = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ValidationError("Grover search needs at least 2 qubits", "n_qubits")
        if len(self.target) != self.n_qubits or set(self.target) - {"0", "1"}:
            raise ValidationError(
                f"must be a {self.n_qubits}-character bitstring, got {self.target!r}",
                "target",
            )
        if self.r is None:
            object.__setattr__(self, "r", optimal_iterations(self.n_qubits))
        if self.r < 0:
            raise ValidationError("must be >= 0", "r")
        object.__setattr__(self, "theta", math.asin(1.0 / math.sqrt(2**self.n_qubits)))

    @property
    def theoretical_success(self) -> float:
        return theoretical_success(self.n_qubits, self.r)


@dataclass(frozen=True)
class BlockPair:
    block: Circuit
    inverse_block: Circuit


def optimal_iterations(n: int) -> int:
    if n < 2:
        raise ValidationError("optimal iteration count needs n >= 2", "n_qubits")
    theta = math.asin(1.0 / math.sqrt(2**n))
    return round(math.pi / (4.0 * theta) - 0.5)


def theoretical_success(n: int, r: int) -> float:
    if n < 2 or r < 0:
        raise ValidationError("needs n >= 2 and r >= 0")
    theta = math.asin(1.0 / math.sqrt(2**n))
    return math.sin((2 * r + 1) * theta) ** 2


def _layer(kind, qubits):
    return [Gate(kind, (q,)) for q in qubits]


def oracle(n: int, target: str) -> Circuit:
    """Phase flip on ``|target>``: X-conjugated MCZ, no ancilla."""
    zeros = [q for q, bit in enumerate(target) if bit == "0"]
    gates = _layer("X", zeros) + [Gate("MCZ", tuple(range(n)))] + _layer("X", zeros)
    return Circuit(n, gates, f"O[{target}]")


def diffusion(n: int) -> Circuit:
    every = range(n)
    gates = (
        _layer("H", every)
        + _layer("X", every)
        + [Gate("MCZ", tuple(range(n)))]
        + _layer("X", every)
        + _layer("H", every)
    )
    return Circuit(n, gates, "D")


def build_block(spec: GroverSpec) -> BlockPair:
    block = (oracle(spec.n_qubits, spec.target) + diffusion(spec.n_qubits)).with_label(
        "DO"
    )
    return BlockPair(block, block.inverse())


def build_grover(spec: GroverSpec) -> Circuit:
    n = spec.n_qubits
    prep = Circuit(n, _layer("H", range(n)))
    block = build_block(spec).block
    return (prep + block * spec.r).with_label(f"grover[{spec.target},r={spec.r}]")


def _rotation(qubit, angle):
    for kind, value in (("T", math.pi / 4), ("S", math.pi / 2)):
        if math.isclose(angle, value):
            return Gate(kind, (qubit,))
        if math.isclose(angle, -value):
            return Gate(kind + "DG", (qubit,))
    return Gate("RZ", (qubit,), angle)


def decompose_mcz(qubits) -> list[Gate]:
    """Ancilla-free MCZ expansion into {H, T, Tdg, S, Sdg, RZ, CX}."""
    qubits = tuple(qubits)
    m = len(qubits)
    if m == 2:
        c, t = qubits
        return [Gate("H", (t,)), Gate("CX", (c, t)), Gate("H", (t,))]
    unit = math.pi / 2 ** (m - 1)
    gates = []
    for j, acc in enumerate(qubits):
        # Gray-code walk over subsets of qubits[:j]; acc holds the running parity
        gray = 0
        for step in range(2**j):
            if step:
                flip = (step & -step).bit_length() - 1
                gray ^= 1 << flip
                gates.append(Gate("CX", (qubits[flip], acc)))
            size = bin(gray).count("1") + 1
            gates.append(_rotation(acc, unit if size % 2 else -unit))
        if j:
            gates.append(Gate("CX", (qubits[j - 1], acc)))
    return gates


def transpile(circuit: Circuit) -> Circuit:
    """Lower to {H, X, Z, S, Sdg, T, Tdg, RZ, CX}; see the module docstring."""
    out = []
    for gate in circuit.gates:
        if gate.kind in ("MCZ", "CZ"):
            expansion = Circuit(circuit.n_qubits, decompose_mcz(gate.qubits))
            if gate.daggered:
                expansion = expansion.inverse()
            out.extend(expansion.gates)
        else:
            out.append(gate)
    return Circuit(circuit.n_qubits, out, circuit.label)


def fold_global(circuit: Circuit, scale: int) -> Circuit:
    """``C (C^dagger C)^n`` with ``scale = 2n + 1``."""
    if not isinstance(scale, int) or isinstance(scale, bool) or scale < 1 or scale % 2 == 0:
        raise ValidationError(f"noise scale must be an odd positive integer, got {scale!r}", "lambda")
    folds = (scale - 1) // 2
    pair = circuit.inverse() + circuit
    folded = circuit + pair * folds
    return folded.with_label(f"{circuit.label}@x{scale}" if scale > 1 else circuit.label)


def build_identity_circuit(pair: BlockPair, k: int) -> Circuit:
    """``k`` repetitions of (block; inverse block), starting from ``|0...0>``."""
    if k < 1:
        raise ValidationError("must be >= 1", "k")
    return ((pair.block + pair.inverse_block) * k).with_label(f"U_I^{k}")
