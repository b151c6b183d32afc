"""Gate and circuit containers plus gate-level algebra (inversion, matrices)."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from blockmit.errors import ValidationError

SINGLE_QUBIT = frozenset({"H", "X", "Z", "S", "SDG", "T", "TDG", "RZ"})
TWO_QUBIT = frozenset({"CX", "CZ"})
ALL_KINDS = SINGLE_QUBIT | TWO_QUBIT | {"MCZ"}
# gate set a transpiled (noise-ready) circuit may contain
BASIS = SINGLE_QUBIT | {"CX"}

_ADJOINT = {"S": "SDG", "SDG": "S", "T": "TDG", "TDG": "T"}

_SQRT_HALF = 1.0 / np.sqrt(2.0)
_FIXED = {
    "H": np.array([[1, 1], [1, -1]], dtype=np.complex128) * _SQRT_HALF,
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Z": np.diag([1, -1]).astype(np.complex128),
    "S": np.diag([1, 1j]).astype(np.complex128),
    "SDG": np.diag([1, -1j]).astype(np.complex128),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]).astype(np.complex128),
    "TDG": np.diag([1, np.exp(-1j * np.pi / 4)]).astype(np.complex128),
    "CX": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
    ),
    "CZ": np.diag([1, 1, 1, -1]).astype(np.complex128),
}
for _m in _FIXED.values():
    _m.setflags(write=False)


@dataclass(frozen=True)
class Gate:
    """One gate application.

    ``qubits`` is ordered: for ``CX`` it is ``(control, target)``; for ``MCZ``
    the last entry is the nominal target and the rest are controls (the gate
    is symmetric). ``angle`` is only meaningful for ``RZ``. ``daggered``
    records that the gate came from inverting a circuit; toggling it twice
    restores the original gate exactly.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float = 0.0
    daggered: bool = False

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ValidationError(f"unknown gate kind {self.kind!r}", "gate.kind")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        arity = len(self.qubits)
        if self.kind in SINGLE_QUBIT and arity != 1:
            raise ValidationError(f"{self.kind} acts on one qubit", "gate.qubits")
        if self.kind in TWO_QUBIT and arity != 2:
            raise ValidationError(f"{self.kind} acts on two qubits", "gate.qubits")
        if self.kind == "MCZ" and arity < 2:
            raise ValidationError("MCZ needs at least one control", "gate.qubits")
        if len(set(self.qubits)) != arity:
            raise ValidationError(f"repeated qubit in {self.qubits}", "gate.qubits")
        if min(self.qubits) < 0:
            raise ValidationError("negative qubit index", "gate.qubits")

    @property
    def controls(self) -> tuple[int, ...]:
        return self.qubits[:-1] if self.kind == "MCZ" else ()

    def inverse(self) -> Gate:
        kind = _ADJOINT.get(self.kind, self.kind)
        angle = -self.angle if self.kind == "RZ" else self.angle
        return replace(self, kind=kind, angle=angle, daggered=not self.daggered)

    def matrix(self) -> np.ndarray:
        """Unitary on ``self.qubits`` (first listed qubit is most significant)."""
        if self.kind == "RZ":
            half = 0.5 * self.angle
            return np.diag([np.exp(-1j * half), np.exp(1j * half)])
        if self.kind == "MCZ":
            diag = np.ones(2 ** len(self.qubits), dtype=np.complex128)
            diag[-1] = -1.0
            return np.diag(diag)
        return _FIXED[self.kind]


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list over ``n_qubits`` qubits, in time order."""

    n_qubits: int
    gates: tuple[Gate, ...] = ()
    label: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits < 1:
            raise ValidationError("circuit width must be >= 1", "n_qubits")
        for gate in self.gates:
            if max(gate.qubits) >= self.n_qubits:
                raise ValidationError(
                    f"gate {gate.kind}{gate.qubits} outside {self.n_qubits}-qubit circuit",
                    "gate.qubits",
                )

    def __len__(self):
        return len(self.gates)

    def __add__(self, other: Circuit) -> Circuit:
        if other.n_qubits != self.n_qubits:
            raise ValidationError("cannot concatenate circuits of different width")
        return Circuit(self.n_qubits, self.gates + other.gates, self.label)

    def __mul__(self, times: int) -> Circuit:
        return Circuit(self.n_qubits, self.gates * times, self.label)

    def inverse(self) -> Circuit:
        label = self.label[:-1] if self.label.endswith("†") else self.label + "†"
        return Circuit(
            self.n_qubits, tuple(g.inverse() for g in reversed(self.gates)), label
        )

    def with_label(self, label: str) -> Circuit:
        return Circuit(self.n_qubits, self.gates, label)

    def extend(self, gates: Iterable[Gate]) -> Circuit:
        return Circuit(self.n_qubits, self.gates + tuple(gates), self.label)

    def gate_counts(self) -> dict[str, int]:
        """Gate histogram by kind plus ``one_qubit`` / ``two_qubit`` totals."""
        counts = Counter(g.kind for g in self.gates)
        out = dict(sorted(counts.items()))
        out["one_qubit"] = sum(1 for g in self.gates if len(g.qubits) == 1)
        out["two_qubit"] = sum(1 for g in self.gates if len(g.qubits) == 2)
        out["multi_qubit"] = sum(1 for g in self.gates if len(g.qubits) > 2)
        return out

    @property
    def is_transpiled(self) -> bool:
        return all(g.kind in BASIS for g in self.gates)


def inverse(circuit: Circuit) -> Circuit:
    return circuit.inverse()
