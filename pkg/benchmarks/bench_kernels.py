"""Time the compiled and pure-Python kernels on the same workloads.

Usage: ``python benchmarks/bench_kernels.py [--qubits 6] [--repeat 5]``
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from blockmit import _pykernels
from blockmit.circuit import Gate
from blockmit.grover import GroverSpec, build_grover, transpile

try:
    from blockmit import _ckernels
except ImportError:
    _ckernels = None


def random_state(n, rng):
    a = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def evolve_with(mod, circuit, p1, p2):
    n = circuit.n_qubits
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1.0
    for gate in circuit.gates:
        u = np.ascontiguousarray(gate.matrix())
        if len(gate.qubits) == 1:
            mod.apply_unitary_1q(rho, n, gate.qubits[0], u)
            mod.depolarize_1q(rho, n, gate.qubits[0], p1)
        else:
            mod.apply_unitary_2q(rho, n, gate.qubits[0], gate.qubits[1], u)
            mod.depolarize_2q(rho, n, gate.qubits[0], gate.qubits[1], p2)
    return rho


def workloads(n, rng):
    rho = random_state(n, rng)
    h = np.ascontiguousarray(Gate("H", (0,)).matrix())
    cx = np.ascontiguousarray(Gate("CX", (0, n - 1)).matrix())
    grover = transpile(build_grover(GroverSpec(n, "1" * n)))
    return {
        "1q unitary": lambda m: m.apply_unitary_1q(rho, n, n // 2, h),
        "2q unitary": lambda m: m.apply_unitary_2q(rho, n, 0, n - 1, cx),
        "1q depolarize": lambda m: m.depolarize_1q(rho, n, n // 2, 1e-3),
        "2q depolarize": lambda m: m.depolarize_2q(rho, n, 0, n - 1, 1e-3),
        f"grover evolution ({len(grover)} gates)": lambda m: evolve_with(m, grover, 1e-4, 1e-3),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--qubits", type=int, default=6)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = [_pykernels] + ([_ckernels] if _ckernels is not None else [])
    if _ckernels is None:
        print("compiled extension not built; timing the Python kernels only")
    rng = np.random.default_rng(0)
    print(f"{'workload':32s}" + "".join(f"{m.BACKEND:>14s}" for m in backends) + "   speedup")
    for name, job in workloads(args.qubits, rng).items():
        times = []
        for mod in backends:
            number = 1 if "evolution" in name else 200
            best = min(timeit.repeat(lambda: job(mod), number=number, repeat=args.repeat))
            times.append(best / number)
        cells = "".join(f"{t * 1e6:12.1f}us" for t in times)
        speedup = f"{times[0] / times[1]:9.1f}x" if len(times) == 2 else ""
        print(f"{name:32s}{cells}{speedup}")
    if _ckernels is not None:
        g = transpile(build_grover(GroverSpec(4, "1111")))
        diff = np.max(np.abs(evolve_with(_pykernels, g, 1e-3, 1e-2) - evolve_with(_ckernels, g, 1e-3, 1e-2)))
        print(f"backend agreement on 4-qubit noisy Grover: max diff {diff:.1e}")


if __name__ == "__main__":
    main()
