"""Noisy Grover simulation with zero-noise extrapolation and block-fidelity mitigation."""

from blockmit.blockfit import (
    DecayFit,
    FidelityPoint,
    MitigationResult,
    block_pipeline,
    fit_decay,
    measure_block_fidelity,
    mitigate,
)
from blockmit.circuit import Circuit, Gate
from blockmit.grover import (
    BlockPair,
    GroverSpec,
    build_block,
    build_grover,
    build_identity_circuit,
    fold_global,
    optimal_iterations,
    theoretical_success,
    transpile,
)
from blockmit.harness import ExperimentConfig, ExperimentReport, reproduce, run_experiment
from blockmit.simulator import Counts, DensityState, NoiseModel, ideal_probabilities, run
from blockmit.zne import ScaledPoint, ZneEstimate, richardson_extrapolate

__version__ = "0.1.0"
