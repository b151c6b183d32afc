"""Block-level fidelity characterization and success-probability correction.

The repeated block ``U`` of a structured circuit is paired with its inverse;
``k`` such pairs ideally return ``|0...0>``. The return frequency ``F(2k)``
is modelled as ``c * f**(2k)``, and a circuit that applies the block ``r``
times is corrected as ``P_raw / (c * f**r)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from blockmit.errors import FitError, NumericalError, ValidationError
from blockmit.grover import (
    BlockPair,
    GroverSpec,
    build_block,
    build_grover,
    build_identity_circuit,
    transpile,
)
from blockmit.simulator import NoiseModel, derive_seed, run

log = logging.getLogger(__name__)

C_POLICIES = ("assume_unit", "fit")
DEFAULT_KAPPA = 3.0
MIN_DENOMINATOR = 1e-6

# seed streams shared with the experiment harness
RAW_STREAM, ZNE_STREAM, IDENTITY_STREAM = 0, 1, 2


@dataclass(frozen=True)
class FidelityPoint:
    k: int
    fidelity: float
    shots: int
    discarded: bool = False
    reason: str = ""

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("must be >= 1", "k")
        if not 0.0 <= self.fidelity <= 1.0:
            raise ValidationError(f"fidelity {self.fidelity} outside [0, 1]", "fidelity")

    @property
    def depth(self) -> int:
        return 2 * self.k


@dataclass(frozen=True)
class DecayFit:
    c: float
    f: float
    method: str
    residual: float
    per_k_estimates: tuple[float, ...] = ()
    warning: str | None = None

    @property
    def spread(self) -> float:
        if not self.per_k_estimates:
            return 0.0
        return max(self.per_k_estimates) - min(self.per_k_estimates)


@dataclass(frozen=True)
class MitigationResult:
    p_raw: float
    p_mit: float
    r: int
    fit: DecayFit
    clipped: bool
    unclipped: float


def default_ks(r: int) -> list[int]:
    """``1 .. r // 2``, never fewer than ``{1, 2}``."""
    return list(range(1, max(2, r // 2) + 1))


def measure_block_fidelity(
    pair: BlockPair, k: int, noise: NoiseModel, shots: int, seed: int
) -> FidelityPoint:
    circuit = transpile(build_identity_circuit(pair, k))
    counts = run(circuit, noise, shots, seed)
    return FidelityPoint(k, counts.frequency("0" * circuit.n_qubits), shots)


def flag_baseline_fidelity(
    points: Sequence[FidelityPoint], n_qubits: int, kappa: float = DEFAULT_KAPPA
) -> list[FidelityPoint]:
    """Mark ``k >= 3`` points at or below ``kappa / 2**n``; ``k`` in {1, 2} is kept."""
    if not points:
        raise ValidationError("no fidelity points", "points")
    limit = kappa * 2.0**-n_qubits
    out = []
    for point in sorted(points, key=lambda p: p.k):
        if point.k >= 3 and point.fidelity <= limit:
            point = replace(point, discarded=True, reason=f"F <= {kappa:g}/2^n = {limit:.4f}")
        out.append(point)
    return out


def discard_baseline_fidelity(
    points: Sequence[FidelityPoint], n_qubits: int, kappa: float = DEFAULT_KAPPA
) -> list[FidelityPoint]:
    return [p for p in flag_baseline_fidelity(points, n_qubits, kappa) if not p.discarded]


def _log_residual(depths, logs, c, f):
    pred = math.log(c) + depths * math.log(f)
    return float(np.sqrt(np.mean((logs - pred) ** 2)))


def fit_decay(points: Sequence[FidelityPoint], assume_unit_c: bool = True) -> DecayFit:
    """Fit ``F(2k) = c f**(2k)``.

    With ``assume_unit_c`` the estimate is the mean of per-point roots
    ``F**(1/2k)`` and ``c = 1``. Otherwise two points use the ratio
    ``f**(2(k2 - k1)) = F2 / F1`` and three or more use least squares of
    ``ln F`` against depth. Fits with ``f > 1`` are clamped to 1.
    """
    ordered = sorted(points, key=lambda p: p.k)
    if not ordered:
        raise FitError("no fidelity points to fit")
    if len({p.k for p in ordered}) != len(ordered):
        raise ValidationError("duplicate k values", "k")
    if any(p.fidelity <= 0.0 for p in ordered):
        raise ValidationError("fidelity must be > 0 to take logarithms", "fidelity")
    depths = np.array([p.depth for p in ordered], dtype=float)
    fids = np.array([p.fidelity for p in ordered])
    logs = np.log(fids)
    roots = tuple(float(v) for v in fids ** (1.0 / depths))

    if assume_unit_c:
        method, c, f = "root_extraction", 1.0, float(np.mean(roots))
    elif len(ordered) == 1:
        raise FitError("fitting c needs at least two k values")
    elif len(ordered) == 2:
        method = "ratio"
        f = float((fids[1] / fids[0]) ** (1.0 / (depths[1] - depths[0])))
        c = float(fids[0] / f ** depths[0])
    else:
        method = "loglinear"
        slope, intercept = np.polyfit(depths, logs, 1)
        f, c = math.exp(slope), math.exp(intercept)

    warning = None
    if f > 1.0:
        warning = f"fitted f = {f:.6f} > 1 clamped to 1"
        log.warning(warning)
        f = 1.0
    return DecayFit(c, f, method, _log_residual(depths, logs, c, f), roots, warning)


def mitigate(p_raw: float, fit: DecayFit, r: int) -> MitigationResult:
    """``min(1, p_raw / (c f**r))``."""
    if r < 1:
        raise ValidationError("must be >= 1", "r")
    denom = fit.c * fit.f**r
    if denom < MIN_DENOMINATOR:
        raise NumericalError(f"mitigation factor c f^r = {denom:.3g} too small to trust")
    raw = p_raw / denom
    p_mit = min(1.0, max(0.0, raw))
    return MitigationResult(p_raw, p_mit, r, fit, raw > 1.0, raw)


@dataclass(frozen=True)
class BlockRun:
    run_index: int
    seed: int
    p_raw: float
    points: tuple[FidelityPoint, ...]
    result: MitigationResult


@dataclass(frozen=True)
class BlockPipelineResult:
    runs: tuple[BlockRun, ...]
    pooled: MitigationResult
    pooled_points: tuple[FidelityPoint, ...]
    aggregates: dict = field(default_factory=dict)


def mean_std(values) -> dict:
    arr = np.asarray(list(values), dtype=float)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return {"mean": float(arr.mean()), "std": std, "min": float(arr.min()), "max": float(arr.max())}


def fit_and_mitigate(
    p_raw: float, points: Sequence[FidelityPoint], n_qubits: int, r: int,
    c_policy: str = "assume_unit", kappa: float = DEFAULT_KAPPA,
) -> tuple[MitigationResult, list[FidelityPoint]]:
    if c_policy not in C_POLICIES:
        raise ValidationError(f"must be one of {C_POLICIES}", "c_policy")
    flagged = flag_baseline_fidelity(points, n_qubits, kappa)
    kept = [p for p in flagged if not p.discarded]
    fit = fit_decay(kept, assume_unit_c=c_policy == "assume_unit")
    return mitigate(p_raw, fit, r), flagged


def pool_points(per_run: Sequence[Sequence[FidelityPoint]]) -> list[FidelityPoint]:
    """Run-averaged fidelity per ``k`` (shots summed); discard flags are reset."""
    by_k: dict[int, list[FidelityPoint]] = {}
    for points in per_run:
        for p in points:
            by_k.setdefault(p.k, []).append(p)
    return [
        FidelityPoint(k, float(np.mean([p.fidelity for p in ps])), sum(p.shots for p in ps))
        for k, ps in sorted(by_k.items())
    ]


def block_pipeline(
    spec: GroverSpec,
    noise: NoiseModel,
    shots: int = 4000,
    repeats: int = 10,
    seed: int = 0,
    c_policy: str = "assume_unit",
    ks: Sequence[int] | None = None,
    kappa: float = DEFAULT_KAPPA,
) -> BlockPipelineResult:
    """Raw success, identity fidelities, fit and correction for each run."""
    ks = list(ks) if ks else default_ks(spec.r)
    if spec.r < 1:
        raise ValidationError("block mitigation needs r >= 1", "r")
    pair = build_block(spec)
    full = transpile(build_grover(spec))
    identities = {k: transpile(build_identity_circuit(pair, k)) for k in ks}
    n = spec.n_qubits

    runs = []
    for i in range(repeats):
        raw_seed = derive_seed(seed, i, RAW_STREAM)
        p_raw = run(full, noise, shots, raw_seed).frequency(spec.target)
        points = [
            FidelityPoint(k, run(c, noise, shots, derive_seed(seed, i, IDENTITY_STREAM, k))
                          .frequency("0" * n), shots)
            for k, c in identities.items()
        ]
        result, flagged = fit_and_mitigate(p_raw, points, n, spec.r, c_policy, kappa)
        runs.append(BlockRun(i, raw_seed, p_raw, tuple(flagged), result))

    pooled_in = pool_points([r.points for r in runs])
    p_raw_mean = float(np.mean([r.p_raw for r in runs]))
    pooled, pooled_flagged = fit_and_mitigate(p_raw_mean, pooled_in, n, spec.r, c_policy, kappa)
    aggregates = {
        "p_raw": mean_std(r.p_raw for r in runs),
        "p_mit": mean_std(r.result.p_mit for r in runs),
        "f": mean_std(r.result.fit.f for r in runs),
        "c": mean_std(r.result.fit.c for r in runs),
    }
    return BlockPipelineResult(tuple(runs), pooled, tuple(pooled_flagged), aggregates)
