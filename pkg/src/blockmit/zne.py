"""Zero-noise extrapolation over globally folded circuits."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from blockmit.circuit import Circuit
from blockmit.errors import FitError, ValidationError
from blockmit.grover import fold_global, transpile
from blockmit.simulator import NoiseModel, run

log = logging.getLogger(__name__)

METHODS = ("richardson", "exponential", "loglinear", "linear")
DEFAULT_SCALES = (1, 3, 5)


@dataclass(frozen=True)
class ScaledPoint:
    scale: int
    expectation: float
    shots: int
    discarded: bool = False
    reason: str = ""

    def __post_init__(self):
        if self.scale < 1 or self.scale % 2 == 0:
            raise ValidationError(f"noise scale must be odd and >= 1, got {self.scale}", "lambda")
        if not 0.0 <= self.expectation <= 1.0:
            raise ValidationError(f"expectation {self.expectation} outside [0, 1]", "expectation")


@dataclass(frozen=True)
class ZneEstimate:
    value: float
    method: str
    points_used: tuple[ScaledPoint, ...]
    fit_params: dict | None = None
    unclipped: float = math.nan
    clipped: bool = False
    warning: str | None = None
    fallback_from: str | None = None


def _clip(value):
    return min(1.0, max(0.0, value)), not 0.0 <= value <= 1.0


def _sorted_unique(points: Sequence[ScaledPoint]) -> list[ScaledPoint]:
    if not points:
        raise FitError("no points to extrapolate")
    ordered = sorted(points, key=lambda p: p.scale)
    scales = [p.scale for p in ordered]
    if len(set(scales)) != len(scales):
        raise ValidationError(f"duplicate noise scales in {scales}", "lambda")
    return ordered


def measure_expectation(
    circuit: Circuit, target: str, noise: NoiseModel, shots: int, scale: int, seed: int
) -> ScaledPoint:
    """E(scale): frequency of ``target`` after folding the transpiled circuit."""
    base = circuit if circuit.is_transpiled else transpile(circuit)
    counts = run(fold_global(base, scale), noise, shots, seed)
    return ScaledPoint(scale, counts.frequency(target), shots)


def baseline_threshold(expectation: float, n_qubits: int, shots: int) -> float:
    sigma = math.sqrt(max(expectation * (1.0 - expectation), 0.0) / shots)
    return 2.0**-n_qubits + max(3.0 * sigma, 0.005)


def flag_baseline(
    points: Sequence[ScaledPoint], n_qubits: int, shots: int, protect: int = 2
) -> list[ScaledPoint]:
    """Mark points indistinguishable from random guessing.

    The ``protect`` lowest noise scales are never discarded (two points are
    the minimum for a linear extrapolation). If every point ends up flagged,
    the lowest scale is restored so an estimate can still be formed.
    """
    ordered = _sorted_unique(points)
    out = []
    for rank, point in enumerate(ordered):
        limit = baseline_threshold(point.expectation, n_qubits, shots)
        if rank >= protect and point.expectation <= limit:
            point = replace(point, discarded=True, reason=f"E <= baseline threshold {limit:.4f}")
        out.append(point)
    if all(p.discarded for p in out):
        out[0] = replace(out[0], discarded=False, reason="all points at baseline")
    return out


def discard_baseline(
    points: Sequence[ScaledPoint], n_qubits: int, shots: int, protect: int = 2
) -> list[ScaledPoint]:
    return [p for p in flag_baseline(points, n_qubits, shots, protect) if not p.discarded]


def lagrange_weights_at_zero(scales: Sequence[float]) -> np.ndarray:
    xs = np.asarray(scales, dtype=float)
    weights = np.ones(len(xs))
    for i, xi in enumerate(xs):
        for j, xj in enumerate(xs):
            if i != j:
                weights[i] *= -xj / (xi - xj)
    return weights


def richardson_extrapolate(points: Sequence[ScaledPoint]) -> ZneEstimate:
    """Polynomial of degree ``len(points) - 1`` through the points, at zero."""
    ordered = _sorted_unique(points)
    weights = lagrange_weights_at_zero([p.scale for p in ordered])
    raw = float(np.dot(weights, [p.expectation for p in ordered]))
    value, clipped = _clip(raw)
    return ZneEstimate(value, "richardson", tuple(ordered), None, raw, clipped)


def linear_extrapolate(points: Sequence[ScaledPoint]) -> ZneEstimate:
    ordered = _sorted_unique(points)
    if len(ordered) < 2:
        raise FitError("linear extrapolation needs two points")
    x = np.array([p.scale for p in ordered], dtype=float)
    y = np.array([p.expectation for p in ordered])
    slope, intercept = np.polyfit(x, y, 1)
    value, clipped = _clip(float(intercept))
    return ZneEstimate(
        value, "linear", tuple(ordered), {"slope": float(slope)}, float(intercept), clipped
    )


def _exponential_closed_form(x, y):
    step = x[1] - x[0]
    drop1, drop2 = y[0] - y[1], y[1] - y[2]
    if drop1 == 0.0:
        raise FitError("degenerate data: no decay between the first two scales")
    ratio = drop2 / drop1
    if ratio <= 0.0:
        raise FitError(f"non-monotone data gives decay ratio {ratio:.4g}")
    p = ratio ** (1.0 / step)
    if not 0.0 < p < 1.0:
        raise FitError(f"decay rate p = {p:.4g} outside (0, 1)")
    b = drop1 / (p ** x[0] * (1.0 - p**step))
    a = y[0] - b * p ** x[0]
    return a, b, p


def _exponential_lsq(x, y):
    a0 = max(min(y.min() * 0.5, 1.0), 0.0)
    span = max(y[0] - a0, 1e-6)
    result = least_squares(
        lambda q: q[0] + q[1] * q[2] ** x - y,
        x0=[a0, span / 0.7 ** x[0], 0.7],
        bounds=([-1.0, -10.0, 1e-9], [2.0, 10.0, 1.0 - 1e-12]),
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
    )
    if not result.success:
        raise FitError(f"exponential least squares failed: {result.message}")
    a, b, p = (float(v) for v in result.x)
    if not 0.0 < p < 1.0 - 1e-9 or abs(b) < 1e-12:
        raise FitError(f"degenerate exponential fit (b={b:.3g}, p={p:.3g})")
    return a, b, p


def exponential_extrapolate(points: Sequence[ScaledPoint]) -> ZneEstimate:
    """Fit ``E = a + b p**scale``; returns ``a + b``.

    Three equally spaced scales are solved exactly; anything else uses
    bounded nonlinear least squares. Raises :class:`FitError` when the data
    admit no decaying solution.
    """
    ordered = _sorted_unique(points)
    if len(ordered) < 3:
        raise FitError("exponential extrapolation needs three points")
    x = np.array([p.scale for p in ordered], dtype=float)
    y = np.array([p.expectation for p in ordered])
    if len(ordered) == 3 and x[2] - x[1] == x[1] - x[0]:
        a, b, p = _exponential_closed_form(x, y)
    else:
        a, b, p = _exponential_lsq(x, y)
    value, clipped = _clip(a + b)
    return ZneEstimate(
        value, "exponential", tuple(ordered), {"a": a, "b": b, "p": p}, a + b, clipped
    )


def loglinear_extrapolate(points: Sequence[ScaledPoint], offset: float = 0.0) -> ZneEstimate:
    """Least squares of ``ln(E - offset)`` against scale; returns ``offset + b``."""
    ordered = _sorted_unique(points)
    if len(ordered) < 2:
        raise FitError("log-linear extrapolation needs two points")
    y = np.array([p.expectation for p in ordered])
    if np.any(y <= offset):
        raise ValidationError(f"every expectation must exceed the offset {offset}", "offset")
    x = np.array([p.scale for p in ordered], dtype=float)
    slope, intercept = np.polyfit(x, np.log(y - offset), 1)
    b, p = math.exp(intercept), math.exp(slope)
    raw = offset + b
    value, clipped = _clip(raw)
    return ZneEstimate(
        value, "loglinear", tuple(ordered), {"a": offset, "b": b, "p": p}, raw, clipped
    )


_DISPATCH = {
    "richardson": richardson_extrapolate,
    "exponential": exponential_extrapolate,
    "loglinear": loglinear_extrapolate,
    "linear": linear_extrapolate,
}


def extrapolate(points: Sequence[ScaledPoint], method: str = "richardson") -> ZneEstimate:
    """Extrapolate with ``method``, falling back to Richardson on fit failure."""
    if method not in _DISPATCH:
        raise ValidationError(f"unknown method {method!r}; choose from {METHODS}", "zne_method")
    try:
        return _DISPATCH[method](points)
    except (FitError, ValidationError) as exc:
        if method == "richardson":
            raise
        log.warning("%s extrapolation failed (%s); using richardson", method, exc)
        estimate = richardson_extrapolate(points)
        return replace(estimate, fallback_from=method, warning=str(exc))


def estimate(
    points: Sequence[ScaledPoint],
    n_qubits: int,
    shots: int,
    method: str = "richardson",
    protect: int = 2,
) -> tuple[ZneEstimate, list[ScaledPoint]]:
    """Discard baseline points, then extrapolate the rest.

    Returns the estimate and every input point with its discard flag.
    """
    flagged = flag_baseline(points, n_qubits, shots, protect)
    kept = [p for p in flagged if not p.discarded]
    result = extrapolate(kept, method)
    if any(p.reason == "all points at baseline" for p in flagged):
        result = replace(result, warning="every point at baseline; raw E(1) returned")
    return result, flagged
