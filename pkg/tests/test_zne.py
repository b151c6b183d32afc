import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import fsolve

from blockmit import zne
from blockmit.errors import FitError, ValidationError
from blockmit.grover import GroverSpec, build_grover, transpile
from blockmit.simulator import NoiseModel, run
from blockmit.zne import ScaledPoint


def pts(values, scales=(1, 3, 5), shots=4000):
    return [ScaledPoint(s, v, shots) for s, v in zip(scales, values)]


def test_lagrange_weights():
    np.testing.assert_allclose(zne.lagrange_weights_at_zero([1, 3, 5]), [1.875, -1.25, 0.375])


def test_richardson_published_6q():
    est = zne.richardson_extrapolate(pts([0.41868, 0.09045, 0.0312]))
    assert est.value == pytest.approx(0.6837, abs=5e-4)


def test_richardson_matches_polyfit_oracle():
    values = [0.419, 0.09, 0.03]
    oracle = np.polyval(np.polyfit([1, 3, 5], values, 2), 0.0)
    assert zne.richardson_extrapolate(pts(values)).value == pytest.approx(oracle, abs=1e-12)
    assert oracle == pytest.approx(0.684, abs=1e-3)


def test_richardson_two_points_is_linear():
    est = zne.richardson_extrapolate(pts([0.292, 0.053], (1, 3)))
    assert est.value == pytest.approx(0.292 + (0.292 - 0.053) / 2, abs=1e-12)


def test_richardson_single_point():
    assert zne.richardson_extrapolate(pts([0.3], (1,))).value == 0.3


def test_richardson_duplicate_scale():
    with pytest.raises(ValidationError):
        zne.richardson_extrapolate(pts([0.5, 0.4], (3, 3)))


def test_clipping():
    est = zne.richardson_extrapolate(pts([0.95, 0.6, 0.4]))
    assert est.value == 1.0 and est.clipped and est.unclipped > 1


@settings(max_examples=100, deadline=None)
@given(coeffs=st.lists(st.floats(-1, 1), min_size=1, max_size=4),
       scales=st.sets(st.sampled_from([1, 3, 5, 7, 9]), min_size=4, max_size=4))
def test_richardson_exact_on_polynomials(coeffs, scales):
    scales = sorted(scales)[: max(len(coeffs), 1)]
    if len(scales) < len(coeffs):
        return
    poly = np.polynomial.Polynomial(coeffs)
    raw = zne.lagrange_weights_at_zero(scales) @ poly(np.array(scales, dtype=float))
    assert raw == pytest.approx(coeffs[0], abs=1e-10)


def exp_oracle(values):
    """Solve a + b p^lam = E at lam = 1, 3, 5 by generic root finding."""
    def eqs(q):
        a, b, p = q
        return [a + b * p**lam - e for lam, e in zip((1, 3, 5), values)]

    a, b, p = fsolve(eqs, [0.0, 1.0, 0.5], xtol=1e-14)
    return a, b, p


def test_exponential_synthetic():
    values = [0.1 + 0.8 * 0.5**lam for lam in (1, 3, 5)]
    est = zne.exponential_extrapolate(pts(values))
    assert est.fit_params["a"] == pytest.approx(0.1, rel=1e-10)
    assert est.fit_params["b"] == pytest.approx(0.8, rel=1e-10)
    assert est.fit_params["p"] == pytest.approx(0.5, rel=1e-10)
    assert est.value == pytest.approx(0.9, rel=1e-10)


def test_exponential_published_points():
    values = [0.41868, 0.09045, 0.0312]
    a, b, p = exp_oracle(values)
    est = zne.exponential_extrapolate(pts(values))
    assert est.value == pytest.approx(a + b, abs=1e-9)
    assert est.fit_params["p"] == pytest.approx(p, abs=1e-9)
    # frozen from the oracle above
    assert est.value == pytest.approx(0.9609, abs=1e-4)
    assert est.fit_params["p"] == pytest.approx(0.4249, abs=1e-4)


@pytest.mark.parametrize("a,b,p", [(0.02, 0.9, 0.6), (0.1, 0.5, 0.9), (0.0, 1.0, 0.3)])
def test_exponential_least_squares_recovery(a, b, p):
    scales = (1, 3, 5, 7)
    est = zne.exponential_extrapolate(pts([a + b * p**s for s in scales], scales))
    assert est.unclipped == pytest.approx(a + b, rel=1e-6)


def test_exponential_constant_data_fails_then_falls_back():
    with pytest.raises(FitError):
        zne.exponential_extrapolate(pts([0.3, 0.3, 0.3]))
    est = zne.extrapolate(pts([0.3, 0.3, 0.3]), "exponential")
    assert est.method == "richardson" and est.fallback_from == "exponential"
    assert est.value == pytest.approx(0.3)


def test_exponential_nonmonotone_fails():
    with pytest.raises(FitError):
        zne.exponential_extrapolate(pts([0.3, 0.1, 0.2]))


def test_exponential_needs_three():
    with pytest.raises(FitError):
        zne.exponential_extrapolate(pts([0.5, 0.2], (1, 3)))


def test_loglinear_exact():
    values = [0.9 * 0.8**lam for lam in (1, 3, 5)]
    assert zne.loglinear_extrapolate(pts(values)).value == pytest.approx(0.9, rel=1e-10)


def test_loglinear_two_point_closed_form():
    e1, e3 = 0.5, 0.2
    est = zne.loglinear_extrapolate(pts([e1, e3], (1, 3)))
    assert est.value == pytest.approx(e1 * math.sqrt(e1 / e3), rel=1e-12)


def test_loglinear_offset_domain():
    with pytest.raises(ValidationError):
        zne.loglinear_extrapolate(pts([0.5, 0.2]), offset=0.3)
    est = zne.loglinear_extrapolate(pts([0.5 + 0.05, 0.2 + 0.05], (1, 3)), offset=0.05)
    assert est.value == pytest.approx(0.05 + 0.5 * math.sqrt(0.5 / 0.2), rel=1e-12)


def test_linear_method():
    est = zne.extrapolate(pts([0.6, 0.4, 0.2]), "linear")
    assert est.value == pytest.approx(0.7)


def test_unknown_method():
    with pytest.raises(ValidationError):
        zne.extrapolate(pts([0.5]), "cubic")


def test_discard_5q_row():
    flagged = zne.flag_baseline(pts([0.292, 0.053, 0.032]), 5, 4000)
    assert [p.discarded for p in flagged] == [False, False, True]


def test_discard_6q_high_noise_row():
    est, flagged = zne.estimate(pts([0.031, 0.016, 0.015]), 6, 4000)
    assert [p.discarded for p in flagged] == [False, False, True]
    assert est.value == pytest.approx(0.039, abs=0.002)


def test_discard_then_linear_5q():
    est, _ = zne.estimate(pts([0.292, 0.053, 0.032]), 5, 4000)
    assert est.value == pytest.approx(0.4115, abs=1e-12)


def test_discard_keeps_informative_points():
    flagged = zne.flag_baseline(pts([0.419, 0.09, 0.03]), 6, 4000)
    assert not any(p.discarded for p in flagged)


def test_discard_unprotected_all_baseline_falls_back():
    est, flagged = zne.estimate(pts([0.016, 0.015, 0.0155]), 6, 4000, protect=0)
    assert [p.discarded for p in flagged] == [False, True, True]
    assert est.value == 0.016
    assert est.warning


def test_discarded_points_sorted():
    kept = zne.discard_baseline(pts([0.015, 0.3, 0.1], (5, 1, 3)), 6, 4000)
    assert [p.scale for p in kept] == [1, 3]


@settings(max_examples=100, deadline=None)
@given(e=st.floats(0, 1), shots=st.integers(1, 10**5), extra=st.integers(1, 10**5))
def test_discard_monotone_in_shots(e, shots, extra):
    few = zne.flag_baseline(pts([0.9, 0.5, e]), 4, shots)[2].discarded
    many = zne.flag_baseline(pts([0.9, 0.5, e]), 4, shots + extra)[2].discarded
    assert few or not many


@settings(max_examples=60, deadline=None)
@given(values=st.lists(st.floats(0.02, 0.98), min_size=3, max_size=3),
       method=st.sampled_from(zne.METHODS))
def test_order_invariance_and_bounds(values, method):
    points = pts(sorted(values, reverse=True))
    results = {zne.extrapolate(list(perm), method).value
               for perm in itertools.permutations(points)}
    assert len(results) == 1
    assert 0.0 <= results.pop() <= 1.0


def test_scaled_point_validation():
    with pytest.raises(ValidationError):
        ScaledPoint(2, 0.5, 10)
    with pytest.raises(ValidationError):
        ScaledPoint(1, 1.5, 10)


def test_measure_expectation_noiseless():
    circ = build_grover(GroverSpec(6, "111111"))
    for lam in (1, 3):
        point = zne.measure_expectation(circ, "111111", NoiseModel(), 4000, lam, seed=5)
        assert point.expectation == pytest.approx(0.9966, abs=0.005)


def test_measure_expectation_scale_one_equals_raw():
    circ = transpile(build_grover(GroverSpec(3, "111")))
    noise = NoiseModel(1e-3, 1e-2)
    point = zne.measure_expectation(circ, "111", noise, 2000, 1, seed=11)
    assert point.expectation == run(circ, noise, 2000, seed=11).frequency("111")


def test_measure_expectation_noisy_decreasing():
    circ = build_grover(GroverSpec(6, "111111"))
    noise = NoiseModel(1e-4, 1e-3)
    values = [zne.measure_expectation(circ, "111111", noise, 4000, lam, seed=lam).expectation
              for lam in (1, 3, 5)]
    assert values[0] > values[1] > values[2]
