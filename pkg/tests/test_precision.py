from __future__ import annotations

import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from analoglab.precision import Cvq, amplify, gain_to_resolve, precision_ratio, quantize, scale

positive = st.floats(1e-6, 1e6, allow_nan=False, allow_infinity=False)


@st.composite
def cvqs(draw):
    eps = draw(st.floats(2.0**-30, 10.0))
    ratio = draw(st.floats(1.0, 2.0**20))
    return Cvq(eps * ratio, eps)


def test_ratio_examples():
    assert precision_ratio(Cvq(10, 0.1)) == pytest.approx(100)
    assert precision_ratio(Cvq(10000, 100)) == 100
    assert precision_ratio(Cvq(1.25, 2.0**-20)) == 1.25 * 2**20


def test_quantize_examples():
    cvq = Cvq(10, 0.5)
    assert quantize(cvq, 0.7).quantized_value == 0.5
    assert quantize(cvq, 0.75).quantized_value == 1.0
    assert quantize(cvq, 0.25).quantized_value == 0.0
    clipped = quantize(Cvq(1, 0.25), 3.0)
    assert clipped.quantized_value == 1.0 and clipped.clipped
    low = quantize(Cvq(1, 0.25), -3.0)
    assert low.quantized_value == -1.0 and low.clipped


def test_invalid_quantities():
    with pytest.raises(ValueError):
        Cvq(1, 0)
    with pytest.raises(ValueError):
        Cvq(0.1, 1)
    with pytest.raises(ValueError):
        quantize(Cvq(1, 0.1), math.nan)
    with pytest.raises(ValueError):
        amplify(Cvq(1, 0.1), 0.5)


def test_amplify_examples():
    a = amplify(Cvq(1, 0.01), 10)
    assert (a.bound_x, a.resolution_eps) == (10, 0.01)
    assert a.ratio == pytest.approx(1000)
    assert amplify(Cvq(1, 0.01), 1) == Cvq(1, 0.01)


@settings(max_examples=500)
@given(cvqs(), positive)
def test_ratio_is_unit_invariant(cvq, c):
    assert precision_ratio(scale(cvq, c)) == pytest.approx(precision_ratio(cvq), rel=1e-12)


@settings(max_examples=1000)
@given(cvqs(), st.floats(-1e3, 1e3))
def test_quantization_error_and_idempotence(cvq, v):
    r = quantize(cvq, v)
    k = r.quantized_value / cvq.resolution_eps
    assert k == pytest.approx(round(k), abs=1e-6)
    assert abs(r.quantized_value) <= cvq.bound_x * (1 + 1e-12)
    if not r.clipped:
        assert abs(r.quantized_value - v) <= cvq.resolution_eps / 2 * (1 + 1e-9)
    again = quantize(cvq, r.quantized_value)
    assert again.quantized_value == r.quantized_value


@settings(max_examples=500)
@given(cvqs(), st.floats(1, 1e3), st.floats(1, 1e3))
def test_amplification_composes(cvq, g1, g2):
    assert amplify(amplify(cvq, g1), g2).ratio == pytest.approx(amplify(cvq, g1 * g2).ratio, rel=1e-12)
    assert amplify(cvq, g1).ratio == pytest.approx(g1 * cvq.ratio, rel=1e-12)


@settings(max_examples=300)
@given(st.integers(1, 12), st.integers(-4, 4))
def test_gain_to_resolve_is_minimal_up_to_rounding(j, shift):
    eps = 2.0**shift * 4.0**-j * 3
    assume(eps <= 1.0)
    cvq = Cvq(1.0, eps)
    height = 4.0**-j
    g = gain_to_resolve(cvq, height)
    reading = quantize(amplify(cvq, g), g * height).quantized_value
    assert reading > 0.5 * g * height
    if g > 1:
        # slightly less gain leaves the feature below the first quantum
        h = g * (1 - 1e-6)
        assert quantize(amplify(cvq, h), h * height).quantized_value == 0.0
    assert g == pytest.approx(max(1.0, cvq.resolution_eps / (2 * height)), rel=1e-9)
