import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from skinpulse.errors import BadWindowLength, NonPositiveScale
from skinpulse.wavelet import (
    CwtResult,
    RoiDecision,
    WaveletFamily,
    WaveletSpec,
    classify_pixel,
    cwt,
    real_sum_weights,
    wavelet_eval,
)

GAUSS = WaveletSpec(family=WaveletFamily.GAUSSIAN)


def cgau1_direct(a, b, t, sigma=1.0):
    """d/du of exp(-iu) exp(-u^2), times (2/pi)^(1/4)/sqrt(2)... written out long-hand."""
    u = (t - b) / (a * sigma)
    deriv = (-1j - 2 * u) * cmath.exp(-1j * u) * math.exp(-u * u)
    return deriv * (2 * math.pi) ** -0.25 / math.sqrt(a)


def test_gaussian_examples():
    assert wavelet_eval(GAUSS, 1, 0, 0).real == pytest.approx(1 / math.sqrt(2 * math.pi))
    for d in (0.3, 1.0, 2.5):
        assert wavelet_eval(GAUSS, 2, 1, 1 + d) == wavelet_eval(GAUSS, 2, 1, 1 - d)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 4.0])
def test_gaussian_integral_is_sqrt_a(a):
    val, _ = integrate.quad(lambda t: wavelet_eval(GAUSS, a, 0.7, t).real, -np.inf, np.inf)
    assert val == pytest.approx(math.sqrt(a), rel=1e-9)


def test_cgau1_unit_energy_and_zero_mean():
    spec = WaveletSpec()
    energy, _ = integrate.quad(lambda t: abs(wavelet_eval(spec, 1, 0, t)) ** 2, -np.inf, np.inf)
    assert energy == pytest.approx(1.0, rel=1e-9)
    re, _ = integrate.quad(lambda t: wavelet_eval(spec, 1, 0, t).real, -np.inf, np.inf)
    assert abs(re) < 1e-12


def test_cgau1_matches_long_hand_formula():
    spec = WaveletSpec()
    for a, b, t in [(1, 0, 0.3), (2, 1, 0), (4, 2, 1.5)]:
        assert wavelet_eval(spec, a, b, t) == pytest.approx(cgau1_direct(a, b, t), abs=1e-15)


def test_nonpositive_scale():
    with pytest.raises(NonPositiveScale):
        wavelet_eval(WaveletSpec(), 0, 0, 0)
    with pytest.raises(NonPositiveScale):
        WaveletSpec(scales=(1.0, -2.0, 4.0))


def test_cwt_direct_summation_oracle():
    x = [0.2, 0.5, 0.8]
    res = cwt(x)
    want = np.zeros((3, 3), dtype=complex)
    for i, a in enumerate((1, 2, 4)):
        for j, b in enumerate((0, 1, 2)):
            want[i, j] = sum(x[t] * cgau1_direct(a, b, t).conjugate() for t in range(3))
    assert np.allclose(res.coefficients, want, atol=1e-15)
    assert res.real_sum == pytest.approx(want.real.sum(), abs=1e-14)


def test_cwt_edge_cases():
    assert cwt([0, 0, 0]).real_sum == 0
    assert not cwt([0, 0, 0]).coefficients.any()
    with pytest.raises(BadWindowLength):
        cwt([1, 2])


@given(st.floats(-1e3, 1e3))
def test_constant_series_annihilated(c):
    assert abs(cwt([c, c, c]).real_sum) <= 1e-9 * max(abs(c), 1e-300)
    assert classify_pixel(cwt([c, c, c])) is RoiDecision.NON_ROI


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.floats(-5, 5), st.floats(-5, 5))
def test_cwt_linearity(x, y, a, b):
    lhs = cwt(a * np.array(x) + b * np.array(y)).coefficients
    rhs = a * cwt(x).coefficients + b * cwt(y).coefficients
    assert np.allclose(lhs, rhs, atol=1e-12, rtol=0)


def test_real_sum_weights_match_cwt(rng):
    for spec in (WaveletSpec(), GAUSS):
        for _ in range(5):
            x = rng.random(3)
            assert real_sum_weights(spec) @ x == pytest.approx(cwt(x, spec).real_sum, abs=1e-14)


def test_gaussian_family_is_positive_on_positive_series():
    # the reason the complex wavelet is the default
    assert cwt([0.1, 0.2, 0.3], GAUSS).real_sum > 0


def test_classify_pixel():
    assert classify_pixel(0.3) is RoiDecision.ROI
    assert classify_pixel(0.0) is RoiDecision.NON_ROI
    assert classify_pixel(-0.2) is RoiDecision.NON_ROI
    assert classify_pixel(CwtResult(np.array([[0.5 + 1j]]))) is RoiDecision.ROI
    values = np.linspace(-1, 1, 21)
    flags = [classify_pixel(v, 0.1) is RoiDecision.ROI for v in values]
    assert flags == sorted(flags)


def test_spec_round_trip():
    spec = WaveletSpec(scales=(1, 3, 5), sigma=0.5)
    assert WaveletSpec.from_dict(spec.to_dict()) == spec
