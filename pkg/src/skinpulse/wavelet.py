"""Continuous wavelet transform of short CCNN output windows and the ROI sign rule.

A pixel is kept when the real parts of its wavelet coefficients, summed over
all scales and shifts, are strictly positive.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadWindowLength, InvalidInput, NonPositiveScale

# unit L2 norm for (-2u - i) exp(-iu) exp(-u^2)
_CGAU1_NORM = (2.0 * math.pi) ** -0.25


class WaveletFamily(str, enum.Enum):
    GAUSSIAN = "gaussian"
    COMPLEX_GAUSSIAN_1 = "complex_gaussian_1"


@dataclass(frozen=True)
class WaveletSpec:
    family: WaveletFamily = WaveletFamily.COMPLEX_GAUSSIAN_1
    sigma: float = 1.0
    scales: tuple[float, ...] = (1.0, 2.0, 4.0)
    shifts: tuple[float, ...] = (0.0, 1.0, 2.0)

    def __post_init__(self):
        object.__setattr__(self, "family", WaveletFamily(self.family))
        object.__setattr__(self, "scales", tuple(float(a) for a in self.scales))
        object.__setattr__(self, "shifts", tuple(float(b) for b in self.shifts))
        if not self.sigma > 0:
            raise InvalidInput("sigma must be > 0")
        if not self.scales:
            raise InvalidInput("at least one scale is required")
        if any(a <= 0 for a in self.scales):
            raise NonPositiveScale(f"scales must be > 0, got {self.scales}")

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "sigma": self.sigma,
            "scales": list(self.scales),
            "shifts": list(self.shifts),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WaveletSpec":
        return cls(**d)


def wavelet_eval(spec: WaveletSpec, a: float, b: float, t) -> complex | np.ndarray:
    """Value of the scaled and shifted wavelet at ``t``.

    ``gaussian`` is the plain scaled Gaussian
    ``exp(-(t-b)^2 / (2 a^2 sigma^2)) / (sqrt(2 pi a) sigma)``; it has non-zero
    mean. ``complex_gaussian_1`` is the first derivative of ``exp(-iu - u^2)``
    at ``u = (t-b) / (a sigma)``, normalised to unit energy and scaled by
    ``1/sqrt(a)``. Its real part is odd, so it annihilates constants on any
    shift grid that is symmetric about the window centre.
    """
    if not a > 0:
        raise NonPositiveScale(f"scale must be > 0, got {a}")
    t = np.asarray(t, dtype=np.float64)
    s = spec.sigma
    if spec.family is WaveletFamily.GAUSSIAN:
        out = np.exp(-((t - b) ** 2) / (2 * a * a * s * s)) / (math.sqrt(2 * math.pi * a) * s)
        out = out.astype(np.complex128)
    else:
        u = (t - b) / (a * s)
        out = _CGAU1_NORM * (-2.0 * u - 1j) * np.exp(-1j * u) * np.exp(-u * u) / math.sqrt(a)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class CwtResult:
    coefficients: np.ndarray  # (scales, shifts) complex
    real_sum: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "real_sum", float(np.real(self.coefficients).sum()))


def cwt(series, spec: WaveletSpec | None = None) -> CwtResult:
    """Direct inner products of a 3-sample series with every (scale, shift) atom."""
    spec = spec or WaveletSpec()
    x = np.asarray(series, dtype=np.float64)
    if x.shape != (3,):
        raise BadWindowLength(f"cwt expects a 3-sample series, got shape {x.shape}")
    t = np.arange(3, dtype=np.float64)
    coef = np.empty((len(spec.scales), len(spec.shifts)), dtype=np.complex128)
    for i, a in enumerate(spec.scales):
        for j, b in enumerate(spec.shifts):
            coef[i, j] = np.sum(x * np.conj(wavelet_eval(spec, a, b, t)))
    return CwtResult(coef)


def real_sum_weights(spec: WaveletSpec | None = None) -> np.ndarray:
    """Per-sample weights ``w`` such that ``cwt(x).real_sum == w @ x``.

    The transform is linear in the series, so the summed real part collapses to
    three weights; the batched ROI path classifies whole frames with them.
    """
    spec = spec or WaveletSpec()
    t = np.arange(3, dtype=np.float64)
    w = np.zeros(3)
    for a in spec.scales:
        for b in spec.shifts:
            w += np.real(np.conj(wavelet_eval(spec, a, b, t)))
    return w


class RoiDecision(str, enum.Enum):
    ROI = "roi"
    NON_ROI = "non_roi"


def classify_pixel(result: CwtResult | float, threshold: float = 0.0) -> RoiDecision:
    value = result.real_sum if isinstance(result, CwtResult) else float(result)
    return RoiDecision.ROI if value > threshold else RoiDecision.NON_ROI
