"""Per-pixel green-channel series and the Butterworth band-pass stage."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from . import kernels
from .errors import FsMismatch, InvalidBand, InvalidInput, OutOfBounds, TooShort

DEFAULT_BAND = (0.7, 2.5)
DEFAULT_ORDER = 3


@dataclass(frozen=True)
class PixelSeries:
    values: np.ndarray
    fps: float
    origin: tuple[int, int] = (0, 0)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise InvalidInput(f"series must be 1-D, got shape {v.shape}")
        if not self.fps > 0:
            raise InvalidInput("fps must be > 0")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class BandpassFilter:
    order: int
    band: tuple[float, float]
    fs: float
    sos: np.ndarray = field(repr=False)

    @property
    def padlen(self) -> int:
        return max(3 * self.order, 12)

    def response(self, freqs_hz) -> np.ndarray:
        """Complex response of the SOS cascade at ``freqs_hz``."""
        z = np.exp(1j * 2 * np.pi * np.asarray(freqs_hz, dtype=np.float64) / self.fs)
        h = np.ones_like(z)
        for b0, b1, b2, a0, a1, a2 in self.sos:
            h *= (b0 + b1 / z + b2 / z**2) / (a0 + a1 / z + a2 / z**2)
        return h


def extract_green_series(video, pixel: tuple[int, int]) -> PixelSeries:
    """G channel of one pixel across the (masked) video; black frames give 0."""
    frames = _frames_of(video)
    r, c = pixel
    h, w = frames.frames.shape[1:3]
    if not (0 <= r < h and 0 <= c < w):
        raise OutOfBounds(f"pixel {pixel} outside {h}x{w}")
    return PixelSeries(frames.frames[:, r, c, 1], frames.fps, (int(r), int(c)))


def green_matrix(video) -> np.ndarray:
    """All pixels' G series as a ``(H*W, T)`` array in row-major pixel order."""
    frames = _frames_of(video).frames
    t, h, w = frames.shape[:3]
    return np.ascontiguousarray(frames[..., 1].reshape(t, h * w).T)


def _frames_of(video):
    # RoiSyntheticVideo wraps its FrameSequence; a bare FrameSequence is fine too
    return getattr(video, "sequence", video)


def design_bandpass(fs: float, band=DEFAULT_BAND, order: int = DEFAULT_ORDER) -> BandpassFilter:
    """Digital Butterworth band-pass via the prewarped bilinear transform, as SOS."""
    lo, hi = (float(f) for f in band)
    if not fs > 0:
        raise InvalidBand("sampling rate must be > 0")
    if not (0 < lo < hi < fs / 2):
        raise InvalidBand(f"band {band} must satisfy 0 < lo < hi < fs/2 = {fs / 2}")
    if order < 1:
        raise InvalidBand("order must be >= 1")
    sos = signal.butter(order, [lo, hi], btype="bandpass", fs=fs, output="sos")
    return BandpassFilter(int(order), (lo, hi), float(fs), sos)


def filter_rows(x: np.ndarray, filt: BandpassFilter, zero_phase: bool = True, threads: int = 1) -> np.ndarray:
    """Band-pass every row of ``x`` (pixels, samples)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if zero_phase and x.shape[1] <= filt.padlen:
        raise TooShort(f"series of {x.shape[1]} samples needs more than {filt.padlen} for padding")
    if x.shape[0] == 0:
        return x.copy()
    zi = signal.sosfilt_zi(filt.sos)
    return kernels.sos_filter_rows(filt.sos, zi, x, filt.padlen, zero_phase, threads)


def filter_series(series: PixelSeries, filt: BandpassFilter, zero_phase: bool = True) -> PixelSeries:
    if not np.isclose(series.fps, filt.fs, rtol=0, atol=1e-9):
        raise FsMismatch(f"series fps {series.fps} != filter fs {filt.fs}")
    y = filter_rows(series.values[None, :], filt, zero_phase)[0]
    return PixelSeries(y, series.fps, series.origin)
