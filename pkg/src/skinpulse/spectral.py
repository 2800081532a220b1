"""Welch power spectral density and peak-frequency heart rate.

Segments are contiguous and non-overlapping by default: with ``N = L*M``,
segment ``i`` (1-based) is ``x(n + iM - M)`` for ``n = 0..M-1``. Each windowed
segment's periodogram is averaged over the L segments.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidBand, InvalidInput, NoPeak, TooShort

MIN_SEGMENT = 8
# grid spacing target for the zero-padded FFT, in Hz (half a bpm)
GRID_TARGET_HZ = 0.5 / 60.0
SEGMENT_SECONDS = 10.0
NO_PEAK_POWER = 1e-12


class Window(str, enum.Enum):
    RECTANGULAR = "rectangular"
    HAMMING = "hamming"
    HANN = "hann"

    def values(self, m: int) -> np.ndarray:
        if self is Window.RECTANGULAR:
            return np.ones(m)
        if self is Window.HAMMING:
            return np.hamming(m)
        return np.hanning(m)


@dataclass(frozen=True)
class WelchConfig:
    n_segments: int
    segment_length: int
    window: Window = Window.HAMMING
    fft_length: int | None = None
    overlap: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "window", Window(self.window))
        if self.n_segments < 1:
            raise InvalidInput("n_segments must be >= 1")
        if self.segment_length < MIN_SEGMENT:
            raise TooShort(f"segment length {self.segment_length} < {MIN_SEGMENT}")
        if self.fft_length is None:
            object.__setattr__(self, "fft_length", self.segment_length)
        if self.fft_length < self.segment_length:
            raise InvalidInput("fft_length must be >= segment_length")
        if not 0.0 <= self.overlap < 1.0:
            raise InvalidInput("overlap must be in [0, 1)")

    @property
    def n_samples(self) -> int:
        return self.n_segments * self.segment_length


def default_fft_length(fs: float, m: int, target_hz: float = GRID_TARGET_HZ) -> int:
    """Smallest power of two >= m whose bin spacing is at most ``target_hz``."""
    n = max(m, math.ceil(fs / target_hz))
    return 1 << (n - 1).bit_length()


def default_config(n: int, fs: float, window: Window | str = Window.HAMMING, overlap: float = 0.0) -> WelchConfig:
    """L = max(1, floor(duration / 10 s)); M = N // L; zero-padded FFT length."""
    duration = n / fs
    L = max(1, int(duration // SEGMENT_SECONDS))
    M = n // L
    if M < MIN_SEGMENT:
        raise TooShort(f"{n} samples give segments of {M} < {MIN_SEGMENT}")
    return WelchConfig(L, M, Window(window), default_fft_length(fs, M), overlap)


@dataclass(frozen=True)
class PsdEstimate:
    frequencies: np.ndarray  # full grid k * fs / fft_length, k = 0..fft_length-1
    power: np.ndarray
    normalization: float  # U

    def __post_init__(self):
        if self.frequencies.shape != self.power.shape:
            raise InvalidInput("frequency and power grids differ")

    @property
    def fs(self) -> float:
        return float(self.frequencies[1] * len(self.frequencies))


def segment(series, L: int, M: int | None = None, overlap: float = 0.0) -> np.ndarray:
    """Split into L rows of length M, dropping any trailing remainder.

    With ``overlap > 0`` consecutive segments start ``M*(1-overlap)`` apart and
    as many as fit are returned.
    """
    x = np.asarray(series, dtype=np.float64)
    if L < 1:
        raise InvalidInput("L must be >= 1")
    if M is None:
        M = len(x) // L
    if M < MIN_SEGMENT:
        raise TooShort(f"segment length {M} < {MIN_SEGMENT}")
    if overlap == 0.0:
        if len(x) < L * M:
            raise TooShort(f"{len(x)} samples < L*M = {L * M}")
        return x[: L * M].reshape(L, M).copy()
    step = max(1, int(round(M * (1.0 - overlap))))
    starts = range(0, len(x) - M + 1, step)
    return np.array([x[s : s + M] for s in starts])


def normalization(window: np.ndarray) -> float:
    """U = (1/M) * sum w(n)^2."""
    w = np.asarray(window, dtype=np.float64)
    return float(np.mean(w * w))


def periodogram(seg, window: Window | str | np.ndarray = Window.RECTANGULAR, fft_length: int | None = None) -> np.ndarray:
    """|sum x(n) w(n) exp(-j w n)|^2 / (M U) on the full zero-padded grid.

    The extra 1/M makes the grid mean equal the windowed mean square, so the
    rectangular, unpadded case satisfies Parseval exactly.
    """
    x = np.asarray(seg, dtype=np.float64)
    m = x.shape[-1]
    w = window if isinstance(window, np.ndarray) else Window(window).values(m)
    nfft = m if fft_length is None else fft_length
    if nfft < m:
        raise InvalidInput("fft_length must be >= segment length")
    U = normalization(w)
    X = np.fft.fft(x * w, n=nfft, axis=-1)
    return (X.real**2 + X.imag**2) / (m * U)


def welch_psd(series, config: WelchConfig, fs: float | None = None) -> PsdEstimate:
    """Average of the per-segment periodograms. ``series`` may be a PixelSeries."""
    fs = getattr(series, "fps", fs)
    if fs is None:
        raise InvalidInput("sampling rate required")
    x = np.asarray(getattr(series, "values", series), dtype=np.float64)
    if len(x) < config.n_segments * MIN_SEGMENT:
        raise TooShort(f"{len(x)} samples < {config.n_segments} * {MIN_SEGMENT}")
    segs = segment(x, config.n_segments, config.segment_length, config.overlap)
    w = config.window.values(config.segment_length)
    power = periodogram(segs, w, config.fft_length).mean(axis=0)
    freqs = np.arange(config.fft_length) * (fs / config.fft_length)
    return PsdEstimate(freqs, power, normalization(w))


def _band_slice(freqs: np.ndarray, band) -> np.ndarray:
    lo, hi = band
    if not (lo < hi):
        raise InvalidBand(f"band {band} is empty")
    sel = (freqs >= lo - 1e-12) & (freqs <= hi + 1e-12)
    if not sel.any():
        raise InvalidBand(f"no PSD bins inside band {band}")
    return np.flatnonzero(sel)


def estimate_hr(psd: PsdEstimate, band=(0.7, 2.5)) -> float:
    """60 * the in-band peak frequency; the lowest frequency wins a tie."""
    fs_half = psd.fs / 2
    if band[0] < 0 or band[1] > fs_half + 1e-12:
        raise InvalidBand(f"band {band} outside PSD range [0, {fs_half}]")
    idx = _band_slice(psd.frequencies, band)
    p = psd.power[idx]
    if np.all(p < NO_PEAK_POWER):
        raise NoPeak("no in-band power")
    return 60.0 * float(psd.frequencies[idx[int(np.argmax(p))]])


def welch_hr_rows(x: np.ndarray, fs: float, config: WelchConfig, band=(0.7, 2.5)) -> np.ndarray:
    """Batched Welch + peak picking for ``x`` of shape (pixels, samples).

    Returns bpm per row, NaN where the row has no in-band power. Only the
    non-negative half of the grid is computed; for real input it holds the
    same in-band values as :func:`welch_psd`.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    P = x.shape[0]
    M, nfft = config.segment_length, config.fft_length
    freqs = np.arange(nfft // 2 + 1) * (fs / nfft)
    idx = _band_slice(freqs, band)
    w = config.window.values(M)
    U = normalization(w)
    out = np.full(P, np.nan)
    if P == 0:
        return out
    # bound the working set to ~64 MB of complex spectra
    chunk = max(1, (1 << 22) // (nfft // 2 + 1))
    for s in range(0, P, chunk):
        rows = x[s : s + chunk]
        if config.overlap == 0.0:
            segs = rows[:, : config.n_samples].reshape(len(rows), config.n_segments, M)
        else:
            segs = np.stack([segment(r, config.n_segments, M, config.overlap) for r in rows])
        X = np.fft.rfft(segs * w, n=nfft, axis=-1)[..., idx]
        p = (X.real**2 + X.imag**2).mean(axis=1) / (M * U)
        best = np.argmax(p, axis=1)
        hr = 60.0 * freqs[idx[best]]
        hr[np.all(p < NO_PEAK_POWER, axis=1)] = np.nan
        out[s : s + chunk] = hr
    return out
