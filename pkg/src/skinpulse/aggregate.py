"""Per-pixel HR field, mode aggregation and error metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyField, EmptyInput, InvalidInput, LengthMismatch

HR_RANGE = (42, 150)
MIN_COVERAGE = 0.5


def bin_edges(hr_range=HR_RANGE) -> np.ndarray:
    """1-bpm bins centred on the integers of ``hr_range``."""
    lo, hi = hr_range
    return np.arange(lo, hi + 2, dtype=np.float64) - 0.5


@dataclass(frozen=True)
class HrField:
    """``values`` is H x W bpm, NaN where the pixel is excluded."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise InvalidInput(f"HR field must be 2-D, got {v.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def excluded(self) -> np.ndarray:
        return ~np.isfinite(self.values)

    @property
    def n_excluded(self) -> int:
        return int(self.excluded.sum())

    @property
    def used(self) -> np.ndarray:
        return self.values[~self.excluded]


def build_field(per_pixel, mask_coverage, min_coverage: float = MIN_COVERAGE) -> HrField:
    """Exclude NoPeak pixels (NaN in ``per_pixel``) and pixels unmasked in
    less than ``min_coverage`` of frames."""
    hr = np.array(per_pixel, dtype=np.float64)
    cov = np.asarray(mask_coverage, dtype=np.float64)
    if cov.shape != hr.shape:
        raise LengthMismatch(f"coverage shape {cov.shape} != HR shape {hr.shape}")
    hr[cov < min_coverage] = np.nan
    return HrField(hr)


def histogram(field_: HrField, hr_range=HR_RANGE) -> tuple[np.ndarray, np.ndarray]:
    edges = bin_edges(hr_range)
    centres = np.rint(field_.used).astype(np.int64) - hr_range[0]
    if centres.size and (centres.min() < 0 or centres.max() >= len(edges) - 1):
        raise InvalidInput("HR values outside the histogram range")
    counts = np.bincount(centres, minlength=len(edges) - 1)
    return edges, counts


def mode_hr(field_: HrField, hr_range=HR_RANGE) -> int:
    """Centre of the most populated 1-bpm bin; lower bpm wins ties."""
    if field_.used.size == 0:
        raise EmptyField("no usable pixels in the HR field")
    _, counts = histogram(field_, hr_range)
    return int(hr_range[0] + int(np.argmax(counts)))


def error_metrics(estimates, ground_truths) -> dict[str, float]:
    """SD (sample, n-1), MAE and RMSE of ``e = estimate - truth``."""
    est = np.asarray(estimates, dtype=np.float64).ravel()
    gt = np.asarray(ground_truths, dtype=np.float64).ravel()
    if est.shape != gt.shape:
        raise LengthMismatch(f"{est.size} estimates vs {gt.size} ground truths")
    if est.size == 0:
        raise EmptyInput("no estimate/truth pairs")
    e = est - gt
    return {
        "SD": float(np.std(e, ddof=1)) if e.size > 1 else 0.0,
        "MAE": float(np.mean(np.abs(e))),
        "RMSE": math.sqrt(float(np.mean(e * e))),
    }


@dataclass(frozen=True)
class HrReport:
    hr_bpm: int
    bin_edges: np.ndarray
    counts: np.ndarray
    heatmap: np.ndarray
    n_excluded: int
    metrics: dict = field(default_factory=dict)

    @property
    def n_pixels_used(self) -> int:
        return int(np.sum(self.counts))


def build_report(field_: HrField, metrics: dict | None = None, hr_range=HR_RANGE) -> HrReport:
    edges, counts = histogram(field_, hr_range)
    return HrReport(
        hr_bpm=mode_hr(field_, hr_range),
        bin_edges=edges,
        counts=counts,
        heatmap=field_.values,
        n_excluded=field_.n_excluded,
        metrics=dict(metrics or {}),
    )
