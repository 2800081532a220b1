"""The three phases chained: ROI video, per-pixel band-passed G series,
Welch heart rate per pixel, mode over the field.

``run_full`` goes through the same in-memory functions as ``run_roi``
followed by ``run_estimate``. The ROI video is on the 8-bit grid, so writing
it to disk and reading it back changes nothing, and both routes produce the
same report bytes.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .aggregate import MIN_COVERAGE, HrReport, build_field, build_report, error_metrics
from .ccnn import CcnnParams, default_params
from .errors import InvalidInput, IoFailure, MissingFile
from .frames_io import FrameSequence, load_frames, read_mask_png, write_frames, write_mask_png, write_report
from .pixel_signal import DEFAULT_BAND, DEFAULT_ORDER, design_bandpass, filter_rows, green_matrix
from .roi import LATTICE_MODES, RoiSyntheticVideo, apply_masks, extract_roi_masks, mask_iou
from .spectral import Window, WelchConfig, default_config, default_fft_length, welch_hr_rows
from .wavelet import WaveletSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WelchSettings:
    """Welch options resolved against the series length at run time.

    ``None`` means the automatic choice: ``L = max(1, floor(duration / 10 s))``
    and the zero-padded FFT length of :func:`default_fft_length`.
    """

    window: Window = Window.HAMMING
    n_segments: int | None = None
    fft_length: int | None = None
    overlap: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "window", Window(self.window))

    def resolve(self, n: int, fs: float) -> WelchConfig:
        auto = default_config(n, fs, self.window, self.overlap)
        if self.n_segments is None and self.fft_length is None:
            return auto
        L = self.n_segments or auto.n_segments
        M = n // L
        nfft = self.fft_length or default_fft_length(fs, M)
        return WelchConfig(L, M, self.window, nfft, self.overlap)


@dataclass(frozen=True)
class PipelineConfig:
    ccnn: CcnnParams = field(default_factory=default_params)
    wavelet: WaveletSpec = field(default_factory=WaveletSpec)
    lattice: str = "patch"
    cleanup: bool = False
    band: tuple[float, float] = DEFAULT_BAND
    order: int = DEFAULT_ORDER
    zero_phase: bool = True
    welch: WelchSettings = field(default_factory=WelchSettings)
    min_coverage: float = MIN_COVERAGE
    threads: int = 1

    def __post_init__(self):
        if self.lattice not in LATTICE_MODES:
            raise InvalidInput(f"lattice must be one of {LATTICE_MODES}")
        lo, hi = (float(b) for b in self.band)
        object.__setattr__(self, "band", (lo, hi))
        if not 0.0 <= self.min_coverage <= 1.0:
            raise InvalidInput("min_coverage must be in [0, 1]")
        if self.threads < 1:
            raise InvalidInput("threads must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidInput(f"unknown config key(s): {sorted(unknown)}")
        kw = dict(d)
        if "ccnn" in kw:
            base = default_params().to_dict()
            base.update(kw["ccnn"])
            kw["ccnn"] = CcnnParams.from_dict(base)
        if "wavelet" in kw:
            kw["wavelet"] = WaveletSpec.from_dict(kw["wavelet"])
        if "welch" in kw:
            kw["welch"] = WelchSettings(**kw["welch"])
        if "band" in kw:
            kw["band"] = tuple(kw["band"])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise InvalidInput(f"bad config: {exc}") from exc

    @classmethod
    def load(cls, path: str | os.PathLike) -> "PipelineConfig":
        p = Path(path)
        if not p.is_file():
            raise MissingFile(f"config not found: {p}")
        try:
            return cls.from_dict(json.loads(p.read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"config {p} is not valid JSON: {exc}") from exc


# ---- in-memory phases ------------------------------------------------------


def roi_video(seq: FrameSequence, config: PipelineConfig) -> RoiSyntheticVideo:
    masks = extract_roi_masks(seq, config.ccnn, config.wavelet, config.lattice, config.cleanup, config.threads)
    return apply_masks(seq, masks)


def unmasked_coverage(seq: FrameSequence) -> np.ndarray:
    """Fraction of frames in which each pixel is not exactly black.

    The ROI video is the only hand-off between phases, so the mask is read
    back from it: masked pixels are (0, 0, 0) by construction.
    """
    return np.any(seq.frames != 0.0, axis=-1).mean(axis=0)


def hr_map(seq: FrameSequence, config: PipelineConfig) -> np.ndarray:
    """Per-pixel bpm, NaN where a pixel has no in-band power."""
    filt = design_bandpass(seq.fps, config.band, config.order)
    x = filter_rows(green_matrix(seq), filt, config.zero_phase, config.threads)
    welch = config.welch.resolve(x.shape[1], seq.fps)
    return welch_hr_rows(x, seq.fps, welch, config.band).reshape(seq.height, seq.width)


def estimate_report(seq: FrameSequence, config: PipelineConfig, truth_hr: float | None = None) -> HrReport:
    field_ = build_field(hr_map(seq, config), unmasked_coverage(seq), config.min_coverage)
    report = build_report(field_)
    if truth_hr is not None:
        report = replace(report, metrics=error_metrics([report.hr_bpm], [truth_hr]))
    return report


# ---- on-disk stages --------------------------------------------------------


def _load_truth(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise MissingFile(f"truth file not found: {p}")
    truth = json.loads(p.read_text(encoding="utf-8"))
    truth["_root"] = p.parent
    return truth


def _truth_masks(truth: dict) -> np.ndarray:
    root = truth["_root"]
    return np.stack([read_mask_png(root / m) for m in truth["masks"]])


def _write_roi(video: RoiSyntheticVideo, out_dir: Path) -> Path:
    write_frames(video.sequence, out_dir / "frames")
    mask_dir = out_dir / "masks"
    try:
        mask_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {mask_dir}: {exc}") from exc
    width = max(5, len(str(len(video) - 1)))
    for k, m in enumerate(video.masks):
        write_mask_png(m.mask, mask_dir / f"mask_{k:0{width}d}.png")
    return out_dir / "frames" / "manifest.json"


def _roi_summary(video: RoiSyntheticVideo, truth: dict | None) -> dict:
    masks = video.mask_stack()
    summary = {
        "n_frames": len(video),
        "dims": [video.sequence.height, video.sequence.width],
        "mean_roi_fraction": float(masks.mean()),
    }
    if not masks.any():
        logger.warning("no ROI pixel in any frame; the ROI video is entirely black")
        summary["warning"] = "empty ROI"
    if truth is not None and "masks" in truth:
        gt = _truth_masks(truth)
        if gt.shape != masks.shape:
            raise InvalidInput(f"truth masks {gt.shape} do not match ROI masks {masks.shape}")
        iou = float(np.mean([mask_iou(a, b) for a, b in zip(masks, gt)]))
        logger.info("mean mask IoU vs truth: %.4f", iou)
        summary["mean_iou"] = iou
    return summary


def run_roi(manifest_path, out_dir, config: PipelineConfig | None = None, truth_path=None) -> dict:
    config = config or PipelineConfig()
    out_dir = Path(out_dir)
    video = roi_video(load_frames(manifest_path), config)
    roi_manifest = _write_roi(video, out_dir)
    summary = {"stage": "roi", "roi_manifest": str(roi_manifest)}
    summary.update(_roi_summary(video, _load_truth(truth_path) if truth_path else None))
    return summary


def _estimate_summary(report: HrReport, report_path: Path) -> dict:
    return {
        "hr_bpm": report.hr_bpm,
        "n_pixels_used": report.n_pixels_used,
        "n_excluded": report.n_excluded,
        "report": str(report_path),
    }


def run_estimate(roi_manifest_path, report_path, config: PipelineConfig | None = None, truth_hr: float | None = None) -> dict:
    config = config or PipelineConfig()
    report = estimate_report(load_frames(roi_manifest_path), config, truth_hr)
    report_path = Path(report_path)
    write_report(report, report_path)
    summary = {"stage": "estimate"}
    summary.update(_estimate_summary(report, report_path))
    return summary


def run_full(
    manifest_path,
    out_dir,
    config: PipelineConfig | None = None,
    keep_intermediates: bool = False,
    truth_path=None,
) -> dict:
    config = config or PipelineConfig()
    out_dir = Path(out_dir)
    truth = _load_truth(truth_path) if truth_path else None
    video = roi_video(load_frames(manifest_path), config)
    summary = {"stage": "full"}
    if keep_intermediates:
        roi_dir = out_dir / "roi"
        summary["roi_manifest"] = str(_write_roi(video, roi_dir))
    summary["roi"] = _roi_summary(video, truth)
    truth_hr = truth.get("hr_bpm") if truth else None
    report = estimate_report(video.sequence, config, truth_hr)
    report_path = out_dir / "report.json"
    write_report(report, report_path)
    summary.update(_estimate_summary(report, report_path))
    return summary
