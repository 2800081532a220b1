"""Phase 1: CCNN + wavelet ROI masks and the black-pixel ROI video.

A 3-frame window slides with stride 1. Window ``k`` (frames k, k+1, k+2)
decides frame k's mask; the last two frames reuse the final window's mask.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import kernels
from .ccnn import CcnnParams, default_params
from .colorspace import i_channel
from .errors import DimensionMismatch, InvalidInput, LengthMismatch, TooFewFrames
from .frames_io import FrameSequence
from .wavelet import WaveletSpec, real_sum_weights

logger = logging.getLogger(__name__)

WINDOW = 3
LATTICE_MODES = ("patch", "frame")


@dataclass(frozen=True)
class RoiMask:
    mask: np.ndarray  # H x W bool, True = skin / ROI
    window_index: int

    def __post_init__(self):
        m = np.array(self.mask, dtype=bool)
        m.flags.writeable = False
        object.__setattr__(self, "mask", m)


@dataclass(frozen=True)
class RoiSyntheticVideo:
    sequence: FrameSequence
    masks: tuple[RoiMask, ...]

    @property
    def fps(self) -> float:
        return self.sequence.fps

    def __len__(self) -> int:
        return len(self.sequence)

    def mask_stack(self) -> np.ndarray:
        return np.stack([m.mask for m in self.masks])


def window_real_sums(
    seq: FrameSequence,
    ccnn: CcnnParams,
    wavelet: WaveletSpec,
    lattice: str = "patch",
    threads: int = 1,
) -> np.ndarray:
    """Summed real CWT coefficient of every pixel for every window, (T-2, H, W).

    ``patch`` runs an isolated 3x3 lattice per pixel over its neighbourhood
    (borders replicate the edge pixel); ``frame`` runs one lattice over the
    whole frame with zero padding at the image border.
    """
    if lattice not in LATTICE_MODES:
        raise InvalidInput(f"lattice must be one of {LATTICE_MODES}")
    stim = ccnn.stimulus(i_channel(seq.frames))
    args = (
        stim,
        ccnn.decay,
        (ccnn.v_f, ccnn.v_l, ccnn.v_e, ccnn.beta),
        ccnn.m_kernel,
        ccnn.w_kernel,
        real_sum_weights(wavelet),
    )
    fn = kernels.ccnn_patch_real_sums if lattice == "patch" else kernels.ccnn_window_real_sums
    return fn(*args, threads=threads)


def _cleanup(mask: np.ndarray) -> np.ndarray:
    st = np.ones((3, 3), dtype=bool)
    return ndimage.binary_closing(ndimage.binary_opening(mask, st), st)


def extract_roi_masks(
    seq: FrameSequence,
    ccnn: CcnnParams | None = None,
    wavelet: WaveletSpec | None = None,
    lattice: str = "patch",
    cleanup: bool = False,
    threads: int = 1,
) -> list[RoiMask]:
    if len(seq) < WINDOW:
        raise TooFewFrames(f"need at least {WINDOW} frames, got {len(seq)}")
    ccnn = ccnn or default_params()
    wavelet = wavelet or WaveletSpec()
    # classify_pixel's strict > 0 rule, applied to whole frames at once
    roi = window_real_sums(seq, ccnn, wavelet, lattice, threads) > 0.0
    masks = []
    n_win = roi.shape[0]
    for k in range(len(seq)):
        w = min(k, n_win - 1)
        m = _cleanup(roi[w]) if cleanup else roi[w]
        masks.append(RoiMask(m, w))
    return masks


def apply_masks(seq: FrameSequence, masks) -> RoiSyntheticVideo:
    """Black out (exactly 0, 0, 0) every pixel whose mask is False."""
    masks = tuple(masks)
    if len(masks) != len(seq):
        raise LengthMismatch(f"{len(masks)} masks for {len(seq)} frames")
    stack = np.stack([m.mask for m in masks])
    if stack.shape[1:] != seq.frames.shape[1:3]:
        raise DimensionMismatch(f"mask dims {stack.shape[1:]} != frame dims {seq.frames.shape[1:3]}")
    frames = np.where(stack[..., None], seq.frames, 0.0)
    return RoiSyntheticVideo(FrameSequence(frames, seq.fps), masks)


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(a, b).sum() / union)


def mask_centroid(mask: np.ndarray) -> tuple[float, float]:
    """(row, col) centre of mass; NaN for an empty mask."""
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        return (float("nan"), float("nan"))
    return (float(rows.mean()), float(cols.mean()))
