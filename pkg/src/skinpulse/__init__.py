"""Remote heart-rate measurement from per-pixel skin ROI analysis.

Phase 1 encodes each pixel's I-channel over 3-frame windows with a
continuous coupled neural network and keeps pixels whose summed real
wavelet coefficients are positive. Phase 2 band-passes every kept pixel's
green channel. Phase 3 takes a Welch PSD peak per pixel and reports the mode.
"""

__version__ = "0.1.0"

from .errors import EmptyField, InputError, NoPeak, SkinPulseError  # noqa: E402
from .frames_io import FrameSequence, load_frames, write_frames  # noqa: E402
from .pipeline import PipelineConfig, run_estimate, run_full, run_roi  # noqa: E402

__all__ = [
    "EmptyField",
    "FrameSequence",
    "InputError",
    "NoPeak",
    "PipelineConfig",
    "SkinPulseError",
    "load_frames",
    "run_estimate",
    "run_full",
    "run_roi",
    "write_frames",
]
