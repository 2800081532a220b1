"""RGB <-> YIQ (NTSC) conversion."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RGB_TO_YIQ = np.array(
    [
        [0.299, 0.587, 0.114],
        [0.5959, -0.2746, -0.3213],
        [0.2115, -0.5227, 0.3112],
    ]
)
YIQ_TO_RGB = np.linalg.inv(RGB_TO_YIQ)


@dataclass(frozen=True)
class YiqFrame:
    Y: np.ndarray
    I: np.ndarray  # noqa: E741
    Q: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return self.Y.shape

    def stack(self) -> np.ndarray:
        return np.stack([self.Y, self.I, self.Q], axis=-1)


def rgb_to_yiq(frame: np.ndarray) -> YiqFrame:
    """Convert an ``(..., 3)`` RGB array to YIQ planes of shape ``(...)``."""
    yiq = np.asarray(frame, dtype=np.float64) @ RGB_TO_YIQ.T
    return YiqFrame(yiq[..., 0], yiq[..., 1], yiq[..., 2])


def yiq_to_rgb(frame: YiqFrame) -> np.ndarray:
    return frame.stack() @ YIQ_TO_RGB.T


def i_channel(frames: np.ndarray) -> np.ndarray:
    """I plane only; works on a single frame or a whole ``(T, H, W, 3)`` stack."""
    frames = np.asarray(frames, dtype=np.float64)
    w = RGB_TO_YIQ[1]
    return frames[..., 0] * w[0] + frames[..., 1] * w[1] + frames[..., 2] * w[2]
