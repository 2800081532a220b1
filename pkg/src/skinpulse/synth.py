"""Synthetic pulsing-skin videos with known mask and heart rate.

A skin-toned patch on a constant background carries
``A sin(2 pi (hr/60) t)`` on G and half of it on R. The patch can translate;
it reflects off the frame border so it stays fully inside for any duration.
Frames are quantized to 8 bits like a real camera.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidInput, OutOfRange, PatchOutOfBounds
from .frames_io import FrameSequence

SKIN_RGB = (0.78, 0.57, 0.45)
BACKGROUND_RGB = (0.4, 0.4, 0.4)


@dataclass(frozen=True)
class Patch:
    """Axis-aligned box at frame 0; ``shape="disk"`` uses the inscribed disk."""

    row: int
    col: int
    height: int
    width: int
    shape: str = "rect"

    def __post_init__(self):
        if self.shape not in ("rect", "disk"):
            raise InvalidInput(f"patch shape must be rect or disk, got {self.shape!r}")
        if self.height < 1 or self.width < 1:
            raise InvalidInput("patch must be at least 1x1")

    def footprint(self) -> np.ndarray:
        if self.shape == "rect":
            return np.ones((self.height, self.width), dtype=bool)
        r = (np.arange(self.height) + 0.5 - self.height / 2) / (self.height / 2)
        c = (np.arange(self.width) + 0.5 - self.width / 2) / (self.width / 2)
        return r[:, None] ** 2 + c[None, :] ** 2 <= 1.0


def default_patch(dims) -> Patch:
    h, w = dims
    return Patch(h // 8, w // 8, h - 2 * (h // 8), w - 2 * (w // 8))


def _reflect(x: float, span: int) -> int:
    """Fold ``x`` into [0, span] by reflection (triangle wave)."""
    if span <= 0:
        return 0
    x = math.fmod(abs(x), 2 * span)
    return int(round(2 * span - x if x > span else x))


@dataclass(frozen=True)
class SynthSpec:
    dims: tuple[int, int] = (64, 64)
    fps: float = 30.0
    duration: float = 20.0
    hr_bpm: float = 69.0
    pulse_amplitude: float = 2.0 / 255.0
    patch: Patch | None = None
    motion: tuple[float, float] = (0.0, 0.0)  # (rows, cols) per frame
    noise_std: float = 0.0
    background: tuple[float, float, float] = BACKGROUND_RGB
    skin: tuple[float, float, float] = SKIN_RGB
    # additive lighting ramp on every pixel, channel units per second
    drift: float = 0.0
    bounce: bool = True

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "motion", tuple(float(m) for m in self.motion))
        object.__setattr__(self, "background", tuple(float(v) for v in self.background))
        object.__setattr__(self, "skin", tuple(float(v) for v in self.skin))
        if self.patch is None:
            object.__setattr__(self, "patch", default_patch(self.dims))
        elif isinstance(self.patch, dict):
            object.__setattr__(self, "patch", Patch(**self.patch))
        if min(self.dims) < 1 or not self.fps > 0 or not self.duration > 0:
            raise InvalidInput("dims, fps and duration must be positive")
        if not 42 <= self.hr_bpm <= 150:
            raise InvalidInput(f"hr_bpm {self.hr_bpm} outside [42, 150]")
        if self.pulse_amplitude < 0 or self.noise_std < 0:
            raise InvalidInput("amplitude and noise_std must be >= 0")
        p = self.patch
        if p.row < 0 or p.col < 0 or p.row + p.height > self.dims[0] or p.col + p.width > self.dims[1]:
            raise PatchOutOfBounds(f"patch {p} does not fit in {self.dims}")
        if not self.bounce:
            last = self.n_frames - 1
            r, c = p.row + self.motion[0] * last, p.col + self.motion[1] * last
            if min(r, c) < 0 or r + p.height > self.dims[0] or c + p.width > self.dims[1]:
                raise PatchOutOfBounds("patch leaves the frame before the last frame")

    @property
    def n_frames(self) -> int:
        return int(round(self.duration * self.fps))

    def position(self, k: int) -> tuple[int, int]:
        """Top-left corner of the patch at frame ``k``."""
        p = self.patch
        if self.bounce:
            span_r = self.dims[0] - p.height
            span_c = self.dims[1] - p.width
            return _reflect(p.row + self.motion[0] * k, span_r), _reflect(p.col + self.motion[1] * k, span_c)
        return int(round(p.row + self.motion[0] * k)), int(round(p.col + self.motion[1] * k))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dims"] = list(self.dims)
        d["motion"] = list(self.motion)
        d["background"] = list(self.background)
        d["skin"] = list(self.skin)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidInput(f"unknown synth field(s): {sorted(unknown)}")
        return cls(**d)


def ground_truth_mask(spec: SynthSpec, frame_index: int) -> np.ndarray:
    if not 0 <= frame_index < spec.n_frames:
        raise OutOfRange(f"frame {frame_index} outside [0, {spec.n_frames})")
    r, c = spec.position(frame_index)
    p = spec.patch
    mask = np.zeros(spec.dims, dtype=bool)
    mask[r : r + p.height, c : c + p.width] = p.footprint()
    return mask


@dataclass
class SynthVideo:
    sequence: FrameSequence
    masks: np.ndarray = field(repr=False)  # (T, H, W) bool
    hr_bpm: float

    def __iter__(self):
        # unpacks as (sequence, masks, hr_bpm)
        return iter((self.sequence, self.masks, self.hr_bpm))


def generate(spec: SynthSpec, seed: int = 0) -> SynthVideo:
    """Render every frame; noise for frame k comes from ``default_rng([seed, k])``."""
    T = spec.n_frames
    H, W = spec.dims
    t = np.arange(T) / spec.fps
    pulse = spec.pulse_amplitude * np.sin(2 * np.pi * (spec.hr_bpm / 60.0) * t)
    skin = np.asarray(spec.skin)
    bg = np.asarray(spec.background)
    frames = np.empty((T, H, W, 3), dtype=np.uint8)
    masks = np.empty((T, H, W), dtype=bool)
    for k in range(T):
        m = ground_truth_mask(spec, k)
        colour = skin + pulse[k] * np.array([0.5, 1.0, 0.0])
        img = np.where(m[..., None], colour, bg) + spec.drift * t[k]
        if spec.noise_std > 0:
            img = img + np.random.default_rng([seed, k]).normal(0.0, spec.noise_std, img.shape)
        frames[k] = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
        masks[k] = m
    return SynthVideo(FrameSequence.from_uint8(frames, spec.fps), masks, float(spec.hr_bpm))
