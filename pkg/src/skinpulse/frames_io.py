"""Lossless frame-sequence persistence and report writing.

Videos travel between pipeline stages as a directory of 8-bit frames plus a
JSON manifest. Nothing here touches a compressed container: compression
artifacts are of the same order as the pulse signal itself.
"""
from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from PIL import Image

from .errors import DimensionMismatch, InvalidInput, IoFailure, MissingFile, MissingFps

if TYPE_CHECKING:
    from .aggregate import HrReport

logger = logging.getLogger(__name__)

PIXEL_FORMATS = ("png8", "raw_rgb24")
HEATMAP_RANGE = (42.0, 150.0)


@dataclass(frozen=True, eq=False)
class FrameSequence:
    """Ordered RGB frames, shape ``(T, H, W, 3)``, values in [0, 1]."""

    frames: np.ndarray
    fps: float

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 4 or frames.shape[-1] != 3:
            raise DimensionMismatch(f"expected (T, H, W, 3) frames, got shape {frames.shape}")
        if not np.isfinite(self.fps) or self.fps <= 0:
            raise MissingFps(f"fps must be positive, got {self.fps!r}")
        if frames.size and (frames.min() < 0.0 or frames.max() > 1.0):
            raise InvalidInput("channel values must lie in [0, 1]")
        if frames.flags.writeable:
            frames = frames.copy() if frames is self.frames else frames
            frames.flags.writeable = False
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "fps", float(self.fps))

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def duration(self) -> float:
        return len(self) / self.fps

    @classmethod
    def from_uint8(cls, frames: np.ndarray, fps: float) -> "FrameSequence":
        frames = np.asarray(frames)
        if frames.dtype != np.uint8:
            raise InvalidInput(f"expected uint8 frames, got {frames.dtype}")
        return cls(frames / 255.0, fps)

    def to_uint8(self) -> np.ndarray:
        return quantize(self.frames)

    def __eq__(self, other):
        if not isinstance(other, FrameSequence):
            return NotImplemented
        return self.fps == other.fps and np.array_equal(self.frames, other.frames)


@dataclass
class Manifest:
    fps: float
    frame_file_list: list[str]
    pixel_format: str = "png8"
    dims: tuple[int, int] = (0, 0)
    root: Path = field(default=Path("."), repr=False)

    def to_json(self) -> dict:
        return {
            "fps": self.fps,
            "dims": [int(self.dims[0]), int(self.dims[1])],
            "pixel_format": self.pixel_format,
            "frames": list(self.frame_file_list),
        }

    def paths(self) -> list[Path]:
        return [self.root / p for p in self.frame_file_list]


def quantize(values: np.ndarray) -> np.ndarray:
    """Map [0, 1] floats onto the 8-bit grid (inverse of ``v / 255``)."""
    return np.clip(np.rint(np.asarray(values) * 255.0), 0, 255).astype(np.uint8)


def read_manifest(manifest_path: str | os.PathLike) -> Manifest:
    path = Path(manifest_path)
    if not path.is_file():
        raise MissingFile(f"manifest not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"unreadable manifest {path}: {exc}") from exc

    fps = raw.get("fps")
    if not isinstance(fps, (int, float)) or isinstance(fps, bool) or not fps > 0:
        raise MissingFps(f"manifest {path} has missing or non-positive fps: {fps!r}")
    frames = raw.get("frames")
    if not isinstance(frames, list) or not frames:
        raise InvalidInput(f"manifest {path} lists no frames")
    dims = raw.get("dims")
    if not (isinstance(dims, list) and len(dims) == 2 and all(isinstance(d, int) and d > 0 for d in dims)):
        raise InvalidInput(f"manifest {path} has invalid dims: {dims!r}")
    fmt = raw.get("pixel_format", "png8")
    if fmt not in PIXEL_FORMATS:
        raise InvalidInput(f"unsupported pixel_format {fmt!r}")
    return Manifest(float(fps), [str(f) for f in frames], fmt, (dims[0], dims[1]), path.parent)


def _read_frame(path: Path, fmt: str, dims: tuple[int, int]) -> np.ndarray:
    if not path.is_file():
        raise MissingFile(f"frame file not found: {path}")
    h, w = dims
    if fmt == "raw_rgb24":
        data = np.fromfile(path, dtype=np.uint8)
        if data.size != h * w * 3:
            raise DimensionMismatch(f"{path}: {data.size} bytes, expected {h * w * 3} for {h}x{w} RGB24")
        return data.reshape(h, w, 3)
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"))
    if arr.shape[:2] != (h, w):
        raise DimensionMismatch(f"{path}: decoded {arr.shape[:2]}, manifest declares {(h, w)}")
    return arr


def load_frames(manifest_path: str | os.PathLike) -> FrameSequence:
    manifest = read_manifest(manifest_path)
    raw = np.stack([_read_frame(p, manifest.pixel_format, manifest.dims) for p in manifest.paths()])
    return FrameSequence.from_uint8(raw, manifest.fps)


def write_frames(
    seq: FrameSequence,
    directory: str | os.PathLike,
    pixel_format: str = "png8",
    prefix: str = "frame",
) -> Manifest:
    """Persist ``seq`` losslessly and write ``manifest.json`` next to the frames.

    Values are quantized to 8 bits, so a sequence already on the 8-bit grid
    survives the round trip unchanged.
    """
    if len(seq) == 0:
        raise InvalidInput("cannot write an empty frame sequence")
    if pixel_format not in PIXEL_FORMATS:
        raise InvalidInput(f"unsupported pixel_format {pixel_format!r}")
    out = Path(directory)
    ext = "png" if pixel_format == "png8" else "rgb"
    width = max(5, len(str(len(seq) - 1)))
    names = [f"{prefix}_{k:0{width}d}.{ext}" for k in range(len(seq))]
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, frame in zip(names, seq.to_uint8()):
            if pixel_format == "png8":
                Image.fromarray(frame, mode="RGB").save(out / name, format="PNG")
            else:
                frame.tofile(out / name)
        manifest = Manifest(seq.fps, names, pixel_format, (seq.height, seq.width), out)
        (out / "manifest.json").write_text(json.dumps(manifest.to_json(), indent=2), encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"failed writing frames to {out}: {exc}") from exc
    return manifest


def write_mask_png(mask: np.ndarray, path: str | os.PathLike) -> None:
    try:
        Image.fromarray(np.asarray(mask, dtype=bool)).save(path, format="PNG")
    except OSError as exc:
        raise IoFailure(f"failed writing mask {path}: {exc}") from exc


def read_mask_png(path: str | os.PathLike) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"mask not found: {path}")
    with Image.open(path) as img:
        return np.asarray(img.convert("1"), dtype=bool)


def heatmap_image(hr_map: np.ndarray, hr_range: tuple[float, float] = HEATMAP_RANGE) -> np.ndarray:
    """Scale bpm values linearly so ``hr_range`` spans [0, 255]; NaN (excluded) -> 0."""
    lo, hi = hr_range
    hr_map = np.asarray(hr_map, dtype=np.float64)
    scaled = np.rint(255.0 * (np.nan_to_num(hr_map, nan=lo) - lo) / (hi - lo))
    scaled = np.clip(scaled, 0, 255)
    scaled[~np.isfinite(hr_map)] = 0
    return scaled.astype(np.uint8)


def _json_number(x: float):
    x = float(x)
    return int(x) if x.is_integer() else x


def report_to_json(report: "HrReport") -> dict:
    return {
        "hr_bpm": _json_number(report.hr_bpm),
        "n_pixels_used": int(report.n_pixels_used),
        "n_excluded": int(report.n_excluded),
        "histogram": {
            "bin_edges": [_json_number(e) for e in report.bin_edges],
            "counts": [int(c) for c in report.counts],
        },
        "metrics": {k: _json_number(v) for k, v in report.metrics.items()},
    }


def write_histogram_csv(report: "HrReport", path: str | os.PathLike) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bin_low", "bin_high", "count"])
            edges = report.bin_edges
            for k, count in enumerate(report.counts):
                writer.writerow([_json_number(edges[k]), _json_number(edges[k + 1]), int(count)])
    except OSError as exc:
        raise IoFailure(f"failed writing histogram {path}: {exc}") from exc


def write_report(
    report: "HrReport",
    path: str | os.PathLike,
    heatmap_path: str | os.PathLike | None = None,
    histogram_path: str | os.PathLike | None = None,
) -> None:
    """Write the report JSON; heatmap and histogram go next to it unless given.

    ``report.json`` -> ``report_heatmap.png`` and ``report_histogram.csv``.
    """
    path = Path(path)
    stem = path.with_suffix("")
    heatmap_path = Path(heatmap_path) if heatmap_path else Path(f"{stem}_heatmap.png")
    histogram_path = Path(histogram_path) if histogram_path else Path(f"{stem}_histogram.csv")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(report_to_json(report), indent=2) + "\n", encoding="utf-8")
        Image.fromarray(heatmap_image(report.heatmap), mode="L").save(heatmap_path, format="PNG")
    except OSError as exc:
        raise IoFailure(f"failed writing report {path}: {exc}") from exc
    write_histogram_csv(report, histogram_path)
    logger.debug("report written to %s", path)

