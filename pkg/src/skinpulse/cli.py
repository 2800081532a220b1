"""``skinpulse`` command line.

Exit codes: 0 ok, 2 input error, 3 no physiological signal, 4 internal error.
A JSON summary goes to stdout; on failure ``{"error": ..., "message": ...}``
goes to stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__, kernels
from .aggregate import error_metrics
from .errors import InvalidInput, IoFailure, MissingFile, SkinPulseError
from .frames_io import write_frames, write_mask_png
from .pipeline import PipelineConfig, run_estimate, run_full, run_roi
from .spectral import Window
from .synth import Patch, SynthSpec, generate

logger = logging.getLogger("skinpulse")

EXIT_OK = 0


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    changes = {"threads": args.threads}
    if getattr(args, "band", None):
        changes["band"] = tuple(args.band)
    if getattr(args, "order", None):
        changes["order"] = args.order
    if getattr(args, "lattice", None):
        changes["lattice"] = args.lattice
    if getattr(args, "cleanup", False):
        changes["cleanup"] = True
    if getattr(args, "single_pass", False):
        changes["zero_phase"] = False
    if getattr(args, "window", None):
        changes["welch"] = replace(cfg.welch, window=Window(args.window))
    return replace(cfg, **changes)


def _truth_hr(path) -> float | None:
    if not path:
        return None
    p = Path(path)
    if not p.is_file():
        raise MissingFile(f"truth file not found: {p}")
    return json.loads(p.read_text(encoding="utf-8")).get("hr_bpm")


def cmd_synth(args) -> dict:
    raw = {}
    if args.spec:
        p = Path(args.spec)
        if not p.is_file():
            raise MissingFile(f"spec not found: {p}")
        raw = json.loads(p.read_text(encoding="utf-8"))
    for key, val in (
        ("hr_bpm", args.hr),
        ("duration", args.duration),
        ("fps", args.fps),
        ("pulse_amplitude", args.amplitude),
        ("noise_std", args.noise),
        ("dims", args.dims),
        ("motion", args.motion),
    ):
        if val is not None:
            raw[key] = val
    if args.patch is not None:
        raw["patch"] = Patch(*args.patch)
    spec = SynthSpec.from_dict(raw)
    video = generate(spec, args.seed)
    out = Path(args.out)
    manifest = write_frames(video.sequence, out / "frames")
    mask_dir = out / "truth_masks"
    try:
        mask_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {mask_dir}: {exc}") from exc
    width = max(5, len(str(len(video.masks) - 1)))
    mask_names = []
    for k, m in enumerate(video.masks):
        name = f"truth_masks/mask_{k:0{width}d}.png"
        write_mask_png(m, out / name)
        mask_names.append(name)
    truth = {"hr_bpm": video.hr_bpm, "seed": args.seed, "spec": spec.to_dict(), "masks": mask_names}
    (out / "truth.json").write_text(json.dumps(truth, indent=2) + "\n", encoding="utf-8")
    return {
        "stage": "synth",
        "manifest": str(manifest.root / "manifest.json"),
        "truth": str(out / "truth.json"),
        "n_frames": len(video.sequence),
        "hr_bpm": video.hr_bpm,
    }


def cmd_roi(args) -> dict:
    return run_roi(args.manifest, args.out, _config(args), args.truth)


def cmd_estimate(args) -> dict:
    return run_estimate(args.manifest, args.report, _config(args), _truth_hr(args.truth))


def cmd_full(args) -> dict:
    return run_full(args.manifest, args.out, _config(args), args.keep_intermediates, args.truth)


def _read_pairs(path) -> tuple[list[float], list[float]]:
    p = Path(path)
    if not p.is_file():
        raise MissingFile(f"CSV not found: {p}")
    est, gt = [], []
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or not {"estimate", "truth"} <= set(reader.fieldnames):
            raise InvalidInput("CSV needs 'estimate' and 'truth' columns")
        for row in reader:
            est.append(float(row["estimate"]))
            gt.append(float(row["truth"]))
    return est, gt


def cmd_metrics(args) -> dict:
    if args.csv:
        est, gt = _read_pairs(args.csv)
    else:
        est, gt = args.estimates or [], args.truths or []
    out = {"stage": "metrics", "n": len(est)}
    out.update(error_metrics(est, gt))
    return out


def _add_pipeline_flags(p):
    p.add_argument("--band", type=float, nargs=2, metavar=("LO", "HI"), help="band-pass edges in Hz (default 0.7 2.5)")
    p.add_argument("--order", type=int, help="Butterworth order (default 3)")
    p.add_argument("--window", choices=[w.value for w in Window], help="Welch window (default hamming)")
    p.add_argument("--lattice", choices=["patch", "frame"], help="CCNN lattice per pixel patch or whole frame")
    p.add_argument("--cleanup", action="store_true", help="morphological open/close on masks")
    p.add_argument("--single-pass", action="store_true", help="causal filtering instead of zero-phase")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="skinpulse", description="Remote heart rate from per-pixel skin ROI analysis.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--config", help="pipeline config JSON")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for the compiled kernels")
    ap.add_argument("--keep-intermediates", action="store_true", help="full: also write the ROI video and masks")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic pulsing-patch video")
    p.add_argument("--out", required=True)
    p.add_argument("--spec", help="SynthSpec JSON; flags below override it")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hr", type=float)
    p.add_argument("--duration", type=float)
    p.add_argument("--fps", type=float)
    p.add_argument("--amplitude", type=float, help="pulse amplitude in channel units")
    p.add_argument("--noise", type=float, help="Gaussian noise std in channel units")
    p.add_argument("--dims", type=int, nargs=2, metavar=("H", "W"))
    p.add_argument("--motion", type=float, nargs=2, metavar=("DROW", "DCOL"), help="px/frame")
    p.add_argument("--patch", type=int, nargs=4, metavar=("ROW", "COL", "H", "W"))
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("roi", help="phase 1: ROI masks and the masked video")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="truth.json from synth; logs mask IoU")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_roi)

    p = sub.add_parser("estimate", help="phases 2-3 on an ROI video")
    p.add_argument("manifest")
    p.add_argument("--report", required=True, help="report JSON path")
    p.add_argument("--truth", help="truth.json; adds error metrics to the report")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("full", help="all phases")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="truth.json; logs IoU and adds error metrics")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_full)

    p = sub.add_parser("metrics", help="SD / MAE / RMSE of estimates vs truths")
    p.add_argument("--csv", help="CSV with 'estimate' and 'truth' columns")
    p.add_argument("--estimates", type=float, nargs="+")
    p.add_argument("--truths", type=float, nargs="+")
    p.set_defaults(func=cmd_metrics)
    return ap


def _fail(code: str, message: str, exit_code: int) -> int:
    sys.stderr.write(json.dumps({"error": code, "message": message}) + "\n")
    return exit_code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logger.debug("kernel backend: %s", kernels.BACKEND)
    try:
        if args.threads < 1:
            raise InvalidInput("--threads must be >= 1")
        summary = args.func(args)
    except SkinPulseError as exc:
        return _fail(exc.code, str(exc), exc.exit_code)
    except (json.JSONDecodeError, ValueError) as exc:
        return _fail("InvalidInput", str(exc), 2)
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit 4
        logger.debug("internal error", exc_info=True)
        return _fail("InternalError", f"{type(exc).__name__}: {exc}", 4)
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
