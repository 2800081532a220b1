import json

import numpy as np
import pytest

from skinpulse import cli
from skinpulse.frames_io import FrameSequence, write_frames
from skinpulse.pipeline import PipelineConfig, WelchSettings, estimate_report, run_estimate, run_full, run_roi
from skinpulse.roi import RoiMask, apply_masks
from skinpulse.spectral import Window
from skinpulse.synth import SynthSpec, generate

SMALL = SynthSpec(dims=(24, 24), duration=10.0, noise_std=1 / 255)


def run_cli(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), (json.loads(err.splitlines()[-1]) if err.strip() else None)


@pytest.fixture(scope="module")
def small_video(tmp_path_factory):
    root = tmp_path_factory.mktemp("small")
    write_frames(generate(SMALL, seed=1).sequence, root / "frames")
    return root / "frames" / "manifest.json"


def test_synth_then_full(tmp_path, capsys):
    code, out, _ = run_cli(["synth", "--out", tmp_path / "s", "--dims", 24, 24, "--duration", 10, "--noise", 1 / 255], capsys)
    assert code == 0 and out["n_frames"] == 300
    truth = json.loads((tmp_path / "s" / "truth.json").read_text())
    assert truth["hr_bpm"] == 69.0 and len(truth["masks"]) == 300
    code, out, _ = run_cli(["full", out["manifest"], "--out", tmp_path / "f", "--truth", out["truth"]], capsys)
    assert code == 0
    assert abs(out["hr_bpm"] - 69) <= 2
    assert out["roi"]["mean_iou"] >= 0.6
    report = json.loads((tmp_path / "f" / "report.json").read_text())
    assert set(report) >= {"hr_bpm", "n_pixels_used", "n_excluded", "histogram", "metrics"}
    hist = report["histogram"]
    assert sum(hist["counts"]) == report["n_pixels_used"]
    assert len(hist["bin_edges"]) == len(hist["counts"]) + 1
    assert report["metrics"]["MAE"] == abs(report["hr_bpm"] - 69)
    assert (tmp_path / "f" / "report_heatmap.png").is_file()
    assert (tmp_path / "f" / "report_histogram.csv").is_file()


def test_full_equals_roi_then_estimate(small_video, tmp_path):
    cfg = PipelineConfig()
    run_full(small_video, tmp_path / "full", cfg, keep_intermediates=True)
    roi = run_roi(small_video, tmp_path / "roi", cfg)
    run_estimate(roi["roi_manifest"], tmp_path / "est" / "report.json", cfg)
    for name in ("report.json", "report_heatmap.png", "report_histogram.csv"):
        assert (tmp_path / "full" / name).read_bytes() == (tmp_path / "est" / name).read_bytes()
    kept = sorted((tmp_path / "full" / "roi" / "frames").iterdir())
    fresh = sorted((tmp_path / "roi" / "frames").iterdir())
    assert [p.read_bytes() for p in kept] == [p.read_bytes() for p in fresh]


def test_thread_count_is_invisible(small_video, tmp_path):
    for threads in (1, 3):
        run_full(small_video, tmp_path / f"t{threads}", PipelineConfig(threads=threads))
    assert (tmp_path / "t1" / "report.json").read_bytes() == (tmp_path / "t3" / "report.json").read_bytes()


def test_oracle_roi_video_estimate():
    video = generate(SynthSpec(noise_std=1 / 255), seed=2)
    roi = apply_masks(video.sequence, [RoiMask(m, k) for k, m in enumerate(video.masks)])
    report = estimate_report(roi.sequence, PipelineConfig())
    assert abs(report.hr_bpm - 69) <= 2
    assert report.n_pixels_used == 48 * 48


def test_two_frames_exit_2(tmp_path, capsys):
    seq = FrameSequence(np.full((2, 8, 8, 3), 0.5), 30.0)
    manifest = write_frames(seq, tmp_path / "two").root / "manifest.json"
    code, _, err = run_cli(["roi", manifest, "--out", tmp_path / "o"], capsys)
    assert code == 2 and err["error"] == "TooFewFrames"


def test_all_black_video(tmp_path, capsys):
    seq = FrameSequence(np.zeros((60, 8, 8, 3)), 30.0)
    manifest = write_frames(seq, tmp_path / "black").root / "manifest.json"
    code, _, err = run_cli(["estimate", manifest, "--report", tmp_path / "r.json"], capsys)
    assert code == 3 and err["error"] == "EmptyField"
    code, out, _ = run_cli(["roi", manifest, "--out", tmp_path / "roi"], capsys)
    assert code == 0 and out["warning"] == "empty ROI"
    assert out["mean_roi_fraction"] == 0.0


def test_amplitude_zero_exit_3(tmp_path, capsys):
    code, out, _ = run_cli(["synth", "--out", tmp_path / "s", "--dims", 24, 24, "--duration", 10, "--amplitude", 0], capsys)
    code, _, err = run_cli(["full", out["manifest"], "--out", tmp_path / "f"], capsys)
    assert code == 3 and err["error"] == "EmptyField"


def test_input_errors(tmp_path, capsys):
    code, _, err = run_cli(["full", tmp_path / "missing.json", "--out", tmp_path], capsys)
    assert code == 2 and err["error"] == "MissingFile"
    bad = tmp_path / "cfg.json"
    bad.write_text('{"colour": 1}')
    code, _, err = run_cli(["--config", bad, "metrics", "--estimates", 1, "--truths", 1], capsys)
    assert code == 0  # metrics ignores pipeline config
    code, _, err = run_cli(["--config", bad, "full", tmp_path / "missing.json", "--out", tmp_path], capsys)
    assert code == 2 and err["error"] == "InvalidInput"
    code, _, err = run_cli(["--threads", 0, "metrics", "--estimates", 1, "--truths", 1], capsys)
    assert code == 2


def test_config_round_trip(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"band": [0.8, 2.2], "order": 4, "welch": {"window": "hann", "n_segments": 2}, "ccnn": {"beta": 0.9}}))
    cfg = PipelineConfig.load(path)
    assert cfg.band == (0.8, 2.2) and cfg.order == 4
    assert cfg.welch == WelchSettings(Window.HANN, 2)
    assert cfg.ccnn.beta == 0.9 and cfg.ccnn.v_e == PipelineConfig().ccnn.v_e
    assert cfg.welch.resolve(600, 30.0).segment_length == 300


def test_metrics_cli(tmp_path, capsys):
    csv_path = tmp_path / "pairs.csv"
    errors = [-22, -35, -22, -22, -22, -22]
    csv_path.write_text("estimate,truth\n" + "".join(f"{70 + e},70\n" for e in errors))
    code, out, _ = run_cli(["metrics", "--csv", csv_path], capsys)
    assert code == 0 and out["n"] == 6
    assert out["MAE"] == pytest.approx(24.1667, abs=1e-4)
    assert out["RMSE"] == pytest.approx(24.6475, abs=1e-4)
    code, _, err = run_cli(["metrics", "--estimates", 1, 2, "--truths", 1], capsys)
    assert code == 2 and err["error"] == "LengthMismatch"
