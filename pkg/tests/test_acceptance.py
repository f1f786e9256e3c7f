"""Acceptance suite: one test group per numbered criterion.

Each criterion runs at its stated tolerance; the conftest terminal hook
prints one pass/fail line per criterion at the end of the run. Two
reference-table deltas are internally inconsistent with the cells they
are printed next to (see reference_table.INCONSISTENT_DELTAS); those two
comparisons are asserted exactly as published and marked strict-xfail.
"""

from __future__ import annotations

import json
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest
import yaml
from click.testing import CliRunner

from gazeprompt.cli import main as cli_main
from gazeprompt.fixation_text import render_fixation_text, to_pixels, to_relative
from gazeprompt.frameplan import RenderConfig, plan_frames
from gazeprompt.frames import render_frame_array, render_video
from gazeprompt.heatmap import render_heatmap
from gazeprompt.imaging import draw_disc, encode_png, load_rgb
from gazeprompt.manifest import load_manifest, summarize_manifest
from gazeprompt.prompts import GazeMode, TaskKind, build_prompt
from gazeprompt.runner import EndpointConfig, RecordSink, run_batch
from gazeprompt.scoring import COLUMN_ORDER, aggregate_table, scale_scores
from gazeprompt.service.mock_lvlm import create_mock_app
from gazeprompt.synth import generate_synthetic_scanpaths, make_test_image, synthesize_manifest
from gazeprompt.types import Fixation, ImageRecord, ScanPath

import reference_table as ref
from server_util import live_server

TOLERANCE = 0.06

criterion = pytest.mark.acceptance


# --------------------------------------------------------------------------
# criterion 1: reference table arithmetic reproduction
# --------------------------------------------------------------------------

_TABLE = aggregate_table(ref.scaled_cells(), base_method_id="base")
_ROWS = {(r.model_id, r.method_id): r for r in _TABLE.rows}

_DELTA_CASES = []
for _model, _printed in ref.PRINTED_DELTAS.items():
    for (_task, _split), _value in zip(ref.COLUMNS, _printed[:4]):
        _marks = ()
        if (_model, _task, _split) in ref.INCONSISTENT_DELTAS:
            _marks = pytest.mark.xfail(
                reason=(
                    "printed delta disagrees with the printed cells it annotates "
                    "(233.2 - 222.0 = +11.2, printed +10.2); the row's printed "
                    "overall confirms the cells"
                ),
                strict=True,
            )
        _DELTA_CASES.append(pytest.param(_model, (_task, _split), _value, marks=_marks))
    _marks = ()
    if (_model, "overall", "overall") in ref.INCONSISTENT_DELTAS:
        _marks = pytest.mark.xfail(
            reason=(
                "printed overall delta is the difference of the two printed, "
                "independently rounded overalls (154.6 - 139.4 = +15.2); "
                "mean-of-cells arithmetic gives 154.55 - 139.45 = +15.1"
            ),
            strict=True,
        )
    _DELTA_CASES.append(pytest.param(_model, ("overall", "overall"), _printed[4], marks=_marks))


@criterion(criterion=1, title="reference table arithmetic reproduction (tolerance 0.06)")
class TestCriterion1TableArithmetic:
    def test_runtime_under_one_second(self):
        started = time.monotonic()
        table = aggregate_table(ref.scaled_cells(), base_method_id="base")
        assert len(table.rows) == len(ref.CELLS)
        assert time.monotonic() - started < 1.0

    @pytest.mark.parametrize("row_key,printed", sorted(ref.PRINTED_OVERALL.items()))
    def test_overall_values(self, row_key, printed):
        assert abs(_ROWS[row_key].overall - printed) <= TOLERANCE

    @pytest.mark.parametrize("model,column,printed", _DELTA_CASES)
    def test_deltas(self, model, column, printed):
        row = _ROWS[(model, "gaze_video")]
        computed = row.overall_delta if column == ("overall", "overall") else row.deltas[column]
        assert abs(computed - printed) <= TOLERANCE


# --------------------------------------------------------------------------
# criterion 2: baseline fixed point
# --------------------------------------------------------------------------


@criterion(criterion=2, title="baseline fixed point: self-scaling yields exactly 100.0")
class TestCriterion2BaselineFixedPoint:
    def test_scaling_any_raw_set_against_itself(self):
        raw = ref.scores_csv_text()
        from gazeprompt.scoring import RawScore, read_scores_csv

        scores = read_scores_csv(raw)
        baseline_rows = [
            RawScore(
                model_id="self",
                method_id="base",
                metric_id=s.metric_id,
                task=s.task,
                split=s.split,
                value=s.value,
            )
            for s in scores
            if s.model_id == ref.BASELINE_MODEL
        ]
        cells = scale_scores(baseline_rows, "self")
        assert all(c.scaled == 100.0 for c in cells)
        table = aggregate_table(cells, base_method_id="base")
        assert table.rows[0].overall == 100.0

    def test_random_raw_values_fixed_point(self):
        from gazeprompt.scoring import RawScore

        rng = random.Random(13)
        rows = [
            RawScore(
                model_id="m",
                method_id="base",
                metric_id=f"metric_{i}",
                task=task,
                split=split,
                value=rng.uniform(0.01, 5.0),
            )
            for i in range(3)
            for task, split in COLUMN_ORDER
        ]
        cells = scale_scores(rows, "m")
        assert all(c.scaled == 100.0 for c in cells)
        assert aggregate_table(cells).rows[0].overall == 100.0


# --------------------------------------------------------------------------
# criteria 3 and 4: sampling oracle equivalence and frame-count conservation
# --------------------------------------------------------------------------


def _corpus(image: ImageRecord, n_paths: int) -> list[ScanPath]:
    return generate_synthetic_scanpaths(
        seed=20260810,
        n_paths=n_paths,
        fixation_count_range=(1, 12),
        duration_range_s=(0.05, 1.2),
        image=image,
    )


@criterion(criterion=3, title="sampling oracle equivalence on 1,000 seeded scanpaths (byte-identical)")
def test_criterion_3_sampling_oracle_equivalence(tmp_path):
    started = time.monotonic()
    image = make_test_image(str(tmp_path / "oracle.png"), width=64, height=64, seed=1)
    base = load_rgb(image)
    config = RenderConfig(fps=10, k=16)
    for scanpath in _corpus(image, 1000):
        plan = plan_frames(scanpath, config)
        frameset = render_video(image, scanpath, plan, config)

        # brute-force oracle: materialize every virtual frame, then index
        full_video: list[np.ndarray] = []
        for fix in scanpath.fixations:
            rendered = draw_disc(base, fix.x, fix.y, config.dot_radius_px, config.dot_color)
            count = max(1, math.floor(fix.duration * config.fps + 0.5))
            full_video.extend([rendered] * count)
        assert plan.total_frames <= 10_000

        for j, impl_frame in enumerate(frameset.frames, start=1):
            idx = min(max(math.floor(j * len(full_video) / config.k), 1), len(full_video))
            assert encode_png(impl_frame) == encode_png(full_video[idx - 1])
    elapsed = time.monotonic() - started
    assert elapsed < 120.0


@criterion(criterion=4, title="frame-count conservation and non-decreasing 16-sample index lists")
def test_criterion_4_frame_count_conservation(tmp_path):
    image = make_test_image(str(tmp_path / "c4.png"), width=64, height=64, seed=2)
    config = RenderConfig(fps=10, k=16)
    for scanpath in _corpus(image, 1000):
        plan = plan_frames(scanpath, config)
        expected_total = sum(
            max(1, math.floor(Fraction(f.duration) * config.fps + Fraction(1, 2)))
            for f in scanpath.fixations
        )
        assert plan.total_frames == expected_total
        assert len(plan.sampled_indices) == 16
        assert list(plan.sampled_indices) == sorted(plan.sampled_indices)


# --------------------------------------------------------------------------
# criterion 5: rendering locality
# --------------------------------------------------------------------------


@criterion(criterion=5, title="dot locality on 100 random fixations (radius 5 on 512x512)")
def test_criterion_5_rendering_locality(square_image):
    base = load_rgb(square_image)
    rng = random.Random(99)
    yy, xx = np.mgrid[0:512, 0:512]
    for _ in range(100):
        x = rng.uniform(0.0, 511.0)
        y = rng.uniform(0.0, 511.0)
        fixation = Fixation(x=x, y=y, duration=0.5, seq=1)
        out = render_frame_array(base, fixation, RenderConfig(dot_radius_px=5))
        distance_sq = (xx - x) ** 2 + (yy - y) ** 2
        outside = distance_sq > 25.0
        np.testing.assert_array_equal(out[outside], base[outside])
        assert tuple(out[round(y), round(x)]) == (255, 0, 0)


# --------------------------------------------------------------------------
# criterion 6: heatmap monotonicity
# --------------------------------------------------------------------------


@criterion(criterion=6, title="heatmap opacity monotone in duration, max-duration dot fully opaque")
def test_criterion_6_heatmap_monotonicity(small_image):
    rng = random.Random(7)
    for case in range(50):
        n = rng.randint(1, 10)
        if case % 5 == 0:
            durations = [rng.choice([0.25, 0.5])] * n  # force ties
        else:
            durations = [rng.uniform(0.05, 3.0) for _ in range(n)]
        fixations = tuple(
            Fixation(x=rng.uniform(0, 63), y=rng.uniform(0, 63), duration=d, seq=i + 1)
            for i, d in enumerate(durations)
        )
        scanpath = ScanPath(image_id=small_image.image_id, reader_id="r", fixations=fixations)
        result = render_heatmap(small_image, scanpath, RenderConfig())

        dots = sorted(result.dots, key=lambda d: d.duration)
        for earlier, later in zip(dots, dots[1:]):
            assert later.opacity >= earlier.opacity
            if later.duration == earlier.duration:
                assert later.opacity == earlier.opacity
        longest = max(result.dots, key=lambda d: d.duration)
        assert longest.opacity == 1.0


# --------------------------------------------------------------------------
# criterion 7: fixation-text contract
# --------------------------------------------------------------------------


@criterion(criterion=7, title="fixation text: 3-decimal round trip and stable duration ordering")
class TestCriterion7FixationText:
    def test_normalization_round_trip(self):
        rng = random.Random(3)
        for _ in range(500):
            size = rng.randint(1, 4096)
            x = rng.uniform(0, size - 1)
            relative = to_relative(x, size)
            back = to_relative(to_pixels(relative, size), size)
            assert f"{back:.3f}" == f"{relative:.3f}"

    def test_duration_desc_sorts_stably_with_temporal_ties(self):
        image = ImageRecord(image_id="img", path="img.png", width=100, height=100)
        fixations = (
            Fixation(x=10, y=0, duration=0.5, seq=1),
            Fixation(x=20, y=0, duration=0.9, seq=2),
            Fixation(x=30, y=0, duration=0.5, seq=3),
            Fixation(x=40, y=0, duration=0.9, seq=4),
            Fixation(x=50, y=0, duration=0.1, seq=5),
        )
        scanpath = ScanPath(image_id="img", reader_id="r", fixations=fixations)
        lines = render_fixation_text(scanpath, image, ordering="duration_desc").splitlines()
        xs = [float(line.split("x=")[1].split(",")[0]) for line in lines]
        # 0.9s fixations first in temporal order, then 0.5s in temporal order
        assert xs == [0.2, 0.4, 0.1, 0.3, 0.5]
        assert [line.split(":")[0] for line in lines] == [f"fixation {n}" for n in range(1, 6)]


# --------------------------------------------------------------------------
# criteria 8 and 9: end-to-end dry run and temperature fallback
# --------------------------------------------------------------------------


@criterion(criterion=8, title="end-to-end dry run: 20 video bundles against the mock endpoint, then resume")
def test_criterion_8_end_to_end_dry_run(tmp_path):
    started = time.monotonic()
    runner = CliRunner()
    data_dir = tmp_path / "data"
    result = runner.invoke(
        cli_main,
        ["synth", "--seed", "8", "--n-images", "4", "--n-scanpaths", "20",
         "--width", "96", "--height", "96", "--out", str(data_dir)],
    )
    assert result.exit_code == 0, result.output
    manifest_path = str(data_dir / "manifest.json")

    exemplars_path = tmp_path / "exemplars.json"
    exemplars_path.write_text(json.dumps(["Example A.", "Example B.", "Example C."]))

    app = create_mock_app()
    out = tmp_path / "run"
    with live_server(app) as base_url:
        endpoint_path = tmp_path / "endpoint.yaml"
        endpoint_path.write_text(
            yaml.safe_dump(
                {
                    "base_url": base_url,
                    "model_name": "mock-model",
                    "timeout_s": 20,
                    "max_retries": 1,
                    "max_parallel": 4,
                    "backoff_base_s": 0.0,
                }
            )
        )
        args = ["run", "--manifest", manifest_path, "--task", "diagnosis",
                "--gaze-mode", "video", "--k", "16",
                "--endpoint-config", str(endpoint_path),
                "--exemplars", str(exemplars_path), "--out", str(out)]
        first = runner.invoke(cli_main, args)
        assert first.exit_code == 0, first.output
        assert json.loads(first.output.strip().splitlines()[-1]) == {
            "failed": 0, "ok": 20, "skipped": 0,
        }

        records = RecordSink(str(out / "records.jsonl")).read_all()
        assert len(records) == 20
        assert all(r.status == "ok" for r in records)
        assert len(app.state.requests) == 20
        for body in app.state.requests:
            images = [p for p in body["messages"][0]["content"] if p["type"] == "image_url"]
            assert len(images) == 16
            assert body["max_tokens"] == 64
            assert body["temperature"] == 0

        resumed = runner.invoke(cli_main, args + ["--resume"])
        assert resumed.exit_code == 0, resumed.output
        assert json.loads(resumed.output.strip().splitlines()[-1]) == {
            "failed": 0, "ok": 0, "skipped": 20,
        }
        assert len(app.state.requests) == 20  # no new requests issued
    assert time.monotonic() - started < 30.0


@criterion(criterion=9, title="temperature fallback: rejection at 0 retried once at 0.1 with full trace")
def test_criterion_9_temperature_fallback(tmp_path, small_image):
    scanpaths = generate_synthetic_scanpaths(
        seed=12, n_paths=6, fixation_count_range=(1, 4),
        duration_range_s=(0.1, 0.6), image=small_image,
    )
    bundles = [
        build_prompt(
            TaskKind.diagnosis, GazeMode.video, sp, small_image,
            ["Example A.", "Example B.", "Example C."], render_config=RenderConfig(k=4),
        )
        for sp in scanpaths
    ]
    app = create_mock_app(reject_temperature=0.0)
    sink = RecordSink(str(tmp_path / "records.jsonl"))
    with live_server(app) as base_url:
        endpoint = EndpointConfig(
            base_url=base_url, model_name="mock-model", timeout_s=10,
            max_retries=2, max_parallel=3, backoff_base_s=0.0,
        )
        summary = run_batch(bundles, endpoint, sink)
    assert summary.to_dict() == {"ok": 6, "failed": 0, "skipped": 0}
    for record in sink.read_all():
        assert record.status == "ok"
        assert [a.temperature for a in record.attempts] == [0.0, 0.1]
        assert [a.outcome for a in record.attempts] == ["rejected_temperature", "ok"]


# --------------------------------------------------------------------------
# criterion 10: dataset statistics
# --------------------------------------------------------------------------


@criterion(criterion=10, title="dataset stats: 3134/3699 -> 1.18 and 549/3197 -> 5.82 (tolerance 0.005)")
class TestCriterion10DatasetStats:
    def test_first_split_shape(self):
        manifest = synthesize_manifest(
            seed=0, n_images=3134, n_scanpaths=3699, fixation_count_range=(1, 2)
        )
        stats = summarize_manifest(manifest)
        assert stats.images == 3134
        assert stats.scanpaths == 3699
        assert abs(stats.readers_per_image - 1.18) <= 0.005

    def test_second_split_shape(self):
        manifest = synthesize_manifest(
            seed=0, n_images=549, n_scanpaths=3197, fixation_count_range=(1, 2), split="beta"
        )
        stats = summarize_manifest(manifest)
        assert abs(stats.readers_per_image - 5.82) <= 0.005

    def test_stats_via_manifest_file(self, tmp_path):
        runner = CliRunner()
        data = tmp_path / "d"
        assert (
            runner.invoke(
                cli_main,
                ["synth", "--seed", "5", "--n-images", "10", "--n-scanpaths", "25",
                 "--no-images", "--out", str(data)],
            ).exit_code
            == 0
        )
        manifest = load_manifest(str(data / "manifest.json"))
        assert summarize_manifest(manifest).readers_per_image == 2.5
