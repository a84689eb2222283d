import json

import cv2
import numpy as np
import pytest

from gesturekit import ReplayKey, load_replay
from gesturekit_adapter import (
    ExtractionJob,
    SyntheticExtractor,
    derotate_landmarks,
    parse_setting_arg,
    run_extraction,
)
from gesturekit_adapter.cli import main


def write_image(path, value, size=(24, 32), dot=None):
    h, w = size
    img = np.full((h, w, 3), value, dtype=np.uint8)
    if dot is not None:
        x, y = dot
        img[y, x] = (255, 255, 255)
    cv2.imwrite(str(path), img)


def make_image_dir(directory, values):
    directory.mkdir(exist_ok=True)
    for i, value in enumerate(values):
        write_image(directory / f"img{i}.png", value)
    return directory


class TestAdapterRoundTrip:
    def test_five_images_schema_valid_with_misses(self, tmp_path):
        # Four bright images detect; the two dark ones stay below the
        # synthetic threshold even after the +60 brightness stage.
        data = make_image_dir(tmp_path / "imgs", [150, 20, 160, 30, 170, 155])
        out = tmp_path / "replay.jsonl"
        job = ExtractionJob(input_path=data, setting=parse_setting_arg("2"), output_path=out)
        report = run_extraction(job, SyntheticExtractor(min_mean_value=100))

        assert report.ok
        assert report.samples == 6
        assert report.lines == 6 * 3  # one line per image x stage

        raw_lines = out.read_text().strip().splitlines()
        assert len(raw_lines) == 18
        store = load_replay(out)  # zero format errors
        assert len(store) == 18

        empties = [json.loads(line) for line in raw_lines if not json.loads(line)["hands"]]
        assert {doc["sample_id"] for doc in empties} == {"img1", "img3"}
        assert len(empties) == 2 * 3  # explicit miss per stage

        for line in raw_lines:
            doc = json.loads(line)
            for hand in doc["hands"]:
                assert len(hand["landmarks"]) == 21

    def test_line_ordering_by_sample_then_stage(self, tmp_path):
        data = make_image_dir(tmp_path / "imgs", [150, 150, 150])
        out = tmp_path / "replay.jsonl"
        run_extraction(
            ExtractionJob(data, parse_setting_arg("2"), out), SyntheticExtractor()
        )
        docs = [json.loads(line) for line in out.read_text().strip().splitlines()]
        keys = [(d["sample_id"], d["db"], d["dr"]) for d in docs]
        want_stages = [(0, 0), (30, 0), (60, 0)]
        want = [(f"img{i}", b, r) for i in range(3) for b, r in want_stages]
        assert keys == want

    def test_brightness_stage_recovers_dark_image(self, tmp_path):
        # Mean 80 misses raw; +30 pushes it over the synthetic threshold.
        data = make_image_dir(tmp_path / "imgs", [80])
        out = tmp_path / "replay.jsonl"
        run_extraction(
            ExtractionJob(data, parse_setting_arg("2"), out),
            SyntheticExtractor(min_mean_value=100),
        )
        store = load_replay(out)
        assert store.get(ReplayKey("img0", 0, 0)).is_empty
        assert not store.get(ReplayKey("img0", 30, 0)).is_empty


class TestDerotation:
    def test_right_angle_maps_back_exactly(self, tmp_path):
        # A bright dot at (10, 4) in a 32x20 image; the synthetic extractor
        # anchors its landmark grid on the brightest pixel of the staged
        # image, so after de-rotation the grid center must come back to the
        # dot's original normalized position.
        path = tmp_path / "dot.png"
        write_image(path, 120, size=(20, 32), dot=(10, 4))
        out = tmp_path / "replay.jsonl"
        setting = parse_setting_arg(str(_stage_file(tmp_path, [[0, 90]])))
        run_extraction(ExtractionJob(path, setting, out), SyntheticExtractor(span=0.0))
        store = load_replay(out)
        frame = store.get(ReplayKey("dot", 0, 90))
        assert not frame.is_empty
        center = frame.hands[0].coords.mean(axis=0)
        assert center[0] == pytest.approx(10 / 31, abs=1e-9)
        assert center[1] == pytest.approx(4 / 19, abs=1e-9)

    def test_oblique_angle_maps_back_close(self, tmp_path):
        path = tmp_path / "dot.png"
        write_image(path, 120, size=(40, 60), dot=(45, 12))
        out = tmp_path / "replay.jsonl"
        setting = parse_setting_arg(str(_stage_file(tmp_path, [[0, 30]])))
        # Rotation expands the canvas with black fill, dropping the mean
        # brightness; keep the synthetic threshold below that.
        run_extraction(ExtractionJob(path, setting, out), SyntheticExtractor(min_mean_value=30, span=0.0))
        frame = load_replay(out).get(ReplayKey("dot", 0, 30))
        assert not frame.is_empty
        center = frame.hands[0].coords.mean(axis=0)
        # bilinear smearing + argmax discretization: within ~2 pixels
        assert abs(center[0] - 45 / 59) < 2 / 59
        assert abs(center[1] - 12 / 39) < 2 / 39

    def test_identity_stage_untouched(self):
        landmarks = np.random.default_rng(3).uniform(0, 1, size=(21, 3))
        out = derotate_landmarks(landmarks, 0, (32, 20), (32, 20))
        np.testing.assert_array_equal(out, landmarks)

    def test_z_passes_through(self):
        landmarks = np.zeros((21, 3))
        landmarks[:, 2] = np.linspace(-1, 1, 21)
        out = derotate_landmarks(landmarks, 90, (32, 20), (20, 32))
        np.testing.assert_array_equal(out[:, 2], landmarks[:, 2])


class TestErrors:
    def test_unreadable_file_listed_and_rest_extracted(self, tmp_path):
        data = make_image_dir(tmp_path / "imgs", [150, 150])
        (data / "broken.png").write_text("this is not a png")
        out = tmp_path / "replay.jsonl"
        report = run_extraction(
            ExtractionJob(data, parse_setting_arg("1"), out), SyntheticExtractor()
        )
        assert not report.ok
        assert any("broken.png" in e for e in report.errors)
        assert report.samples == 2
        assert len(load_replay(out)) == 2

    def test_missing_input(self, tmp_path):
        job = ExtractionJob(tmp_path / "nope", parse_setting_arg("1"), tmp_path / "o.jsonl")
        with pytest.raises(FileNotFoundError):
            run_extraction(job, SyntheticExtractor())


class TestVideo:
    def test_video_frames_become_samples(self, tmp_path):
        video = tmp_path / "clip.avi"
        writer = cv2.VideoWriter(
            str(video), cv2.VideoWriter_fourcc(*"MJPG"), 10.0, (32, 24)
        )
        if not writer.isOpened():
            pytest.skip("no video codec available")
        for value in (150, 150, 40, 150):
            writer.write(np.full((24, 32, 3), value, dtype=np.uint8))
        writer.release()

        out = tmp_path / "replay.jsonl"
        report = run_extraction(
            ExtractionJob(video, parse_setting_arg("1"), out),
            SyntheticExtractor(min_mean_value=100),
        )
        assert report.ok and report.samples == 4
        store = load_replay(out)
        assert store.sample_ids() == ["000000", "000001", "000002", "000003"]
        assert store.get(ReplayKey("000002", 0, 0)).is_empty


class TestCli:
    def test_end_to_end_synthetic(self, tmp_path, capsys):
        data = make_image_dir(tmp_path / "imgs", [150, 40, 160, 170, 30])
        out = tmp_path / "replay.jsonl"
        code = main([
            "--input", str(data), "--setting", "4", "--num-hands", "1",
            "--out", str(out), "--backend", "synthetic",
        ])
        assert code == 0
        assert len(load_replay(out)) == 5 * 7

    def test_unreadable_input_exits_2(self, tmp_path):
        data = tmp_path / "imgs"
        data.mkdir()
        (data / "bad.png").write_text("nope")
        code = main([
            "--input", str(data), "--out", str(tmp_path / "o.jsonl"), "--backend", "synthetic",
        ])
        assert code == 2

    def test_usage_error_exits_1(self):
        with pytest.raises(SystemExit) as err:
            main(["--input"])
        assert err.value.code == 1


def _stage_file(directory, stages):
    path = directory / "stages.json"
    path.write_text(json.dumps(stages))
    return path
