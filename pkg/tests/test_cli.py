"""CLI contract: one-line JSON on stdout, error envelopes on stderr, exit
codes, and field-for-field parity with the HTTP API."""

from __future__ import annotations

import json
import struct

import pytest
from fastapi.testclient import TestClient

from riskgrid.geogrid import BBox, cover_count
from riskgrid.riskmodel import load
from riskgrid.service import create_app
from riskgrid.service.cli import main


def run_cli(capsys, *argv) -> tuple[int, str, str]:
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def run_json(capsys, *argv) -> dict:
    rc, out, err = run_cli(capsys, *argv)
    assert rc == 0, err
    lines = out.strip().splitlines()
    assert len(lines) == 1, "expected exactly one line of JSON on stdout"
    return json.loads(lines[0])


class TestSynth:
    def test_writes_dataset_and_summary(self, pipeline, tmp_path, capsys):
        out = tmp_path / "d1"
        doc = run_json(capsys, "synth", "--config", str(pipeline.config_path), "--out", str(out))
        assert doc["cells"] == 120
        assert doc["positive_cells"] > 0
        assert doc["incidents"] > 0
        assert 0.5 < doc["bayes_accuracy"] < 1.0
        for path in doc["files"].values():
            assert (out / "").exists()
            assert open(path, "rb").read()

    def test_same_seed_same_bytes(self, pipeline, tmp_path, capsys):
        a = run_json(capsys, "synth", "--config", str(pipeline.config_path), "--out", str(tmp_path / "a"))
        b = run_json(capsys, "synth", "--config", str(pipeline.config_path), "--out", str(tmp_path / "b"))
        assert set(a["files"]) == set(b["files"])
        for name in a["files"]:
            assert open(a["files"][name], "rb").read() == open(b["files"][name], "rb").read()

    def test_seed_flag_changes_the_data(self, pipeline, tmp_path, capsys):
        a = run_json(capsys, "synth", "--config", str(pipeline.config_path), "--out", str(tmp_path / "a"))
        c = run_json(capsys, "synth", "--config", str(pipeline.config_path), "--out", str(tmp_path / "c"),
                     "--seed", "99")
        assert open(a["files"]["incidents"], "rb").read() != open(c["files"]["incidents"], "rb").read()

    def test_set_override(self, pipeline, tmp_path, capsys):
        doc = run_json(capsys, "synth", "--config", str(pipeline.config_path), "--out", str(tmp_path / "d"),
                       "--set", "synth.poi_counts.liquor_licenses=50")
        lines = open(doc["files"]["poi_liquor_licenses"]).read().splitlines()
        assert len(lines) == 51  # header + 50 points


class TestTrain:
    def test_cli_reproduces_library_model_bit_for_bit(self, pipeline, tmp_path, capsys):
        out = tmp_path / "m.wccews"
        doc = run_json(capsys, "train", "--config", str(pipeline.config_path),
                       "--data", str(pipeline.data), "--out", str(out))
        assert doc["fingerprint"] == pipeline.model.fingerprint
        assert doc["cells"] == 120
        assert set(doc["eval"]) == {"m_crime", "m_fine", "m_type"}
        assert out.read_bytes() == pipeline.model_path.read_bytes()

    @pytest.mark.filterwarnings("ignore:underdetermined regression")
    def test_set_override_changes_training(self, pipeline, tmp_path, capsys):
        out = tmp_path / "m2.wccews"
        run_json(capsys, "train", "--config", str(pipeline.config_path),
                 "--data", str(pipeline.data), "--out", str(out),
                 "--set", "train.cv_folds=2")
        model = load(out)
        assert model.metadata.eval_report.k == 2
        assert out.read_bytes() != pipeline.model_path.read_bytes()

    def test_missing_data_dir_is_error_envelope(self, pipeline, tmp_path, capsys):
        rc, out, err = run_cli(capsys, "train", "--config", str(pipeline.config_path),
                               "--data", str(tmp_path / "nope"), "--out", str(tmp_path / "m"))
        assert rc == 1
        assert out == ""
        doc = json.loads(err.strip())
        assert doc["error"]["code"] == "load_error"


class TestEvaluate:
    def test_prints_report_table(self, pipeline, capsys):
        rc, out, err = run_cli(capsys, "evaluate", "--model", str(pipeline.model_path))
        assert rc == 0
        for token in ("m_crime", "m_fine", "m_type", "accuracy", "r_squared", "subset_accuracy"):
            assert token in out

    def test_truncated_model_file(self, pipeline, tmp_path, capsys):
        blob = pipeline.model_path.read_bytes()
        clipped = tmp_path / "clipped.wccews"
        clipped.write_bytes(blob[: len(blob) // 2])
        rc, out, err = run_cli(capsys, "evaluate", "--model", str(clipped))
        assert rc == 1
        assert json.loads(err.strip())["error"]["code"] == "integrity_error"

    def test_future_format_version(self, pipeline, tmp_path, capsys):
        blob = bytearray(pipeline.model_path.read_bytes())
        struct.pack_into("<I", blob, 6, 99)  # version field sits after the magic
        bumped = tmp_path / "bumped.wccews"
        bumped.write_bytes(bytes(blob))
        rc, out, err = run_cli(capsys, "evaluate", "--model", str(bumped))
        assert rc == 1
        assert json.loads(err.strip())["error"]["code"] == "unsupported_version"


class TestPredict:
    def test_parity_with_http_api(self, pipeline, capsys):
        app = create_app(
            pipeline.model,
            pipeline.poi_sets,
            region=pipeline.cfg.bbox,
            feature_params=pipeline.cfg.features,
        )
        client = TestClient(app)
        for g in (pipeline.grid.cells[0], pipeline.grid.cells[55], pipeline.grid.cells[-1]):
            doc = run_json(capsys, "predict", "--config", str(pipeline.config_path),
                           "--model", str(pipeline.model_path),
                           "--data", str(pipeline.data), "--geohash", g.code)
            assert doc == client.get(f"/api/v1/cell/{g.code}").json()

    def test_works_for_any_valid_cell(self, pipeline, capsys):
        # Far outside the data region: distances cap out and densities go to
        # zero, but the prediction is still well-formed.
        doc = run_json(capsys, "predict", "--config", str(pipeline.config_path),
                       "--model", str(pipeline.model_path),
                       "--data", str(pipeline.data), "--geohash", "u10j02")
        assert 0.0 <= doc["p_crime"] <= 1.0
        assert doc["expected_fine_usd"] > 0.0
        assert sum(b["mass"] for b in doc["severity_histogram"]) == pytest.approx(1.0, abs=1e-9)

    def test_bad_geohash_envelope(self, pipeline, capsys):
        rc, out, err = run_cli(capsys, "predict", "--config", str(pipeline.config_path),
                               "--model", str(pipeline.model_path),
                               "--data", str(pipeline.data), "--geohash", "ilove")
        assert rc == 1
        assert out == ""
        assert json.loads(err.strip())["error"]["code"] == "invalid_geohash"


class TestSurfaceCommand:
    def test_writes_geojson_file(self, pipeline, tmp_path, capsys):
        out = tmp_path / "surface.geojson"
        doc = run_json(capsys, "surface", "--config", str(pipeline.config_path),
                       "--model", str(pipeline.model_path), "--data", str(pipeline.data),
                       "--bbox=-74.0,40.71,-73.95,40.74", "--out", str(out))
        want = cover_count(BBox(min_lat=40.71, max_lat=40.74, min_lon=-74.0, max_lon=-73.95), 6)
        assert doc["cells"] == want
        assert doc["precision"] == 6
        geo = json.loads(out.read_text())
        assert geo["type"] == "FeatureCollection"
        assert len(geo["features"]) == want

    def test_stdout_mode_emits_the_document(self, pipeline, capsys):
        doc = run_json(capsys, "surface", "--config", str(pipeline.config_path),
                       "--model", str(pipeline.model_path), "--data", str(pipeline.data),
                       "--bbox=-73.96,40.705,-73.95,40.715")
        assert doc["type"] == "FeatureCollection"

    def test_precision_flag(self, pipeline, tmp_path, capsys):
        doc = run_json(capsys, "surface", "--config", str(pipeline.config_path),
                       "--model", str(pipeline.model_path), "--data", str(pipeline.data),
                       "--bbox=-74.0,40.71,-73.95,40.74", "--precision", "5",
                       "--out", str(tmp_path / "s.geojson"))
        assert doc["precision"] == 5
        assert doc["cells"] == cover_count(BBox(min_lat=40.71, max_lat=40.74, min_lon=-74.0, max_lon=-73.95), 5)

    def test_malformed_bbox_envelope(self, pipeline, capsys):
        rc, out, err = run_cli(capsys, "surface", "--config", str(pipeline.config_path),
                               "--model", str(pipeline.model_path), "--data", str(pipeline.data),
                               "--bbox=1,2,3")
        assert rc == 1
        assert json.loads(err.strip())["error"]["code"] == "schema_error"

    def test_cell_budget_envelope(self, pipeline, capsys):
        rc, out, err = run_cli(capsys, "surface", "--config", str(pipeline.config_path),
                               "--model", str(pipeline.model_path), "--data", str(pipeline.data),
                               "--bbox=-75.0,40.0,-73.0,41.5", "--precision", "8")
        assert rc == 1
        assert json.loads(err.strip())["error"]["code"] == "cell_budget_exceeded"


class TestExitCodes:
    def test_unknown_flag_is_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["train", "--bogus"])
        assert exc.value.code == 2

    def test_missing_subcommand_is_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_unknown_subcommand_is_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2
