import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from ipursuit import __version__, cli, io
from ipursuit.cli import _UsageError, parse_dim_rule, parse_enhance, parse_int_list
from ipursuit.datagen import (
    make_ensemble_fully_random,
    make_orthogonal_ensemble,
    sample_points,
)
from ipursuit.errors import EmptyFile, ParseError, ZeroRow
from ipursuit.experiments import default_workers
from ipursuit.linalg import seeded_rng
from ipursuit.theory import TheoryReport


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def write_dataset_csv(path, D, with_labels=True):
    """Points as rows; optional trailing integer label column."""
    M = D.ambient_dim
    lines = []
    if with_labels:
        lines.append(",".join([f"x{i}" for i in range(M)] + ["label"]))
    for j in range(D.n_points):
        cells = [repr(float(v)) for v in D.points[:, j]]
        if with_labels:
            cells.append(str(int(D.labels[j])))
        lines.append(",".join(cells))
    return write(path, "\n".join(lines) + "\n")


class TestLoadCsv:
    def test_normalizes_rows_to_unit_columns(self, tmp_path):
        D = io.load_csv(write(tmp_path / "d.csv", "1,0\n0,2\n"))
        np.testing.assert_allclose(D.points, np.eye(2), atol=1e-15)
        assert D.labels is None

    def test_header_with_label_column(self, tmp_path):
        D = io.load_csv(write(tmp_path / "d.csv", "x0,x1,label\n1,0,0\n0,1,1\n"))
        np.testing.assert_array_equal(D.labels, [0, 1])
        np.testing.assert_allclose(D.points, np.eye(2), atol=1e-15)

    def test_malformed_first_row(self, tmp_path):
        with pytest.raises(ParseError) as err:
            io.load_csv(write(tmp_path / "d.csv", "1,abc\n"))
        assert "1" in str(err.value)

    def test_malformed_later_row(self, tmp_path):
        with pytest.raises(ParseError):
            io.load_csv(write(tmp_path / "d.csv", "x0,x1\n1,0\n1,abc\n"))

    def test_empty_file(self, tmp_path):
        with pytest.raises(EmptyFile):
            io.load_csv(write(tmp_path / "d.csv", ""))

    def test_header_only(self, tmp_path):
        with pytest.raises(EmptyFile):
            io.load_csv(write(tmp_path / "d.csv", "x0,x1\n"))

    def test_zero_row(self, tmp_path):
        with pytest.raises(ZeroRow):
            io.load_csv(write(tmp_path / "d.csv", "1,0\n0,0\n"))

    def test_ragged_rows(self, tmp_path):
        with pytest.raises(ParseError):
            io.load_csv(write(tmp_path / "d.csv", "1,0\n1\n"))

    def test_non_integer_label(self, tmp_path):
        with pytest.raises(ParseError):
            io.load_csv(write(tmp_path / "d.csv", "x0,label\n1,0.5\n"))

    def test_blank_lines_skipped(self, tmp_path):
        D = io.load_csv(write(tmp_path / "d.csv", "1,0\n\n0,1\n"))
        assert D.n_points == 2

    def test_normalization_values(self, tmp_path):
        D = io.load_csv(write(tmp_path / "d.csv", "3,4\n"))
        np.testing.assert_allclose(D.points[:, 0], [0.6, 0.8], atol=1e-15)

    def test_round_trip_through_writer(self, tmp_path):
        ens = make_orthogonal_ensemble(6, 2, 2, seeded_rng(0))
        D = sample_points(ens, 4, seeded_rng(1))
        path = write_dataset_csv(tmp_path / "d.csv", D)
        back = io.load_csv(path)
        np.testing.assert_allclose(back.points, D.points, atol=1e-15)
        np.testing.assert_array_equal(back.labels, D.labels)


class TestWriters:
    def test_labels_csv_bytes(self, tmp_path):
        path = tmp_path / "labels.csv"
        io.save_labels_csv(path, np.array([0, 1, 2]))
        assert path.read_bytes() == b"0\n1\n2\n"

    def test_table_csv_formatting(self, tmp_path):
        path = tmp_path / "t.csv"
        io.save_table_csv(path, ["a", "b", "c"], [{"a": 1, "b": 0.5, "c": True}])
        assert path.read_bytes() == b"a,b,c\n1,0.5,true\n"

    def test_json_stable_bytes(self, tmp_path):
        record = {"b": np.float64(0.25), "a": np.int64(3), "c": [np.bool_(True)]}
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        io.save_json(p1, record)
        io.save_json(p2, dict(reversed(record.items())))
        assert p1.read_bytes() == p2.read_bytes()
        assert io.load_json(p1) == {"a": 3, "b": 0.25, "c": [True]}

    def test_ensemble_round_trip(self, tmp_path):
        for s in (0, 2):
            ens = make_ensemble_fully_random(12, 3, 4, s, seeded_rng(2 + s))
            path = tmp_path / f"ens{s}.json"
            io.save_ensemble_json(path, ens)
            back = io.load_ensemble_json(path)
            np.testing.assert_allclose(back.intersection, ens.intersection, atol=1e-15)
            assert len(back.innovations) == len(ens.innovations)
            for a, b in zip(back.innovations, ens.innovations):
                np.testing.assert_allclose(a, b, atol=1e-15)


class TestFlagParsers:
    def test_int_list_forms(self):
        assert parse_int_list("1:5") == [1, 2, 3, 4, 5]
        assert parse_int_list("1:9:2") == [1, 3, 5, 7, 9]
        assert parse_int_list("3,5,7") == [3, 5, 7]
        assert parse_int_list("5") == [5]

    def test_int_list_rejects(self):
        for bad in ("5:1", "a:b", "1:10:0", "1:2:3:4", "x,y"):
            with pytest.raises(_UsageError):
                parse_int_list(bad)

    def test_dim_rule(self):
        assert parse_dim_rule("s+2")(10) == 12
        assert parse_dim_rule("s-5")(10) == 5
        assert parse_dim_rule("42")(10) == 42
        with pytest.raises(_UsageError):
            parse_dim_rule("xy")

    def test_enhance(self):
        assert parse_enhance("auto") == "auto"
        assert parse_enhance("3") == 3
        with pytest.raises(_UsageError):
            parse_enhance("-1")
        with pytest.raises(_UsageError):
            parse_enhance("x")

    def test_default_workers_env(self, monkeypatch):
        monkeypatch.setenv("IPURSUIT_WORKERS", "4")
        assert default_workers() == 4
        monkeypatch.setenv("IPURSUIT_WORKERS", "junk")
        assert default_workers() == 1
        monkeypatch.delenv("IPURSUIT_WORKERS")
        assert default_workers() == 1


@pytest.fixture
def ortho_csv(tmp_path):
    ens = make_orthogonal_ensemble(12, 2, 3, seeded_rng(3))
    D = sample_points(ens, 8, seeded_rng(4))
    return write_dataset_csv(tmp_path / "data.csv", D), D


class TestClusterCommand:
    def test_end_to_end(self, tmp_path, ortho_csv, capsys):
        path, D = ortho_csv
        out = tmp_path / "result.json"
        labels_out = tmp_path / "labels.csv"
        code = cli.main(
            ["cluster", "--input", path, "--k", "2",
             "--out", str(out), "--labels-out", str(labels_out)]
        )
        assert code == 0
        assert "accuracy 1.000000" in capsys.readouterr().out
        record = io.load_json(out)
        assert record["command"] == "cluster"
        assert record["accuracy"] == 1.0
        assert record["n_points"] == D.n_points
        assert record["ambient_dim"] == 12
        assert record["config"]["k"] == 2
        assert len(record["labels"]) == D.n_points
        assert len(labels_out.read_text().splitlines()) == D.n_points

    def test_invalid_k_is_usage_error(self, tmp_path, ortho_csv):
        path, _ = ortho_csv
        out = tmp_path / "never.json"
        assert cli.main(["cluster", "--input", path, "--k", "0",
                         "--out", str(out)]) == 2
        assert not out.exists()

    def test_missing_input_is_runtime_error(self, tmp_path):
        assert cli.main(["cluster", "--input", str(tmp_path / "no.csv"),
                         "--k", "2"]) == 1

    def test_enhance_rejected_for_baselines(self, ortho_csv):
        path, _ = ortho_csv
        assert cli.main(["cluster", "--input", path, "--k", "2",
                         "--method", "tsc", "--enhance", "1"]) == 2

    def test_deterministic_outputs(self, tmp_path, ortho_csv):
        path, _ = ortho_csv
        records = []
        label_bytes = []
        for tag in ("a", "b"):
            out = tmp_path / f"{tag}.json"
            lab = tmp_path / f"{tag}.csv"
            assert cli.main(["cluster", "--input", path, "--k", "2",
                             "--seed", "7", "--out", str(out),
                             "--labels-out", str(lab)]) == 0
            rec = io.load_json(out)
            rec.pop("timing_seconds")
            records.append(rec)
            label_bytes.append(lab.read_bytes())
        assert records[0] == records[1]
        assert label_bytes[0] == label_bytes[1]

    def test_baseline_methods_run(self, tmp_path, ortho_csv):
        path, _ = ortho_csv
        for method in ("tsc", "kmeans"):
            out = tmp_path / f"{method}.json"
            assert cli.main(["cluster", "--input", path, "--k", "2",
                             "--method", method, "--out", str(out)]) == 0
            assert io.load_json(out)["config"]["method"] == method


class TestSynthSweepCommand:
    def test_small_sweep(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = cli.main(
            ["synth-sweep", "--M", "20", "--K", "2", "--m-rule", "s+2",
             "--s-list", "2,4", "--shat-rule", "s-1", "--n-per-cluster", "8",
             "--trials", "2", "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "param,value,method,mean_accuracy,std_accuracy,trials,n_per_cluster"
        assert len(lines) == 1 + 4  # 2 s-values x (plain, enhanced)
        meta = io.load_json(str(out) + ".meta.json")
        assert meta["command"] == "synth-sweep"
        assert meta["seed"] == 0
        assert len(meta["config"]["cells"]) == 2

    def test_reproducible_bytes(self, tmp_path):
        blobs = []
        for tag in ("a", "b"):
            out = tmp_path / f"{tag}.csv"
            assert cli.main(
                ["synth-sweep", "--M", "20", "--K", "2", "--m-rule", "s+2",
                 "--s-list", "2", "--shat-rule", "0", "--n-per-cluster", "6",
                 "--trials", "1", "--seed", "3", "--out", str(out)]
            ) == 0
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1]

    def test_missing_grid_flags(self, tmp_path):
        assert cli.main(["synth-sweep", "--out", str(tmp_path / "x.csv")]) == 2

    def test_infeasible_cell(self, tmp_path):
        # K(m-s)+s > M must be rejected before any computation
        out = tmp_path / "x.csv"
        assert cli.main(
            ["synth-sweep", "--M", "5", "--K", "4", "--m-rule", "s+2",
             "--s-list", "2", "--out", str(out)]
        ) == 2
        assert not out.exists()

    def test_bad_range(self, tmp_path):
        assert cli.main(
            ["synth-sweep", "--M", "20", "--K", "2", "--m-rule", "s+2",
             "--s-list", "5:1", "--out", str(tmp_path / "x.csv")]
        ) == 2


class TestRatioExperimentCommand:
    def test_single_row(self, tmp_path):
        out = tmp_path / "ratio.csv"
        code = cli.main(
            ["ratio-experiment", "--M", "60", "--K", "3", "--s-list", "4",
             "--trials", "2", "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "s,m,limit,mean_ratio,min_ratio,max_ratio,trials"
        assert len(lines) == 2

    def test_seed_reproducibility(self, tmp_path):
        blobs = []
        for tag in ("a", "b"):
            out = tmp_path / f"{tag}.csv"
            assert cli.main(
                ["ratio-experiment", "--M", "60", "--K", "3", "--s-list", "4,8",
                 "--trials", "3", "--seed", "11", "--out", str(out)]
            ) == 0
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1]

    def test_invalid_dims_usage_error(self, tmp_path):
        assert cli.main(
            ["ratio-experiment", "--M", "5", "--K", "10", "--s-list", "2",
             "--trials", "2", "--out", str(tmp_path / "x.csv")]
        ) == 2


class TestTheoryCheckCommand:
    def test_synthetic_report(self, tmp_path):
        out = tmp_path / "report.json"
        code = cli.main(
            ["theory-check", "--M", "20", "--K", "3", "--m", "4", "--s", "2",
             "--n", "10", "--kappa", "0.6", "--out", str(out)]
        )
        assert code == 0
        record = io.load_json(out)
        assert record["command"] == "theory-check"
        report = TheoryReport.from_dict(record["report"])
        assert 0.0 <= report.accuracy <= 1.0
        assert report.intersection_dim == 2
        assert report.alignment_bound is not None

    def test_missing_dims(self, tmp_path):
        assert cli.main(["theory-check", "--M", "20",
                         "--out", str(tmp_path / "x.json")]) == 2

    def test_data_mode(self, tmp_path):
        ens = make_orthogonal_ensemble(12, 3, 2, seeded_rng(5))
        D = sample_points(ens, 10, seeded_rng(6))
        data_path = write_dataset_csv(tmp_path / "d.csv", D)
        ens_path = tmp_path / "ens.json"
        io.save_ensemble_json(ens_path, ens)
        out = tmp_path / "report.json"
        code = cli.main(
            ["theory-check", "--input", data_path, "--ensemble", str(ens_path),
             "--out", str(out)]
        )
        assert code == 0
        record = io.load_json(out)
        report = TheoryReport.from_dict(record["report"])
        assert report.n_points == D.n_points
        assert report.accuracy == 1.0
        assert report.guarantee_ok in (True, False)

    def test_input_without_ensemble(self, tmp_path, ortho_csv):
        path, _ = ortho_csv
        assert cli.main(["theory-check", "--input", path,
                         "--out", str(tmp_path / "x.json")]) == 2


class TestSingularValuesCommand:
    def test_rank_two_data(self, tmp_path):
        rng = seeded_rng(7)
        coeff = rng.standard_normal((2, 6))
        pts = np.eye(5)[:, :2] @ coeff
        pts /= np.linalg.norm(pts, axis=0)
        path = write(
            tmp_path / "d.csv",
            "\n".join(
                ",".join(repr(float(v)) for v in pts[:, j]) for j in range(6)
            ) + "\n",
        )
        out = tmp_path / "sv.csv"
        assert cli.main(["singular-values", "--input", path,
                         "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "index,singular_value"
        values = [float(line.split(",")[1]) for line in lines[1:]]
        above = [v for v in values if v > 1e-10 * values[0]]
        assert len(above) == 2
        meta = io.load_json(str(out) + ".meta.json")
        assert meta["numerical_rank"] == 2

    def test_shared_component_recommendation(self, tmp_path):
        # all points huddle around e1 with small per-axis offsets, so the
        # spectrum has one dominant value and the recommended drop is 1
        cols = []
        for j, sign in ((1, 1), (1, -1), (2, 1), (2, -1), (3, 1), (3, -1)):
            v = np.eye(4)[:, 0] + 0.2 * sign * np.eye(4)[:, j]
            cols.append(v / np.linalg.norm(v))
        pts = np.array(cols)
        path = write(
            tmp_path / "d.csv",
            "\n".join(",".join(repr(float(v)) for v in row) for row in pts) + "\n",
        )
        out = tmp_path / "sv.csv"
        assert cli.main(["singular-values", "--input", path,
                         "--out", str(out)]) == 0
        meta = io.load_json(str(out) + ".meta.json")
        assert meta["recommended_drop"] == 1

    def test_deterministic(self, tmp_path, ortho_csv):
        path, _ = ortho_csv
        blobs = []
        for tag in ("a", "b"):
            out = tmp_path / f"{tag}.csv"
            assert cli.main(["singular-values", "--input", path,
                             "--out", str(out)]) == 0
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1]

    def test_zero_row_is_runtime_error(self, tmp_path):
        path = write(tmp_path / "d.csv", "1,0\n0,0\n")
        assert cli.main(["singular-values", "--input", path,
                         "--out", str(tmp_path / "x.csv")]) == 1


class TestConsoleScript:
    def test_version_subprocess(self):
        exe = shutil.which("ipursuit")
        if exe is None:
            pytest.skip("console script not on PATH")
        proc = subprocess.run([exe, "--version"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert __version__ in proc.stdout
