import csv
import io
import json

import numpy as np
import pytest

from cli.commands.evaluate import grid_from_step
from cli.commands.train import resolve_config
from cli.errors import UsageError
from cli.main import build_parser, main
from cli.reports import EXPERIMENT_FILES, METRICS_HEADER, TABLE_HEADER, emit_csv, metric_rows
from evaluation import evaluate
from hierarchy import parse_tree
from services.evaluation import ThresholdResult
from trainer import Model, TrainConfig, load_checkpoint

TINY_GEN = {
    "tops": 2,
    "mids_per_top": 1,
    "leaves_per_mid": 2,
    "bands": 4,
    "height": 16,
    "width": 16,
    "n_images": 4,
    "folds": 2,
    "regions_per_image": 3,
    "blob_radius_range": [1.0, 3.0],
    "annotated_fraction": 0.2,
}
TRAIN_FLAGS = ["--epochs", "2", "--hidden", "4", "--pixels-per-image", "16", "--batch-size", "2"]


@pytest.fixture
def data_dir(tmp_path):
    spec = tmp_path / "gen.json"
    spec.write_text(json.dumps(TINY_GEN))
    out = tmp_path / "data"
    assert main(["gen-data", "--spec", str(spec), "--seed", "7", "--out", str(out)]) == 0
    return out


@pytest.fixture
def checkpoint(tmp_path, data_dir):
    out = tmp_path / "model.ckpt"
    assert main(["train", "--data", str(data_dir), "--loss", "tce", "--scheme", "hier", *TRAIN_FLAGS, "--out", str(out)]) == 0
    return out


def _read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


class TestGenerate:
    def test_gen_tree(self, tmp_path):
        out = tmp_path / "tree.json"
        assert main(["gen-tree", "--tops", "4", "--mids", "3", "--leaves", "2", "--out", str(out)]) == 0
        tree = parse_tree(out.read_text())
        assert tree.C == 24
        assert not tree.weights_assigned
        manifest = json.loads((tmp_path / "tree.json.manifest.json").read_text())
        assert manifest["status"] == "ok"
        assert str(out) in manifest["outputs"]

    def test_gen_tree_with_scheme(self, tmp_path):
        out = tmp_path / "tree.json"
        assert main(["gen-tree", "--tops", "2", "--mids", "1", "--leaves", "2", "--scheme", "hier", "--out", str(out)]) == 0
        assert parse_tree(out.read_text()).weights_assigned

    def test_missing_out_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["gen-tree", "--tops", "2"])
        assert exc.value.code == 2

    def test_gen_data_is_reproducible(self, tmp_path):
        spec = tmp_path / "gen.json"
        spec.write_text(json.dumps(TINY_GEN))
        for name in ("a", "b"):
            assert main(["gen-data", "--spec", str(spec), "--seed", "7", "--out", str(tmp_path / name)]) == 0
        files = sorted(p.name for p in (tmp_path / "a").iterdir() if p.name != "run_manifest.json")
        assert "manifest.json" in files
        for name in files:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_annotation_budget_exits_with_error(self, tmp_path):
        spec = tmp_path / "gen.json"
        spec.write_text(json.dumps({**TINY_GEN, "annotated_fraction": 1.0}))
        assert main(["gen-data", "--spec", str(spec), "--out", str(tmp_path / "data")]) == 1
        manifest = json.loads((tmp_path / "data" / "run_manifest.json").read_text())
        assert manifest["status"] == "failed"
        assert manifest["error"].startswith("AnnotationBudgetError")


class TestTrain:
    def test_defaults(self):
        args = build_parser().parse_args(["train", "--data", "d", "--out", "o"])
        cfg = resolve_config(args)
        assert cfg == TrainConfig()
        assert (cfg.lr, cfg.batch_size, cfg.lr_gamma, cfg.epochs) == (1e-4, 5, 0.999, 50)

    def test_flags_override_config_file(self, tmp_path):
        config = tmp_path / "train.json"
        config.write_text(json.dumps({"lr": 0.01, "epochs": 7, "loss": {"loss": "wce", "scheme": "equal"}}))
        args = build_parser().parse_args(
            ["train", "--data", "d", "--out", "o", "--config", str(config), "--epochs", "3", "--scheme", "hier"]
        )
        cfg = resolve_config(args)
        assert (cfg.lr, cfg.epochs) == (0.01, 3)
        assert cfg.loss.label == "wce-hier"

    def test_leaf_tree_ce_matches_ce(self, tmp_path, data_dir):
        ce, tce = tmp_path / "ce.ckpt", tmp_path / "tce.ckpt"
        assert main(["train", "--data", str(data_dir), "--loss", "ce", *TRAIN_FLAGS, "--out", str(ce)]) == 0
        assert main(["train", "--data", str(data_dir), "--loss", "tce", "--scheme", "leaf", *TRAIN_FLAGS, "--out", str(tce)]) == 0
        np.testing.assert_array_equal(load_checkpoint(ce)[0].flat(), load_checkpoint(tce)[0].flat())
        assert (tmp_path / "ce.ckpt.trace.csv").read_text() == (tmp_path / "tce.ckpt.trace.csv").read_text()

    def test_zero_epochs_writes_initialization(self, tmp_path, data_dir):
        out = tmp_path / "init.ckpt"
        assert main(["train", "--data", str(data_dir), "--epochs", "0", "--hidden", "4", "--out", str(out)]) == 0
        model, header = load_checkpoint(out)
        expected = Model.initialize((4, 4, 4), np.random.default_rng(0))
        np.testing.assert_array_equal(model.flat(), expected.flat())
        assert header.epochs_trained == 0

    def test_trace_and_manifest(self, tmp_path, checkpoint):
        rows = _read_csv(tmp_path / "model.ckpt.trace.csv")
        assert [row["epoch"] for row in rows] == ["0", "1"]
        manifest = json.loads((tmp_path / "model.ckpt.manifest.json").read_text())
        assert manifest["config"]["loss"]["scheme"] == "hier"
        assert all(manifest["outputs"].values())

    def test_missing_data(self, tmp_path):
        assert main(["train", "--data", str(tmp_path / "absent"), "--out", str(tmp_path / "m.ckpt")]) == 2

    def test_unknown_scheme_in_config(self, tmp_path, data_dir, capsys):
        config = tmp_path / "train.json"
        config.write_text(json.dumps({"loss": "tce", "scheme": "bogus"}))
        args = ["train", "--data", str(data_dir), "--config", str(config), "--out", str(tmp_path / "m.ckpt")]
        assert main(args) == 1
        assert "LossConfigError" in capsys.readouterr().err

    def test_fold_out_of_range(self, tmp_path, data_dir):
        assert main(["train", "--data", str(data_dir), "--fold", "5", *TRAIN_FLAGS, "--out", str(tmp_path / "m.ckpt")]) == 2


class TestEval:
    def test_tau_zero_has_no_ood(self, tmp_path, data_dir, checkpoint):
        out = tmp_path / "eval"
        assert main(["eval", "--data", str(data_dir), "--checkpoint", str(checkpoint), "--tau", "0", "--out", str(out)]) == 0
        confusion = _read_csv(out / "confusion.csv")
        assert confusion
        assert all(row["count"] == "0" for row in confusion if row["predicted"] == "OOD")
        metrics = _read_csv(out / "metrics.csv")
        assert {row["tau_name"] for row in metrics} == {"tau0", "tau_m"}
        assert {row["level"] for row in metrics} == {"2", "0"}
        assert (out / "sweep.csv").exists()

    def test_held_out_leaves_fill_ood_columns(self, tmp_path):
        spec = tmp_path / "gen.json"
        spec.write_text(json.dumps({**TINY_GEN, "regions_per_image": 4, "held_out_leaves": [1, 2]}))
        data = tmp_path / "data"
        assert main(["gen-data", "--spec", str(spec), "--seed", "2", "--out", str(data)]) == 0
        ckpt = tmp_path / "m.ckpt"
        assert main(["train", "--data", str(data), *TRAIN_FLAGS, "--out", str(ckpt)]) == 0
        out = tmp_path / "eval"
        assert main(["eval", "--data", str(data), "--checkpoint", str(ckpt), "--out", str(out)]) == 0
        metrics = _read_csv(out / "metrics.csv")
        macro = [row for row in metrics if row["class"] == "macro"]
        assert len(macro) == 4
        for row in macro:
            assert row["ood_recall"] != ""
            assert 0.0 <= float(row["ood_fraction"]) <= 1.0
        assert all(row["ood_recall"] == "" for row in metrics if row["class"] != "macro")
        assert {row["ood_recall"] for row in macro if row["tau_name"] == "tau0"} == {"0.000000"}

    def test_folds_are_averaged(self, tmp_path, data_dir):
        paths = []
        for fold in (0, 1):
            path = tmp_path / f"fold{fold}.ckpt"
            assert main(["train", "--data", str(data_dir), "--fold", str(fold), *TRAIN_FLAGS, "--out", str(path)]) == 0
            paths.append(str(path))
        out = tmp_path / "eval"
        assert main(["eval", "--data", str(data_dir), "--checkpoint", *paths, "--fold", "0", "1", "--level", "top", "--out", str(out)]) == 0
        averaged = _read_csv(out / "confusion_averaged.csv")
        assert {row["label"] for row in averaged} == {"level2"}
        assert len(averaged) == 3 * 3

    def test_missing_checkpoint(self, tmp_path, data_dir):
        assert main(["eval", "--data", str(data_dir), "--checkpoint", str(tmp_path / "nope.ckpt"), "--out", str(tmp_path / "e")]) == 2

    def test_level_out_of_range(self, tmp_path, data_dir, checkpoint):
        assert main(["eval", "--data", str(data_dir), "--checkpoint", str(checkpoint), "--level", "7", "--out", str(tmp_path / "e")]) == 1

    def test_ood_sweep(self, tmp_path, data_dir, checkpoint):
        out = tmp_path / "sweep.csv"
        assert main(["ood-sweep", "--data", str(data_dir), "--checkpoint", str(checkpoint), "--grid-step", "0.25", "--out", str(out)]) == 0
        rows = _read_csv(out)
        assert [row["tau"] for row in rows if row["level"] == "2"] == ["0.000000", "0.250000", "0.500000", "0.750000", "1.000000"]


class TestTreeMetric:
    @pytest.fixture
    def tree_file(self, tmp_path):
        out = tmp_path / "tree.json"
        assert main(["gen-tree", "--tops", "2", "--mids", "1", "--leaves", "2", "--out", str(out)]) == 0
        return out

    def test_dump_distance(self, tree_file, capsys):
        capsys.readouterr()
        assert main(["dump-distance", "--tree", str(tree_file), "--scheme", "equal"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "leaf,T1.M1.L1,T1.M1.L2,T2.M1.L1,T2.M1.L2"
        assert lines[1] == "T1.M1.L1,0.000000,2.000000,6.000000,6.000000"

    def test_dump_distance_needs_weights(self, tree_file):
        assert main(["dump-distance", "--tree", str(tree_file)]) == 2

    def test_malformed_tree_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"nodes": [1, 2]}))
        assert main(["dump-distance", "--tree", str(bad), "--scheme", "equal"]) == 1
        assert "TreeError" in capsys.readouterr().err

    def test_wasserstein(self, tree_file, capsys):
        capsys.readouterr()
        assert main(["wasserstein", "--tree", str(tree_file), "--scheme", "equal", "--p", "1,0,0,0", "--target", "2"]) == 0
        result = json.loads(capsys.readouterr().out)
        assert result["crisp"] == pytest.approx(2.0)
        assert result["tree"] == pytest.approx(2.0)
        assert result["lp"] == pytest.approx(2.0, abs=1e-9)

    def test_wasserstein_plan(self, tree_file, capsys):
        capsys.readouterr()
        args = ["wasserstein", "--tree", str(tree_file), "--scheme", "hier", "--p", "0.5,0.5,0,0", "--q", "0,0,0.5,0.5", "--method", "lp", "--plan"]
        assert main(args) == 0
        result = json.loads(capsys.readouterr().out)
        assert result["lp"] == pytest.approx(222.0, abs=1e-8)
        assert np.asarray(result["plan"]).sum() == pytest.approx(1.0)

    def test_wasserstein_rejects_bad_vector(self, tree_file):
        assert main(["wasserstein", "--tree", str(tree_file), "--scheme", "equal", "--p", "0.9,0.9,0,0", "--target", "1"]) == 1


class TestExperiment:
    def test_report_files(self, tmp_path):
        spec = tmp_path / "experiment.json"
        spec.write_text(json.dumps({
            "gen": TINY_GEN,
            "seeds": [0],
            "train": {"lr": 0.01, "epochs": 1, "batch_size": 2, "pixels_per_image": 16, "hidden_sizes": [4]},
            "losses": [{"loss": "ce", "scheme": "leaf"}, {"loss": "wce", "scheme": "hier"}],
            "levels": ["top"],
            "grid": [0.0, 0.5],
            "pairs": [["wce-hier", "ce-leaf"]],
        }))
        out = tmp_path / "report"
        assert main(["experiment", "--spec", str(spec), "--out", str(out)]) == 0
        for name in EXPERIMENT_FILES:
            assert (out / name).exists()
        assert (out / "table.csv").read_text().splitlines()[0] == ",".join(TABLE_HEADER)
        table = _read_csv(out / "table.csv")
        assert len(table) == 2 * 3
        assert {row["loss"] + "-" + row["scheme"] for row in table} == {"ce-leaf", "wce-hier"}
        manifest = json.loads((out / "run_manifest.json").read_text())
        assert manifest["status"] == "ok"
        assert sorted(manifest["outputs"]) == sorted(str(out / name) for name in EXPERIMENT_FILES)

    def test_failed_cells_exit_nonzero(self, tmp_path):
        spec = tmp_path / "experiment.json"
        spec.write_text(json.dumps({
            "gen": {**TINY_GEN, "annotated_fraction": 1.0},
            "train": {"epochs": 1, "hidden_sizes": [4]},
            "losses": [{"loss": "ce"}],
        }))
        out = tmp_path / "report"
        assert main(["experiment", "--spec", str(spec), "--out", str(out)]) == 1
        assert len(_read_csv(out / "failures.csv")) == 2


class TestReports:
    def test_metric_rows_carry_ood_columns(self, three_leaf_tree):
        truth = np.array([1, 2, 3, 0, 0])
        pred = np.array([1, 2, 0, 0, 3])
        report = evaluate(pred, truth, three_leaf_tree, 0, 0.5)
        result = ThresholdResult(level=0, tau_name="tau_m", tau=0.5, report=report, per_image_f1=np.zeros(1))
        stream = io.StringIO()
        emit_csv(stream, METRICS_HEADER, metric_rows(0, result, ("a", "b", "c")))
        rows = list(csv.DictReader(io.StringIO(stream.getvalue())))
        assert [row["class"] for row in rows] == ["a", "b", "c", "macro"]
        assert (rows[-1]["ood_recall"], rows[-1]["ood_fraction"]) == ("0.500000", "0.400000")
        assert all(row["ood_recall"] == row["ood_fraction"] == "" for row in rows[:-1])

    def test_ood_recall_blank_without_ood_truth(self, three_leaf_tree):
        report = evaluate(np.array([1, 2, 3]), np.array([1, 2, 3]), three_leaf_tree, 0, 0.0)
        result = ThresholdResult(level=0, tau_name="tau0", tau=0.0, report=report, per_image_f1=np.zeros(1))
        macro = list(metric_rows(0, result, ("a", "b", "c")))[-1]
        assert macro[METRICS_HEADER.index("ood_recall")] is None
        assert macro[METRICS_HEADER.index("ood_fraction")] == 0.0


class TestGrid:
    def test_even_step(self):
        assert grid_from_step(0.25) == [0.0, 0.25, 0.5, 0.75, 1.0]

    @pytest.mark.parametrize("step", [0.03, 0.07, 0.3, 0.4, 0.7])
    def test_uneven_step_ends_at_one(self, step):
        grid = grid_from_step(step)
        assert grid[-1] == 1.0
        assert grid[-2] < 1.0
        assert grid == sorted(grid)

    def test_fine_step(self):
        grid = grid_from_step(0.01)
        assert len(grid) == 101
        assert grid[-1] == 1.0

    @pytest.mark.parametrize("step", [0.0, -0.1, 1.5])
    def test_rejects_bad_step(self, step):
        with pytest.raises(UsageError):
            grid_from_step(step)
