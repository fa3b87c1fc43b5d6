import json
import subprocess
import sys

import pytest

from metasampler import load_sampler
from metasampler.cli import main

TINY_SAC = [
    "--k", "3",
    "--gradient-steps", "4",
    "--random-steps", "4",
    "--batch-size", "4",
    "--replay-capacity", "32",
]


def read_result_csv(path):
    """Split a result CSV into (config dict, header list, data rows)."""
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config: ")
    config = json.loads(lines[0][len("# config: "):])
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:]]
    return config, header, rows


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("cli")


@pytest.fixture(scope="module")
def task_csv(workdir):
    path = workdir / "task.csv"
    assert main([
        "generate-toy", "--majority", "60", "--minority", "12",
        "--overlap", "0.5", "--seed", "3", "--out", str(path),
    ]) == 0
    return path


@pytest.fixture(scope="module")
def other_task_csv(workdir):
    path = workdir / "other_task.csv"
    assert main([
        "generate-toy", "--majority", "60", "--minority", "12",
        "--overlap", "0.6", "--seed", "4", "--out", str(path),
    ]) == 0
    return path


@pytest.fixture(scope="module")
def sampler_path(workdir, task_csv):
    out = workdir / "meta"
    assert main(["meta-train", str(task_csv), "--out", str(out), *TINY_SAC]) == 0
    return out / "sampler.json"


class TestGenerateToy:
    def test_default_spec_row_count(self, tmp_path):
        path = tmp_path / "toy.csv"
        assert main(["generate-toy", "--out", str(path)]) == 0
        lines = path.read_text().splitlines()
        assert len(lines) == 2201  # header + 2000 majority + 200 minority

    def test_seed_reproducibility(self, tmp_path):
        a, b, c = (tmp_path / name for name in ("a.csv", "b.csv", "c.csv"))
        common = ["generate-toy", "--majority", "40", "--minority", "8"]
        assert main([*common, "--seed", "5", "--out", str(a)]) == 0
        assert main([*common, "--seed", "5", "--out", str(b)]) == 0
        assert main([*common, "--seed", "6", "--out", str(c)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert a.read_bytes() != c.read_bytes()

    def test_invalid_overlap_is_config_error(self, tmp_path):
        assert main([
            "generate-toy", "--overlap", "1.5", "--out", str(tmp_path / "x.csv"),
        ]) == 1

    def test_out_required(self):
        assert main(["generate-toy"]) == 1


class TestConfigMerge:
    def test_flag_beats_config_file(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"overlap": 0.9, "majority": 40, "minority": 8}))
        from_both = tmp_path / "both.csv"
        from_flag = tmp_path / "flag.csv"
        assert main([
            "generate-toy", "--config", str(config),
            "--overlap", "0.2", "--out", str(from_both),
        ]) == 0
        assert main([
            "generate-toy", "--majority", "40", "--minority", "8",
            "--overlap", "0.2", "--out", str(from_flag),
        ]) == 0
        assert from_both.read_bytes() == from_flag.read_bytes()

    def test_unknown_config_key_rejected(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"overlp": 0.9}))
        assert main([
            "generate-toy", "--config", str(config), "--out", str(tmp_path / "x.csv"),
        ]) == 1

    def test_missing_config_file(self, tmp_path):
        assert main([
            "generate-toy", "--config", str(tmp_path / "absent.json"),
            "--out", str(tmp_path / "x.csv"),
        ]) == 1

    def test_malformed_config_file(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text("{not json")
        assert main([
            "generate-toy", "--config", str(config), "--out", str(tmp_path / "x.csv"),
        ]) == 1

    def test_non_object_config_file(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text("[1, 2]")
        assert main([
            "generate-toy", "--config", str(config), "--out", str(tmp_path / "x.csv"),
        ]) == 1


class TestMetaTrain:
    def test_writes_sampler_and_log(self, workdir, task_csv, sampler_path):
        assert sampler_path.exists()
        sampler = load_sampler(sampler_path)
        assert sampler.bins == 5
        config, header, rows = read_result_csv(sampler_path.parent / "meta_train_log.csv")
        assert header == ["episode", "step", "task_index", "action", "reward", "valid_aucprc"]
        assert config["k"] == 3
        assert rows, "expected at least one logged step"
        for row in rows:
            assert 0.0 <= float(row[3]) <= 1.0
            assert 0.0 <= float(row[5]) <= 1.0

    def test_rerun_is_byte_identical(self, tmp_path, task_csv):
        out = tmp_path / "meta"
        argv = ["meta-train", str(task_csv), "--out", str(out), *TINY_SAC]
        assert main(argv) == 0
        first = {
            name: (out / name).read_bytes()
            for name in ("sampler.json", "meta_train_log.csv")
        }
        assert main(argv) == 0
        for name, blob in first.items():
            assert (out / name).read_bytes() == blob

    def test_exactly_one_seed(self, tmp_path, task_csv):
        assert main([
            "meta-train", str(task_csv), "--seed", "0,1",
            "--out", str(tmp_path / "m"), *TINY_SAC,
        ]) == 1

    def test_empty_seed_list(self, tmp_path, task_csv):
        assert main([
            "meta-train", str(task_csv), "--seed", "",
            "--out", str(tmp_path / "m"), *TINY_SAC,
        ]) == 1

    def test_missing_task_file(self, tmp_path):
        assert main([
            "meta-train", str(tmp_path / "absent.csv"),
            "--out", str(tmp_path / "m"), *TINY_SAC,
        ]) == 2

    def test_bad_labels_are_data_errors(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("f0,f1,label\n0.0,1.0,0\n1.0,0.0,2\n2.0,1.0,1\n")
        assert main([
            "meta-train", str(bad), "--out", str(tmp_path / "m"), *TINY_SAC,
        ]) == 2


class TestTrain:
    def test_random_sampling_results_table(self, tmp_path, task_csv):
        out = tmp_path / "run"
        assert main([
            "train", str(task_csv), "--mode", "random-sampling",
            "--k", "3", "--seed", "0,1,2", "--out", str(out),
        ]) == 0
        config, header, rows = read_result_csv(out / "train_results.csv")
        assert header == ["seed", "test_aucprc"]
        assert [row[0] for row in rows] == ["0", "1", "2"]
        assert config["seed"] == [0, 1, 2]
        for row in rows:
            assert 0.0 <= float(row[1]) <= 1.0

    def test_policy_mode_uses_saved_sampler(self, tmp_path, task_csv, sampler_path):
        out = tmp_path / "run"
        assert main([
            "train", str(task_csv), "--mode", "policy",
            "--sampler", str(sampler_path),
            "--k", "3", "--seed", "0,1", "--out", str(out),
        ]) == 0
        _, _, rows = read_result_csv(out / "train_results.csv")
        assert len(rows) == 2

    def test_constant_mode(self, tmp_path, task_csv):
        out = tmp_path / "run"
        assert main([
            "train", str(task_csv), "--mode", "constant", "--mu", "0.8",
            "--k", "3", "--seed", "0", "--out", str(out),
        ]) == 0

    def test_gnb_base_learner(self, tmp_path, task_csv):
        out = tmp_path / "run"
        assert main([
            "train", str(task_csv), "--mode", "random-sampling",
            "--base-learner", "gnb", "--k", "3", "--seed", "0", "--out", str(out),
        ]) == 0

    def test_policy_mode_requires_sampler(self, tmp_path, task_csv):
        assert main([
            "train", str(task_csv), "--mode", "policy",
            "--k", "3", "--seed", "0", "--out", str(tmp_path / "run"),
        ]) == 1

    def test_unknown_mode_rejected(self, tmp_path, task_csv):
        assert main([
            "train", str(task_csv), "--mode", "bogus",
            "--out", str(tmp_path / "run"),
        ]) == 1

    def test_unknown_base_learner_rejected(self, tmp_path, task_csv):
        assert main([
            "train", str(task_csv), "--mode", "random-sampling",
            "--base-learner", "forest", "--seed", "0", "--out", str(tmp_path / "run"),
        ]) == 1

    def test_rerun_is_byte_identical(self, tmp_path, task_csv):
        out = tmp_path / "run"
        argv = [
            "train", str(task_csv), "--mode", "random-sampling",
            "--k", "3", "--seed", "0,1", "--out", str(out),
        ]
        assert main(argv) == 0
        first = (out / "train_results.csv").read_bytes()
        assert main(argv) == 0
        assert (out / "train_results.csv").read_bytes() == first


class TestAblation:
    def test_summary_covers_modes_and_sizes(self, tmp_path, task_csv):
        out = tmp_path / "ablation"
        assert main([
            "ablation", str(task_csv), "--k", "3", "--seed", "0,1",
            "--out", str(out), *TINY_SAC[2:],
        ]) == 0
        config, header, rows = read_result_csv(out / "ablation_summary.csv")
        assert header == ["k", "mode", "mean_aucprc", "std_aucprc", "delta_pct"]
        assert [(row[0], row[1]) for row in rows] == [
            ("3", "policy"), ("3", "random-policy"), ("3", "random-sampling"),
        ]
        policy_row = rows[0]
        assert float(policy_row[4]) == 0.0  # delta is measured against policy
        _, _, raw = read_result_csv(out / "ablation_raw.csv")
        assert len(raw) == 3 * 2  # modes x seeds


class TestNoiseSweep:
    def test_summary_covers_ratios_and_modes(self, tmp_path, task_csv):
        out = tmp_path / "noise"
        assert main([
            "noise-sweep", str(task_csv), "--k", "3", "--seed", "0,1",
            "--ratios", "0,0.25", "--out", str(out), *TINY_SAC[2:],
        ]) == 0
        _, header, rows = read_result_csv(out / "noise_summary.csv")
        assert header == ["ratio", "mode", "mean_aucprc", "std_aucprc"]
        assert [(row[0], row[1]) for row in rows] == [
            ("0.0", "policy"), ("0.0", "random-sampling"),
            ("0.25", "policy"), ("0.25", "random-sampling"),
        ]
        _, _, raw = read_result_csv(out / "noise_raw.csv")
        assert len(raw) == 2 * 2 * 2  # ratios x modes x seeds


class TestTransfer:
    def test_requires_sampler(self, tmp_path, other_task_csv):
        assert main([
            "transfer", str(other_task_csv), "--k", "3", "--seed", "0",
            "--out", str(tmp_path / "t"),
        ]) == 1

    def test_transfer_only(self, tmp_path, other_task_csv, sampler_path):
        out = tmp_path / "t"
        assert main([
            "transfer", str(other_task_csv), "--sampler", str(sampler_path),
            "--k", "3", "--seed", "0,1", "--out", str(out),
        ]) == 0
        _, header, rows = read_result_csv(out / "transfer_summary.csv")
        assert header == ["mode", "mean_aucprc", "std_aucprc", "delta_pct_vs_reference"]
        assert len(rows) == 1 and rows[0][0] == "transfer"
        _, _, raw = read_result_csv(out / "transfer_raw.csv")
        assert len(raw) == 2

    def test_transfer_against_reference(self, tmp_path, other_task_csv, sampler_path):
        out = tmp_path / "t"
        assert main([
            "transfer", str(other_task_csv), "--sampler", str(sampler_path),
            "--reference-sampler", str(sampler_path),
            "--k", "3", "--seed", "0,1", "--out", str(out),
        ]) == 0
        _, _, rows = read_result_csv(out / "transfer_summary.csv")
        assert [row[0] for row in rows] == ["transfer", "reference"]
        # same sampler on both sides: identical seeds give identical scores
        assert float(rows[0][3]) == 0.0


class TestConsoleScript:
    def test_generate_toy_subprocess(self, tmp_path):
        result = subprocess.run(
            [sys.executable, "-m", "metasampler.cli", "generate-toy",
             "--majority", "30", "--minority", "6", "--out", str(tmp_path / "toy.csv")],
            capture_output=True, text=True,
        )
        assert result.returncode == 0, result.stderr
        assert (tmp_path / "toy.csv").exists()

    def test_missing_subcommand_is_config_error(self):
        result = subprocess.run(
            [sys.executable, "-m", "metasampler.cli"], capture_output=True, text=True
        )
        assert result.returncode == 1
