import json
import re
import subprocess
import sys

import numpy as np
import pytest

from rareunion.cli import (
    CSV_HEADER,
    ExperimentConfig,
    run_experiment,
    rows_to_csv,
    rows_to_json,
)
from rareunion.errors import ModelSpecError

NORMAL4 = '{"type":"normal","d":4,"rho":0.75}'


def run_cli(*args, env=None):
    import os

    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run(
        [sys.executable, "-m", "rareunion.cli", *args],
        capture_output=True,
        text=True,
        env=full_env,
    )


def strip_wall_ms(csv_text):
    lines = csv_text.strip().splitlines()
    return [",".join(line.split(",")[:-1]) for line in lines]


@pytest.fixture()
def small_config(tmp_path):
    cfg = {
        "model": {"type": "normal", "d": 3, "rho": 0.5},
        "gamma_grid": [1.0, 2.0],
        "estimators": ["cmc", "alpha1", "alpha1_is", "bonferroni"],
        "replicates": 5000,
        "master_seed": 123,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


class TestConfig:
    def test_from_dict_validation(self):
        with pytest.raises(ModelSpecError):
            ExperimentConfig.from_dict({"model": {"type": "laplace", "d": 2}, "gamma_grid": []})
        with pytest.raises(ModelSpecError):
            ExperimentConfig.from_dict(
                {"model": {"type": "laplace", "d": 2}, "gamma_grid": [2.0, 1.0]}
            )
        with pytest.raises(ModelSpecError):
            ExperimentConfig.from_dict(
                {
                    "model": {"type": "laplace", "d": 2},
                    "gamma_grid": [1.0],
                    "estimators": ["zeta"],
                }
            )

    def test_defaults(self):
        cfg = ExperimentConfig.from_dict(
            {"model": {"type": "laplace", "d": 2}, "gamma_grid": [1.0]}
        )
        assert cfg.replicates == 100_000
        assert cfg.oracle == "auto"


class TestRunExperiment:
    def test_rows_in_config_order_with_oracle(self):
        cfg = ExperimentConfig.from_dict(
            {
                "model": {"type": "normal", "d": 3, "rho": 0.5},
                "gamma_grid": [1.0, 2.0],
                "estimators": ["cmc", "bonferroni"],
                "replicates": 2000,
                "master_seed": 7,
            }
        )
        rows = run_experiment(cfg)
        names = [r.estimator for r in rows]
        assert names[:2] == ["oracle", "oracle"]
        assert names[2:] == [
            "cmc",
            "cmc",
            "bonferroni_upper",
            "bonferroni_second",
            "bonferroni_upper",
            "bonferroni_second",
        ]
        gammas = [r.gamma for r in rows[2:4]]
        assert gammas == [1.0, 2.0]

    def test_capability_mismatch_reported_not_fatal(self, capsys):
        cfg = ExperimentConfig.from_dict(
            {
                "model": {"type": "laplace", "d": 3},
                "gamma_grid": [6.0],
                "estimators": ["alpha2_is", "cmc"],
                "replicates": 500,
            }
        )
        rows = run_experiment(cfg)
        bad = [r for r in rows if r.estimator == "alpha2_is"]
        assert len(bad) == 1 and np.isnan(bad[0].estimate)
        good = [r for r in rows if r.estimator == "cmc"]
        assert len(good) == 1 and np.isfinite(good[0].estimate)

    def test_variance_switch_policy(self):
        from rareunion import NormalModel, bonferroni_bounds

        base = {
            "model": {"type": "normal", "d": 4, "rho": 0.75},
            "gamma_grid": [2.0],
            "estimators": ["alpha1", "alpha2", "cmc"],
            "replicates": 2000,
            "master_seed": 4,
            "oracle": "none",
            "switch_below_std": 1.0,  # always switch
        }
        rows = run_experiment(ExperimentConfig.from_dict(base))
        model = NormalModel.equicorrelated(4, 0.75)
        bounds = bonferroni_bounds(model, 2.0)
        by_name = {r.estimator: r for r in rows}
        assert by_name["alpha1"].estimate == bounds.upper
        assert by_name["alpha1"].degenerate
        assert by_name["alpha2"].estimate == bounds.second
        # the policy only governs the partially deterministic estimators
        assert not by_name["cmc"].degenerate
        # disabled by default
        rows2 = run_experiment(ExperimentConfig.from_dict({**base, "switch_below_std": None}))
        assert {r.estimator: r for r in rows2}["alpha1"].estimate != bounds.upper

    def test_oracle_only_run(self):
        cfg = ExperimentConfig.from_dict(
            {
                "model": {"type": "laplace", "d": 4},
                "gamma_grid": [6.0, 8.0],
                "estimators": [],
            }
        )
        rows = run_experiment(cfg)
        assert [r.estimator for r in rows] == ["oracle", "oracle"]
        assert rows[0].estimate == pytest.approx(4.093e-4, rel=1e-3)

    def test_cell_seeds_stable_under_extension(self):
        base = {
            "model": {"type": "normal", "d": 3, "rho": 0.5},
            "gamma_grid": [1.0],
            "estimators": ["cmc"],
            "replicates": 1000,
            "master_seed": 5,
        }
        rows1 = run_experiment(ExperimentConfig.from_dict(base))
        extended = dict(base, estimators=["cmc", "alpha1"])
        rows2 = run_experiment(ExperimentConfig.from_dict(extended))
        cmc1 = [r for r in rows1 if r.estimator == "cmc"][0]
        cmc2 = [r for r in rows2 if r.estimator == "cmc"][0]
        assert cmc1.seed == cmc2.seed
        assert cmc1.estimate == cmc2.estimate


class TestCsvFormat:
    def test_header_and_asterisk_convention(self):
        cfg = ExperimentConfig.from_dict(
            {
                "model": {"type": "normal", "d": 4, "rho": 0.75},
                "gamma_grid": [6.0],
                "estimators": ["alpha1"],
                "replicates": 1000,
                "master_seed": 3,
            }
        )
        rows = run_experiment(cfg)
        text = rows_to_csv(rows)
        lines = text.strip().splitlines()
        assert lines[0] == CSV_HEADER
        alpha_line = [l for l in lines if l.startswith("alpha1,")][0]
        fields = alpha_line.split(",")
        assert re.fullmatch(r"3\.94\d+e-09\*", fields[2])  # degenerate cell
        assert fields[6] == "true"

    def test_golden_layout(self):
        # pinned layout: column order and formatting are part of the contract
        cfg = ExperimentConfig.from_dict(
            {
                "model": {"type": "finite", "pmf": [0.25, 0.25, 0.25, 0.25]},
                "gamma_grid": [0.0],
                "estimators": ["bonferroni"],
                "oracle": "none",
            }
        )
        text = rows_to_csv(run_experiment(cfg))
        lines = text.strip().splitlines()
        assert lines[0] == (
            "estimator,gamma,estimate,sample_std,stderr,rel_err,degenerate,"
            "replicates,seed,wall_ms"
        )
        assert lines[1].startswith("bonferroni_upper,0,1.0000000000e+00,")
        assert lines[2].startswith("bonferroni_second,0,7.5000000000e-01,")

    def test_json_round_trip(self):
        cfg = ExperimentConfig.from_dict(
            {
                "model": {"type": "normal", "d": 2, "rho": 0.5},
                "gamma_grid": [1.0],
                "estimators": ["cmc"],
                "replicates": 500,
            }
        )
        rows = run_experiment(cfg)
        parsed = json.loads(rows_to_json(rows))
        assert parsed[0]["estimator"] == "oracle"
        assert {"estimate", "gamma", "seed"} <= set(parsed[0])


class TestCommandLine:
    def test_oracle_prints_reference_value(self):
        proc = run_cli("oracle", "--model", NORMAL4, "--gamma", "4")
        assert proc.returncode == 0
        assert proc.stdout.strip() == "1.095e-04"

    def test_classify_model_negative_rho(self):
        proc = run_cli("classify", "--model", '{"type":"normal","d":3,"rho":-0.25}')
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["level"] == "BRE"

    def test_classify_family(self):
        proc = run_cli("classify", "--family", "clayton", "--theta", "2.0")
        assert json.loads(proc.stdout)["level"] == "BRE"

    def test_estimate_json_shape(self):
        proc = run_cli(
            "estimate",
            "--model",
            '{"type":"laplace","d":4}',
            "--estimator",
            "alpha1_is",
            "--gamma",
            "6",
            "--replicates",
            "20000",
            "--seed",
            "7",
        )
        assert proc.returncode == 0
        obj = json.loads(proc.stdout)
        assert obj["stderr"] > 0.0
        assert obj["replicates"] == 20000

    def test_ratio_subcommand(self):
        proc = run_cli(
            "ratio", "--model", '{"type":"normal","d":2,"rho":0.75}', "--gammas", "1,2,3"
        )
        assert proc.returncode == 0
        obj = json.loads(proc.stdout)
        assert obj["strict_trend"] == "increasing"

    def test_table_determinism_across_thread_counts(self, small_config, tmp_path):
        out1 = run_cli("table", "--config", str(small_config), env={"RARE_UNION_THREADS": "1"})
        out2 = run_cli("table", "--config", str(small_config), env={"RARE_UNION_THREADS": "4"})
        assert out1.returncode == out2.returncode == 0
        assert strip_wall_ms(out1.stdout) == strip_wall_ms(out2.stdout)

    def test_table_repeat_byte_identical_modulo_wall(self, small_config):
        a = run_cli("table", "--config", str(small_config))
        b = run_cli("table", "--config", str(small_config))
        assert strip_wall_ms(a.stdout) == strip_wall_ms(b.stdout)

    def test_table_writes_file(self, small_config, tmp_path):
        out = tmp_path / "rows.csv"
        proc = run_cli("table", "--config", str(small_config), "--out", str(out))
        assert proc.returncode == 0
        assert out.read_text().startswith(CSV_HEADER)

    def test_unknown_subcommand_exits_two(self):
        proc = run_cli("frobnicate")
        assert proc.returncode == 2
        assert "invalid choice" in proc.stderr

    def test_bad_model_json_exits_two(self):
        proc = run_cli("oracle", "--model", "{not json", "--gamma", "1")
        assert proc.returncode == 2

    def test_bad_config_exits_two(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"model": {"type": "laplace", "d": 2}, "gamma_grid": []}))
        proc = run_cli("table", "--config", str(path))
        assert proc.returncode == 2

    def test_missing_config_file_exits_two(self):
        proc = run_cli("table", "--config", "/nonexistent/config.json")
        assert proc.returncode == 2

    def test_runtime_error_exits_one(self):
        # archimedean models have no deterministic union oracle
        proc = run_cli(
            "oracle", "--model", '{"type":"archimedean","family":"clayton","theta":1.0,"d":3}',
            "--gamma", "0.9",
        )
        assert proc.returncode == 1
