"""Configuration round-trips and the command-line driver."""

import json

import pytest
from click.testing import CliRunner

from tricomilab.cli import main
from tricomilab.config import ConfigError, ExperimentConfig


class TestConfig:
    def test_round_trip_lossless(self):
        cfg = ExperimentConfig(m=2, n=2, T=1.5, seed=7,
                               suites=["identities-4.3"])
        text = cfg.dumps()
        again = ExperimentConfig.from_dict(json.loads(text))
        assert again.dumps() == text

    def test_unknown_key_pointer(self):
        with pytest.raises(ConfigError) as err:
            ExperimentConfig.from_dict({"m": 1, "bogus": 2})
        assert "config.bogus" in str(err.value)

    def test_nested_pointer(self):
        with pytest.raises(ConfigError) as err:
            ExperimentConfig.from_dict({"grid": {"N": 64, "spacing": 0.1}})
        assert "config.grid.spacing" in str(err.value)

    def test_validation_messages(self):
        with pytest.raises(ConfigError) as err:
            ExperimentConfig.from_dict({"grid": {"N": 65}})
        assert "config.grid.N" in str(err.value)
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"version": 99})
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"rhs": {"name": "sinister"}})


class TestCli:
    def test_specfun_eval(self):
        runner = CliRunner()
        result = runner.invoke(main, ["specfun", "eval", "--a", "0.5",
                                      "--c", "0.5", "--z-im", "1.0"])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["method"] == "taylor-series"
        assert payload["value_re"] == pytest.approx(0.5403023058681398)

    def test_verify_identities_lemma_43(self, tmp_path):
        runner = CliRunner()
        result = runner.invoke(main, ["verify-identities", "--lemma", "4.3",
                                      "--m", "2", "--n", "2",
                                      "--out", str(tmp_path)])
        assert result.exit_code == 0
        report = json.loads((tmp_path / "identities_4_3.json").read_text())
        assert report["pass"] is True
        assert report["passed"] == "6/6"
        verdicts = {row["identity"]: row["verdict"]
                    for row in report["identities"]}
        assert verdicts["[Lbar0, R_k] = -(m+2) R_k (printed)"] == "reconstructed"

    def test_run_empty_suites_noop(self, tmp_path):
        cfg = ExperimentConfig(out=str(tmp_path / "out"))
        path = tmp_path / "cfg.json"
        path.write_text(cfg.dumps())
        runner = CliRunner()
        result = runner.invoke(main, ["run", "--config", str(path)])
        assert result.exit_code == 0
        assert "nothing to do" in result.output

    def test_run_rejects_bad_config(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"m": 1, "mystery": True}))
        runner = CliRunner()
        result = runner.invoke(main, ["run", "--config", str(path)])
        assert result.exit_code != 0
        assert "config.mystery" in result.output

    def test_determinism_byte_identical(self, tmp_path):
        runner = CliRunner()
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / tag
            result = runner.invoke(
                main, ["verify-identities", "--lemma", "4.2", "--m", "1",
                       "--n", "2", "--seed", "3", "--out", str(out)])
            assert result.exit_code == 0
            outs.append((out / "identities_4_2.json").read_bytes())
        assert outs[0] == outs[1]

    def test_solve_linear_writes_field_and_report(self, tmp_path):
        runner = CliRunner()
        result = runner.invoke(
            main, ["solve-linear", "--m", "1", "--n", "2", "--t", "0.4",
                   "--grid-n", "32", "--out", str(tmp_path), "--no-figures"])
        assert result.exit_code == 0
        assert (tmp_path / "field.bin").exists()
        sidecar = json.loads((tmp_path / "field.json").read_text())
        assert sidecar["kind"] == "complex-interleaved"
        report = json.loads((tmp_path / "solve_linear_report.json").read_text())
        assert report["pass"] is True
