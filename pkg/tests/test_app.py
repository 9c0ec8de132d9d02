"""Tests for the command line entrypoint."""

import json

import pytest

from app import EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_OK, ConfigError, build_config, build_parser, main
from src.cache import Cache
from src.models import ExperimentMode, OutputFormat, RegionSpec
from src.storage_helper import SCHEMA_LINE, load_records


@pytest.fixture(autouse=True)
def no_redis(monkeypatch):
    monkeypatch.delenv("REDIS_URL", raising=False)
    monkeypatch.setattr("src.experiments.get_cache", lambda: Cache(redis_url=None))


def _parse(argv):
    return build_parser().parse_args(argv)


class TestBuildConfig:
    """Tests for merging config files and flags."""

    def test_flags(self):
        config = build_config(_parse(["expected", "--hurst", "0.3", "--n", "4", "8", "--region", "PositiveAxis"]))
        assert config.mode == ExperimentMode.EXPECTED
        assert config.model.descriptor == "H=0.3"
        assert config.n_values == [4, 8]
        assert config.region == RegionSpec.POSITIVE_AXIS

    def test_file_with_overrides(self, tmp_path):
        path = tmp_path / "exp.json"
        path.write_text(json.dumps({
            "mode": "Simulate",
            "model": {"kind": "fractional_increment", "h": 0.7},
            "n_values": [16],
            "trials": 10,
            "seed": 1,
        }), encoding="utf-8")
        config = build_config(_parse(["run", "--config", str(path), "--seed", "9", "--format", "json"]))
        assert config.mode == ExperimentMode.SIMULATE
        assert config.seed == 9
        assert config.trials == 10
        assert config.output_format == OutputFormat.JSON

    def test_limit_zero_flag(self):
        config = build_config(_parse(["asymptotics", "--limit-zero", "--n", "10", "--boundary-correction"]))
        assert config.model.is_limit_zero
        assert config.boundary_correction

    def test_missing_mode(self):
        with pytest.raises(ConfigError):
            build_config(_parse(["run", "--hurst", "0.3", "--n", "4"]))

    def test_invalid_hurst(self):
        with pytest.raises(ConfigError):
            build_config(_parse(["expected", "--hurst", "1.5", "--n", "4"]))

    def test_unsorted_n(self):
        with pytest.raises(ConfigError):
            build_config(_parse(["expected", "--hurst", "0.3", "--n", "8", "4"]))

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(ConfigError):
            build_config(_parse(["run", "--config", str(tmp_path / "missing.json")]))


class TestMain:
    """Tests for exit codes and written files."""

    def test_expected_writes_table(self, tmp_path):
        out = tmp_path / "e.csv"
        code = main(["expected", "--hurst", "0.5", "--n", "2", "8", "--out", str(out), "--workers", "1"])
        assert code == EXIT_OK
        assert out.read_text(encoding="utf-8").startswith(SCHEMA_LINE)
        records = load_records(out)
        assert [r.n for r in records] == [2, 8]
        assert records[0].value == pytest.approx(1.0, abs=1e-6)

    def test_asymptotics_ell_table(self, tmp_path):
        out = tmp_path / "a.csv"
        code = main(["asymptotics", "--hurst", "0.3", "--n", "100", "--out", str(out), "--ell-points", "0.5", "2"])
        assert code == EXIT_OK
        assert (tmp_path / "a.ell.csv").exists()

    def test_config_error(self, tmp_path):
        assert main(["expected", "--hurst", "0", "--n", "4", "--out", str(tmp_path / "x.csv")]) == EXIT_CONFIG

    def test_ell_points_for_limit_zero(self, tmp_path):
        code = main(["asymptotics", "--limit-zero", "--n", "10", "--out", str(tmp_path / "a.csv"), "--ell-points", "2"])
        assert code == EXIT_CONFIG

    def test_nonconverged(self, tmp_path):
        path = tmp_path / "exp.json"
        path.write_text(json.dumps({"eval_budget": 10}), encoding="utf-8")
        out = tmp_path / "e.csv"
        code = main(["expected", "--config", str(path), "--hurst", "0.3", "--n", "64", "--out", str(out), "--workers", "1"])
        assert code == EXIT_NONCONVERGED
        assert load_records(out)[0].status.value == "nonconverged"
