"""Tests for result file persistence."""

import json
import math

import pytest

from src.models import (
    CoefficientModel,
    EllSample,
    ExperimentConfig,
    ExperimentMode,
    ExperimentRecord,
    OutputFormat,
    RecordMethod,
    RegionSpec,
    RowStatus,
)
from src.storage_helper import (
    COLUMNS,
    SCHEMA_LINE,
    default_output_path,
    ell_table_path,
    load_records,
    records_from_csv,
    save_ell_table,
    save_records,
)


@pytest.fixture
def records():
    return [
        ExperimentRecord(n=64, model="H=0.3", region=RegionSpec.ALL, method=RecordMethod.QUADRATURE,
                         value=2.718281828459045, err=3.1e-11, wall_time_ms=12.5, residual_asymptotic=0.1 + 0.2),
        ExperimentRecord(n=64, model="H=0.3", region=RegionSpec.POSITIVE_AXIS, method=RecordMethod.MONTECARLO,
                         value=1.0 / 3.0, err=0.0123, trials=1000, seed=42, suspect_fraction=0.001,
                         residual_sigma=-1.25),
        ExperimentRecord(n=128, model="limit_zero", region=RegionSpec.NEGATIVE_AXIS, method=RecordMethod.QUADRATURE,
                         value=math.nan, err=math.nan, status=RowStatus.NONCONVERGED),
    ]


@pytest.fixture
def config():
    return ExperimentConfig(mode=ExperimentMode.EXPECTED, model=CoefficientModel.fractional(0.3), n_values=[64, 128])


class TestCsv:
    """Tests for the versioned CSV table."""

    def test_layout(self, tmp_path, records):
        path = save_records(records, tmp_path / "out" / "e.csv", OutputFormat.CSV)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == SCHEMA_LINE
        assert lines[1].split(",") == list(COLUMNS)
        assert COLUMNS[:6] == ("n", "model", "region", "method", "value", "err")
        assert len(lines) == 2 + len(records)

    def test_reload_is_exact(self, tmp_path, records):
        path = save_records(records, tmp_path / "e.csv", OutputFormat.CSV)
        loaded = load_records(path)
        assert len(loaded) == len(records)
        for original, parsed in zip(records, loaded):
            assert original.same_result(parsed)
            assert parsed.wall_time_ms == original.wall_time_ms

    def test_missing_schema_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(",".join(COLUMNS) + "\n", encoding="utf-8")
        with pytest.raises(ValueError):
            records_from_csv(path)

    def test_wrong_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(SCHEMA_LINE + "\nn,model,value\n", encoding="utf-8")
        with pytest.raises(ValueError):
            records_from_csv(path)


class TestJson:
    """Tests for the JSON document."""

    def test_document(self, tmp_path, records, config):
        path = save_records(records, tmp_path / "e.json", OutputFormat.JSON, config)
        document = json.loads(path.read_text(encoding="utf-8").replace("NaN", "null"))
        assert document["schema"] == "kaczeros-schema v1"
        assert document["config"]["n_values"] == [64, 128]
        assert len(document["records"]) == len(records)

    def test_reload_is_exact(self, tmp_path, records, config):
        path = save_records(records, tmp_path / "e.json", OutputFormat.JSON, config)
        loaded = load_records(path)
        assert all(a.same_result(b) for a, b in zip(records, loaded))


class TestPaths:
    """Tests for output path helpers."""

    def test_default_output_path(self, config):
        path = default_output_path(config)
        assert path.name == "expected_H0.3.csv"

    def test_default_json_path(self, config):
        path = default_output_path(config.model_copy(update={"output_format": OutputFormat.JSON}))
        assert path.suffix == ".json"

    def test_ell_table_path(self, tmp_path):
        assert ell_table_path(tmp_path / "run.csv") == tmp_path / "run.ell.csv"

    def test_ell_table(self, tmp_path):
        path = tmp_path / "run.ell.csv"
        save_ell_table([EllSample(x=2.0, ell=0.5, density=0.25)], path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines == [SCHEMA_LINE, "x,ell,density", "2,0.5,0.25"]
