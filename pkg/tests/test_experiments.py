"""Tests for the experiment runners."""

import math

import pytest

from src.asymptotics import H0_BOUNDARY_MASS, H0_POSITIVE_LIMIT
from src.cache import Cache
from src.experiments import (
    AXIS_REGIONS,
    quadrature_row,
    resolve_workers,
    run_asymptotics,
    run_compare,
    run_experiment,
    run_expected,
    run_simulate,
    simulate_counts,
)
from src.models import (
    CoefficientModel,
    ExperimentConfig,
    ExperimentMode,
    RecordMethod,
    RegionSpec,
    RowStatus,
)


def _config(mode, model=None, **overrides):
    fields = {
        "mode": mode,
        "model": model or CoefficientModel.fractional(0.5),
        "n_values": [2],
        "trials": 50,
        "seed": 3,
        "workers": 1,
    }
    fields.update(overrides)
    return ExperimentConfig(**fields)


@pytest.fixture(autouse=True)
def no_redis(monkeypatch):
    """Keep tests off any Redis the environment points at."""
    monkeypatch.delenv("REDIS_URL", raising=False)
    monkeypatch.setattr("src.experiments.get_cache", lambda: Cache(redis_url=None))


class TestResolveWorkers:
    """Tests for worker resolution."""

    def test_config_wins(self, monkeypatch):
        monkeypatch.setenv("KACZEROS_WORKERS", "7")
        assert resolve_workers(_config(ExperimentMode.EXPECTED, workers=3)) == 3

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("KACZEROS_WORKERS", "5")
        assert resolve_workers(_config(ExperimentMode.EXPECTED, workers=None)) == 5


class TestExpected:
    """Tests for quadrature tables."""

    def test_constant_polynomial(self):
        records = run_expected(_config(ExperimentMode.EXPECTED, n_values=[1]))
        assert len(records) == 1
        assert records[0].value == 0.0
        assert records[0].method == RecordMethod.QUADRATURE

    def test_linear(self):
        record = run_expected(_config(ExperimentMode.EXPECTED))[0]
        assert record.value == pytest.approx(1.0, abs=1e-6)
        assert record.model == "H=0.5"
        assert record.status == RowStatus.OK

    def test_rows_in_n_order(self):
        config = _config(ExperimentMode.EXPECTED, n_values=[2, 8, 32, 64], workers=4)
        records = run_expected(config)
        assert [r.n for r in records] == [2, 8, 32, 64]
        assert [r.value for r in records] == sorted(r.value for r in records)

    def test_budget_overrun_is_reported(self):
        config = _config(ExperimentMode.EXPECTED, n_values=[64], eval_budget=10)
        record = quadrature_row(64, RegionSpec.ALL, config, Cache(redis_url=None))
        assert record.status == RowStatus.NONCONVERGED
        assert math.isnan(record.value)

    def test_wrong_mode(self):
        with pytest.raises(ValueError):
            run_expected(_config(ExperimentMode.SIMULATE))


class TestSimulate:
    """Tests for Monte Carlo campaigns."""

    def test_linear_has_one_root(self):
        records = run_simulate(_config(ExperimentMode.SIMULATE))
        assert [r.region for r in records] == list(AXIS_REGIONS)
        total = records[0]
        assert total.value == 1.0
        assert total.err == 0.0
        assert total.trials == 50
        assert total.seed == 3
        assert records[1].value + records[2].value == pytest.approx(1.0)

    def test_worker_count_does_not_change_counts(self):
        config = _config(ExperimentMode.SIMULATE, n_values=[24], trials=200)
        serial = simulate_counts(24, config, workers=1)
        parallel = simulate_counts(24, config, workers=4)
        assert serial == parallel

    def test_reproducible(self):
        config = _config(ExperimentMode.SIMULATE, n_values=[8, 16], trials=100, workers=2)
        first, second = run_simulate(config), run_simulate(config)
        assert all(a.same_result(b) for a, b in zip(first, second))

    def test_seed_matters(self):
        a = run_simulate(_config(ExperimentMode.SIMULATE, n_values=[16], trials=100))
        b = run_simulate(_config(ExperimentMode.SIMULATE, n_values=[16], trials=100, seed=4))
        assert a[0].value != b[0].value or a[1].value != b[1].value

    def test_single_trial_has_no_error_bar(self):
        records = run_simulate(_config(ExperimentMode.SIMULATE, n_values=[8], trials=1))
        assert math.isnan(records[0].err)


class TestAsymptotics:
    """Tests for asymptotic reference rows."""

    def test_hurst_symmetry(self):
        low = run_asymptotics(_config(ExperimentMode.ASYMPTOTICS, CoefficientModel.fractional(0.2), n_values=[16, 1024]))
        high = run_asymptotics(_config(ExperimentMode.ASYMPTOTICS, CoefficientModel.fractional(0.8), n_values=[16, 1024]))
        for a, b in zip(low, high):
            assert a.model == "H=0.2" and b.model == "H=0.8"
            # 1 - 0.8 is not exactly 0.2 in binary
            assert a.value == pytest.approx(b.value, rel=1e-14)
            assert (a.n, a.region, a.method, a.err) == (b.n, b.region, b.method, b.err)

    def test_limit_zero_positive(self, limit_zero):
        records = run_asymptotics(_config(ExperimentMode.ASYMPTOTICS, limit_zero, n_values=[100]))
        positive = next(r for r in records if r.region == RegionSpec.POSITIVE_AXIS)
        assert positive.value == pytest.approx(0.752527, abs=1e-6)
        assert positive.err == 0.0

    def test_limit_zero_boundary_correction(self, limit_zero):
        config = _config(ExperimentMode.ASYMPTOTICS, limit_zero, n_values=[100], boundary_correction=True)
        positive = next(r for r in run_asymptotics(config) if r.region == RegionSpec.POSITIVE_AXIS)
        assert positive.value == pytest.approx(H0_POSITIVE_LIMIT + H0_BOUNDARY_MASS, abs=1e-12)


class TestCompare:
    """Tests for the three-way comparison."""

    def test_linear(self):
        records = run_compare(_config(ExperimentMode.COMPARE, trials=40))
        assert len(records) == 3 * len(AXIS_REGIONS)
        assert [r.method for r in records[:3]] == [RecordMethod.QUADRATURE, RecordMethod.MONTECARLO, RecordMethod.ASYMPTOTIC]
        quad, mc, asym = records[:3]
        assert quad.residual_asymptotic == pytest.approx(quad.value - asym.value)
        assert mc.residual_sigma == 0.0

    def test_dispatch(self):
        records = run_experiment(_config(ExperimentMode.ASYMPTOTICS, n_values=[10]))
        assert {r.method for r in records} == {RecordMethod.ASYMPTOTIC}


@pytest.mark.slow
class TestMonteCarloAgreement:
    """Monte Carlo means against quadrature within three standard errors."""

    @pytest.mark.parametrize("n,model", [
        (64, CoefficientModel.fractional(0.5)),
        (128, CoefficientModel.fractional(0.2)),
        (128, CoefficientModel.fractional(0.8)),
        (128, CoefficientModel.limit_zero()),
    ])
    def test_compare_residuals(self, n, model):
        config = _config(ExperimentMode.COMPARE, model, n_values=[n], trials=10_000, workers=4, seed=17)
        for record in run_compare(config):
            if record.method == RecordMethod.MONTECARLO:
                assert abs(record.residual_sigma) < 3.0
                assert record.suspect_fraction < 0.01
