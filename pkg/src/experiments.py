"""
Experiment runners: quadrature tables, Monte Carlo campaigns, asymptotic
references and their comparison.

Every row is a pure function of the config and its position in the table
(wall_time_ms excepted); Monte Carlo trials draw from per-trial streams, so
the worker count never changes the numbers.
"""

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np
from dotenv import load_dotenv

from src.asymptotics import ell_table, leading_order
from src.cache import Cache, get_cache
from src.models import (
    EllSample,
    ExperimentConfig,
    ExperimentMode,
    ExperimentRecord,
    RecordMethod,
    RegionSpec,
    RootCountConfig,
    RowStatus,
    ZeroCount,
)
from src.moments import DEFAULT_EVAL_BUDGET, QuadratureBudgetError, expected_zeros
from src.rootcount import count_real_zeros
from src.sampler import sample

load_dotenv()

logger = logging.getLogger(__name__)

AXIS_REGIONS = (RegionSpec.ALL, RegionSpec.POSITIVE_AXIS, RegionSpec.NEGATIVE_AXIS)


def resolve_workers(config: ExperimentConfig) -> int:
    """Config value, else KACZEROS_WORKERS, else the CPU count."""
    if config.workers is not None:
        return config.workers
    default = str(os.cpu_count() or 1)
    return max(1, int(os.getenv("KACZEROS_WORKERS", default)))


def _elapsed_ms(start: float) -> float:
    return (time.perf_counter() - start) * 1000.0


def _check_mode(config: ExperimentConfig, mode: ExperimentMode) -> None:
    if config.mode != mode:
        raise ValueError(f"Config mode is {config.mode.value}, expected {mode.value}")


def quadrature_row(n: int, region: RegionSpec, config: ExperimentConfig, cache: Optional[Cache] = None) -> ExperimentRecord:
    """One expected_zeros row; budget overruns become a nonconverged row instead of an exception."""
    cache = cache or get_cache()
    budget = config.eval_budget or DEFAULT_EVAL_BUDGET
    start = time.perf_counter()

    result = cache.get_quadrature(n, config.model, region, config.tol)
    if result is None:
        try:
            result = expected_zeros(n, config.model, region, config.tol, eval_budget=budget)
        except QuadratureBudgetError as e:
            logger.error(f"Quadrature failed for n={n}, {config.model.descriptor}, {region.value}: {e}", exc_info=True)
            return ExperimentRecord(
                n=n, model=config.model.descriptor, region=region, method=RecordMethod.QUADRATURE,
                value=math.nan, err=math.nan, wall_time_ms=_elapsed_ms(start), status=RowStatus.NONCONVERGED,
            )
        cache.set_quadrature(n, config.model, region, config.tol, result)

    logger.info(f"E_{n} {region.value} {config.model.descriptor} = {result.value:.10f} (+/- {result.abs_err_estimate:.2e})")
    return ExperimentRecord(
        n=n, model=config.model.descriptor, region=region, method=RecordMethod.QUADRATURE,
        value=result.value, err=result.abs_err_estimate, wall_time_ms=_elapsed_ms(start),
    )


def run_expected(config: ExperimentConfig) -> List[ExperimentRecord]:
    """One quadrature row per n for config.region."""
    _check_mode(config, ExperimentMode.EXPECTED)
    cache = get_cache()
    with ThreadPoolExecutor(max_workers=resolve_workers(config)) as executor:
        futures = [executor.submit(quadrature_row, n, config.region, config, cache) for n in config.n_values]
        return [future.result() for future in futures]


def simulate_counts(n: int, config: ExperimentConfig, workers: Optional[int] = None) -> List[ZeroCount]:
    """Zero counts for trials 0..trials-1, in trial order."""
    count_config = RootCountConfig(cross_check=config.cross_check)

    def run_trial(trial_index: int) -> ZeroCount:
        coeffs = sample(n, config.model, config.seed, trial_index, config.sampling_method).coeffs
        return count_real_zeros(coeffs, count_config)

    workers = workers or resolve_workers(config)
    if workers == 1:
        return [run_trial(t) for t in range(config.trials)]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(run_trial, range(config.trials), chunksize=64))


def _mean_and_error(values: np.ndarray) -> tuple:
    mean = float(np.mean(values))
    if values.size < 2:
        return mean, math.nan
    return mean, float(np.std(values, ddof=1) / math.sqrt(values.size))


def montecarlo_rows(n: int, counts: Sequence[ZeroCount], config: ExperimentConfig, wall_time_ms: float) -> Dict[RegionSpec, ExperimentRecord]:
    """Mean +/- standard error of total, positive and negative counts."""
    suspect_fraction = sum(c.suspect for c in counts) / len(counts)
    if suspect_fraction > 0:
        logger.warning(f"n={n}, {config.model.descriptor}: {suspect_fraction:.2%} of root counts are suspect")

    samples = {
        RegionSpec.ALL: np.array([c.total for c in counts], dtype=float),
        RegionSpec.POSITIVE_AXIS: np.array([c.positive for c in counts], dtype=float),
        RegionSpec.NEGATIVE_AXIS: np.array([c.negative for c in counts], dtype=float),
    }
    rows = {}
    for region, values in samples.items():
        mean, err = _mean_and_error(values)
        rows[region] = ExperimentRecord(
            n=n, model=config.model.descriptor, region=region, method=RecordMethod.MONTECARLO,
            value=mean, err=err, trials=len(counts), seed=config.seed,
            wall_time_ms=wall_time_ms, suspect_fraction=suspect_fraction,
        )
    return rows


def run_simulate(config: ExperimentConfig) -> List[ExperimentRecord]:
    """Monte Carlo mean counts for every n."""
    _check_mode(config, ExperimentMode.SIMULATE)
    workers = resolve_workers(config)
    records = []
    for n in config.n_values:
        start = time.perf_counter()
        counts = simulate_counts(n, config, workers)
        rows = montecarlo_rows(n, counts, config, _elapsed_ms(start))
        logger.info(f"Simulated n={n}, {config.model.descriptor}: mean total {rows[RegionSpec.ALL].value:.4f} over {config.trials} trials")
        records.extend(rows[region] for region in AXIS_REGIONS)
    return records


def asymptotic_row(n: int, region: RegionSpec, config: ExperimentConfig) -> ExperimentRecord:
    return ExperimentRecord(
        n=n, model=config.model.descriptor, region=region, method=RecordMethod.ASYMPTOTIC,
        value=leading_order(n, config.model, region, config.boundary_correction), err=0.0,
    )


def run_asymptotics(config: ExperimentConfig) -> List[ExperimentRecord]:
    """Leading-order counts for the whole line and both half-lines."""
    _check_mode(config, ExperimentMode.ASYMPTOTICS)
    return [asymptotic_row(n, region, config) for n in config.n_values for region in AXIS_REGIONS]


def asymptotics_ell_table(config: ExperimentConfig) -> List[EllSample]:
    """ell samples requested through config.ell_points (FractionalIncrement only)."""
    if not config.ell_points:
        return []
    if config.model.is_limit_zero:
        raise ValueError("ell is defined for FractionalIncrement models only")
    return ell_table(config.model.h, config.ell_points)


def run_compare(config: ExperimentConfig) -> List[ExperimentRecord]:
    """
    Quadrature, Monte Carlo and asymptotic rows per (n, axis region).

    Quadrature rows carry quadrature - asymptote; Monte Carlo rows carry
    (MC - quadrature) in standard-error units.
    """
    _check_mode(config, ExperimentMode.COMPARE)
    cache = get_cache()
    workers = resolve_workers(config)
    records = []

    for n in config.n_values:
        start = time.perf_counter()
        counts = simulate_counts(n, config, workers)
        mc_rows = montecarlo_rows(n, counts, config, _elapsed_ms(start))

        for region in AXIS_REGIONS:
            quad_row = quadrature_row(n, region, config, cache)
            asym_row = asymptotic_row(n, region, config)
            mc_row = mc_rows[region]

            quad_row = quad_row.model_copy(update={"residual_asymptotic": quad_row.value - asym_row.value})
            diff = mc_row.value - quad_row.value
            if mc_row.err > 0:
                sigma = diff / mc_row.err
            elif abs(diff) <= max(quad_row.err, config.tol):
                # degenerate count (e.g. n=2 totals): agreement within quadrature accuracy
                sigma = 0.0
            else:
                sigma = math.copysign(math.inf, diff)
            mc_row = mc_row.model_copy(update={"residual_sigma": sigma})
            records.extend([quad_row, mc_row, asym_row])
    return records


RUNNERS = {
    ExperimentMode.EXPECTED: run_expected,
    ExperimentMode.SIMULATE: run_simulate,
    ExperimentMode.ASYMPTOTICS: run_asymptotics,
    ExperimentMode.COMPARE: run_compare,
}


def run_experiment(config: ExperimentConfig) -> List[ExperimentRecord]:
    """Dispatch on config.mode."""
    logger.info(f"Running {config.mode.value} for {config.model.descriptor}, n={config.n_values}")
    return RUNNERS[config.mode](config)
