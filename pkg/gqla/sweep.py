"""Coarse hyper-parameter sweep.

One training session per (alpha, n_errors, T, D) combination; every learned
code is evaluated at a single Eb/N0 and the combinations are ranked by BLER.
"""

import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

from pydantic import ValidationError

from gqla.config import TrainingConfig
from gqla.core import (
    DEFAULT_MAX_BLOCKS,
    BlerEstimate,
    BpConfig,
    ChannelSpec,
    GqlaError,
    ParityCheckMatrix,
)
from gqla.evaluate import estimate_bler
from gqla.platform.output import write_csv
from gqla.platform.parallel import parallel_map
from gqla.train import train

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "rank",
    "alpha",
    "n_errors",
    "threshold_t",
    "init_density",
    "update_count",
    "best_val_bler",
    "ebno_db",
    "p_tilde",
    "half_width",
    "converged",
]


@dataclass(frozen=True)
class SweepGrid:
    """Values tried per hyper-parameter."""

    alpha: tuple[float, ...] = tuple(round(1.2 + 0.2 * i, 10) for i in range(20))
    n_errors: tuple[int, ...] = (2, 3, 4, 5, 6)
    threshold_t: tuple[int, ...] = (10, 20, 30)
    init_density: tuple[float, ...] = (0.15, 0.25, 0.35, 0.45)

    def combinations(self) -> list[dict[str, Any]]:
        """Every combination in a fixed order."""
        return [
            {"alpha": a, "n_errors": e, "threshold_t": t, "init_density": d}
            for a, e, t, d in itertools.product(
                self.alpha, self.n_errors, self.threshold_t, self.init_density
            )
        ]


@dataclass(frozen=True)
class _SweepJob:
    config: TrainingConfig
    ebno_db: float
    bp: BpConfig
    target_rel: float
    max_blocks: int


@dataclass
class SweepResult:
    """A trained combination and its BLER."""

    config: TrainingConfig
    code: ParityCheckMatrix
    update_count: int
    best_val_bler: float | None
    estimate: BlerEstimate


def _run(job: _SweepJob) -> SweepResult:
    report = train(job.config)
    estimate = estimate_bler(
        report.code,
        ChannelSpec(job.ebno_db, job.config.dims.rate),
        job.bp,
        job.target_rel,
        job.config.seed,
        max_blocks=job.max_blocks,
    )
    return SweepResult(
        job.config, report.code, report.update_count, report.best_val_bler, estimate
    )


def sweep_configs(base: TrainingConfig, grid: SweepGrid) -> list[TrainingConfig]:
    """Base config with each grid combination applied."""
    configs: list[TrainingConfig] = []
    for combo in grid.combinations():
        try:
            values = {**base.model_dump(), **combo}
            configs.append(TrainingConfig.model_validate(values))
        except ValidationError as e:
            logger.warning("Skipping combination %s: %s", combo, e.errors()[0]["msg"])
    if not configs:
        raise GqlaError("config", "No valid combination in the sweep grid.")
    return configs


def run_sweep(
    base: TrainingConfig,
    grid: SweepGrid,
    ebno_db: float,
    iters: int = 5,
    target_rel: float = 0.1,
    max_blocks: int = DEFAULT_MAX_BLOCKS,
    workers: int | None = 1,
) -> list[SweepResult]:
    """Train every combination once; results ordered by BLER, best first."""
    jobs = [
        _SweepJob(cfg, ebno_db, BpConfig(iterations=iters), target_rel, max_blocks)
        for cfg in sweep_configs(base, grid)
    ]
    logger.info("Sweeping %d combinations.", len(jobs))
    results = parallel_map(_run, jobs, workers)
    return sorted(results, key=lambda r: r.estimate.p_tilde)


def write_sweep_csv(path: str, results: Sequence[SweepResult]) -> None:
    """Ranking table of the sweep."""
    write_csv(
        path,
        SWEEP_COLUMNS,
        (
            {
                "rank": i + 1,
                "alpha": r.config.alpha,
                "n_errors": r.config.n_errors,
                "threshold_t": r.config.threshold_t,
                "init_density": r.config.init_density,
                "update_count": r.update_count,
                "best_val_bler": r.best_val_bler,
                "ebno_db": r.estimate.ebno_db,
                "p_tilde": r.estimate.p_tilde,
                "half_width": r.estimate.half_width,
                "converged": r.estimate.converged,
            }
            for i, r in enumerate(results)
        ),
    )
