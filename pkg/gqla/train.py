"""Services for the train command.

One session trains the W block of a standard form code: every step draws a
batch of controlled-error words, decodes them with the gated decoder at the
current binary weights, back-propagates the cross-entropy loss and hands the
gradient to the optimizer. Each epoch ends with a validation BLER over AWGN;
the code with the lowest validation BLER is returned.
"""

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from gqla.codefile import CodeMetadata
from gqla.config import TrainingConfig
from gqla.core import (
    BpConfig,
    ChannelSpec,
    ParityCheckMatrix,
    Stream,
    WGradient,
    backward,
    bp_decode_gated,
    get_optimizer,
    init_weights,
    sample_training_llrs,
    stream_rng,
)
from gqla.evaluate import estimate_bler
from gqla.platform.output import write_csv
from gqla.platform.parallel import parallel_map

logger = logging.getLogger(__name__)

TRAINING_LOG_COLUMNS = [
    "epoch",
    "steps",
    "val_bler",
    "val_half_width",
    "val_converged",
    "updates",
    "effective_updates",
    "changed_bits",
]

SESSION_COLUMNS = [
    "session",
    "seed",
    "update_count",
    "effective_update_count",
    "best_epoch",
    "best_val_bler",
    "epochs",
    "wall_time_s",
]


@dataclass
class EpochRecord:
    """Validation result and optimizer activity of one epoch."""

    epoch: int
    first_step: int
    last_step: int
    val_bler: float
    val_half_width: float
    val_converged: bool
    updates: int
    """Cumulative update events M."""

    effective_updates: int
    """Cumulative update events that flipped at least one bit."""

    changed_bits: int
    """Bits flipped during this epoch."""

    def as_row(self) -> dict[str, float | int | str | bool]:
        """Flatten for the training log."""
        return {
            "epoch": self.epoch,
            "steps": f"{self.first_step}-{self.last_step}",
            "val_bler": self.val_bler,
            "val_half_width": self.val_half_width,
            "val_converged": self.val_converged,
            "updates": self.updates,
            "effective_updates": self.effective_updates,
            "changed_bits": self.changed_bits,
        }


@dataclass
class TrainingReport:
    """Outcome of one training session."""

    config: TrainingConfig
    code: ParityCheckMatrix
    update_count: int = 0
    effective_update_count: int = 0
    history: list[EpochRecord] = field(default_factory=list)
    best_epoch: int | None = None
    wall_time_s: float = 0.0

    @property
    def best_val_bler(self) -> float | None:
        """Validation BLER of the returned code."""
        if self.best_epoch is None:
            return None
        return self.history[self.best_epoch].val_bler


def compute_gradient(
    code: ParityCheckMatrix,
    llrs: npt.NDArray[np.float64],
    bp: BpConfig,
    per_sample: bool,
) -> WGradient:
    """Loss gradient with respect to W at a binary code.

    Batch mean for mini-batch optimizers, one gradient per word otherwise.
    """
    _, tape = bp_decode_gated(code.full.astype(np.float64), llrs, bp)
    return backward(tape, bp, reduction="none" if per_sample else "mean")


def train(cfg: TrainingConfig, workers: int | None = 1) -> TrainingReport:
    """Run one training session."""
    started = time.perf_counter()
    spec = cfg.optimizer_spec
    initial = init_weights(spec, cfg.dims, cfg.density, [cfg.seed, int(Stream.INIT)])
    optimizer = get_optimizer(spec, initial)
    report = TrainingReport(config=cfg, code=optimizer.code)
    channel = ChannelSpec(cfg.val_ebno_db, cfg.dims.rate)
    rng = stream_rng(cfg.seed, Stream.TRAINING)
    logger.info(
        "Training %s code with %s, seed %d.", cfg.dims, spec.variant, cfg.seed
    )

    best_bler = math.inf
    since_best = 0
    step = 0
    for epoch in range(cfg.max_epochs):
        first_step = step
        changed_bits = 0
        for _ in range(cfg.steps_per_epoch):
            llrs = sample_training_llrs(
                cfg.n, cfg.error_pattern, rng, batch=cfg.batch_size
            )
            grad = compute_gradient(
                optimizer.code, llrs, cfg.train_bp, spec.per_sample
            )
            outcome = optimizer.step(grad)
            if outcome.updated:
                report.update_count += 1
                if outcome.changed > 0:
                    report.effective_update_count += 1
            changed_bits += outcome.changed
            step += 1

        estimate = estimate_bler(
            optimizer.code,
            channel,
            cfg.val_bp,
            cfg.val_target_rel,
            cfg.seed,
            "all_zero",
            stream=Stream.VALIDATION,
            lane=epoch,
            max_blocks=cfg.val_max_blocks,
            workers=workers,
        )
        record = EpochRecord(
            epoch=epoch,
            first_step=first_step,
            last_step=step - 1,
            val_bler=estimate.p_tilde,
            val_half_width=estimate.half_width,
            val_converged=estimate.converged,
            updates=report.update_count,
            effective_updates=report.effective_update_count,
            changed_bits=changed_bits,
        )
        report.history.append(record)
        logger.info(
            "Epoch %d: val BLER %.3e +- %.2e, M=%d, %d bits changed.",
            epoch,
            record.val_bler,
            record.val_half_width,
            record.updates,
            changed_bits,
        )
        if not estimate.converged:
            logger.warning(
                "Epoch %d validation stopped at %d blocks without converging.",
                epoch,
                estimate.blocks,
            )

        if record.val_bler < best_bler:
            best_bler = record.val_bler
            report.best_epoch = epoch
            report.code = optimizer.code
            since_best = 0
        else:
            since_best += 1
            if since_best >= cfg.patience:
                logger.info("No improvement for %d epochs, stopping.", since_best)
                break

    report.wall_time_s = time.perf_counter() - started
    return report


def count_updates(report: TrainingReport) -> int:
    """Number of update events M performed by the session."""
    return report.update_count


def session_configs(cfg: TrainingConfig, sessions: int) -> list[TrainingConfig]:
    """Configs of consecutive sessions with seeds seed, seed + 1, ..."""
    return [cfg.model_copy(update={"seed": cfg.seed + i}) for i in range(sessions)]


def train_sessions(
    cfg: TrainingConfig, sessions: int, workers: int | None = 1
) -> list[TrainingReport]:
    """Run independent sessions, one per process when workers allow."""
    configs = session_configs(cfg, sessions)
    if sessions == 1:
        return [train(cfg, workers)]
    return parallel_map(train, configs, workers)


def code_metadata(report: TrainingReport) -> CodeMetadata:
    """Provenance stored with a learned code."""
    cfg = report.config
    return CodeMetadata(
        alpha=cfg.alpha,
        n_errors=cfg.n_errors,
        threshold_t=cfg.threshold_t,
        init_density=cfg.init_density,
        batch_size=cfg.batch_size,
        seed=cfg.seed,
        update_count=report.update_count,
        optimizer=cfg.optimizer,
    )


def write_training_log(path: str, report: TrainingReport) -> None:
    """Write one CSV row per epoch."""
    write_csv(path, TRAINING_LOG_COLUMNS, (r.as_row() for r in report.history))


def write_session_summary(path: str, reports: list[TrainingReport]) -> None:
    """Write one CSV row per session and a closing total."""
    rows: list[dict[str, float | int | str | bool | None]] = [
        {
            "session": i,
            "seed": r.config.seed,
            "update_count": r.update_count,
            "effective_update_count": r.effective_update_count,
            "best_epoch": r.best_epoch,
            "best_val_bler": r.best_val_bler,
            "epochs": len(r.history),
            "wall_time_s": r.wall_time_s,
        }
        for i, r in enumerate(reports)
    ]
    rows.append(
        {
            "session": "total",
            "update_count": sum(r.update_count for r in reports),
            "effective_update_count": sum(r.effective_update_count for r in reports),
        }
    )
    write_csv(path, SESSION_COLUMNS, rows)
