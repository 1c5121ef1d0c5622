"""Services for the eval command.

Block error rates are estimated by Monte-Carlo transmission over AWGN. Blocks
are simulated in rounds of `batch_blocks`; the stop rule is applied after each
round in order, and each block draws its message and noise from its own
counter-based stream, so an estimate is the same for any number of workers.
"""

import csv
import logging
import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from gqla.core import (
    DEFAULT_MAX_BLOCKS,
    DEFAULT_MIN_BLOCKS,
    DEFAULT_Z,
    BlerEstimate,
    BpConfig,
    ChannelSpec,
    GqlaError,
    ParityCheckMatrix,
    Stream,
    awgn_llrs,
    block_errors,
    bp_decode,
    build_generator,
    encode,
    stream_rng,
)
from gqla.platform.output import write_csv
from gqla.platform.parallel import resolve_workers, worker_pool

EvalMode = Literal["full_encoder", "all_zero"]

BLER_COLUMNS = ["ebno_db", "blocks", "errors", "p_tilde", "half_width", "converged"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BlockRange:
    """A contiguous run of block indices simulated by one worker."""

    h: ParityCheckMatrix
    chan: ChannelSpec
    bp: BpConfig
    mode: EvalMode
    seed: int
    stream: int
    lane: int
    start: int
    count: int


def simulate_blocks(job: BlockRange) -> int:
    """Transmit and decode blocks [start, start + count); count block errors."""
    n, k = job.h.dims.n, job.h.dims.k
    generator = build_generator(job.h) if job.mode == "full_encoder" else None
    codewords = np.zeros((job.count, n), dtype=np.uint8)
    llrs = np.empty((job.count, n))
    for i in range(job.count):
        rng = stream_rng(job.seed, job.stream, job.start + i, job.lane)
        if generator is not None:
            codewords[i] = encode(generator, rng.integers(0, 2, k, dtype=np.uint8))
        llrs[i] = awgn_llrs(codewords[i], job.chan, rng)
    _, decoded = bp_decode(job.h, llrs, job.bp)
    return int(block_errors(decoded, codewords).sum())


def estimate_bler(
    h: ParityCheckMatrix,
    chan: ChannelSpec,
    iters: int | BpConfig,
    target_rel: float,
    seed: int,
    mode: EvalMode = "full_encoder",
    *,
    stream: int = Stream.EVALUATION,
    lane: int = 0,
    max_blocks: int = DEFAULT_MAX_BLOCKS,
    min_blocks: int = DEFAULT_MIN_BLOCKS,
    z: float = DEFAULT_Z,
    batch_blocks: int = 1000,
    workers: int | None = 1,
) -> BlerEstimate:
    """Estimate the block error rate of `h` on a channel.

    Runs until the Agresti-Coull half width is within `target_rel` of the
    point estimate or `max_blocks` blocks were simulated; the latter is
    reported with `converged=False`.
    """
    if target_rel <= 0:
        raise GqlaError("config", "Target relative half width must be positive.")
    if max_blocks < 1 or batch_blocks < 1:
        raise GqlaError("config", "Block limits must be positive.")
    bp = iters if isinstance(iters, BpConfig) else BpConfig(iterations=iters)
    estimate = BlerEstimate(
        z=z,
        target_rel=target_rel,
        max_blocks=max_blocks,
        min_blocks=min_blocks,
        ebno_db=chan.ebno_db,
    )
    job = BlockRange(h, chan, bp, mode, seed, int(stream), lane, 0, 0)

    rounds = resolve_workers(workers)
    with worker_pool(rounds) as executor:
        next_block = 0
        stop = False
        while not stop:
            jobs: list[BlockRange] = []
            for _ in range(rounds):
                count = min(batch_blocks, max_blocks - next_block)
                if count <= 0:
                    break
                jobs.append(replace(job, start=next_block, count=count))
                next_block += count
            if not jobs:
                break
            for done, errors in zip(jobs, executor.map(simulate_blocks, jobs)):
                stop = estimate.add(done.count, errors)
                if stop:
                    break

    logger.debug(
        "Eb/N0 %.2f dB: %d errors in %d blocks.",
        chan.ebno_db,
        estimate.block_errors,
        estimate.blocks,
    )
    return estimate


def parse_range(text: str) -> list[float]:
    """Parse `start:stop:step` (inclusive), a comma list or a single value."""
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ValueError(text)
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise GqlaError(
                    "config", f"Range '{text}' needs step > 0 and stop >= start."
                )
            count = math.floor((stop - start) / step + 1e-9) + 1
            return [round(start + i * step, 10) for i in range(count)]
        values = [float(p) for p in text.split(",") if p.strip()]
        if not values:
            raise ValueError(text)
        return values
    except ValueError as e:
        raise GqlaError("config", f"Invalid range '{text}'.") from e


def evaluate_range(
    h: ParityCheckMatrix,
    ebno_list: list[float],
    bp: BpConfig,
    target_rel: float = 0.1,
    seed: int = 0,
    mode: EvalMode = "full_encoder",
    max_blocks: int = DEFAULT_MAX_BLOCKS,
    workers: int | None = 1,
) -> list[BlerEstimate]:
    """Estimate the BLER of one code at every Eb/N0 point."""
    results: list[BlerEstimate] = []
    for ebno_db in ebno_list:
        estimate = estimate_bler(
            h,
            ChannelSpec(ebno_db, h.dims.rate),
            bp,
            target_rel,
            seed,
            mode,
            max_blocks=max_blocks,
            workers=workers,
        )
        logger.info(
            "Eb/N0 %.2f dB: BLER %.3e +- %.2e over %d blocks%s.",
            ebno_db,
            estimate.p_tilde,
            estimate.half_width,
            estimate.blocks,
            "" if estimate.converged else " (unconverged)",
        )
        results.append(estimate)
    return results


def write_bler_csv(path: str, estimates: list[BlerEstimate]) -> None:
    """Write one CSV row per Eb/N0 point."""
    write_csv(path, BLER_COLUMNS, (e.as_row() for e in estimates))


def read_bler_csv(path: str) -> dict[float, float]:
    """Map Eb/N0 to the BLER point estimate of an eval CSV."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            rows = list(csv.DictReader(f))
    except OSError as e:
        raise GqlaError("config", f"Cannot read BLER file {path}: {e}.") from e
    points: dict[float, float] = {}
    for line_no, row in enumerate(rows, start=2):
        try:
            points[float(row["ebno_db"])] = float(row["p_tilde"])
        except (KeyError, TypeError, ValueError) as e:
            raise GqlaError(
                "format", f"{path} line {line_no}: needs ebno_db and p_tilde values."
            ) from e
    if not points:
        raise GqlaError("format", f"{path} holds no BLER rows.")
    return points
