"""Channel models and the sequential block error estimator.

Training uses a controlled error channel: every word carries a fixed number
of erroneous positions with LLR -alpha, the rest +alpha. Evaluation uses BPSK
over AWGN with true LLRs. Random streams are counter based (Philox keyed by
the run seed and a stream id, counter set by the block index) so any block can
be regenerated independently of how the work was split.
"""

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
import numpy.typing as npt
from scipy.stats import norm

from gqla.core._bp import LlrVector
from gqla.core._error import GqlaError

DEFAULT_Z = 1.96
DEFAULT_MIN_BLOCKS = 100
DEFAULT_MAX_BLOCKS = 10**8

RandomSource = int | np.random.Generator


class Stream(IntEnum):
    """Independent random stream families derived from one run seed."""

    TRAINING = 1
    VALIDATION = 2
    EVALUATION = 3
    SEARCH = 4
    INIT = 5


def stream_rng(
    seed: int, stream: int, counter: int = 0, lane: int = 0
) -> np.random.Generator:
    """Get the generator for block `counter` of `stream` under `seed`.

    `lane` separates otherwise identical block sequences, e.g. one per epoch.
    """
    if min(seed, stream, counter, lane) < 0:
        raise GqlaError("config", "Seeds, streams and counters must be non-negative.")
    return np.random.Generator(
        np.random.Philox(key=[seed, stream], counter=[0, 0, lane, counter])
    )


def _rng(source: RandomSource) -> np.random.Generator:
    if isinstance(source, np.random.Generator):
        return source
    return np.random.default_rng(source)


def z_for_confidence(level: float) -> float:
    """Two sided normal quantile for a confidence level, e.g. 0.95."""
    return float(norm.ppf(0.5 + level / 2.0))


@dataclass(frozen=True)
class ErrorPatternSpec:
    """Controlled error channel used during training."""

    n_errors: int
    alpha: float

    def __post_init__(self) -> None:
        """Validate the pattern."""
        if self.n_errors < 0:
            raise GqlaError("config", "n_errors must be non-negative.")
        if self.alpha <= 0:
            raise GqlaError("config", "alpha must be positive.")


@dataclass(frozen=True)
class ChannelSpec:
    """BPSK over AWGN at a given Eb/N0 for a code of rate k/n."""

    ebno_db: float
    rate: float

    @property
    def noise_variance(self) -> float:
        """Noise variance for unit energy antipodal symbols."""
        return 1.0 / (2.0 * self.rate * 10.0 ** (self.ebno_db / 10.0))


def sample_training_llrs(
    n: int, spec: ErrorPatternSpec, seed: RandomSource, batch: int | None = None
) -> LlrVector:
    """Draw words with exactly `n_errors` entries at -alpha, the rest +alpha.

    Error positions are uniformly random and drawn independently per word.
    """
    if spec.n_errors > n:
        raise GqlaError("config", f"n_errors={spec.n_errors} exceeds n={n}.")
    rng = _rng(seed)
    base = np.full(n, spec.alpha)
    base[: spec.n_errors] = -spec.alpha
    if batch is None:
        return rng.permutation(base)
    return rng.permuted(np.tile(base, (batch, 1)), axis=1)


def awgn_llrs(
    codeword: npt.ArrayLike, chan: ChannelSpec, seed: RandomSource
) -> LlrVector:
    """Transmit bits as 1 - 2 bit over AWGN and return the channel LLRs."""
    bits = np.asarray(codeword)
    sigma2 = chan.noise_variance
    symbols = 1.0 - 2.0 * bits
    received = symbols + math.sqrt(sigma2) * _rng(seed).standard_normal(bits.shape)
    return 2.0 * received / sigma2


@dataclass
class BlerEstimate:
    """Sequential block error estimate with its Agresti-Coull interval."""

    blocks: int = 0
    block_errors: int = 0
    z: float = DEFAULT_Z
    target_rel: float = 0.1
    max_blocks: int = DEFAULT_MAX_BLOCKS
    min_blocks: int = DEFAULT_MIN_BLOCKS
    p_tilde: float = 0.5
    half_width: float = 0.5
    converged: bool = False
    ebno_db: float | None = None

    def add(self, blocks: int, block_errors: int) -> bool:
        """Merge a batch of simulated blocks; return whether to stop."""
        self.blocks += blocks
        self.block_errors += block_errors
        self.p_tilde, self.half_width, stop = agresti_coull_update(self)
        return stop

    @property
    def relative_half_width(self) -> float:
        """Half width relative to the point estimate."""
        return self.half_width / self.p_tilde

    def as_row(self) -> dict[str, float | int | bool | None]:
        """Flatten for CSV output."""
        return {
            "ebno_db": self.ebno_db,
            "blocks": self.blocks,
            "errors": self.block_errors,
            "p_tilde": self.p_tilde,
            "half_width": self.half_width,
            "converged": self.converged,
        }


def agresti_coull_interval(blocks: int, errors: int, z: float) -> tuple[float, float]:
    """Agresti-Coull point estimate and half width."""
    n_tilde = blocks + z * z
    p_tilde = (errors + z * z / 2.0) / n_tilde
    return p_tilde, z * math.sqrt(p_tilde * (1.0 - p_tilde) / n_tilde)


def agresti_coull_update(e: BlerEstimate) -> tuple[float, float, bool]:
    """Recompute the interval of `e` and decide whether sampling stops.

    Sampling stops once the half width is within `target_rel` of the point
    estimate (after at least `min_blocks` blocks), or at `max_blocks`.
    `e.converged` records which of the two happened.
    """
    if e.blocks < 1:
        raise GqlaError("system", "Agresti-Coull update needs at least one block.")
    p_tilde, half = agresti_coull_interval(e.blocks, e.block_errors, e.z)
    e.converged = e.blocks >= e.min_blocks and half <= e.target_rel * p_tilde
    return p_tilde, half, e.converged or e.blocks >= e.max_blocks


def block_errors(
    decoded: npt.ArrayLike, sent: npt.ArrayLike
) -> npt.NDArray[np.bool_]:
    """Flag words whose hard decision differs from the sent codeword anywhere."""
    return (np.asarray(decoded) != np.asarray(sent)).any(axis=-1)
