"""Discrete levels learning optimizers for the binary part of H.

GQLA optimizers look only at gradient signs: a positive sign pushes a weight
to 0, a negative sign to 1. The Update Matrix variants accumulate signs in
integer counters and flip the indicated bits once a counter reaches the
threshold T, then reset every counter. DSF keeps real weights behind a step
function and applies plain gradient descent through a straight-through
estimator.

sign(0) = 0 and step(0) = 0 throughout.
"""

from abc import ABC, ABCMeta, abstractmethod
from dataclasses import dataclass
from typing import Literal

import numpy as np
import numpy.typing as npt
from typing_extensions import override

from gqla.core._bp import FloatArray, WGradient
from gqla.core._code import (
    BitArray,
    CodeDimensions,
    DensitySpec,
    ParityCheckMatrix,
    Seed,
    sample_w,
)
from gqla.core._error import GqlaError

OptimizerVariant = Literal[
    "mb_gqla", "mb_gqla_update_matrix", "s_gqla_update_matrix", "dsf"
]

QuantizedGradient = npt.NDArray[np.int8]


@dataclass(frozen=True)
class OptimizerSpec:
    """Optimizer choice and its hyper-parameters."""

    variant: OptimizerVariant = "mb_gqla_update_matrix"
    threshold_t: int = 20
    """Update Matrix threshold T."""

    learning_rate: float = 1.0
    """DSF only."""

    init_magnitude: float = 1e-3
    """DSF only, initial |w_real| = V."""

    def __post_init__(self) -> None:
        """Validate hyper-parameters."""
        if self.threshold_t < 1:
            raise GqlaError("config", "threshold_t must be at least 1.")
        if self.variant == "dsf" and self.init_magnitude <= 0:
            raise GqlaError("config", "init_magnitude must be positive for dsf.")

    @property
    def per_sample(self) -> bool:
        """Whether the optimizer consumes per-sample gradients."""
        return self.variant == "s_gqla_update_matrix"


@dataclass(frozen=True, eq=False)
class UpdateMatrix:
    """Integer sign accumulators, one per element of W."""

    u: npt.NDArray[np.int64]
    threshold_t: int

    @classmethod
    def zeros(cls, shape: tuple[int, int], threshold_t: int) -> "UpdateMatrix":
        """Create a reset Update Matrix."""
        return cls(np.zeros(shape, dtype=np.int64), threshold_t)

    @property
    def peak(self) -> int:
        """Largest counter magnitude."""
        return int(np.abs(self.u).max(initial=0))


@dataclass
class DsfState:
    """Real weights behind a step function."""

    w_real: FloatArray
    init_magnitude: float

    @property
    def binary(self) -> BitArray:
        """Forward view step(w_real), with step(0) = 0."""
        return (self.w_real > 0).astype(np.uint8)


@dataclass
class StepOutcome:
    """Effect of one optimizer step on the binary weights."""

    updated: bool = False
    """An update event: a flush for Update Matrix variants, any flip otherwise."""

    changed: int = 0
    """Number of bits actually flipped."""


def quantize(grad: WGradient) -> QuantizedGradient:
    """Quantize a gradient to its elementwise sign."""
    return np.sign(grad).astype(np.int8)


def mb_gqla_step(w: ParityCheckMatrix, grad: WGradient) -> ParityCheckMatrix:
    """Set every weight to the value its gradient sign points to."""
    q = quantize(grad)
    bits = np.where(q > 0, 0, np.where(q < 0, 1, w.w)).astype(np.uint8)
    return ParityCheckMatrix(w.dims, bits)


def update_matrix_accumulate(
    u: UpdateMatrix, q: QuantizedGradient
) -> tuple[UpdateMatrix, bool]:
    """Add one quantized gradient to the counters; flag a pending flush."""
    if u.peak >= u.threshold_t:
        raise GqlaError(
            "system", "Update Matrix reached its threshold without a flush."
        )
    counters = u.u + q.astype(np.int64)
    updated = UpdateMatrix(counters, u.threshold_t)
    return updated, updated.peak == u.threshold_t


def update_matrix_flush(
    w: ParityCheckMatrix, u: UpdateMatrix, threshold_t: int
) -> tuple[ParityCheckMatrix, UpdateMatrix, int]:
    """Flip bits whose counters reached +-T, then reset all counters.

    +T drives a weight to 0 and -T to 1; weights already there stay put.
    """
    if u.peak < threshold_t:
        raise GqlaError(
            "system", f"Flush requested below threshold ({u.peak} < {threshold_t})."
        )
    bits = np.array(w.w)
    bits[u.u >= threshold_t] = 0
    bits[u.u <= -threshold_t] = 1
    changed = int((bits != w.w).sum())
    return (
        ParityCheckMatrix(w.dims, bits),
        UpdateMatrix.zeros(u.u.shape, threshold_t),
        changed,
    )


def s_gqla_batch_quantize(
    per_sample_grads: list[WGradient] | FloatArray,
) -> QuantizedGradient:
    """Majority vote of per-sample gradient signs: sign(sum(sign(g)))."""
    grads = np.asarray(per_sample_grads)
    if grads.ndim != 3 or grads.shape[0] == 0:
        raise GqlaError("system", "S-GQLA needs a non-empty list of gradients.")
    votes = np.sign(grads).astype(np.int64).sum(axis=0)
    return np.sign(votes).astype(np.int8)


def dsf_step(state: DsfState, grad: WGradient, lr: float) -> DsfState:
    """Plain gradient descent on the real weights, no momentum."""
    return DsfState(state.w_real - lr * grad, state.init_magnitude)


def init_weights(
    spec: OptimizerSpec, dims: CodeDimensions, density: DensitySpec, seed: Seed
) -> ParityCheckMatrix | DsfState:
    """Draw initial weights at the given ones density.

    GQLA variants get a binary W ~ Bernoulli(D). DSF gets +V with probability D,
    -V otherwise, so its binary view has the same density.
    """
    w = sample_w(dims, density, seed)
    if spec.variant != "dsf":
        return w
    magnitude = spec.init_magnitude
    return DsfState(np.where(w.w == 1, magnitude, -magnitude), magnitude)


class Optimizer(ABC, metaclass=ABCMeta):
    """A stateful optimizer owning the trainable weights of one run."""

    spec: OptimizerSpec

    @property
    @abstractmethod
    def code(self) -> ParityCheckMatrix:
        """Current binary code."""
        raise NotImplementedError

    @abstractmethod
    def step(self, grad: WGradient) -> StepOutcome:
        """Apply one gradient (per-sample gradients for S-GQLA)."""
        raise NotImplementedError


class MbGqla(Optimizer):
    """Mini-batch GQLA without accumulation."""

    def __init__(self, spec: OptimizerSpec, initial: ParityCheckMatrix) -> None:
        """Create the optimizer at the initial code."""
        self.spec = spec
        self._code = initial

    @property
    @override
    def code(self) -> ParityCheckMatrix:
        return self._code

    @override
    def step(self, grad: WGradient) -> StepOutcome:
        updated = mb_gqla_step(self._code, grad)
        changed = int((updated.w != self._code.w).sum())
        self._code = updated
        return StepOutcome(updated=changed > 0, changed=changed)


@dataclass
class _Counters:
    matrix: UpdateMatrix
    flushes: int = 0


class MbGqlaUpdateMatrix(Optimizer):
    """Mini-batch GQLA with an Update Matrix."""

    def __init__(self, spec: OptimizerSpec, initial: ParityCheckMatrix) -> None:
        """Create the optimizer with reset counters."""
        self.spec = spec
        self._code = initial
        self._counters = _Counters(
            UpdateMatrix.zeros(initial.w.shape, spec.threshold_t)
        )

    @property
    @override
    def code(self) -> ParityCheckMatrix:
        return self._code

    @property
    def update_matrix(self) -> UpdateMatrix:
        """Current counters."""
        return self._counters.matrix

    def _quantize(self, grad: WGradient) -> QuantizedGradient:
        return quantize(grad)

    @override
    def step(self, grad: WGradient) -> StepOutcome:
        matrix, flush = update_matrix_accumulate(
            self._counters.matrix, self._quantize(grad)
        )
        if not flush:
            self._counters.matrix = matrix
            return StepOutcome()

        self._code, self._counters.matrix, changed = update_matrix_flush(
            self._code, matrix, self.spec.threshold_t
        )
        self._counters.flushes += 1
        return StepOutcome(updated=True, changed=changed)


class SGqlaUpdateMatrix(MbGqlaUpdateMatrix):
    """Stochastic GQLA: per-sample sign votes feed the Update Matrix."""

    @override
    def _quantize(self, grad: WGradient) -> QuantizedGradient:
        return s_gqla_batch_quantize(grad)


class Dsf(Optimizer):
    """Straight-through real weights trained by gradient descent."""

    def __init__(self, spec: OptimizerSpec, initial: DsfState) -> None:
        """Create the optimizer at the initial real weights."""
        self.spec = spec
        self.state = initial
        self._dims = CodeDimensions(
            n=sum(initial.w_real.shape), k=initial.w_real.shape[1]
        )

    @property
    @override
    def code(self) -> ParityCheckMatrix:
        return ParityCheckMatrix(self._dims, self.state.binary)

    @override
    def step(self, grad: WGradient) -> StepOutcome:
        before = self.state.binary
        self.state = dsf_step(self.state, grad, self.spec.learning_rate)
        changed = int((self.state.binary != before).sum())
        return StepOutcome(updated=changed > 0, changed=changed)


def get_optimizer(
    spec: OptimizerSpec, initial: ParityCheckMatrix | DsfState
) -> Optimizer:
    """Get the optimizer for a variant, starting from `initial` weights."""
    if spec.variant == "dsf":
        if not isinstance(initial, DsfState):
            raise GqlaError("system", "DSF needs real-valued initial weights.")
        return Dsf(spec, initial)
    if not isinstance(initial, ParityCheckMatrix):
        raise GqlaError("system", f"{spec.variant} needs a binary initial code.")
    if spec.variant == "mb_gqla":
        return MbGqla(spec, initial)
    if spec.variant == "s_gqla_update_matrix":
        return SGqlaUpdateMatrix(spec, initial)
    return MbGqlaUpdateMatrix(spec, initial)
