"""Flooding sum-product belief propagation and its reverse pass.

Two forward forms are provided. `bp_decode` runs on the edges of a binary
parity check matrix. `bp_decode_gated` runs on a dense relaxed matrix with
entries in [0, 1]; every message is computed for every (check, variable) pair
and gated by the matrix entry, so at a binary matrix both forms agree and the
gated form stays differentiable with respect to every entry. The gated form
keeps a tape of its intermediates which `backward` consumes.

LLR sign convention: positive favours bit 0. Arrays carry an optional leading
batch axis; single words are promoted to a batch of one internally.
"""

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import numpy.typing as npt
from scipy.special import expit

from gqla.core._code import BitArray, ParityCheckMatrix
from gqla.core._error import GqlaError

GradientMode = Literal["exact", "pass_through"]
Reduction = Literal["mean", "sum", "none"]

FloatArray = npt.NDArray[np.float64]
LlrVector = FloatArray
WGradient = FloatArray


@dataclass(frozen=True)
class BpConfig:
    """Decoder settings shared by the forward and reverse passes."""

    iterations: int = 5
    """Number of flooding iterations."""

    epsilon: float = 1e-7
    """Margin keeping the arctanh input inside [-1 + eps, 1 - eps]."""

    gradient_mode: GradientMode = "pass_through"
    """`exact` uses the arctanh derivative, `pass_through` replaces it by 1."""

    message_clamp: float | None = None
    """Optional bound on variable-to-check message magnitudes."""

    def __post_init__(self) -> None:
        """Validate ranges."""
        if self.iterations < 1:
            raise GqlaError("config", "BP needs at least one iteration.")
        if not 0.0 < self.epsilon < 1.0:
            raise GqlaError(
                "config", f"epsilon must lie in (0, 1), got {self.epsilon}."
            )
        if self.message_clamp is not None and self.message_clamp <= 0:
            raise GqlaError("config", "message_clamp must be positive.")


@dataclass
class LossValue:
    """Binary cross-entropy against the all-zero codeword."""

    total: float
    per_bit: FloatArray = field(repr=False)


@dataclass
class _IterationTape:
    mu_vc: FloatArray
    tanh_vc: FloatArray
    factors: FloatArray
    prefix: FloatArray
    suffix: FloatArray
    products: FloatArray


@dataclass
class BpWorkspace:
    """Messages of one gated decode, kept for the reverse pass."""

    relaxed_h: FloatArray
    llr: FloatArray
    mu_cv: list[FloatArray]
    """Check-to-variable messages; entry 0 is the all-zero initial state."""

    iterations: list[_IterationTape]
    lambda_out: FloatArray

    @property
    def mu_vc(self) -> list[FloatArray]:
        """Variable-to-check messages of every iteration."""
        return [it.mu_vc for it in self.iterations]


def _as_batch(llr: npt.ArrayLike) -> tuple[FloatArray, bool]:
    values = np.asarray(llr, dtype=np.float64)
    if values.ndim == 1:
        return values[None, :], True
    return values, False


def _as_full(h: ParityCheckMatrix | npt.ArrayLike) -> FloatArray:
    if isinstance(h, ParityCheckMatrix):
        return h.full.astype(np.float64)
    return np.atleast_2d(np.asarray(h, dtype=np.float64))


def _exclusive_product(
    factors: FloatArray,
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Leave-one-out products along the last axis, without division."""
    ones = np.ones_like(factors[..., :1])
    prefix = np.cumprod(np.concatenate([ones, factors[..., :-1]], axis=-1), axis=-1)
    suffix = np.cumprod(
        np.concatenate([ones, factors[..., :0:-1]], axis=-1), axis=-1
    )[..., ::-1]
    return prefix * suffix, prefix, suffix


def _exclusive_product_backward(
    grad: FloatArray, factors: FloatArray, prefix: FloatArray, suffix: FloatArray
) -> FloatArray:
    """Gradient of the leave-one-out products with respect to their factors."""
    n = factors.shape[-1]
    after = np.zeros_like(factors)
    before = np.zeros_like(factors)
    # after[u] = sum_{v>u} grad[v] suffix[v] prod_{u<v'<v} f[v'], before[] mirrors it
    for u in range(n - 2, -1, -1):
        nxt = u + 1
        after[..., u] = grad[..., nxt] * suffix[..., nxt]
        after[..., u] += factors[..., nxt] * after[..., nxt]
    for u in range(1, n):
        prv = u - 1
        before[..., u] = grad[..., prv] * prefix[..., prv]
        before[..., u] += factors[..., prv] * before[..., prv]
    return prefix * after + suffix * before


def hard_decision(lambda_out: npt.ArrayLike) -> BitArray:
    """Decide bit 1 iff the posterior LLR is negative; ties decode to 0."""
    return (np.asarray(lambda_out) < 0).astype(np.uint8)


def bp_decode(
    h: ParityCheckMatrix | npt.ArrayLike, llr: npt.ArrayLike, cfg: BpConfig
) -> tuple[FloatArray, BitArray]:
    """Decode with the flooding sum-product schedule on the edges of `h`."""
    edges = _as_full(h) != 0
    lam, single = _as_batch(llr)
    bound = 1.0 - cfg.epsilon
    mu = np.zeros((lam.shape[0], *edges.shape))
    for _ in range(cfg.iterations):
        total = mu.sum(axis=1, keepdims=True)
        mu_vc = lam[:, None, :] + total - mu
        if cfg.message_clamp is not None:
            mu_vc = np.clip(mu_vc, -cfg.message_clamp, cfg.message_clamp)
        factors = np.where(edges, np.tanh(mu_vc / 2.0), 1.0)
        products, _, _ = _exclusive_product(factors)
        mu = np.where(edges, 2.0 * np.arctanh(np.clip(products, -bound, bound)), 0.0)
    lambda_out = lam + mu.sum(axis=1)
    if single:
        lambda_out = lambda_out[0]
    return lambda_out, hard_decision(lambda_out)


def bp_decode_gated(
    relaxed_h: npt.ArrayLike, llr: npt.ArrayLike, cfg: BpConfig
) -> tuple[FloatArray, BpWorkspace]:
    """Decode on a dense relaxed matrix and record the tape.

    Check products use the gate 1 + h (tanh(m/2) - 1) and sums weight each
    message by h, which reproduces `bp_decode` exactly at binary h.
    """
    h = np.atleast_2d(np.asarray(relaxed_h, dtype=np.float64))
    if ((h < 0.0) | (h > 1.0)).any() or not np.isfinite(h).all():
        raise GqlaError("system", "Relaxed parity check entries must lie in [0, 1].")
    lam, single = _as_batch(llr)
    bound = 1.0 - cfg.epsilon

    mu = np.zeros((lam.shape[0], *h.shape))
    tape = BpWorkspace(relaxed_h=h, llr=lam, mu_cv=[mu], iterations=[], lambda_out=lam)
    for _ in range(cfg.iterations):
        gated = h * mu
        mu_vc = lam[:, None, :] + gated.sum(axis=1, keepdims=True) - gated
        clamped = mu_vc
        if cfg.message_clamp is not None:
            clamped = np.clip(mu_vc, -cfg.message_clamp, cfg.message_clamp)
        tanh_vc = np.tanh(clamped / 2.0)
        factors = 1.0 + h * (tanh_vc - 1.0)
        products, prefix, suffix = _exclusive_product(factors)
        mu = 2.0 * np.arctanh(np.clip(products, -bound, bound))
        tape.iterations.append(
            _IterationTape(mu_vc, tanh_vc, factors, prefix, suffix, products)
        )
        tape.mu_cv.append(mu)

    tape.lambda_out = lam + (h * mu).sum(axis=1)
    return (tape.lambda_out[0] if single else tape.lambda_out), tape


def bce_loss(lambda_out: npt.ArrayLike) -> LossValue:
    """Per-bit loss softplus(-lambda), i.e. -log P(bit = 0)."""
    per_bit = np.logaddexp(0.0, -np.asarray(lambda_out, dtype=np.float64))
    return LossValue(total=float(per_bit.sum()), per_bit=per_bit)


def backward(
    tape: BpWorkspace, cfg: BpConfig, reduction: Reduction = "mean"
) -> WGradient:
    """Reverse pass of the BCE loss through a recorded gated decode.

    Returns the gradient with respect to the W block of the relaxed matrix;
    identity columns receive none. With `reduction="none"` the leading axis
    holds one gradient per sample, otherwise the batch is averaged or summed.
    """
    h = tape.relaxed_h
    m, n = h.shape
    bound = 1.0 - cfg.epsilon

    grad_out = -expit(-tape.lambda_out)
    if reduction == "mean":
        grad_out = grad_out / tape.lambda_out.shape[0]

    grad_h = grad_out[:, None, :] * tape.mu_cv[-1]
    grad_mu = grad_out[:, None, :] * h
    for t in range(len(tape.iterations) - 1, -1, -1):
        it = tape.iterations[t]
        if cfg.gradient_mode == "exact":
            clipped = np.clip(it.products, -bound, bound)
            inside = (it.products > -bound) & (it.products < bound)
            grad_products = np.where(inside, 2.0 * grad_mu / (1.0 - clipped**2), 0.0)
        else:
            grad_products = 2.0 * grad_mu

        grad_factors = _exclusive_product_backward(
            grad_products, it.factors, it.prefix, it.suffix
        )
        grad_h += grad_factors * (it.tanh_vc - 1.0)
        grad_vc = grad_factors * h * (1.0 - it.tanh_vc**2) / 2.0
        if cfg.message_clamp is not None:
            grad_vc = np.where(np.abs(it.mu_vc) < cfg.message_clamp, grad_vc, 0.0)

        grad_gated = grad_vc.sum(axis=1, keepdims=True) - grad_vc
        mu_prev = tape.mu_cv[t]
        grad_h += grad_gated * mu_prev
        grad_mu = grad_gated * h

    grad_w = grad_h[..., : n - m]
    if reduction == "none":
        return grad_w
    return grad_w.sum(axis=0)
