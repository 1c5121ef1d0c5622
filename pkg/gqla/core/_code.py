"""Systematic linear block codes over GF(2).

A code is held in standard form H = [W | I], where W is the (n-k) x k binary
part that training is allowed to change. Codewords are laid out as
[message (k bits) | parity (n-k bits)], which is the only ordering for which
the generator [I | W^T] satisfies G.H^T = 0 with H in standard form.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from gqla.core._error import GqlaError

BitArray = npt.NDArray[np.uint8]
Seed = int | Sequence[int]


def _frozen(array: npt.ArrayLike) -> BitArray:
    bits = np.array(array, dtype=np.uint8)
    bits.setflags(write=False)
    return bits


@dataclass(frozen=True)
class CodeDimensions:
    """Codeword length `n` and message length `k` in bits."""

    n: int
    k: int

    def __post_init__(self) -> None:
        """Validate 0 < k < n."""
        if not 0 < self.k < self.n:
            raise GqlaError(
                "config",
                f"Code dimensions must satisfy 0 < k < n, got ({self.n},{self.k}).",
            )

    @property
    def m(self) -> int:
        """Number of parity checks."""
        return self.n - self.k

    @property
    def rate(self) -> float:
        """Code rate k/n."""
        return self.k / self.n

    def __str__(self) -> str:
        """Render as the usual (n,k) pair."""
        return f"({self.n},{self.k})"


@dataclass(frozen=True)
class DensitySpec:
    """Bernoulli probability that an element of W is 1."""

    p: float

    def __post_init__(self) -> None:
        """Validate 0 <= p <= 1."""
        if not 0.0 <= self.p <= 1.0:
            raise GqlaError("config", f"Density must lie in [0, 1], got {self.p}.")


@dataclass(frozen=True, eq=False)
class ParityCheckMatrix:
    """Parity check matrix in standard form H = [W | I]."""

    dims: CodeDimensions
    w: BitArray = field(repr=False)

    def __post_init__(self) -> None:
        """Freeze W and check its shape and alphabet."""
        w = np.asarray(self.w)
        if w.shape != (self.dims.m, self.dims.k):
            raise GqlaError(
                "system",
                f"W must have shape {(self.dims.m, self.dims.k)} for code "
                f"{self.dims}, got {w.shape}.",
            )
        if not np.isin(w, (0, 1)).all():
            raise GqlaError("system", "W entries must be exactly 0 or 1.")
        object.__setattr__(self, "w", _frozen(w))

    @classmethod
    def from_w(cls, w: npt.ArrayLike) -> "ParityCheckMatrix":
        """Create the matrix from W alone, inferring the dimensions."""
        bits = np.asarray(w)
        m, k = bits.shape
        return cls(CodeDimensions(n=m + k, k=k), bits)

    @property
    def full(self) -> BitArray:
        """The complete matrix [W | I] as an (n-k) x n array."""
        m = self.dims.m
        return _frozen(np.hstack([self.w, np.eye(m, dtype=np.uint8)]))

    @property
    def density(self) -> float:
        """Fraction of ones in W."""
        return float(self.w.mean())

    def __eq__(self, other: object) -> bool:
        """Compare dimensions and bits."""
        if not isinstance(other, ParityCheckMatrix):
            return NotImplemented
        return self.dims == other.dims and bool(np.array_equal(self.w, other.w))

    def __hash__(self) -> int:
        """Hash the packed bits."""
        return hash((self.dims, np.packbits(self.w).tobytes()))


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """Systematic generator matrix [I_k | W^T]."""

    dims: CodeDimensions
    rows: BitArray = field(repr=False)


def build_generator(h: ParityCheckMatrix) -> GeneratorMatrix:
    """Build the systematic generator matrix of a standard form code."""
    k = h.dims.k
    rows = np.hstack([np.eye(k, dtype=np.uint8), h.w.T])
    return GeneratorMatrix(h.dims, _frozen(rows))


def encode(g: GeneratorMatrix, u: npt.ArrayLike) -> BitArray:
    """Encode one message, or a batch of messages on the leading axis."""
    message = np.asarray(u)
    if message.shape[-1] != g.dims.k:
        raise GqlaError(
            "system",
            f"Message length {message.shape[-1]} does not match k={g.dims.k}.",
        )
    return (message.astype(np.int64) @ g.rows.astype(np.int64) % 2).astype(np.uint8)


def syndrome(h: ParityCheckMatrix, c: npt.ArrayLike) -> BitArray:
    """Compute H.c^T over GF(2) for one word or a batch of words."""
    word = np.asarray(c).astype(np.int64)
    return (word @ h.full.T.astype(np.int64) % 2).astype(np.uint8)


def sample_w(
    dims: CodeDimensions, density: DensitySpec, seed: Seed
) -> ParityCheckMatrix:
    """Draw every element of W independently from Bernoulli(p)."""
    rng = np.random.default_rng(seed)
    w = (rng.random((dims.m, dims.k)) < density.p).astype(np.uint8)
    return ParityCheckMatrix(dims, w)
