"""Random code search and the statistics built on it.

A campaign samples standard form codes at a fixed density and estimates
their BLER at a list of Eb/N0 points. The resulting records give, per
(density, Eb/N0), an empirical distribution of random code performance used
to rank densities and to ask how likely it is that M random draws would have
found a code better than a learned one.
"""

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ValidationError

from gqla.core import (
    DEFAULT_MAX_BLOCKS,
    BlerEstimate,
    BpConfig,
    ChannelSpec,
    CodeDimensions,
    DensitySpec,
    GqlaError,
    ParityCheckMatrix,
    Stream,
    sample_w,
)
from gqla.evaluate import estimate_bler
from gqla.platform.output import write_csv
from gqla.platform.parallel import parallel_map

logger = logging.getLogger(__name__)

EBNO_TOLERANCE = 1e-9
CDF_POINTS: list[tuple[str, float]] = [
    ("best", 0.0),
    ("25%", 0.25),
    ("50%", 0.5),
    ("75%", 0.75),
    ("worst", 1.0),
]


class BlerPoint(BaseModel):
    """One stored BLER estimate."""

    ebno_db: float
    blocks: int
    errors: int
    p_tilde: float
    half_width: float
    converged: bool

    @classmethod
    def from_estimate(cls, e: BlerEstimate) -> "BlerPoint":
        """Convert an estimator state."""
        return cls(
            ebno_db=float(e.ebno_db if e.ebno_db is not None else math.nan),
            blocks=e.blocks,
            errors=e.block_errors,
            p_tilde=e.p_tilde,
            half_width=e.half_width,
            converged=e.converged,
        )


class RandomSearchRecord(BaseModel):
    """A sampled code and its BLER at every evaluated Eb/N0."""

    n: int
    k: int
    density: float
    seed: int
    index: int
    w: list[str]
    estimates: list[BlerPoint]

    @property
    def dims(self) -> CodeDimensions:
        """Code dimensions."""
        return CodeDimensions(self.n, self.k)

    @property
    def code(self) -> ParityCheckMatrix:
        """The sampled code."""
        bits = np.array([[int(c) for c in row] for row in self.w], dtype=np.uint8)
        return ParityCheckMatrix(self.dims, bits)

    def at(self, ebno_db: float) -> BlerPoint | None:
        """Estimate at an Eb/N0 point, if evaluated."""
        for point in self.estimates:
            if abs(point.ebno_db - ebno_db) <= EBNO_TOLERANCE:
                return point
        return None


@dataclass(frozen=True)
class _CodeJob:
    dims: CodeDimensions
    density: float
    seed: int
    index: int
    ebno_list: tuple[float, ...]
    bp: BpConfig
    target_rel: float
    max_blocks: int


def code_seed(seed: int, index: int, density: float) -> list[int]:
    """Sampling seed of code `index` in a campaign at `density`."""
    return [seed, index, round(density * 1_000_000)]


def _evaluate_code(job: _CodeJob) -> RandomSearchRecord:
    h = sample_w(
        job.dims, DensitySpec(job.density), code_seed(job.seed, job.index, job.density)
    )
    estimates = [
        estimate_bler(
            h,
            ChannelSpec(ebno_db, job.dims.rate),
            job.bp,
            job.target_rel,
            job.seed,
            "full_encoder",
            stream=Stream.SEARCH,
            lane=job.index,
            max_blocks=job.max_blocks,
        )
        for ebno_db in job.ebno_list
    ]
    return RandomSearchRecord(
        n=job.dims.n,
        k=job.dims.k,
        density=job.density,
        seed=job.seed,
        index=job.index,
        w=["".join(str(int(b)) for b in row) for row in h.w],
        estimates=[BlerPoint.from_estimate(e) for e in estimates],
    )


def random_search_campaign(
    dims: CodeDimensions,
    density: DensitySpec | float,
    count: int,
    ebno_list: Sequence[float],
    target_rel: float,
    seed: int,
    *,
    iters: int | BpConfig = 5,
    max_blocks: int = DEFAULT_MAX_BLOCKS,
    start_index: int = 0,
    workers: int | None = 1,
) -> list[RandomSearchRecord]:
    """Sample `count` codes and estimate their BLER at every Eb/N0.

    Codes are numbered from `start_index` so a campaign can be extended later
    with the same seed.
    """
    if count < 1:
        raise GqlaError("config", "A campaign needs at least one code.")
    p = density.p if isinstance(density, DensitySpec) else DensitySpec(density).p
    bp = iters if isinstance(iters, BpConfig) else BpConfig(iterations=iters)
    jobs = [
        _CodeJob(dims, p, seed, index, tuple(ebno_list), bp, target_rel, max_blocks)
        for index in range(start_index, start_index + count)
    ]
    logger.info("Evaluating %d random %s codes at density %.2f.", count, dims, p)
    return parallel_map(_evaluate_code, jobs, workers)


def append_records(path: str, records: Iterable[RandomSearchRecord]) -> None:
    """Append records as JSON lines."""
    with open(path, "a", encoding="utf-8") as f:
        for record in records:
            f.write(record.model_dump_json() + "\n")


def load_records(path: str) -> list[RandomSearchRecord]:
    """Read a JSON lines record file; errors name the offending line."""
    records: list[RandomSearchRecord] = []
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.readlines()
    except OSError as e:
        raise GqlaError("config", f"Cannot read records {path}: {e}.") from e
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            records.append(RandomSearchRecord.model_validate_json(line))
        except ValidationError as e:
            fields = ", ".join(
                ".".join(str(p) for p in err["loc"]) or "<record>" for err in e.errors()
            )
            raise GqlaError(
                "format", f"{path} line {line_no}: invalid record ({fields})."
            ) from e
    if not records:
        raise GqlaError("format", f"{path} holds no records.")
    return records


@dataclass(frozen=True)
class CdfSummary:
    """Moments and extremes of a BLER sample."""

    count: int
    unconverged: int
    mean: float
    std: float
    minimum: float
    maximum: float


@dataclass(frozen=True)
class EmpiricalCdf:
    """Empirical distribution of random code BLER at one operating point."""

    dims: CodeDimensions
    density: float
    ebno_db: float
    samples: npt.NDArray[np.float64] = field(repr=False)
    unconverged: int = 0

    def __post_init__(self) -> None:
        """Sort the samples; an empty sample is an error."""
        values = np.sort(np.asarray(self.samples, dtype=np.float64))
        if values.size == 0:
            raise GqlaError(
                "config",
                f"No converged BLER samples at {self.ebno_db} dB "
                f"for density {self.density}.",
            )
        values.setflags(write=False)
        object.__setattr__(self, "samples", values)

    def cdf(self, x: float) -> float:
        """Fraction of samples <= x."""
        return float(np.searchsorted(self.samples, x, side="right")) / self.samples.size

    def fraction_below(self, x: float) -> float:
        """Fraction of samples strictly < x."""
        return float(np.searchsorted(self.samples, x, side="left")) / self.samples.size

    def quantile(self, q: float) -> float:
        """Inverse of the piecewise linear empirical CDF.

        quantile(0) is the minimum, quantile(1) the maximum, and
        quantile(cdf(x)) == x at every sample point.
        """
        if not 0.0 <= q <= 1.0:
            raise GqlaError("config", f"Quantile level must lie in [0, 1], got {q}.")
        return float(np.quantile(self.samples, q, method="interpolated_inverted_cdf"))

    def summary(self) -> CdfSummary:
        """Mean, standard deviation and range of the sample."""
        return CdfSummary(
            count=int(self.samples.size),
            unconverged=self.unconverged,
            mean=float(self.samples.mean()),
            std=float(self.samples.std(ddof=1)) if self.samples.size > 1 else 0.0,
            minimum=float(self.samples[0]),
            maximum=float(self.samples[-1]),
        )


def build_cdf(
    records: Sequence[RandomSearchRecord],
    ebno_db: float,
    density: float | None = None,
) -> EmpiricalCdf:
    """Empirical CDF of converged estimates at `ebno_db`.

    Records are filtered by density when given, otherwise they must all share
    one density. Unconverged estimates are left out and counted.
    """
    selected = [
        r
        for r in records
        if density is None or abs(r.density - density) <= EBNO_TOLERANCE
    ]
    if not selected:
        raise GqlaError("config", f"No records for density {density}.")
    densities = {r.density for r in selected}
    if len(densities) > 1:
        raise GqlaError(
            "config", f"Records mix densities {sorted(densities)}; pick one."
        )
    points = [p for p in (r.at(ebno_db) for r in selected) if p is not None]
    converged = [p.p_tilde for p in points if p.converged]
    return EmpiricalCdf(
        dims=selected[0].dims,
        density=selected[0].density,
        ebno_db=ebno_db,
        samples=np.array(converged, dtype=np.float64),
        unconverged=len(points) - len(converged),
    )


def cdfs_by_density(
    records: Sequence[RandomSearchRecord], ebno_db: float
) -> list[EmpiricalCdf]:
    """One CDF per density present in the records, by ascending density."""
    return [
        build_cdf(records, ebno_db, density)
        for density in sorted({r.density for r in records})
    ]


def max_ebno(records: Sequence[RandomSearchRecord]) -> float:
    """Largest Eb/N0 evaluated in the records."""
    return max(p.ebno_db for r in records for p in r.estimates)


@dataclass(frozen=True)
class DensityRank:
    """Densities ordered by BLER at one point of their CDFs."""

    point: str
    q: float
    ranking: list[tuple[float, float]]
    """(density, BLER) pairs, best first."""


def rank_densities(cdfs: Sequence[EmpiricalCdf]) -> list[DensityRank]:
    """Order densities at the best, quartile and worst CDF points."""
    if not cdfs:
        raise GqlaError("config", "Ranking needs at least one density.")
    return [
        DensityRank(
            point,
            q,
            sorted(((c.density, c.quantile(q)) for c in cdfs), key=lambda dq: dq[1]),
        )
        for point, q in CDF_POINTS
    ]


def benchmark_density(cdfs: Sequence[EmpiricalCdf]) -> float:
    """Density with the lowest first-quartile BLER."""
    first_quartile = next(r for r in rank_densities(cdfs) if r.point == "25%")
    return first_quartile.ranking[0][0]


@dataclass(frozen=True)
class ComparisonResult:
    """Chance that M random codes contain one better than a learned code."""

    learned_bler: float
    updates: int
    q: float
    p_beat: float
    label: str = ""


def beat_probability(
    cdf: EmpiricalCdf, learned_bler: float, updates: int, label: str = ""
) -> ComparisonResult:
    """p_beat = 1 - (1 - q)^M with q the fraction of random codes below."""
    if updates < 1:
        raise GqlaError("config", f"M must be at least 1, got {updates}.")
    q = cdf.fraction_below(learned_bler)
    p_beat = 1.0 if q >= 1.0 else -math.expm1(updates * math.log1p(-q))
    return ComparisonResult(learned_bler, updates, q, p_beat, label)


def mean_beat_probability(results: Sequence[ComparisonResult]) -> float:
    """Arithmetic mean of p_beat over sessions."""
    if not results:
        raise GqlaError("config", "No comparisons to average.")
    return float(np.mean([r.p_beat for r in results]))


def write_summary_csv(path: str, cdfs: Sequence[EmpiricalCdf]) -> None:
    """Per-density statistics of the campaign."""
    rows: list[dict[str, float | int | str | bool | None]] = []
    for cdf in cdfs:
        s = cdf.summary()
        rows.append(
            {
                "density": cdf.density,
                "ebno_db": cdf.ebno_db,
                "count": s.count,
                "unconverged": s.unconverged,
                "mean": s.mean,
                "std": s.std,
                "min": s.minimum,
                "max": s.maximum,
                **{name: cdf.quantile(q) for name, q in CDF_POINTS[1:-1]},
            }
        )
    write_csv(
        path,
        [
            "density",
            "ebno_db",
            "count",
            "unconverged",
            "mean",
            "std",
            "min",
            "25%",
            "50%",
            "75%",
            "max",
        ],
        rows,
    )


def write_ranking_csv(path: str, ranks: Sequence[DensityRank]) -> None:
    """Table of densities ordered per CDF point, best first."""
    width = max(len(r.ranking) for r in ranks)
    columns = ["point"]
    for i in range(width):
        columns += [f"density_{i + 1}", f"bler_{i + 1}"]
    rows: list[dict[str, float | int | str | bool | None]] = []
    for rank in ranks:
        row: dict[str, float | int | str | bool | None] = {"point": rank.point}
        for i, (density, bler) in enumerate(rank.ranking):
            row[f"density_{i + 1}"] = density
            row[f"bler_{i + 1}"] = bler
        rows.append(row)
    write_csv(path, columns, rows)


def write_comparison_csv(path: str, results: Sequence[ComparisonResult]) -> None:
    """One row per learned code and a closing mean p_beat row."""
    rows: list[dict[str, float | int | str | bool | None]] = [
        {
            "code": r.label,
            "learned_bler": r.learned_bler,
            "updates": r.updates,
            "q": r.q,
            "p_beat": r.p_beat,
        }
        for r in results
    ]
    rows.append({"code": "mean", "p_beat": mean_beat_probability(results)})
    write_csv(path, ["code", "learned_bler", "updates", "q", "p_beat"], rows)
