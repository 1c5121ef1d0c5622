"""Services for the analyze command."""

import logging
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from gqla.core import (
    GqlaError,
    NodeKind,
    ParityCheckMatrix,
    degree_distributions,
    girth_histograms,
)
from gqla.platform.parallel import parallel_map

logger = logging.getLogger(__name__)

NO_CYCLE = "none"


@dataclass(frozen=True)
class CodeAnalysis:
    """Girth and degree histograms of one code, counts may be averages."""

    vn_girth: dict[str, float]
    cn_girth: dict[str, float]
    vn_degree: dict[str, float]
    cn_degree: dict[str, float]
    code_girth: int | None
    codes: int = 1

    def mean_girth(self, kind: NodeKind) -> float | None:
        """Mean node girth over nodes that lie on a cycle."""
        histogram = self.vn_girth if kind == "vn" else self.cn_girth
        cyclic = {int(g): c for g, c in histogram.items() if g != NO_CYCLE}
        total = sum(cyclic.values())
        if total == 0:
            return None
        return sum(g * c for g, c in cyclic.items()) / total

    def as_json(self) -> dict[str, Any]:
        """Document form: histograms keyed by girth or degree as text."""
        return {
            "codes": self.codes,
            "code_girth": self.code_girth,
            "vn_girth": self.vn_girth,
            "cn_girth": self.cn_girth,
            "vn_degree": self.vn_degree,
            "cn_degree": self.cn_degree,
            "mean_vn_girth": self.mean_girth("vn"),
            "mean_cn_girth": self.mean_girth("cn"),
        }


def _keyed(counts: Counter[int], acyclic: int | None = None) -> dict[str, float]:
    keyed: dict[str, float] = {str(k): float(v) for k, v in sorted(counts.items())}
    if acyclic is not None:
        keyed[NO_CYCLE] = float(acyclic)
    return keyed


def analyze_code(h: ParityCheckMatrix) -> CodeAnalysis:
    """Girth histograms and degree distributions of the full H."""
    girths = girth_histograms(h)
    degrees = degree_distributions(h)
    return CodeAnalysis(
        vn_girth=_keyed(girths.vn, girths.vn_acyclic),
        cn_girth=_keyed(girths.cn, girths.cn_acyclic),
        vn_degree=_keyed(degrees.histogram("vn")),
        cn_degree=_keyed(degrees.histogram("cn")),
        code_girth=girths.code_girth,
    )


def _average(histograms: Sequence[dict[str, float]]) -> dict[str, float]:
    keys = sorted(
        {k for h in histograms for k in h},
        key=lambda k: (k == NO_CYCLE, int(k) if k != NO_CYCLE else 0),
    )
    return {k: float(np.mean([h.get(k, 0.0) for h in histograms])) for k in keys}


def average_analysis(analyses: Sequence[CodeAnalysis]) -> CodeAnalysis:
    """Per-bucket mean over a population of codes.

    The population code girth is the smallest girth of any member.
    """
    if not analyses:
        raise GqlaError("config", "No codes to analyze.")
    girths = [a.code_girth for a in analyses if a.code_girth is not None]
    return CodeAnalysis(
        vn_girth=_average([a.vn_girth for a in analyses]),
        cn_girth=_average([a.cn_girth for a in analyses]),
        vn_degree=_average([a.vn_degree for a in analyses]),
        cn_degree=_average([a.cn_degree for a in analyses]),
        code_girth=min(girths) if girths else None,
        codes=sum(a.codes for a in analyses),
    )


def analyze_population(
    codes: Sequence[ParityCheckMatrix], workers: int | None = 1
) -> CodeAnalysis:
    """Average analysis of many codes."""
    logger.info("Analyzing %d codes.", len(codes))
    return average_analysis(parallel_map(analyze_code, codes, workers))
