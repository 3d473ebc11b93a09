"""Emission-by-emission coincidence experiments with deterministic sampling.

Each emitted pair lands in one of the nine outcome cells of an event
distribution, so a run at fixed settings is a multinomial draw. Draws
are split into fixed-size chunks whose generator seeds are derived by
hashing (master seed, setting-pair index, chunk index); the chunk
layout never depends on the worker count, so the same plan produces bit
identical counters at any parallelism level. Counters are plain sums,
mergeable in any order.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import lhv, qm
from .core import (
    BellTestError,
    DetectionRates,
    EventDistribution,
    ValidationError,
)
from .inequalities import InequalityReport, SettingsQuad, detection_inequality_symmetric

CHUNK_EMISSIONS = 1 << 20
"""Emissions per sampling chunk; part of the determinism contract."""

PAIR_LABELS: tuple[str, ...] = ("ab", "bpa", "bap", "apbp")
"""The four setting pairs a run measures, in canonical order."""

_PAIR_AXES = {
    "ab": ("a", "b"),
    "bpa": ("a", "b_prime"),
    "bap": ("a_prime", "b"),
    "apbp": ("a_prime", "b_prime"),
}

_CSV_CELLS = (
    ("pp", "pp"), ("pm", "pm"), ("mp", "mp"), ("mm", "mm"),
    ("pz", "p0"), ("zp", "0p"), ("mz", "m0"), ("zm", "0m"), ("zz", "00"),
)


class InsufficientStatisticsError(BellTestError):
    """Too few detected events to form the requested estimate."""


def derive_seed(master: int, *indices: int | str) -> int:
    """Stable 64-bit stream seed hashed from a master seed and indices."""
    payload = "::".join(str(part) for part in (master, *indices)).encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "little")


@dataclass(frozen=True)
class CoincidenceCounters:
    """Outcome-cell counts for one setting pair over n_emitted emissions."""

    n_emitted: int
    pp: int = 0
    pm: int = 0
    mp: int = 0
    mm: int = 0
    pz: int = 0
    zp: int = 0
    mz: int = 0
    zm: int = 0
    zz: int = 0

    _CELLS = ("pp", "pm", "mp", "mm", "pz", "zp", "mz", "zm", "zz")

    def __post_init__(self) -> None:
        cells = self.cells()
        if any(c < 0 for c in cells) or self.n_emitted < 0:
            raise ValidationError("counts must be nonnegative")
        if sum(cells) != self.n_emitted:
            raise ValidationError(
                f"cells sum to {sum(cells)}, expected n_emitted = {self.n_emitted}"
            )

    def cells(self) -> tuple[int, ...]:
        return tuple(getattr(self, name) for name in self._CELLS)

    @property
    def coincidences(self) -> int:
        return self.pp + self.pm + self.mp + self.mm

    @property
    def side1_plus(self) -> int:
        return self.pp + self.pm + self.pz

    @property
    def side1_minus(self) -> int:
        return self.mp + self.mm + self.mz

    @property
    def side2_plus(self) -> int:
        return self.pp + self.mp + self.zp

    @property
    def side2_minus(self) -> int:
        return self.pm + self.mm + self.zm

    def combine(self, other: "CoincidenceCounters") -> "CoincidenceCounters":
        merged = [x + y for x, y in zip(self.cells(), other.cells())]
        return CoincidenceCounters(self.n_emitted + other.n_emitted, *merged)


def merge_counters(*counters: CoincidenceCounters) -> CoincidenceCounters:
    if not counters:
        raise ValidationError("nothing to merge")
    merged = counters[0]
    for extra in counters[1:]:
        merged = merged.combine(extra)
    return merged


def chunk_counts(n: int) -> tuple[int, ...]:
    """Chunk sizes for n emissions: full chunks plus one remainder."""
    if n < 1:
        raise ValidationError(f"emission count must be >= 1, got {n}")
    full, rest = divmod(n, CHUNK_EMISSIONS)
    return (CHUNK_EMISSIONS,) * full + ((rest,) if rest else ())


def sample_chunk(
    dist: EventDistribution, pair_seed: int, chunk_index: int, count: int
) -> np.ndarray:
    """Multinomial cell counts for one chunk, from its derived stream."""
    rng = np.random.default_rng(derive_seed(pair_seed, chunk_index))
    p = np.asarray(dist.cells(), dtype=np.float64)
    p = p / p.sum()
    return rng.multinomial(count, p)


def sample_pair_events(
    dist: EventDistribution, n: int, seed: int, workers: int = 1
) -> CoincidenceCounters:
    """Sample n emissions at one setting pair; deterministic in (seed, n).

    workers only distributes chunks over threads; chunk seeds and
    boundaries are fixed by (seed, n) alone, so the result is identical
    at any worker count.
    """
    sizes = chunk_counts(n)
    tasks = list(enumerate(sizes))
    if workers <= 1 or len(tasks) == 1:
        chunks = [sample_chunk(dist, seed, idx, size) for idx, size in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(
                pool.map(lambda t: sample_chunk(dist, seed, t[0], t[1]), tasks)
            )
    total = np.sum(chunks, axis=0, dtype=np.int64)
    return CoincidenceCounters(n, *(int(c) for c in total))


@dataclass(frozen=True)
class LhvSource:
    """Simulation source: each emission draws one four-axis assignment."""

    model: lhv.FourAxisModel


Source = qm.IdealSource | qm.RealSource | LhvSource


@dataclass(frozen=True)
class RunPlan:
    """Everything needed to reproduce one experiment byte for byte."""

    quad: SettingsQuad
    pairs_per_setting: int
    seed: int
    source: Source

    def __post_init__(self) -> None:
        if self.pairs_per_setting < 1:
            raise ValidationError(
                f"pairs_per_setting must be >= 1, got {self.pairs_per_setting}"
            )


def distribution_for(source: Source, quad: SettingsQuad, label: str) -> EventDistribution:
    """Per-emission event distribution of a source at one setting pair."""
    attr1, attr2 = _PAIR_AXES[label]
    if isinstance(source, qm.IdealSource):
        x1 = getattr(quad, attr1).degrees
        x2 = getattr(quad, attr2).degrees
        return qm.ideal_pair_probabilities(x1 - x2)
    if isinstance(source, qm.RealSource):
        return qm.event_distribution(getattr(quad, attr1), getattr(quad, attr2), source.geometry)
    if isinstance(source, LhvSource):
        return lhv.pair_probabilities(source.model, attr1, attr2)
    raise ValidationError(f"unknown source type {type(source).__name__}")


def run_experiment(plan: RunPlan, workers: int = 1) -> dict[str, CoincidenceCounters]:
    """Sample all four setting pairs; one counter set per pair label."""
    results: dict[str, CoincidenceCounters] = {}
    for pair_index, label in enumerate(PAIR_LABELS):
        dist = distribution_for(plan.source, plan.quad, label)
        pair_seed = derive_seed(plan.seed, pair_index)
        results[label] = sample_pair_events(
            dist, plan.pairs_per_setting, pair_seed, workers=workers
        )
    return results


@dataclass(frozen=True)
class RateStdErrors:
    """Binomial standard errors matching DetectionRates field for field."""

    d_pp: float
    d_pm: float
    d_mp: float
    d_mm: float
    d_plus_1: float
    d_minus_1: float
    d_plus_2: float
    d_minus_2: float


def estimate_rates(counters: CoincidenceCounters) -> tuple[DetectionRates, RateStdErrors]:
    """Frequency estimates of the detection rates with binomial errors."""
    if counters.n_emitted < 1:
        raise ValidationError("need at least one emission to estimate rates")
    n = counters.n_emitted

    def portion(count: int) -> tuple[float, float]:
        p = count / n
        return p, math.sqrt(p * (1.0 - p) / n)

    values = {}
    errors = {}
    for field, count in (
        ("d_pp", counters.pp), ("d_pm", counters.pm),
        ("d_mp", counters.mp), ("d_mm", counters.mm),
        ("d_plus_1", counters.side1_plus), ("d_minus_1", counters.side1_minus),
        ("d_plus_2", counters.side2_plus), ("d_minus_2", counters.side2_minus),
    ):
        values[field], errors[field] = portion(count)
    return DetectionRates(**values), RateStdErrors(**errors)


@dataclass(frozen=True)
class EstimatedReport:
    """An inequality report with its sampling uncertainty attached."""

    report: InequalityReport
    std_error: float
    sigma_distance: float


def _delta_variance(counts: np.ndarray, grad: np.ndarray) -> float:
    # First-order variance of a smooth statistic of multinomial counts:
    # grad' Cov grad with Cov_ij = N (p_i delta_ij - p_i p_j).
    n_total = counts.sum()
    p = counts / n_total
    mean_grad = float(p @ grad)
    return float(n_total * (float(p @ (grad * grad)) - mean_grad * mean_grad))


_SIGN = np.array([1.0, -1.0, -1.0, 1.0, 0, 0, 0, 0, 0])
_COINC = np.array([1.0, 1.0, 1.0, 1.0, 0, 0, 0, 0, 0])
_LIKE = np.array([1.0, 0.0, 0.0, 1.0, 0, 0, 0, 0, 0])


def evaluate_symmetric_detection(
    counters_cross: CoincidenceCounters, counters_primed: CoincidenceCounters
) -> EstimatedReport:
    """Plug counting estimates into the symmetric measurable inequality.

    counters_cross holds the shared cross-setting measurement (the three
    equal-difference pairs), counters_primed the primed pair whose
    coincidences and side-1 singles supply the remaining ratios. The
    standard error propagates through the count ratios to first order,
    treating each counter set as an independent multinomial. The
    detected-singles ratio group is identically 2 and contributes no
    variance.
    """
    c_cross = counters_cross.coincidences
    c_primed = counters_primed.coincidences
    if c_cross == 0 or c_primed == 0:
        raise InsufficientStatisticsError("no coincidences at one of the settings")
    s_plus = counters_primed.side1_plus
    s_minus = counters_primed.side1_minus
    if s_plus + s_minus == 0:
        raise InsufficientStatisticsError("no detected singles at the primed setting")

    correlation_counts = (
        counters_cross.pp - counters_cross.pm - counters_cross.mp + counters_cross.mm
    )
    report = detection_inequality_symmetric(
        e_cross=float(correlation_counts),
        total_cross=float(c_cross),
        d_pp_primed=float(counters_primed.pp),
        d_mm_primed=float(counters_primed.mm),
        total_primed=float(c_primed),
        d_plus_primed=float(s_plus),
        d_minus_primed=float(s_minus),
        singles_total_primed=float(s_plus + s_minus),
    )

    cross = np.asarray(counters_cross.cells(), dtype=np.float64)
    primed = np.asarray(counters_primed.cells(), dtype=np.float64)
    u = float(correlation_counts)
    grad_cross = 3.0 * (_SIGN * c_cross - u * _COINC) / float(c_cross) ** 2
    w = float(counters_primed.pp + counters_primed.mm)
    grad_primed = -2.0 * (_LIKE * c_primed - w * _COINC) / float(c_primed) ** 2
    variance = _delta_variance(cross, grad_cross) + _delta_variance(primed, grad_primed)
    std_error = math.sqrt(max(variance, 0.0))

    if std_error > 0.0:
        sigma_distance = report.margin / std_error
    elif report.margin == 0.0:
        sigma_distance = 0.0
    else:
        sigma_distance = math.copysign(math.inf, report.margin)
    return EstimatedReport(report=report, std_error=std_error, sigma_distance=sigma_distance)


def bootstrap_std_error(
    counters_cross: CoincidenceCounters,
    counters_primed: CoincidenceCounters,
    resamples: int = 1000,
    seed: int = 0,
) -> float:
    """Resampling cross-check of the first-order standard error."""
    rng = np.random.default_rng(derive_seed(seed, "bootstrap"))
    p_cross = np.asarray(counters_cross.cells(), dtype=np.float64)
    p_cross = p_cross / p_cross.sum()
    p_primed = np.asarray(counters_primed.cells(), dtype=np.float64)
    p_primed = p_primed / p_primed.sum()
    values = []
    for _ in range(resamples):
        draw_cross = CoincidenceCounters(
            counters_cross.n_emitted,
            *(int(c) for c in rng.multinomial(counters_cross.n_emitted, p_cross)),
        )
        draw_primed = CoincidenceCounters(
            counters_primed.n_emitted,
            *(int(c) for c in rng.multinomial(counters_primed.n_emitted, p_primed)),
        )
        try:
            values.append(evaluate_symmetric_detection(draw_cross, draw_primed).report.lhs)
        except InsufficientStatisticsError:
            continue
    if len(values) < 2:
        raise InsufficientStatisticsError("too few successful resamples")
    return float(np.std(np.asarray(values), ddof=1))


def counters_csv(counters_by_pair: dict[str, CoincidenceCounters]) -> str:
    """Byte-stable CSV dump: one pair,cell,count row per cell."""
    lines = ["pair,cell,count"]
    for label, counters in counters_by_pair.items():
        for attr, cell_name in _CSV_CELLS:
            lines.append(f"{label},{cell_name},{getattr(counters, attr)}")
    return "\n".join(lines) + "\n"


def _describe_source(source: Source) -> str:
    if isinstance(source, qm.IdealSource):
        return "qm-ideal"
    if isinstance(source, qm.RealSource):
        g = source.geometry
        return f"qm-real eta={g.eta!r} phi_deg={g.phi_deg!r} f_override={g.f_override!r}"
    if isinstance(source, LhvSource):
        return "lhv"
    return type(source).__name__


def run_manifest(plan: RunPlan, counters_by_pair: dict[str, CoincidenceCounters]) -> str:
    """Byte-stable text record of a run: plan echo plus count totals."""
    a, b, ap, bp = plan.quad.axes_degrees()
    lines = [
        "belltest run manifest",
        f"quad_a={a!r}",
        f"quad_b={b!r}",
        f"quad_a_prime={ap!r}",
        f"quad_b_prime={bp!r}",
        f"pairs_per_setting={plan.pairs_per_setting}",
        f"seed={plan.seed}",
        f"source={_describe_source(plan.source)}",
        f"chunk_emissions={CHUNK_EMISSIONS}",
    ]
    total_emitted = 0
    total_coincidences = 0
    for label, counters in counters_by_pair.items():
        lines.append(
            f"pair={label} n_emitted={counters.n_emitted} coincidences={counters.coincidences}"
        )
        total_emitted += counters.n_emitted
        total_coincidences += counters.coincidences
    lines.append(f"total_emitted={total_emitted}")
    lines.append(f"total_coincidences={total_coincidences}")
    return "\n".join(lines) + "\n"
