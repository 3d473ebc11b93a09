"""Evaluators for the ternary-outcome Bell inequalities and comparators.

The central constraint bounds a combination of three cross-setting
correlations, the like-outcome coincidence probabilities at the primed
setting pair, and the primed-side detected-singles probabilities below
by -1 for every local model. It comes in four flavors: the general
form, a symmetric reduced form, and measurable variants of both built
from detection-rate ratios (which cancel the unknown emission count).
Bell's original 1965 three-correlation inequality and the CHSH
inequality are provided for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

from .core import (
    AngleDeg,
    DetectionRates,
    PairProbabilities,
    SinglesProbabilities,
    UndefinedRatioError,
    ValidationError,
    coincidence_total,
    detection_expectation,
    normalize_degrees,
)

VIOLATION_EPS = 1e-12
"""Margins beyond this far below zero count as genuine violations."""

LOCAL_BOUND = -1.0
"""Lower bound obeyed by every local model, for all four ternary forms."""

CHSH_BOUND = 2.0


@dataclass(frozen=True)
class InequalityReport:
    """Outcome of evaluating one inequality at one set of inputs.

    margin is the signed distance to the bound in the direction of
    satisfaction, so violated always means margin < -1e-12 regardless of
    the inequality's sense. violation_factor is lhs / bound whenever
    that ratio exceeds 1 (both the -1.5 and the sqrt(2)-style factors
    come out of this single definition), else 1.
    """

    name: str
    lhs: float
    bound: float
    margin: float
    violated: bool
    violation_factor: float


def _report(name: str, lhs: float, bound: float, sense: Literal["ge", "le"]) -> InequalityReport:
    margin = lhs - bound if sense == "ge" else bound - lhs
    ratio = lhs / bound if bound != 0.0 else 0.0
    return InequalityReport(
        name=name,
        lhs=lhs,
        bound=bound,
        margin=margin,
        violated=margin < -VIOLATION_EPS,
        violation_factor=ratio if ratio > 1.0 else 1.0,
    )


def _check_expectation(name: str, value: float) -> float:
    if not -1.0 - VIOLATION_EPS <= value <= 1.0 + VIOLATION_EPS:
        raise ValidationError(f"{name} must lie in [-1, 1], got {value!r}")
    return float(value)


def _check_probability(name: str, value: float) -> float:
    if not -VIOLATION_EPS <= value <= 1.0 + VIOLATION_EPS:
        raise ValidationError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


@dataclass(frozen=True)
class SettingsQuad:
    """The four polarizer axes: a and a' on side 1, b and b' on side 2."""

    a: AngleDeg
    b: AngleDeg
    a_prime: AngleDeg
    b_prime: AngleDeg

    @classmethod
    def of(
        cls,
        a: AngleDeg | float,
        b: AngleDeg | float,
        a_prime: AngleDeg | float,
        b_prime: AngleDeg | float,
    ) -> "SettingsQuad":
        return cls(AngleDeg.of(a), AngleDeg.of(b), AngleDeg.of(a_prime), AngleDeg.of(b_prime))

    def axes_degrees(self) -> tuple[float, float, float, float]:
        return (self.a.degrees, self.b.degrees, self.a_prime.degrees, self.b_prime.degrees)

    def differences(self) -> tuple[float, float, float, float]:
        """Axis differences for the pairs (a,b), (b',a), (b,a'), (a',b')."""
        a, b, ap, bp = self.axes_degrees()
        return (
            normalize_degrees(a - b),
            normalize_degrees(bp - a),
            normalize_degrees(b - ap),
            normalize_degrees(ap - bp),
        )


def quad_from_differences(
    d1: float, d2: float, d3: float, d4: float = 0.0
) -> SettingsQuad:
    """Construct axes realizing the pair differences (d1, d2, d3, d4).

    d1 = (a,b), d2 = (b',a), d3 = (b,a'), d4 = (a',b'). Only three axes
    are free, so the four differences must be mutually consistent; the
    sign branches for b' and a' are searched in a fixed order and the
    first branch whose primed-pair fringe matches cos(2 d4) wins.
    """
    a = 0.0
    b = float(d1)
    target = math.cos(math.radians(2.0 * float(d4)))
    for bp_sign in (1.0, -1.0):
        for ap_sign in (1.0, -1.0):
            bp = bp_sign * float(d2)
            ap = b + ap_sign * float(d3)
            if abs(math.cos(math.radians(2.0 * (ap - bp))) - target) <= 1e-9:
                return SettingsQuad.of(a, b, ap, bp)
    raise ValidationError(
        f"differences ({d1}, {d2}, {d3}, {d4}) are not realizable by four coplanar axes"
    )


def ternary_inequality(
    e_ab: float,
    e_bpa: float,
    e_bap: float,
    pair_apbp: PairProbabilities,
    singles_ap: SinglesProbabilities,
    singles_bp: SinglesProbabilities,
) -> InequalityReport:
    """General form of the ternary-outcome inequality (bound -1).

    lhs = e(a,b) + e(b',a) + e(b,a') - 2 p++(a',b') - 2 p--(a',b')
          + p+(a') + p-(a') + p+(b') + p-(b').
    """
    lhs = math.fsum(
        (
            _check_expectation("e_ab", e_ab),
            _check_expectation("e_bpa", e_bpa),
            _check_expectation("e_bap", e_bap),
            -2.0 * pair_apbp.pp,
            -2.0 * pair_apbp.mm,
            singles_ap.p_plus,
            singles_ap.p_minus,
            singles_bp.p_plus,
            singles_bp.p_minus,
        )
    )
    return _report("ternary", lhs, LOCAL_BOUND, "ge")


def ternary_inequality_symmetric(
    e_cross: float,
    p_pp_primed: float,
    p_mm_primed: float,
    singles: Sequence[float],
) -> InequalityReport:
    """Symmetric reduced form: 3 e - 2 p++ - 2 p-- + sum of four singles.

    Valid when all three cross pairs share one axis difference (the
    symmetry local theories are assumed to share with the quantum
    model).
    """
    if len(singles) != 4:
        raise ValidationError(f"expected 4 singles probabilities, got {len(singles)}")
    lhs = math.fsum(
        (
            3.0 * _check_expectation("e_cross", e_cross),
            -2.0 * _check_probability("p_pp_primed", p_pp_primed),
            -2.0 * _check_probability("p_mm_primed", p_mm_primed),
            *(_check_probability(f"singles[{k}]", s) for k, s in enumerate(singles)),
        )
    )
    return _report("ternary-sym", lhs, LOCAL_BOUND, "ge")


def bell_1965(e_ab: float, e_bpa: float, e_apb: float) -> InequalityReport:
    """Bell's original 1965 inequality: sum of three correlations >= -1."""
    lhs = math.fsum(
        (
            _check_expectation("e_ab", e_ab),
            _check_expectation("e_bpa", e_bpa),
            _check_expectation("e_apb", e_apb),
        )
    )
    return _report("bell65", lhs, LOCAL_BOUND, "ge")


def _ratio(numerator: float, denominator: float, what: str) -> float:
    if denominator <= 0.0:
        raise UndefinedRatioError(f"{what} is zero; ratio undefined")
    return numerator / denominator


def detection_inequality(
    rates_ab: DetectionRates,
    rates_bpa: DetectionRates,
    rates_bap: DetectionRates,
    rates_apbp: DetectionRates,
    singles_ap: tuple[float, float],
    singles_bp: tuple[float, float],
) -> InequalityReport:
    """Measurable form of the general inequality, built from rate ratios.

    Correlations become E/T0 per cross pair, coincidence cells become
    D/T0 at the primed pair, and singles become D/t0 per primed side.
    Every term is a ratio, so a uniform rescaling of all rates (an
    unknown emission count) drops out.
    """
    cross_terms = [
        _ratio(detection_expectation(r), coincidence_total(r), f"coincidence total ({label})")
        for label, r in (("ab", rates_ab), ("bpa", rates_bpa), ("bap", rates_bap))
    ]
    primed_total = coincidence_total(rates_apbp)
    singles_terms = []
    for side, (d_plus, d_minus) in (("a'", singles_ap), ("b'", singles_bp)):
        if d_plus < 0.0 or d_minus < 0.0:
            raise ValidationError(f"singles rates for {side} must be >= 0")
        total = d_plus + d_minus
        singles_terms.append(_ratio(d_plus, total, f"singles total ({side})"))
        singles_terms.append(_ratio(d_minus, total, f"singles total ({side})"))
    lhs = math.fsum(
        (
            *cross_terms,
            -2.0 * _ratio(rates_apbp.d_pp, primed_total, "coincidence total (a'b')"),
            -2.0 * _ratio(rates_apbp.d_mm, primed_total, "coincidence total (a'b')"),
            *singles_terms,
        )
    )
    return _report("detection", lhs, LOCAL_BOUND, "ge")


def detection_inequality_symmetric(
    e_cross: float,
    total_cross: float,
    d_pp_primed: float,
    d_mm_primed: float,
    total_primed: float,
    d_plus_primed: float,
    d_minus_primed: float,
    singles_total_primed: float,
) -> InequalityReport:
    """Symmetric measurable form: 3 E/T0 - 2 D++/T0 - 2 D--/T0 + 2 D+/t0 + 2 D-/t0."""
    lhs = math.fsum(
        (
            3.0 * _ratio(e_cross, total_cross, "cross coincidence total"),
            -2.0 * _ratio(d_pp_primed, total_primed, "primed coincidence total"),
            -2.0 * _ratio(d_mm_primed, total_primed, "primed coincidence total"),
            2.0 * _ratio(d_plus_primed, singles_total_primed, "primed singles total"),
            2.0 * _ratio(d_minus_primed, singles_total_primed, "primed singles total"),
        )
    )
    return _report("detection-sym", lhs, LOCAL_BOUND, "ge")


def chsh(e_ab: float, e_bpa: float, e_bap: float, e_apbp: float) -> InequalityReport:
    """CHSH inequality |e1 + e2 + e3 - e4| <= 2 on four correlations.

    The caller chooses which measured pair feeds the negated slot; at
    the standard optimal settings that is the one odd-angle pair.
    """
    lhs = abs(
        math.fsum(
            (
                _check_expectation("e_ab", e_ab),
                _check_expectation("e_bpa", e_bpa),
                _check_expectation("e_bap", e_bap),
                -_check_expectation("e_apbp", e_apbp),
            )
        )
    )
    return _report("chsh", lhs, CHSH_BOUND, "le")


def excess_violation_ratio(factor_new: float, factor_ref: float) -> float:
    """How much farther one violation factor goes beyond no-violation.

    Defined as (factor_new - 1) / (factor_ref - 1); the 1.5-vs-sqrt(2)
    comparison gives about 1.207, a violation roughly 20.7% larger.
    """
    if factor_new < 1.0 or factor_ref < 1.0:
        raise ValidationError("violation factors are at least 1 by construction")
    if factor_ref <= 1.0:
        raise ValidationError("reference factor must exceed 1 for the ratio to be defined")
    return (factor_new - 1.0) / (factor_ref - 1.0)
