"""Search for the setting quad that maximizes an inequality violation.

The quads are parameterized by three physical axis angles (a, b, a')
with b' locked to a', which matches the configuration that achieves the
maximal violation and guarantees every evaluated quad is realizable by
actual coplanar polarizer axes. The coarse phase sweeps a full grid
with vectorized closed forms; a derivative-free coordinate refinement
then halves the step around the incumbent, re-scoring candidates with
the exact scalar evaluator so both computation paths stay honest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterator

import numpy as np

from . import qm
from .core import SinglesProbabilities, ValidationError, cos_double_angle
from .inequalities import (
    LOCAL_BOUND,
    SettingsQuad,
    detection_inequality,
    ternary_inequality,
)

INEQUALITIES = ("ternary", "detection")

_HALF_SINGLES = SinglesProbabilities(p_plus=0.5, p_zero=0.0, p_minus=0.5)


@dataclass(frozen=True)
class ScanResult:
    """Best quad found by a scan, with the grid samples if requested."""

    best_quad: SettingsQuad
    best_lhs: float
    best_factor: float
    best_diffs: tuple[float, float, float, float]
    surface: tuple[tuple[float, float, float, float, float], ...] | None = None


def _check_combo(inequality: str, source: qm.IdealSource | qm.RealSource) -> None:
    if inequality == "ternary":
        if not isinstance(source, qm.IdealSource):
            raise ValidationError("the ternary inequality is scanned with the qm-ideal source")
    elif inequality == "detection":
        if not isinstance(source, qm.RealSource):
            raise ValidationError("the detection inequality is scanned with the qm-real source")
    else:
        raise ValidationError(f"unknown inequality {inequality!r}; expected one of {INEQUALITIES}")


def objective(
    quad: SettingsQuad,
    inequality: str,
    source: qm.IdealSource | qm.RealSource,
) -> float:
    """Inequality left-hand side at a quad from closed-form inputs."""
    _check_combo(inequality, source)
    a, b, ap, bp = quad.axes_degrees()
    if inequality == "ternary":
        report = ternary_inequality(
            e_ab=cos_double_angle(a - b),
            e_bpa=cos_double_angle(bp - a),
            e_bap=cos_double_angle(b - ap),
            pair_apbp=qm.ideal_pair_probabilities(ap - bp),
            singles_ap=_HALF_SINGLES,
            singles_bp=_HALF_SINGLES,
        )
        return report.lhs
    geom = source.geometry
    single = geom.single_rate
    report = detection_inequality(
        rates_ab=qm.detection_rates(a, b, geom),
        rates_bpa=qm.detection_rates(a, bp, geom),
        rates_bap=qm.detection_rates(ap, b, geom),
        rates_apbp=qm.detection_rates(ap, bp, geom),
        singles_ap=(single, single),
        singles_bp=(single, single),
    )
    return report.lhs


def _fast_lhs_planes(axes: np.ndarray, inequality: str, source) -> Iterator[np.ndarray]:
    """Vectorized lhs over the (a, b, a') grid, one a-slice at a time.

    With b' = a' the primed-pair and singles terms reduce to constants,
    leaving a three-fringe sum (scaled by the depolarization factor for
    the detection form). Yields 2d planes indexed (b, a').
    """
    two_theta = np.radians(2.0 * (axes[:, None] - axes[None, :]))
    fringes = np.cos(two_theta)  # fringes[i, j] = cos 2(axes_i - axes_j)
    if inequality == "ternary":
        scale, offset = 1.0, 0.0
    else:
        f = source.geometry.f_factor
        scale, offset = f, 1.0 - f
    for i in range(axes.size):
        # terms (a,b), (b',a) with b'=a', (b,a') at fixed a = axes[i]
        yield scale * (
            fringes[i, :][:, None] + fringes[i, :][None, :] + fringes
        ) + offset


def grid_scan(
    inequality: str,
    source: qm.IdealSource | qm.RealSource,
    step_deg: float = 1.0,
    refine_rounds: int = 6,
    collect_surface: bool = False,
) -> ScanResult:
    """Minimize the inequality lhs over feasible quads.

    Coarse grid over (a, b, a') in [0, 180) at step_deg, then
    refine_rounds rounds of coordinate refinement, each halving the step
    and re-scoring a local 5x5x5 neighborhood with the scalar objective.
    Ties break toward the lexicographically smallest quad. Collecting
    the surface stores one sample per grid point, so keep steps coarse
    when asking for it.
    """
    _check_combo(inequality, source)
    if not 0.0 < step_deg <= 45.0:
        raise ValidationError(f"step_deg must be in (0, 45], got {step_deg!r}")
    if refine_rounds < 0:
        raise ValidationError(f"refine_rounds must be >= 0, got {refine_rounds}")

    axes = np.arange(0.0, 180.0, float(step_deg))
    best_value = math.inf
    best_index: tuple[int, int, int] = (0, 0, 0)
    surface: list[tuple[float, float, float, float, float]] | None = (
        [] if collect_surface else None
    )
    for i, plane in enumerate(_fast_lhs_planes(axes, inequality, source)):
        if surface is not None:
            a_val = float(axes[i])
            for j in range(axes.size):
                for k in range(axes.size):
                    surface.append(
                        (a_val, float(axes[j]), float(axes[k]), float(axes[k]),
                         float(plane[j, k]))
                    )
        flat = int(np.argmin(plane))
        value = float(plane.flat[flat])
        if value < best_value:  # strict: keeps the first (smallest) index
            best_value = value
            best_index = (i, *divmod(flat, plane.shape[1]))

    a0, b0, ap0 = (float(axes[idx]) for idx in best_index)
    # From here on everything goes through the scalar evaluator so that
    # the reported optimum is consistent with objective().
    best_axes = (a0, b0, ap0)
    best_lhs = objective(SettingsQuad.of(a0, b0, ap0, ap0), inequality, source)

    span = float(step_deg)
    for _ in range(refine_rounds):
        span /= 2.0
        offsets = (-2.0 * span, -span, 0.0, span, 2.0 * span)
        center = best_axes
        for da, db, dap in product(offsets, repeat=3):
            quad = SettingsQuad.of(center[0] + da, center[1] + db,
                                   center[2] + dap, center[2] + dap)
            normalized = quad.axes_degrees()[:3]
            value = objective(quad, inequality, source)
            if (value, normalized) < (best_lhs, best_axes):
                best_lhs = value
                best_axes = normalized

    best_quad = SettingsQuad.of(best_axes[0], best_axes[1], best_axes[2], best_axes[2])
    ratio = best_lhs / LOCAL_BOUND
    factor = ratio if ratio > 1.0 else 1.0
    return ScanResult(
        best_quad=best_quad,
        best_lhs=best_lhs,
        best_factor=factor,
        best_diffs=best_quad.differences(),
        surface=tuple(surface) if surface is not None else None,
    )
