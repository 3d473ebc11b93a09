"""Command-line front end: verify-theorem, eval, mc, and scan.

Reports go to stdout as JSON (default) or CSV. Exit codes: 0 success,
1 invalid input, 2 internal-consistency failure (an enumeration that
finds a local-bound violation, which would mean the code is broken).
All commands are deterministic given their flags; the Monte Carlo seed
falls back to the BELLTEST_SEED environment variable, then to 0.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Any, Sequence

from . import lhv, montecarlo, optimizer, qm
from .core import (
    BellTestError,
    SinglesProbabilities,
    ValidationError,
    cos_double_angle,
)
from .inequalities import (
    InequalityReport,
    SettingsQuad,
    bell_1965,
    chsh,
    detection_inequality,
    detection_inequality_symmetric,
    quad_from_differences,
    ternary_inequality,
    ternary_inequality_symmetric,
)

SEED_ENV_VAR = "BELLTEST_SEED"

DEFAULT_DIFFS = (120.0, 120.0, 120.0, 0.0)
DEFAULT_ETA = 0.2
DEFAULT_PHI = 30.0

_EVAL_INEQS = ("ternary", "ternary-sym", "bell65", "chsh", "detection", "detection-sym")
_IDEAL_INEQS = ("ternary", "ternary-sym", "bell65", "chsh")

_HALF = SinglesProbabilities(p_plus=0.5, p_zero=0.0, p_minus=0.5)


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 on bad flags (2 is reserved)."""

    def error(self, message: str) -> None:  # noqa: A003 - argparse API
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fail(message: str) -> int:
    print(json.dumps({"error": message}), file=sys.stderr)
    return 1


def _print_json(payload: dict[str, Any]) -> None:
    print(json.dumps(payload, indent=2))


def _print_report_csv(fields: dict[str, Any]) -> None:
    header = ",".join(fields)
    row = ",".join(
        json.dumps(value) if isinstance(value, bool) else repr(value) if isinstance(value, float) else str(value)
        for value in fields.values()
    )
    print(header)
    print(row)


def _report_fields(report: InequalityReport) -> dict[str, Any]:
    return {
        "name": report.name,
        "lhs": report.lhs,
        "bound": report.bound,
        "margin": report.margin,
        "violation_factor": report.violation_factor,
        "violated": report.violated,
    }


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise ValidationError(f"{flag} expects comma-separated numbers, got {text!r}") from None


def _resolve_quad(args: argparse.Namespace) -> SettingsQuad:
    if args.angles is not None and args.diffs is not None:
        raise ValidationError("--angles and --diffs are mutually exclusive")
    if args.angles is not None:
        values = _parse_float_list(args.angles, "--angles")
        if len(values) != 4:
            raise ValidationError(f"--angles expects 4 values (a,b,a',b'), got {len(values)}")
        return SettingsQuad.of(*values)
    diffs = list(DEFAULT_DIFFS)
    if args.diffs is not None:
        values = _parse_float_list(args.diffs, "--diffs")
        if len(values) == 3:
            values.append(0.0)
        if len(values) != 4:
            raise ValidationError(f"--diffs expects 3 or 4 values, got {len(values)}")
        diffs = values
    if getattr(args, "ineq", None) == "bell65":
        # Three free pairs, no primed-pair constraint: directly realizable.
        d1, d2, d3 = diffs[0], diffs[1], diffs[2]
        return SettingsQuad.of(0.0, d1, d1 + d3, d2)
    return quad_from_differences(*diffs)


def _resolve_geometry(args: argparse.Namespace) -> qm.CascadeGeometry:
    return qm.CascadeGeometry(eta=args.eta, phi_deg=args.phi, f_override=args.force_f)


def _cross_fringes(quad: SettingsQuad) -> tuple[float, float, float]:
    a, b, ap, bp = quad.axes_degrees()
    return (
        cos_double_angle(a - b),
        cos_double_angle(bp - a),
        cos_double_angle(b - ap),
    )


def _require_symmetric(quad: SettingsQuad, what: str) -> None:
    c1, c2, c3 = _cross_fringes(quad)
    if max(abs(c1 - c2), abs(c1 - c3)) > 1e-9:
        raise ValidationError(
            f"{what} assumes one shared cross difference; use --diffs d,d,d[,d4]"
        )


def _quad_echo(quad: SettingsQuad) -> dict[str, Any]:
    a, b, ap, bp = quad.axes_degrees()
    return {
        "a": a,
        "b": b,
        "a_prime": ap,
        "b_prime": bp,
        "differences": list(quad.differences()),
    }


# ---------------------------------------------------------------------------
# verify-theorem
# ---------------------------------------------------------------------------


def _cmd_verify_theorem(args: argparse.Namespace) -> int:
    report = lhv.verify_theorem()
    payload = {
        "min_functional_value": report.min_functional_value,
        "all_satisfied": report.all_satisfied,
        "cases_match_expected": report.cases_match_expected,
        "n_assignments": len(lhv.enumerate_assignments()),
        "tight_assignments": [s.key() for s in report.argmin_assignments],
        "case_bounds": [
            {
                "a_prime": case.a_prime.symbol,
                "b_prime": case.b_prime.symbol,
                "min_three_term": case.min_three_term,
                "expected": case.expected,
            }
            for case in report.case_bounds
        ],
        "functional_values": {
            s.key(): lhv.bell_functional(s) for s in lhv.enumerate_assignments()
        },
    }
    _print_json(payload)
    return 0 if (report.all_satisfied and report.cases_match_expected) else 2


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def _evaluate(args: argparse.Namespace, quad: SettingsQuad) -> InequalityReport:
    ineq = args.ineq
    if ineq in _IDEAL_INEQS and args.source != "qm-ideal":
        raise ValidationError(f"--ineq {ineq} is evaluated with --source qm-ideal")
    if ineq in ("detection", "detection-sym") and args.source != "qm-real":
        raise ValidationError(f"--ineq {ineq} is evaluated with --source qm-real")

    a, b, ap, bp = quad.axes_degrees()
    c1, c2, c3 = _cross_fringes(quad)

    if ineq == "ternary":
        return ternary_inequality(
            c1, c2, c3, qm.ideal_pair_probabilities(ap - bp), _HALF, _HALF
        )
    if ineq == "ternary-sym":
        _require_symmetric(quad, "--ineq ternary-sym")
        pair = qm.ideal_pair_probabilities(ap - bp)
        return ternary_inequality_symmetric(c1, pair.pp, pair.mm, (0.5, 0.5, 0.5, 0.5))
    if ineq == "bell65":
        return bell_1965(c1, c2, c3)
    if ineq == "chsh":
        return chsh(c1, c2, c3, cos_double_angle(ap - bp))

    geom = _resolve_geometry(args)
    single = geom.single_rate
    if ineq == "detection":
        return detection_inequality(
            rates_ab=qm.detection_rates(a, b, geom),
            rates_bpa=qm.detection_rates(a, bp, geom),
            rates_bap=qm.detection_rates(ap, b, geom),
            rates_apbp=qm.detection_rates(ap, bp, geom),
            singles_ap=(single, single),
            singles_bp=(single, single),
        )
    _require_symmetric(quad, "--ineq detection-sym")
    rates_cross = qm.detection_rates(a, b, geom)
    rates_primed = qm.detection_rates(ap, bp, geom)
    return detection_inequality_symmetric(
        e_cross=rates_cross.d_pp - rates_cross.d_pm - rates_cross.d_mp + rates_cross.d_mm,
        total_cross=math.fsum(rates_cross.doubles()),
        d_pp_primed=rates_primed.d_pp,
        d_mm_primed=rates_primed.d_mm,
        total_primed=math.fsum(rates_primed.doubles()),
        d_plus_primed=single,
        d_minus_primed=single,
        singles_total_primed=2.0 * single,
    )


def _cmd_eval(args: argparse.Namespace) -> int:
    quad = _resolve_quad(args)
    report = _evaluate(args, quad)
    inputs: dict[str, Any] = {
        "ineq": args.ineq,
        "source": args.source,
        "quad": _quad_echo(quad),
    }
    if args.source == "qm-real":
        inputs.update(eta=args.eta, phi_deg=args.phi, f_override=args.force_f)
    if args.format == "csv":
        _print_report_csv(_report_fields(report))
    else:
        _print_json({**_report_fields(report), "inputs": inputs})
    return 0


# ---------------------------------------------------------------------------
# mc
# ---------------------------------------------------------------------------


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from None
    return 0


def _resolve_source(args: argparse.Namespace) -> montecarlo.Source:
    if args.source == "qm-ideal":
        return qm.IdealSource()
    if args.source == "qm-real":
        return qm.RealSource(_resolve_geometry(args))
    if args.model is None:
        raise ValidationError("--source lhv requires --model FILE")
    return montecarlo.LhvSource(lhv.load_model(args.model))


def _cmd_mc(args: argparse.Namespace) -> int:
    if args.pairs < 1:
        raise ValidationError(f"--pairs must be >= 1, got {args.pairs}")
    if args.workers < 1:
        raise ValidationError(f"--workers must be >= 1, got {args.workers}")
    quad = _resolve_quad(args)
    _require_symmetric(quad, "mc (symmetric estimator)")
    seed = _resolve_seed(args)
    plan = montecarlo.RunPlan(
        quad=quad,
        pairs_per_setting=args.pairs,
        seed=seed,
        source=_resolve_source(args),
    )
    counters = montecarlo.run_experiment(plan, workers=args.workers)
    cross = montecarlo.merge_counters(
        counters["ab"], counters["bpa"], counters["bap"]
    )
    estimated = montecarlo.evaluate_symmetric_detection(cross, counters["apbp"])

    if args.counters is not None:
        with open(args.counters, "w", encoding="utf-8") as handle:
            handle.write(montecarlo.counters_csv(counters))
    if args.manifest is not None:
        with open(args.manifest, "w", encoding="utf-8") as handle:
            handle.write(montecarlo.run_manifest(plan, counters))

    fields = _report_fields(estimated.report)
    fields["std_error"] = estimated.std_error
    fields["sigma_distance"] = estimated.sigma_distance
    if args.format == "csv":
        _print_report_csv(fields)
    else:
        inputs: dict[str, Any] = {
            "source": args.source,
            "quad": _quad_echo(quad),
            "pairs_per_setting": args.pairs,
            "seed": seed,
            "workers": args.workers,
        }
        if args.source == "qm-real":
            inputs.update(eta=args.eta, phi_deg=args.phi, f_override=args.force_f)
        if args.source == "lhv":
            inputs["model"] = args.model
        _print_json({**fields, "inputs": inputs})
    return 0


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------


def _cmd_scan(args: argparse.Namespace) -> int:
    if not 0.0 < args.step <= 45.0:
        raise ValidationError(f"--step must be in (0, 45], got {args.step}")
    if args.rounds < 0:
        raise ValidationError(f"--rounds must be >= 0, got {args.rounds}")
    if args.ineq == "ternary":
        if args.source != "qm-ideal":
            raise ValidationError("--ineq ternary is scanned with --source qm-ideal")
        source: qm.IdealSource | qm.RealSource = qm.IdealSource()
    else:
        if args.source != "qm-real":
            raise ValidationError("--ineq detection is scanned with --source qm-real")
        source = qm.RealSource(_resolve_geometry(args))

    result = optimizer.grid_scan(
        args.ineq,
        source,
        step_deg=args.step,
        refine_rounds=args.rounds,
        collect_surface=args.surface is not None,
    )
    if args.surface is not None:
        lines = ["a,b,a_prime,b_prime,lhs"]
        for a, b, ap, bp, lhs in result.surface or ():
            lines.append(f"{a!r},{b!r},{ap!r},{bp!r},{lhs!r}")
        with open(args.surface, "w", encoding="utf-8") as handle:
            handle.write("\n".join(lines) + "\n")

    payload: dict[str, Any] = {
        "ineq": args.ineq,
        "source": args.source,
        "best_quad": _quad_echo(result.best_quad),
        "best_lhs": result.best_lhs,
        "best_factor": result.best_factor,
        "step_deg": args.step,
        "refine_rounds": args.rounds,
    }
    if args.format == "csv":
        a, b, ap, bp = result.best_quad.axes_degrees()
        _print_report_csv(
            {
                "a": a, "b": b, "a_prime": ap, "b_prime": bp,
                "best_lhs": result.best_lhs, "best_factor": result.best_factor,
            }
        )
    else:
        _print_json(payload)
    return 0


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------


def _add_angle_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--angles",
        help="four axes a,b,a',b' in degrees (axes are 180-degree periodic)",
    )
    parser.add_argument(
        "--diffs",
        help="pair differences d1,d2,d3[,d4=0] for (a,b),(b',a),(b,a'),(a',b'); "
        "default 120,120,120,0",
    )


def _add_geometry_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--eta", type=float, default=DEFAULT_ETA,
        help="detector quantum efficiency in (0,1] (illustrative default: 0.2)",
    )
    parser.add_argument(
        "--phi", type=float, default=DEFAULT_PHI,
        help="detector half-aperture in degrees, (0,90] (illustrative default: 30)",
    )
    parser.add_argument(
        "--force-F", dest="force_f", type=float, default=None,
        help="override the aperture depolarization factor (e.g. 1 for the undamped fringe)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="belltest",
        description="Ternary-outcome Bell inequality toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser(
        "verify-theorem",
        help="enumerate all 81 deterministic assignments and check the -1 bound",
    )
    p_verify.set_defaults(handler=_cmd_verify_theorem)

    p_eval = sub.add_parser("eval", help="evaluate one inequality from closed forms")
    p_eval.add_argument("--ineq", choices=_EVAL_INEQS, required=True)
    p_eval.add_argument("--source", choices=("qm-ideal", "qm-real"), default="qm-ideal")
    _add_angle_flags(p_eval)
    _add_geometry_flags(p_eval)
    p_eval.add_argument("--format", choices=("json", "csv"), default="json")
    p_eval.set_defaults(handler=_cmd_eval)

    p_mc = sub.add_parser("mc", help="run a Monte Carlo coincidence experiment")
    p_mc.add_argument("--pairs", type=int, default=1_000_000,
                      help="emitted pairs per setting pair")
    p_mc.add_argument("--seed", type=int, default=None,
                      help=f"master seed (default: ${SEED_ENV_VAR} or 0)")
    p_mc.add_argument("--source", choices=("qm-real", "qm-ideal", "lhv"), default="qm-real")
    p_mc.add_argument("--model", default=None, help="four-axis model file for --source lhv")
    p_mc.add_argument("--workers", type=int, default=1,
                      help="threads for chunk sampling (never changes the counts)")
    _add_angle_flags(p_mc)
    _add_geometry_flags(p_mc)
    p_mc.add_argument("--counters", default=None, help="write per-pair counts CSV here")
    p_mc.add_argument("--manifest", default=None, help="write the run manifest here")
    p_mc.add_argument("--format", choices=("json", "csv"), default="json")
    p_mc.set_defaults(handler=_cmd_mc)

    p_scan = sub.add_parser("scan", help="grid-search setting quads for maximal violation")
    p_scan.add_argument("--ineq", choices=optimizer.INEQUALITIES, default="ternary")
    p_scan.add_argument("--source", choices=("qm-ideal", "qm-real"), default="qm-ideal")
    p_scan.add_argument("--step", type=float, default=1.0, help="grid step in degrees, (0,45]")
    p_scan.add_argument("--rounds", type=int, default=6, help="coordinate refinement rounds")
    _add_geometry_flags(p_scan)
    p_scan.add_argument("--surface", default=None,
                        help="write grid samples CSV here (use coarse --step)")
    p_scan.add_argument("--format", choices=("json", "csv"), default="json")
    p_scan.set_defaults(handler=_cmd_scan)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except BellTestError as exc:
        return _fail(str(exc))
    except OSError as exc:
        return _fail(f"io error: {exc}")


if __name__ == "__main__":
    sys.exit(main())
