"""Ternary-outcome Bell inequality toolkit.

Subpackages by role: core (outcome types and probability algebra), lhv
(local models and the exhaustive bound verification), qm (cascade-photon
closed forms), inequalities (evaluators and reports), montecarlo
(deterministic coincidence sampling), optimizer (angle scans), cli.
"""

from . import cli, core, inequalities, lhv, montecarlo, optimizer, qm
from .core import (
    AngleDeg,
    BellTestError,
    DetectionRates,
    EventDistribution,
    Outcome,
    PairProbabilities,
    SinglesProbabilities,
    UndefinedRatioError,
    ValidationError,
)
from .inequalities import InequalityReport, SettingsQuad
from .lhv import DeterministicAssignment, FourAxisModel, TheoremReport

__version__ = "0.1.0"

__all__ = [
    "AngleDeg",
    "BellTestError",
    "DetectionRates",
    "DeterministicAssignment",
    "EventDistribution",
    "FourAxisModel",
    "InequalityReport",
    "Outcome",
    "PairProbabilities",
    "SettingsQuad",
    "SinglesProbabilities",
    "TheoremReport",
    "UndefinedRatioError",
    "ValidationError",
    "cli",
    "core",
    "inequalities",
    "lhv",
    "montecarlo",
    "optimizer",
    "qm",
    "__version__",
]
