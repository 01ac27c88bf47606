"""Verdict vocabulary shared by the classifiers and the CLI."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum


class Verdict(str, Enum):
    COLOR_REP = "ColorRep"
    NO_COLOR_REP = "NoColorRep"
    UNDETERMINED = "Undetermined"


class Regime(str, Enum):
    H_ZERO = "h=0"
    SMALL_H = "small-h"
    LARGE_H = "large-h"
    ALL_H = "all-h"
    ALL_POSITIVE_H = "all-positive-h"


@dataclass(frozen=True)
class ClassificationReport:
    """One classifier's answer, tagged with the h-regime it speaks about.

    Verdicts never extrapolate across regimes: representability is not
    monotone in h, so a large-h verdict says nothing about small h.
    """

    verdict: Verdict
    regime: Regime
    source: str
    witness: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "regime": self.regime.value,
            "source": self.source,
            "witness": _plain(self.witness),
        }


def _plain(obj):
    """Recursively coerce numpy scalars/arrays into JSON-friendly values."""
    import numpy as np

    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Enum):
        return obj.value
    return obj
