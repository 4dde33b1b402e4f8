"""Linguistic severity / growth / confidence scales and their TFN encoding."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from .fuzzy import TriangularFuzzyNumber

SEVERITY = {
    "nothing": 0.0,
    "negligible": 0.025,
    "very limited": 0.05,
    "limited": 0.1,
    "circumscribed degradation": 0.2,
    "significant degradation": 0.3,
    "severe degradation": 0.5,
    "quite complete stop": 0.7,
    "stop": 1.0,
}

# magnitudes; the sign comes from growth vs reduction
GROWTH = {
    "steady": 0.0,
    "negligible": 0.0001,
    "very slow": 0.001,
    "slow": 0.03,
    "quite slow": 0.005,
    "not so slow": 0.010,
    "quite fast": 0.05,
    "fast": 0.07,
    "very fast": 0.1,
}

# half-widths by star count 1..5
CONFIDENCE_SEVERITY = {1: 0.0, 2: 0.005, 3: 0.050, 4: 0.100, 5: 0.200}
CONFIDENCE_GROWTH = {1: 0.0, 2: 0.0005, 3: 0.0050, 4: 0.0100, 5: 0.0200}

# "slow" (0.03) is out of order between "very slow" (0.001) and "quite slow" (0.005)
GROWTH_ANOMALIES = {"slow": "value 0.03 breaks the monotone ordering of the growth column"}

_ALIASES = {
    "circumscribed": "circumscribed degradation",
    "significant degradations": "significant degradation",
    "significant": "significant degradation",
    "severe": "severe degradation",
    "quite complete": "quite complete stop",
}


def _norm(label: str) -> str:
    key = " ".join(label.strip().lower().replace("-", " ").split())
    return _ALIASES.get(key, key)


def _lookup(table: dict, label: str, what: str) -> tuple[str, float]:
    key = _norm(label)
    if key not in table:
        raise ValueError(f"unknown {what} label {label!r}; valid labels: {', '.join(table)}")
    return key, table[key]


def _stars(confidence) -> int:
    if isinstance(confidence, str):
        s = confidence.replace(" ", "")
        n = len(s) if set(s) == {"*"} else int(s)
    else:
        n = int(confidence)
    if not 1 <= n <= 5:
        raise ValueError(f"confidence must be 1..5 stars, got {confidence!r}")
    return n


@dataclass(frozen=True)
class LinguisticAssessment:
    """One operator's report.

    ``growth_confidence`` defaults to ``confidence``; operators may rate the
    two estimates differently.
    """

    severity_label: str
    confidence: int
    growth_label: str | None = None
    growth_sign: Literal["growth", "reduction"] = "growth"
    growth_confidence: int | None = None

    def __post_init__(self):
        _lookup(SEVERITY, self.severity_label, "severity")
        if self.growth_label is not None:
            _lookup(GROWTH, self.growth_label, "growth")
        if self.growth_sign not in ("growth", "reduction"):
            raise ValueError(f"growth_sign must be 'growth' or 'reduction', got {self.growth_sign!r}")
        object.__setattr__(self, "confidence", _stars(self.confidence))
        if self.growth_confidence is not None:
            object.__setattr__(self, "growth_confidence", _stars(self.growth_confidence))


def _tfn(c: float, d: float) -> TriangularFuzzyNumber:
    # table values have at most 4 decimals; rounding removes binary noise like 0.6950000000000001
    return TriangularFuzzyNumber(round(c - d, 10), c, round(c + d, 10))


def encode_severity(label: str, confidence) -> TriangularFuzzyNumber:
    _, c = _lookup(SEVERITY, label, "severity")
    return _tfn(c, CONFIDENCE_SEVERITY[_stars(confidence)])


def encode_growth(label: str, sign: str, confidence) -> TriangularFuzzyNumber:
    _, mag = _lookup(GROWTH, label, "growth")
    c = -mag if sign == "reduction" else mag
    return _tfn(c, CONFIDENCE_GROWTH[_stars(confidence)])


def encode_assessment(a: LinguisticAssessment) -> tuple[TriangularFuzzyNumber, TriangularFuzzyNumber | None]:
    sev = encode_severity(a.severity_label, a.confidence)
    if a.growth_label is None:
        return sev, None
    gc = a.growth_confidence if a.growth_confidence is not None else a.confidence
    return sev, encode_growth(a.growth_label, a.growth_sign, gc)


def anomaly_note(growth_label: str | None) -> str | None:
    if growth_label is None:
        return None
    return GROWTH_ANOMALIES.get(_norm(growth_label))


# Initial conditions of the five-operator case study, as printed.
# The severity rows and growth rows 2-5 re-encode exactly from their labels;
# growth row 1 is printed with support [-0.2, 0.2] although five stars give
# +-0.02 on the growth scale. The printed values are what the case study uses.
TABLE4_SEVERITY = [
    ("nothing", 1, (0.0, 0.0, 0.0)),
    ("limited", 4, (0.0, 0.1, 0.2)),
    ("quite complete stop", 2, (0.695, 0.7, 0.705)),
    ("circumscribed degradation", 2, (0.195, 0.2, 0.205)),
    ("significant degradations", 4, (0.2, 0.3, 0.4)),
]
TABLE4_GROWTH = [
    ("steady", "growth", 5, (-0.2, 0.0, 0.2)),
    ("quite fast", "growth", 2, (0.0495, 0.05, 0.0505)),
    ("slow", "reduction", 3, (-0.035, -0.03, -0.025)),
    ("very fast", "reduction", 3, (-0.105, -0.1, -0.095)),
    ("fast", "growth", 1, (0.07, 0.07, 0.07)),
]


def table4_severity_tfns() -> list[TriangularFuzzyNumber]:
    return [TriangularFuzzyNumber(*t) for *_, t in TABLE4_SEVERITY]


def table4_growth_tfns() -> list[TriangularFuzzyNumber]:
    return [TriangularFuzzyNumber(*t) for *_, t in TABLE4_GROWTH]
