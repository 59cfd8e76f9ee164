"""Tri-state verdicts shared by all probes."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any


class Verdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"

    def __str__(self) -> str:
        return self.value


@dataclass
class ProbeVerdict:
    """Outcome of one finite-horizon probe.

    ``statistic`` is the extremal quantity that decided the verdict; a
    ``FAIL`` always carries a ``witness``.
    """

    probe_name: str
    parameters: dict[str, Any]
    verdict: Verdict
    statistic: Fraction | float | None = None
    witness: Any = None
    notes: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.verdict = Verdict(self.verdict)
        if self.verdict is Verdict.FAIL and self.witness is None:
            raise ValueError(f"{self.probe_name}: fail verdict without witness")

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def to_json(self) -> dict:
        stat = self.statistic
        out = {
            "probe": self.probe_name,
            "verdict": self.verdict.value,
            "statistic": None if stat is None else round(float(stat), 12),
            "parameters": _jsonable(self.parameters),
        }
        if self.witness is not None:
            out["witness"] = _jsonable(self.witness)
        if self.notes:
            out["notes"] = _jsonable(self.notes)
        return out


def _jsonable(obj: Any) -> Any:
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, Fraction):
        return round(float(obj), 12)
    if isinstance(obj, float):
        return round(obj, 12)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return obj.tolist()
    return obj
