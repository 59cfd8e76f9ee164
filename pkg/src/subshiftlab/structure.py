"""Periodic structures: disjoint arithmetic progressions carrying periodic words."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np


@dataclass(frozen=True)
class Progression:
    """Positions ``start + k * period`` (``k >= 0``) along which the point
    reads ``pattern`` periodically: ``x[start + k*period] == pattern[k % len(pattern)]``.

    A pattern of length one is a constant progression in the usual sense.
    """

    period: int
    start: int
    pattern: tuple[int, ...]

    @property
    def residue(self) -> int:
        return self.start % self.period

    @property
    def symbol(self) -> int | None:
        return self.pattern[0] if len(self.pattern) == 1 else None

    def constant_parts(self) -> list["Progression"]:
        """Split into ``len(pattern)`` constant progressions of period ``period * len(pattern)``."""
        q = len(self.pattern)
        return [Progression(self.period * q, self.start + k * self.period, (a,)) for k, a in enumerate(self.pattern)]

    def positions(self, n: int) -> np.ndarray:
        return np.arange(self.start, n + 1, self.period, dtype=np.int64)

    def meets(self, other: "Progression") -> bool:
        """Whether the two one-sided progressions share a position."""
        g = gcd(self.period, other.period)
        if (self.start - other.start) % g:
            return False
        return True

    def to_json(self) -> dict:
        pat = "".join(str(a) for a in self.pattern)
        if len(pat) > 64:
            pat = pat[:64] + f"...(+{len(self.pattern) - 64})"
        return {"period": self.period, "residue": self.start, "pattern_length": len(self.pattern), "pattern": pat}


@dataclass
class PeriodicStructure:
    progressions: list[Progression]
    max_period: int | None = None
    horizon: int | None = None
    binding: bool = False
    notes: dict = field(default_factory=dict)

    @property
    def coverage_sum(self) -> Fraction:
        return sum((Fraction(1, p.period) for p in self.progressions), Fraction(0))

    def constant_progressions(self) -> list[Progression]:
        out = []
        for p in self.progressions:
            out.extend(p.constant_parts())
        return out

    def covered_mask(self, n: int) -> np.ndarray:
        mask = np.zeros(n + 1, dtype=bool)
        for p in self.progressions:
            mask[p.start :: p.period] = True
        return mask

    def levels(self) -> list[tuple[int, int]]:
        """``(period, start)`` pairs sorted by period then start."""
        return sorted((p.period, p.start) for p in self.progressions)

    def to_json(self) -> dict:
        return {
            "progressions": [p.to_json() for p in sorted(self.progressions, key=lambda p: (p.period, p.start))],
            "coverage_sum": str(self.coverage_sum),
            "coverage": float(self.coverage_sum),
            "max_period": self.max_period,
            "horizon": self.horizon,
            "binding": self.binding,
        }
