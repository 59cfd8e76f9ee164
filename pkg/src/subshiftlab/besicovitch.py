"""Finite-horizon Besicovitch pseudometric between symbolic points."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .density import DEFAULT_OSCILLATION_TOL, DensityProfile, profile_from_mask
from .points import SymbolicPoint

__all__ = [
    "BesicovitchEstimate",
    "late_schedule",
    "disagreement_mask",
    "disagreement_density",
    "window_dilation",
    "besicovitch_db",
    "besicovitch_ball_test",
]

MAX_R = 30
_AVG_BITS = 32


@dataclass
class BesicovitchEstimate:
    symbolic_density: DensityProfile
    cantor_db: Fraction
    averaged: Fraction
    horizon: int
    grid_densities: list[Fraction]

    @property
    def symbolic_limsup(self) -> Fraction:
        return self.symbolic_density.limsup_est

    def to_json(self) -> dict:
        return {
            "symbolic_limsup": float(self.symbolic_limsup),
            "symbolic_liminf": float(self.symbolic_density.liminf_est),
            "cantor_db": float(self.cantor_db),
            "averaged": float(self.averaged),
            "horizon": self.horizon,
        }


def late_schedule(horizon: int, points: int = 16) -> list[int]:
    """``points`` evenly spaced window ends up to ``horizon``.

    The tail half starts at ``horizon / 2``, so a finite disagreement set of
    size ``c`` shows up as at most ``2c / horizon``.  Suitable only for sets
    whose density converges; oscillating sets need the dyadic schedule.
    """
    horizon = int(horizon)
    ends = sorted({max(1, horizon * k // points) for k in range(1, points + 1)})
    return ends


def disagreement_mask(x: SymbolicPoint, y: SymbolicPoint, n: int) -> np.ndarray:
    """Indicator of ``{i < n : x_i != y_i}``."""
    if x.alphabet_size != y.alphabet_size:
        raise ValueError("points must share an alphabet")
    return x.prefix(n) != y.prefix(n)


def disagreement_density(
    x: SymbolicPoint,
    y: SymbolicPoint,
    schedule: Sequence[int],
    tolerance: Fraction | float = DEFAULT_OSCILLATION_TOL,
) -> DensityProfile:
    return profile_from_mask(disagreement_mask(x, y, int(schedule[-1]) + 1), schedule, tolerance)


def window_dilation(mask: np.ndarray, r: int, n: int) -> np.ndarray:
    """``out[i] = any(mask[i:i+r])`` for ``i <= n``; ``mask`` must cover ``[0, n+r)``."""
    c = np.concatenate([[0], np.cumsum(mask, dtype=np.int64)])
    return (c[r : r + n + 1] - c[: n + 1]) > 0


def besicovitch_db(
    x: SymbolicPoint,
    y: SymbolicPoint,
    horizon: int,
    schedule: Sequence[int] | None = None,
    max_r: int = MAX_R,
) -> BesicovitchEstimate:
    """Estimate ``d_b(x, y)`` on ``[0, horizon]``.

    Only disagreements inside ``[0, horizon]`` are seen.  ``cantor_db`` is the
    least ``2**-r`` (``1 <= r <= max_r``) whose set ``Delta`` has upper
    density below it; it is 0 when even the finest grid point qualifies and
    1 when none does.
    """
    horizon = int(horizon)
    schedule = late_schedule(horizon) if schedule is None else [int(s) for s in schedule]
    if schedule[-1] != horizon:
        raise ValueError("schedule must end at the horizon")
    diff = disagreement_mask(x, y, horizon + 1)
    symbolic = profile_from_mask(diff, schedule)

    padded = np.concatenate([diff, np.zeros(max_r, dtype=bool)])
    grid = []
    qualifying = []
    for r in range(1, max_r + 1):
        delta = Fraction(1, 1 << r)
        d = profile_from_mask(window_dilation(padded, r, horizon), schedule).limsup_est
        grid.append(d)
        if d < delta:
            qualifying.append(r)
    if not qualifying:
        cantor = Fraction(1)
    elif qualifying[-1] == max_r:
        cantor = Fraction(0)
    else:
        cantor = Fraction(1, 1 << max(qualifying))
    return BesicovitchEstimate(symbolic, cantor, _averaged(padded, horizon, schedule), horizon, grid)


def _averaged(padded: np.ndarray, horizon: int, schedule: Sequence[int]) -> Fraction:
    # d(T^i x, T^i y) = 2^-(next disagreement at or after i, minus i), in units of 2^-32
    n = padded.size
    idx = np.where(padded, np.arange(n), n + _AVG_BITS)
    nxt = np.minimum.accumulate(idx[::-1])[::-1][: horizon + 1]
    gap = nxt - np.arange(horizon + 1)
    units = np.where(gap <= _AVG_BITS, np.left_shift(1, _AVG_BITS - np.minimum(gap, _AVG_BITS)), 0)
    c = np.cumsum(units, dtype=np.int64)
    vals = [Fraction(int(c[e]), (e + 1) << _AVG_BITS) for e in schedule]
    return max(vals[len(vals) // 2 :])


def besicovitch_ball_test(x: SymbolicPoint, y: SymbolicPoint, epsilon, horizon: int) -> bool:
    """Whether ``y`` lies in the Besicovitch ball of radius ``epsilon`` about ``x``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return besicovitch_db(x, y, horizon).cantor_db <= Fraction(epsilon)
