"""Equicontinuous-factor side information for the Toeplitz and Sturmian families.

Toeplitz points are analysed through their periodic structure: disjoint
progressions ``j + pZ_+`` along which the point reads a periodic word.  A
constant progression is the special case of a length-one word; a progression
with word length ``q`` splits into ``q`` constant progressions of period
``p*q`` with the same total density ``1/p``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .density import DensityProfile, dyadic_schedule, profile_from_mask
from .points import SymbolicPoint, check_irrational, rotation_high64, to_fixed
from .structure import PeriodicStructure, Progression
from .verdict import ProbeVerdict, Verdict

__all__ = [
    "minimal_period",
    "extract_periodic_structure",
    "regularity_check",
    "FiberReport",
    "sturmian_fiber_ambiguity",
    "fiber_ambiguity_mask",
]

PATTERN_FACTOR = 16
FIBER_THRESHOLD = 5


def _self_matches(z: np.ndarray, alphabet_size: int, max_shift: int) -> np.ndarray:
    """``out[q] = #{i : z[i] == z[i+q]}`` for ``0 <= q <= max_shift``."""
    n = z.size
    size = 1 << int(2 * n - 1).bit_length()
    total = np.zeros(max_shift + 1)
    for s in range(alphabet_size):
        e = (z == s).astype(np.float64)
        if not e.any():
            continue
        f = np.fft.rfft(e, size)
        total += np.fft.irfft(f * np.conj(f), size)[: max_shift + 1]
    return np.rint(total).astype(np.int64)


def minimal_period(y: np.ndarray, max_q: int, alphabet_size: int = 2) -> int | None:
    """Least ``q <= max_q`` with ``y[i] == y[i+q]`` throughout and ``len(y) >= 2q``.

    Shifts are screened on the first ``2*max_q`` samples with FFT
    self-correlation, then verified on the whole of ``y``.
    """
    n = y.size
    Q = min(int(max_q), n // 2)
    if Q < 1:
        return None
    z = y[: 2 * Q]
    matches = _self_matches(z, alphabet_size, Q)
    need = z.size - np.arange(Q + 1)
    for q in np.flatnonzero(matches[1:] == need[1:]) + 1:
        q = int(q)
        if np.array_equal(y[q:], y[:-q]):
            return q
    return None


def extract_periodic_structure(
    x: SymbolicPoint,
    max_period: int,
    horizon: int,
    max_pattern: int | None = None,
) -> PeriodicStructure:
    """Periodic structure of ``x`` seen on ``[0, horizon]``.

    Every position ``j < 2*max_period`` not already covered gets the least
    ``p <= max_period`` for which ``x`` along ``j + pZ_+`` is periodic with
    word length at most ``max_pattern`` (seen at least twice) and the
    progression is disjoint from those already found.
    """
    max_period = int(max_period)
    horizon = int(horizon)
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    if horizon < 4 * max_period:
        raise ValueError("horizon must be >= 4 * max_period")
    if max_pattern is None:
        max_pattern = PATTERN_FACTOR * max_period
    a = x.alphabet_size
    data = x.prefix(horizon + 1)
    span = 2 * max_period
    covered = np.zeros(span, dtype=bool)
    found: list[Progression] = []
    for j in range(span):
        if covered[j]:
            continue
        for p in range(1, max_period + 1):
            y = data[j::p]
            q = minimal_period(y, max_pattern, a)
            if q is None:
                continue
            prog = Progression(p, j, tuple(int(s) for s in y[:q]))
            if any(prog.meets(other) for other in found):
                continue
            found.append(prog)
            covered[j::p] = True
            break
    top = [pr for pr in found if 2 * pr.period > max_period]
    return PeriodicStructure(
        found,
        max_period=max_period,
        horizon=horizon,
        binding=bool(top),
        notes={"max_pattern": max_pattern, "uncovered_below": int(span - covered.sum())},
    )


def regularity_check(ps: PeriodicStructure, tolerance: Fraction | float = Fraction(1, 512)) -> ProbeVerdict:
    """Regular when the progression densities sum to 1 within ``tolerance``."""
    tol = Fraction(tolerance) if not isinstance(tolerance, float) else Fraction(repr(tolerance))
    gap = 1 - ps.coverage_sum
    params = {"tolerance": tol, "max_period": ps.max_period, "horizon": ps.horizon}
    if gap <= tol:
        verdict, witness = Verdict.PASS, None
    elif ps.binding:
        verdict, witness = Verdict.INCONCLUSIVE, None
    else:
        verdict, witness = Verdict.FAIL, {"uncovered_density": gap, "levels": ps.levels()}
    return ProbeVerdict(
        "regularity",
        params,
        verdict,
        statistic=ps.coverage_sum,
        witness=witness,
        notes={"binding": ps.binding, "progressions": len(ps.progressions)},
    )


@dataclass
class FiberReport:
    ambiguity_density: DensityProfile
    delta: Fraction
    regular_verdict: Verdict
    threshold: Fraction
    alpha: Fraction
    beta: Fraction
    notes: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "delta": float(self.delta),
            "threshold": float(self.threshold),
            "regular_verdict": self.regular_verdict.value,
            "alpha": float(self.alpha),
            "beta": float(self.beta),
            **self.ambiguity_density.summary(),
        }


def fiber_ambiguity_mask(alpha: Fraction, beta: Fraction, delta: Fraction, horizon: int, bits: int = 96) -> np.ndarray:
    """Times ``i <= horizon`` with ``beta + i alpha`` within ``delta`` of ``{0, 1 - alpha}``.

    Distances are taken on the circle from the top 64 bits of the exact
    orbit, so the arc ends are resolved to ``2**-63``.
    """
    a_fx = to_fixed(alpha, bits)
    b_fx = to_fixed(beta, bits)
    cut = np.uint64(((1 << bits) - a_fx) >> (bits - 64))
    radius = np.uint64(min(int(Fraction(delta) * (1 << 64)), (1 << 64) - 1))
    out = np.empty(horizon + 1, dtype=bool)
    step = 1 << 20
    for lo in range(0, horizon + 1, step):
        hi = min(horizon + 1, lo + step)
        v = rotation_high64(a_fx, b_fx, lo, hi, bits)
        # unsigned wrap-around gives both one-sided circle distances
        near0 = np.minimum(v, np.uint64(0) - v) <= radius
        w = v - cut
        near1 = np.minimum(w, np.uint64(0) - w) <= radius
        out[lo:hi] = near0 | near1
    return out


def sturmian_fiber_ambiguity(
    alpha: Any,
    beta: Any,
    delta: Any,
    horizon: int,
    threshold_factor: int | Fraction = FIBER_THRESHOLD,
) -> FiberReport:
    """Density of times whose rotation point lies near a discontinuity of the coding.

    Both arcs have length ``2*delta``, so the density tends to ``4*delta``;
    the regular verdict passes when the estimate is at most
    ``threshold_factor * delta``.
    """
    from .systems import parse_fraction

    alpha = parse_fraction(alpha)
    beta = parse_fraction(beta) % 1
    delta = parse_fraction(delta)
    check_irrational(alpha)
    if not 0 < delta < Fraction(1, 10):
        raise ValueError("delta must lie in (0, 0.1)")
    mask = fiber_ambiguity_mask(alpha, beta, delta, horizon)
    prof = profile_from_mask(mask, dyadic_schedule(horizon))
    threshold = Fraction(threshold_factor) * delta
    verdict = Verdict.PASS if prof.limsup_est <= threshold else Verdict.FAIL
    return FiberReport(prof, delta, verdict, threshold, alpha, beta, {"horizon": horizon})
