"""Finite-horizon probes for mean and diam-mean equicontinuity."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from .besicovitch import disagreement_density, disagreement_mask, late_schedule
from .density import dyadic_schedule, profile_from_mask
from .points import SymbolicPoint
from .systems import Cylinder, PatternBudgetExceeded, SubshiftModel
from .verdict import ProbeVerdict, Verdict

__all__ = [
    "mean_equicontinuity_probe",
    "mean_equicontinuity_scan",
    "diam_mean_probe",
    "ambiguity_set",
    "mean_sensitivity_witness",
    "DEFAULT_RADII",
]

DEFAULT_RADII = (4, 8, 12, 16)


def _distinct(points: Sequence[SymbolicPoint], n: int) -> list[SymbolicPoint]:
    seen = set()
    out = []
    for p in points:
        key = p.prefix(n).tobytes()
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


def mean_equicontinuity_probe(
    model: SubshiftModel,
    x: SymbolicPoint,
    epsilon,
    m: int,
    budget: int = 64,
    horizon: int = 1 << 20,
    seed: int = 0,
) -> ProbeVerdict:
    """Is ``x`` a mean equicontinuity point at scale ``epsilon``, with the
    ``delta``-ball taken to be the cylinder of ``x[:m]``?"""
    epsilon = Fraction(epsilon)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    params = {"epsilon": epsilon, "m": m, "horizon": horizon, "budget": budget, "seed": seed}
    rng = np.random.default_rng([seed, m])
    u = x.prefix(m).tolist()
    neighbours = _distinct(model.neighbors(u, rng, budget, horizon), horizon + 1)
    if len(neighbours) < 2:
        return ProbeVerdict("mean_eq", params, Verdict.INCONCLUSIVE, notes={"neighbors": len(neighbours)})
    schedule = late_schedule(horizon)
    worst, worst_y = Fraction(-1), None
    for y in neighbours:
        d = disagreement_density(x, y, schedule).limsup_est
        if d > worst:
            worst, worst_y = d, y
    notes = {"neighbors": len(neighbours)}
    if worst <= epsilon:
        return ProbeVerdict("mean_eq", params, Verdict.PASS, statistic=worst, notes=notes)
    witness = {"x": x.name, "y": worst_y.name, "y_prefix": worst_y.to_text(min(64, horizon)), "density": worst}
    return ProbeVerdict("mean_eq", params, Verdict.FAIL, statistic=worst, witness=witness, notes=notes)


def mean_equicontinuity_scan(
    model: SubshiftModel,
    x: SymbolicPoint,
    epsilon,
    radii: Sequence[int] = DEFAULT_RADII,
    budget: int = 64,
    horizon: int = 1 << 20,
    seed: int = 0,
) -> ProbeVerdict:
    """Approximate the existential ``delta`` by trying several cylinder lengths.

    Passes as soon as one length passes; fails only if every length fails.
    """
    results = [mean_equicontinuity_probe(model, x, epsilon, m, budget, horizon, seed) for m in radii]
    params = {"epsilon": Fraction(epsilon), "radii": list(radii), "horizon": horizon, "budget": budget, "seed": seed}
    per_m = {str(m): r.verdict.value for m, r in zip(radii, results)}
    for r in results:
        if r.verdict is Verdict.PASS:
            return ProbeVerdict("mean_eq", params, Verdict.PASS, statistic=r.statistic, notes={"per_m": per_m, "m": r.parameters["m"]})
    if all(r.verdict is Verdict.FAIL for r in results):
        best = min(results, key=lambda r: r.statistic)
        return ProbeVerdict("mean_eq", params, Verdict.FAIL, statistic=best.statistic, witness=best.witness, notes={"per_m": per_m})
    return ProbeVerdict("mean_eq", params, Verdict.INCONCLUSIVE, notes={"per_m": per_m})


def ambiguity_set(model: SubshiftModel, u, r: int, horizon: int, max_occurrences: int = 512) -> tuple[np.ndarray, dict]:
    """Indicator on ``[0, horizon]`` of times where the cylinder ``[u]`` has
    diameter above ``2**-r``."""
    word = u.word if isinstance(u, Cylinder) else u
    return model.ambiguity_mask(word, r, horizon, horizon, max_occurrences)


def diam_mean_probe(
    model: SubshiftModel,
    u,
    r: int,
    horizon: int = 1 << 20,
    statistic: str = "limsup",
    max_occurrences: int = 512,
) -> ProbeVerdict:
    """Upper (or, with ``statistic='liminf'``, lower) density of the ambiguity set.

    Times inside the cylinder word are excluded; they are never ambiguous
    and dropping a finite set does not change densities.
    """
    if statistic not in ("limsup", "liminf"):
        raise ValueError("statistic must be 'limsup' or 'liminf'")
    cyl = u if isinstance(u, Cylinder) else Cylinder.of(u)
    if cyl.offset:
        raise ValueError("diam-mean probe expects a cylinder at offset 0")
    params = {"u": str(cyl), "r": r, "epsilon": Fraction(1, 1 << r), "horizon": horizon, "statistic": statistic}
    try:
        mask, info = ambiguity_set(model, cyl.word, r, horizon, max_occurrences)
    except PatternBudgetExceeded as exc:
        return ProbeVerdict("diam_mean", params, Verdict.INCONCLUSIVE, notes={"error": str(exc)})
    if info["occurrences_found"] == 0 and not info["exact"]:
        return ProbeVerdict("diam_mean", params, Verdict.INCONCLUSIVE, notes={"error": "cylinder not observed", **info})
    exclude = len(cyl)
    schedule = [n for n in dyadic_schedule(horizon) if n >= exclude]
    prof = profile_from_mask(mask, schedule, exclude=exclude)
    stat = prof.limsup_est if statistic == "limsup" else prof.liminf_est
    notes = {**info, "liminf_est": prof.liminf_est, "limsup_est": prof.limsup_est}
    if stat <= Fraction(1, 1 << r):
        return ProbeVerdict("diam_mean", params, Verdict.PASS, statistic=stat, notes=notes)
    first = np.flatnonzero(mask[exclude:])[:16] + exclude
    return ProbeVerdict(
        "diam_mean",
        params,
        Verdict.FAIL,
        statistic=stat,
        witness={"ambiguous_times": first.tolist(), "density": stat},
        notes=notes,
    )


def mean_sensitivity_witness(
    model: SubshiftModel,
    epsilon,
    u,
    budget: int = 1000,
    horizon: int = 1 << 20,
    seed: int = 0,
) -> tuple[tuple[SymbolicPoint, SymbolicPoint], Fraction] | None:
    """First sampled pair in ``[u]`` whose disagreement density exceeds ``epsilon``.

    ``budget`` bounds the number of pairs compared.
    """
    epsilon = Fraction(epsilon)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    cyl = u if isinstance(u, Cylinder) else Cylinder.of(u)
    rng = np.random.default_rng([seed, len(cyl)])
    k = 2
    while k * (k - 1) // 2 < budget:
        k += 1
    pts = _distinct(model.neighbors(cyl.word, rng, k, horizon), horizon + 1)
    schedule = late_schedule(horizon)
    seen = 0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if seen >= budget:
                return None
            seen += 1
            d = disagreement_density(pts[i], pts[j], schedule).limsup_est
            if d > epsilon:
                return (pts[i], pts[j]), d
    return None
