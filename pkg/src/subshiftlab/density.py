"""Upper/lower densities of subsets of the non-negative integers.

Densities are taken along the windows ``F_n = [0, n]``.  A :class:`TimeSet`
is a membership rule on ``Z_+`` with an optional structured form
(arithmetic progression, finite set, union, complement, translate) that
permits fast indicator construction and closed-form densities.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "TimeSet",
    "DensityProfile",
    "PigeonholeError",
    "window_density",
    "density_profile",
    "dyadic_schedule",
    "exact_density",
    "pigeonhole_select",
    "as_fraction",
]

DEFAULT_OSCILLATION_TOL = Fraction(1, 1000)
# largest common period we are willing to expand when reducing a structured set
MAX_EXACT_PERIOD = 1 << 20


def as_fraction(x: Any) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float literal."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


class TimeSet:
    """A subset of ``Z_+`` given by a membership rule.

    Build instances with the class constructors (:meth:`arithmetic`,
    :meth:`finite`, :meth:`union`, :meth:`complement`, :meth:`shifted`,
    :meth:`from_predicate`, :meth:`from_mask`).  Structured instances carry
    an ``exact_form`` tuple and are JSON-serialisable.
    """

    __slots__ = ("_membership", "_vectorized", "exact_form", "label")

    def __init__(
        self,
        membership: Callable[[Any], Any] | None = None,
        exact_form: tuple | None = None,
        vectorized: bool = False,
        label: str | None = None,
    ):
        if membership is None and exact_form is None:
            raise ValueError("TimeSet needs a membership rule or an exact form")
        self._membership = membership
        self._vectorized = vectorized
        self.exact_form = exact_form
        self.label = label

    # -- constructors -------------------------------------------------
    @classmethod
    def arithmetic(cls, a: int, p: int) -> "TimeSet":
        """``{a + k p : k >= 0}``."""
        if p < 1 or a < 0:
            raise ValueError(f"need a >= 0 and p >= 1, got a={a}, p={p}")
        return cls(exact_form=("arithmetic", int(a), int(p)))

    @classmethod
    def finite(cls, elements: Iterable[int]) -> "TimeSet":
        elems = frozenset(int(e) for e in elements)
        if any(e < 0 for e in elems):
            raise ValueError("finite TimeSet elements must be >= 0")
        return cls(exact_form=("finite", elems))

    @classmethod
    def union(cls, parts: Sequence["TimeSet"]) -> "TimeSet":
        return cls(exact_form=("union", tuple(parts)))

    @classmethod
    def complement(cls, of: "TimeSet") -> "TimeSet":
        return cls(exact_form=("complement", of))

    @classmethod
    def shifted(cls, of: "TimeSet", t: int) -> "TimeSet":
        """The translate ``t + S``."""
        if t < 0:
            raise ValueError("translation must be non-negative on Z_+")
        return cls(exact_form=("shift", int(t), of))

    @classmethod
    def from_predicate(cls, fn: Callable[[Any], Any], vectorized: bool = False, label: str | None = None) -> "TimeSet":
        """Wrap a membership predicate.

        With ``vectorized=True`` the predicate receives an integer ndarray and
        must return a boolean array of the same shape.
        """
        return cls(membership=fn, vectorized=vectorized, label=label)

    @classmethod
    def from_mask(cls, mask: np.ndarray, label: str | None = None) -> "TimeSet":
        """A set known on ``[0, len(mask))``; indices past the end are absent."""
        mask = np.asarray(mask, dtype=bool)

        def member(idx):
            idx = np.asarray(idx)
            out = np.zeros(idx.shape, dtype=bool)
            ok = idx < mask.size
            out[ok] = mask[idx[ok]]
            return out

        ts = cls(membership=member, vectorized=True, label=label)
        return ts

    # -- membership ---------------------------------------------------
    @property
    def kind(self) -> str | None:
        return None if self.exact_form is None else self.exact_form[0]

    def __contains__(self, i: int) -> bool:
        i = int(i)
        if i < 0:
            return False
        form = self.exact_form
        if form is None:
            if self._vectorized:
                return bool(np.asarray(self._membership(np.array([i])))[0])
            return bool(self._membership(i))
        kind = form[0]
        if kind == "arithmetic":
            _, a, p = form
            return i >= a and (i - a) % p == 0
        if kind == "finite":
            return i in form[1]
        if kind == "union":
            return any(i in part for part in form[1])
        if kind == "complement":
            return i not in form[1]
        if kind == "shift":
            _, t, of = form
            return i >= t and (i - t) in of
        raise ValueError(f"unknown TimeSet kind {kind!r}")

    def indicator(self, n: int) -> np.ndarray:
        """Boolean membership array for ``[0, n]`` (length ``n + 1``)."""
        if n < 0:
            return np.zeros(0, dtype=bool)
        form = self.exact_form
        if form is None:
            if self._vectorized:
                out = np.asarray(self._membership(np.arange(n + 1, dtype=np.int64)), dtype=bool)
                if out.shape != (n + 1,):
                    raise ValueError("vectorized predicate returned the wrong shape")
                return out
            fn = self._membership
            return np.fromiter((bool(fn(i)) for i in range(n + 1)), dtype=bool, count=n + 1)
        kind = form[0]
        mask = np.zeros(n + 1, dtype=bool)
        if kind == "arithmetic":
            _, a, p = form
            mask[a::p] = True
        elif kind == "finite":
            elems = [e for e in form[1] if e <= n]
            mask[elems] = True
        elif kind == "union":
            for part in form[1]:
                mask |= part.indicator(n)
        elif kind == "complement":
            mask = ~form[1].indicator(n)
        elif kind == "shift":
            _, t, of = form
            if t <= n:
                mask[t:] = of.indicator(n - t)
        else:
            raise ValueError(f"unknown TimeSet kind {kind!r}")
        return mask

    # -- serialisation ------------------------------------------------
    def to_json(self) -> dict:
        form = self.exact_form
        if form is None:
            raise ValueError("predicate-only TimeSets are not serialisable")
        kind = form[0]
        if kind == "arithmetic":
            return {"kind": "arithmetic", "a": form[1], "p": form[2]}
        if kind == "finite":
            return {"kind": "finite", "elements": sorted(form[1])}
        if kind == "union":
            return {"kind": "union", "parts": [p.to_json() for p in form[1]]}
        if kind == "complement":
            return {"kind": "complement", "of": form[1].to_json()}
        if kind == "shift":
            return {"kind": "shift", "t": form[1], "of": form[2].to_json()}
        raise ValueError(f"unknown TimeSet kind {kind!r}")

    @classmethod
    def from_json(cls, obj: Mapping[str, Any] | str) -> "TimeSet":
        if isinstance(obj, str):
            obj = json.loads(obj)
        kind = obj.get("kind")
        if kind == "arithmetic":
            return cls.arithmetic(obj["a"], obj["p"])
        if kind == "finite":
            return cls.finite(obj["elements"])
        if kind == "union":
            return cls.union([cls.from_json(p) for p in obj["parts"]])
        if kind == "complement":
            return cls.complement(cls.from_json(obj["of"]))
        if kind == "shift":
            return cls.shifted(cls.from_json(obj["of"]), obj["t"])
        raise ValueError(f"unknown TimeSet kind {kind!r}")

    def __repr__(self) -> str:
        if self.exact_form is None:
            return f"TimeSet(<predicate {self.label or '?'}>)"
        return f"TimeSet({json.dumps(self.to_json())})"


@dataclass
class DensityProfile:
    """Window densities ``|S ∩ F_n| / |F_n|`` along a schedule of window ends."""

    window_ends: list[int]
    values: list[Fraction]
    liminf_est: Fraction
    limsup_est: Fraction
    converged: bool
    exclude: int = 0
    tolerance: Fraction = field(default=DEFAULT_OSCILLATION_TOL)

    @property
    def horizon(self) -> int:
        return self.window_ends[-1]

    def tail(self) -> list[Fraction]:
        return self.values[len(self.values) // 2:]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["window_end", "value"])
        for n, v in zip(self.window_ends, self.values):
            w.writerow([n, f"{float(v):.12g}"])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "liminf_est": float(self.liminf_est),
            "limsup_est": float(self.limsup_est),
            "converged": self.converged,
            "horizon": self.horizon,
        }


def window_density(s: TimeSet, n: int) -> Fraction:
    if n < 0:
        raise ValueError("window end must be >= 0")
    return Fraction(int(np.count_nonzero(s.indicator(n))), n + 1)


def dyadic_schedule(horizon: int, base: int = 2) -> list[int]:
    """Window ends ``base**k <= horizon``, with ``horizon`` appended if missing."""
    if horizon < 1:
        return [max(horizon, 0)]
    ends = []
    v = 1
    while v <= horizon:
        ends.append(v)
        v *= base
    if ends[-1] != horizon:
        ends.append(horizon)
    return ends


def profile_from_mask(
    mask: np.ndarray,
    schedule: Sequence[int],
    tolerance: Fraction | float = DEFAULT_OSCILLATION_TOL,
    exclude: int = 0,
) -> DensityProfile:
    """Profile of the set whose indicator on ``[0, len(mask))`` is ``mask``.

    ``exclude`` drops the finite initial segment ``[0, exclude)`` from every
    window; limit densities do not change under removal of a finite set.
    """
    schedule = [int(n) for n in schedule]
    if not schedule:
        raise ValueError("schedule must be nonempty")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing")
    if schedule[-1] >= mask.size:
        raise ValueError("mask too short for schedule")
    if schedule[0] < exclude:
        raise ValueError("schedule starts inside the excluded segment")
    tolerance = as_fraction(tolerance)
    values = []
    count = 0
    lo = exclude
    for n in schedule:
        count += int(np.count_nonzero(mask[lo:n + 1]))
        lo = n + 1
        values.append(Fraction(count, n + 1 - exclude))
    tail = values[len(values) // 2:]
    low, high = min(tail), max(tail)
    return DensityProfile(
        window_ends=schedule,
        values=values,
        liminf_est=low,
        limsup_est=high,
        converged=(high - low) < tolerance,
        exclude=exclude,
        tolerance=tolerance,
    )


def density_profile(
    s: TimeSet,
    schedule: Sequence[int],
    tolerance: Fraction | float = DEFAULT_OSCILLATION_TOL,
    exclude: int = 0,
) -> DensityProfile:
    """Densities of ``s`` at each window end; extremes over the tail half."""
    if not schedule:
        raise ValueError("schedule must be nonempty")
    return profile_from_mask(s.indicator(int(schedule[-1])), schedule, tolerance, exclude)


def _periodic_form(s: TimeSet) -> tuple[int, np.ndarray] | None:
    """Reduce a structured set to (period L, residue mask) up to a finite set."""
    form = s.exact_form
    if form is None:
        return None
    kind = form[0]
    if kind == "arithmetic":
        _, a, p = form
        if p > MAX_EXACT_PERIOD:
            return None
        res = np.zeros(p, dtype=bool)
        res[a % p] = True
        return p, res
    if kind == "finite":
        return 1, np.zeros(1, dtype=bool)
    if kind == "union":
        reduced = [_periodic_form(part) for part in form[1]]
        if any(r is None for r in reduced):
            return None
        L = 1
        for period, _ in reduced:
            L = math.lcm(L, period)
            if L > MAX_EXACT_PERIOD:
                return None
        res = np.zeros(L, dtype=bool)
        for period, r in reduced:
            res |= np.tile(r, L // period)
        return L, res
    if kind == "complement":
        inner = _periodic_form(form[1])
        if inner is None:
            return None
        return inner[0], ~inner[1]
    if kind == "shift":
        _, t, of = form
        inner = _periodic_form(of)
        if inner is None:
            return None
        L, r = inner
        return L, np.roll(r, t % L)
    return None


def exact_density(s: TimeSet) -> tuple[Fraction, Fraction] | None:
    """Closed-form ``(lower, upper)`` density for structured sets.

    Every structured form reduces to a periodic residue pattern modulo a
    finite set, so overlapping unions are handled by counting residues mod
    the common period.  Returns ``None`` for predicate-backed sets or when
    the common period exceeds :data:`MAX_EXACT_PERIOD`.
    """
    reduced = _periodic_form(s)
    if reduced is None:
        return None
    L, res = reduced
    d = Fraction(int(np.count_nonzero(res)), L)
    return d, d


class PigeonholeError(RuntimeError):
    """No time within the horizon is shared by enough of the assigned sets."""


def pigeonhole_select(
    keys: Sequence[Hashable],
    assign: Mapping[Hashable, TimeSet] | Callable[[Hashable], TimeSet],
    epsilon: Fraction | float,
    horizon: int,
) -> tuple[int, list]:
    """Find a time ``i <= horizon`` lying in ``assign(k)`` for many keys.

    Returns ``(i, subset)`` with ``len(subset) >= epsilon * len(keys) / 2``,
    ``i`` being the smallest time of maximal multiplicity.  Averaging the
    multiplicities over the window guarantees such a time whenever every
    assigned set has window density at least ``epsilon / 2``.
    """
    keys = list(keys)
    if not keys:
        raise ValueError("keys must be nonempty")
    epsilon = as_fraction(epsilon)
    get = assign.__getitem__ if isinstance(assign, Mapping) else assign
    rows = np.stack([get(k).indicator(horizon) for k in keys])
    mult = rows.sum(axis=0)
    i = int(np.argmax(mult))
    need = epsilon * len(keys) / 2
    if mult[i] < need:
        worst = min(Fraction(int(r.sum()), horizon + 1) for r in rows)
        raise PigeonholeError(
            f"best time {i} is shared by {int(mult[i])} of {len(keys)} sets, "
            f"need {float(need):.4g}; smallest window density {float(worst):.4g} "
            f"vs required {float(epsilon / 2):.4g} at horizon {horizon}"
        )
    return i, [k for k, row in zip(keys, rows) if row[i]]
