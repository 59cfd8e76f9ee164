"""Subshift models, their empirical languages, and the built-in example systems.

A :class:`SubshiftModel` knows its language through two channels: factors of
generator prefixes (always available, an under-approximation) and, for the
built-ins whose language has a closed description, exact enumerators.  Every
consumer reports the horizon it used.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .points import SymbolicPoint, check_irrational, golden_conjugate, to_fixed
from .structure import PeriodicStructure, Progression

__all__ = [
    "Cylinder",
    "SubshiftModel",
    "PatternBudgetExceeded",
    "SturmianInfo",
    "ToeplitzInfo",
    "full_shift",
    "single_one_subshift",
    "powers_subshift",
    "regular_toeplitz_example",
    "sturmian_model",
    "language",
    "toeplitz_j_sequence",
    "toeplitz_word",
    "build_model",
    "parse_fraction",
]

PATTERN_BUDGET = 1 << 20


class PatternBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Cylinder:
    word: tuple[int, ...]
    offset: int = 0

    def __post_init__(self):
        if not self.word:
            raise ValueError("cylinder word must be nonempty")
        if self.offset < 0:
            raise ValueError("cylinder offset must be >= 0")

    @classmethod
    def of(cls, word: Sequence[int] | str, offset: int = 0) -> "Cylinder":
        if isinstance(word, str):
            word = [int(c, 36) for c in word]
        return cls(tuple(int(s) for s in word), offset)

    def __len__(self) -> int:
        return len(self.word)

    def __str__(self) -> str:
        return "".join(map(str, self.word))


@dataclass(frozen=True)
class SturmianInfo:
    alpha: Fraction
    beta: Fraction


@dataclass(frozen=True)
class ToeplitzInfo:
    skeleton: PeriodicStructure


def _word(w: Sequence[int] | str) -> tuple[int, ...]:
    if isinstance(w, str):
        return tuple(int(c, 36) for c in w)
    return tuple(int(s) for s in w)


def _match_positions(prefix: np.ndarray, word: Sequence[int], count: int) -> np.ndarray:
    """Starts ``t < count`` with ``prefix[t:t+len(word)] == word``."""
    m = np.ones(count, dtype=bool)
    for k, a in enumerate(word):
        m &= prefix[k : k + count] == a
    return np.flatnonzero(m)


class SubshiftModel:
    """A named subshift given by generator points and an optional word predicate.

    ``predicate_exact`` marks models whose predicate (and enumerator hooks)
    describe the language exactly; for the others the language is read off
    generator prefixes.  ``zero_fill_exact`` marks binary languages closed
    under turning 1s into 0s, where a partial word is admissible iff its
    zero completion is.
    """

    predicate_exact = False
    zero_fill_exact = False

    def __init__(
        self,
        name: str,
        alphabet_size: int,
        generators: Sequence[SymbolicPoint],
        word_predicate: Callable[[Sequence[int]], bool] | None = None,
        side_info: SturmianInfo | ToeplitzInfo | None = None,
        params: dict | None = None,
        uniquely_ergodic: bool = False,
    ):
        self.name = name
        self.alphabet_size = int(alphabet_size)
        self.generators = list(generators)
        self.word_predicate = word_predicate
        self.side_info = side_info
        self.params = dict(params or {})
        self.uniquely_ergodic = uniquely_ergodic

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"

    def describe(self) -> dict:
        return {"name": self.name, **{k: str(v) for k, v in self.params.items()}}

    # -- words --------------------------------------------------------
    def admits(self, word: Sequence[int]) -> bool:
        """Exact membership when a predicate exists, else factor of a generator prefix."""
        w = _word(word)
        if self.word_predicate is not None:
            return bool(self.word_predicate(w))
        raise ValueError(f"{self.name} has no word predicate")

    def generator_factors(self, length: int, horizon: int) -> set[tuple[int, ...]]:
        codes = self._generator_codes(list(range(length)), horizon)
        return set(self._decode(codes, length))

    def exact_words(self, length: int, budget: int = PATTERN_BUDGET) -> set[tuple[int, ...]] | None:
        codes = self._exact_codes(list(range(length)), budget)
        if codes is None:
            return None
        return set(self._decode(codes, length))

    # -- pattern codes ------------------------------------------------
    def pattern_codes(self, positions: Sequence[int], horizon: int, budget: int = PATTERN_BUDGET) -> np.ndarray:
        """Distinct symbol tuples read at ``positions`` across the language.

        Code digit ``k`` (base ``alphabet_size``, least significant first) is
        the symbol at ``positions[k]``.  Positions may repeat or be unsorted.
        """
        positions = [int(p) for p in positions]
        if not positions:
            return np.zeros(1, dtype=np.int64)
        if min(positions) < 0:
            raise ValueError("positions must be >= 0")
        uniq = sorted(set(positions))
        if self.alphabet_size ** len(uniq) > (1 << 62):
            raise PatternBudgetExceeded(f"{len(uniq)} positions exceed the 62-bit code range")
        parts = [self._generator_codes(uniq, horizon)]
        exact = self._exact_codes(uniq, budget, horizon)
        if exact is not None:
            parts.append(exact)
        codes = np.unique(np.concatenate(parts))
        if uniq != positions:
            codes = self._remap(codes, uniq, positions)
        return codes

    def _generator_codes(self, positions: list[int], horizon: int) -> np.ndarray:
        a = self.alphabet_size
        span = positions[-1] + 1
        count = horizon - span + 1
        out = []
        for g in self.generators:
            if count <= 0:
                break
            pre = g.prefix(horizon).astype(np.int64)
            code = np.zeros(count, dtype=np.int64)
            weight = 1
            for p in positions:
                code += pre[p : p + count] * weight
                weight *= a
            out.append(np.unique(code))
        if not out:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate(out))

    def _exact_codes(self, positions: list[int], budget: int, horizon: int | None = None) -> np.ndarray | None:
        return None

    def _decode(self, codes: np.ndarray, n: int) -> np.ndarray:
        a = self.alphabet_size
        digits = np.empty((codes.size, n), dtype=np.uint8)
        c = codes.copy()
        for k in range(n):
            digits[:, k] = c % a
            c //= a
        return [tuple(row) for row in digits.tolist()]

    def _remap(self, codes: np.ndarray, uniq: list[int], positions: list[int]) -> np.ndarray:
        a = self.alphabet_size
        where = {p: k for k, p in enumerate(uniq)}
        digits = np.empty((codes.size, len(uniq)), dtype=np.int64)
        c = codes.copy()
        for k in range(len(uniq)):
            digits[:, k] = c % a
            c //= a
        out = np.zeros(codes.size, dtype=np.int64)
        weight = 1
        for p in positions:
            out += digits[:, where[p]] * weight
            weight *= a
        return np.unique(out)

    # -- occurrences and neighbours -----------------------------------
    def occurrences(self, word: Sequence[int], horizon: int) -> list[tuple[int, np.ndarray]]:
        """Per generator, the starts ``t < horizon`` where ``word`` occurs."""
        w = _word(word)
        out = []
        for k, g in enumerate(self.generators):
            pre = g.prefix(horizon + len(w))
            out.append((k, _match_positions(pre, w, horizon)))
        return out

    def neighbors(self, word: Sequence[int], rng: np.random.Generator, count: int, horizon: int) -> list[SymbolicPoint]:
        """Up to ``count`` points of the cylinder ``[word]``.

        Draws shifted generators at occurrences of ``word`` plus, for models
        with an exact language, random admissible extensions.
        """
        w = _word(word)
        shifted = []
        for k, ts in self.occurrences(w, horizon):
            shifted.extend((k, int(t)) for t in ts)
        ext = self._extensions(w, rng, count, horizon)
        n_shift = len(shifted) if not ext else min(len(shifted), max(1, count // 2))
        n_shift = min(n_shift, count)
        picks = []
        if shifted and n_shift:
            idx = np.sort(rng.choice(len(shifted), size=min(n_shift, len(shifted)), replace=False))
            picks = [self.generators[shifted[i][0]].shift(shifted[i][1]) for i in idx]
        return picks + ext[: count - len(picks)]

    def _extensions(self, word: tuple[int, ...], rng: np.random.Generator, count: int, horizon: int) -> list[SymbolicPoint]:
        return []

    # -- ambiguity ----------------------------------------------------
    def ambiguity_mask(self, u: Sequence[int], r: int, n: int, horizon: int, max_occurrences: int = 512) -> tuple[np.ndarray, dict]:
        """Times ``i <= n`` at which the cylinder ``[u]`` has diameter ``> 2**-r``.

        ``i`` is flagged when two language points starting with ``u`` differ
        somewhere in ``[i, i + r)``.  Returns the mask and bookkeeping.
        """
        u = _word(u)
        span = n + r
        diff = np.zeros(span, dtype=bool)
        ref = None
        used = 0
        found = 0
        for k, ts in self.occurrences(u, horizon):
            found += ts.size
            if ts.size > max_occurrences:
                ts = ts[np.linspace(0, ts.size - 1, max_occurrences).astype(np.int64)]
            g = self.generators[k]
            pre = g.prefix(int(ts[-1]) + span) if ts.size else None
            for t in ts.tolist():
                seg = pre[t : t + span]
                if ref is None:
                    ref = seg
                else:
                    diff |= seg != ref
                used += 1
        exact = self._exact_ambiguity(u, span, horizon)
        if exact is not None:
            diff |= exact
        c = np.concatenate([[0], np.cumsum(diff, dtype=np.int64)])
        mask = (c[r : r + n + 1] - c[: n + 1]) > 0
        return mask, {"occurrences_found": found, "occurrences_used": used, "exact": exact is not None}

    def _exact_ambiguity(self, u: tuple[int, ...], span: int, horizon: int) -> np.ndarray | None:
        """Per-coordinate ambiguity on ``[0, span)`` from the exact language."""
        return None


# ---------------------------------------------------------------------------
# built-in models


def _is_pow2_ge2(v: int) -> bool:
    return v >= 2 and v & (v - 1) == 0


class FullShift(SubshiftModel):
    predicate_exact = True
    zero_fill_exact = True

    def _exact_codes(self, positions, budget, horizon=None):
        total = self.alphabet_size ** len(positions)
        if total > budget:
            raise PatternBudgetExceeded(f"full shift has {total} patterns on {len(positions)} positions")
        return np.arange(total, dtype=np.int64)

    def _exact_ambiguity(self, u, span, horizon):
        d = np.ones(span, dtype=bool)
        d[: len(u)] = False
        return d

    def _extensions(self, word, rng, count, horizon):
        return [
            SymbolicPoint.with_prefix(word, SymbolicPoint.bernoulli(int(rng.integers(1 << 31)), self.alphabet_size))
            for _ in range(count)
        ]


class SingleOneSubshift(SubshiftModel):
    predicate_exact = True
    zero_fill_exact = True

    def _exact_codes(self, positions, budget, horizon=None):
        n = len(positions)
        return np.array([0] + [1 << k for k in range(n)], dtype=np.int64)

    def _exact_ambiguity(self, u, span, horizon):
        d = np.zeros(span, dtype=bool)
        if 1 not in u:
            d[len(u):] = True
        return d

    def _extensions(self, word, rng, count, horizon):
        m = len(word)
        if 1 in word:
            return [SymbolicPoint.eventually_constant(word, 0)]
        out = [SymbolicPoint.constant(0)]
        if horizon > m:
            ks = rng.integers(m, horizon, size=max(count - 1, 0))
            out.extend(SymbolicPoint.from_support([int(k)], name=f"e_{int(k)}") for k in ks)
        return out


class PowersSubshift(SubshiftModel):
    """Shift-closure of the points supported on ``{2^n : n >= 1}``."""

    predicate_exact = True
    zero_fill_exact = True
    max_shift = 1 << 20

    def consistent_shifts(self, ones: Sequence[int], limit: int | None = None) -> list[int]:
        """Shifts ``t`` with ``o + t`` a power of two (>= 2) for every ``o`` in ``ones``."""
        limit = self.max_shift if limit is None else limit
        ones = list(ones)
        if not ones:
            return list(range(limit + 1))
        o0 = ones[0]
        out = []
        a = 1
        while (1 << a) - o0 <= limit:
            t = (1 << a) - o0
            if t >= 0 and all(_is_pow2_ge2(o + t) for o in ones):
                out.append(t)
            a += 1
        return out

    def in_base_set(self, point: SymbolicPoint, horizon: int) -> bool:
        """Whether ``point`` (on ``[0, horizon)``) is supported on powers of two."""
        pre = point.prefix(horizon)
        idx = np.flatnonzero(pre)
        return all(_is_pow2_ge2(int(i)) for i in idx)

    def _k_sets(self, positions: list[int], limit: int) -> set[frozenset]:
        ks: set[frozenset] = {frozenset()}
        for p in positions:
            a = 1
            while (1 << a) - p <= limit:
                t = (1 << a) - p
                if t >= 0:
                    ks.add(frozenset(k for k, q in enumerate(positions) if _is_pow2_ge2(q + t)))
                a += 1
        return ks

    def _exact_codes(self, positions, budget, horizon=None):
        limit = self.max_shift if horizon is None else max(horizon, positions[-1] + 2)
        ks = self._k_sets(positions, limit)
        maximal = [k for k in ks if not any(k < other for other in ks)]
        if sum(1 << len(k) for k in maximal) > budget:
            raise PatternBudgetExceeded("too many power-supported patterns")
        codes = set()
        for k in maximal:
            bits = [1 << j for j in k]
            for r in range(len(bits) + 1):
                for combo in combinations(bits, r):
                    codes.add(sum(combo))
        return np.array(sorted(codes), dtype=np.int64)

    def _exact_ambiguity(self, u, span, horizon):
        d = np.zeros(span, dtype=bool)
        m = len(u)
        ones = [k for k, a in enumerate(u) if a == 1]
        if not ones:
            d[m:] = True
            return d
        for t in self.consistent_shifts(ones, limit=max(horizon, span)):
            a = 1
            while (1 << a) - t < span:
                j = (1 << a) - t
                if j >= m:
                    d[j] = True
                a += 1
        return d

    def _extensions(self, word, rng, count, horizon):
        m = len(word)
        ones = [k for k, a in enumerate(word) if a == 1]
        if len(ones) <= 1 and not ones:
            shifts = None
        else:
            shifts = self.consistent_shifts(ones, limit=max(horizon, 4))
            if not shifts:
                return []
        out = []
        for _ in range(count):
            t = int(rng.integers(0, horizon)) if shifts is None else int(shifts[rng.integers(len(shifts))])
            support = [o for o in ones]
            a = 1
            while (1 << a) - t < 4 * horizon:
                j = (1 << a) - t
                if j >= m and rng.random() < 0.5:
                    support.append(j)
                a += 1
            out.append(SymbolicPoint.from_support(support, name=f"powers(t={t})"))
        return out


def full_shift(alphabet_size: int = 2, seed: int = 0) -> SubshiftModel:
    return FullShift(
        "full_shift",
        alphabet_size,
        [SymbolicPoint.bernoulli(seed, alphabet_size)],
        word_predicate=lambda w: all(0 <= s < alphabet_size for s in w),
        params={"alphabet_size": alphabet_size, "seed": seed},
    )


def single_one_subshift(far: int = 1 << 12) -> SubshiftModel:
    """Points with at most one 1.  Besides ``0^inf`` and ``e_0`` the generators
    include ``e_far``, whose shifts realise every ``e_k`` with ``k <= far``."""
    return SingleOneSubshift(
        "single_one",
        2,
        [
            SymbolicPoint.constant(0),
            SymbolicPoint.from_support([0], name="e_0"),
            SymbolicPoint.from_support([far], name=f"e_{far}"),
        ],
        word_predicate=lambda w: all(s in (0, 1) for s in w) and sum(w) <= 1,
        params={"far": far},
    )


def powers_subshift(seed: int = 0) -> SubshiftModel:
    rng = np.random.default_rng(seed)
    powers = [1 << n for n in range(1, 62)]
    random_support = [p for p in powers if rng.random() < 0.5]
    gens = [
        SymbolicPoint.constant(0),
        SymbolicPoint.from_support(lambda i: (i >= 2) & ((i & (i - 1)) == 0), name="1_{2^n}"),
        SymbolicPoint.from_support(random_support, name=f"random powers (seed={seed})"),
    ]
    model = PowersSubshift("powers", 2, gens, params={"seed": seed})

    def predicate(w):
        if any(s not in (0, 1) for s in w):
            return False
        ones = [k for k, a in enumerate(w) if a == 1]
        return len(ones) <= 1 or bool(model.consistent_shifts(ones))

    model.word_predicate = predicate
    return model


# -- Toeplitz example --------------------------------------------------------


def toeplitz_j_sequence(levels: int) -> list[int]:
    """``j_1 = 0``, ``j_{n+1}`` = least position outside the first ``n`` progressions."""
    js: list[int] = []
    for n in range(1, levels + 1):
        if not js:
            js.append(0)
            continue
        j = 0
        while any(j >= jm and (j - jm) % (1 << m) == 0 for m, jm in enumerate(js, start=1)):
            j += 1
        js.append(j)
    return js


def toeplitz_word(n: int) -> np.ndarray:
    """Concatenation of all binary words of length ``n`` in lexicographic order."""
    words = np.arange(1 << n, dtype=np.int64)
    bits = (words[:, None] >> np.arange(n - 1, -1, -1)) & 1
    return bits.astype(np.uint8).ravel()


def _toeplitz_block(start: int, stop: int) -> np.ndarray:
    # level n holds positions p with p + 1 = 2^(n-1) * odd, i.e. p = j_n + i 2^n
    p1 = np.arange(start + 1, stop + 1, dtype=np.int64)
    low = p1 & -p1
    v = np.frexp(low.astype(np.float64))[1].astype(np.int64) - 1
    n = v + 1
    i = ((p1 >> v) - 1) >> 1
    idx = i % (n << n)
    word = idx // n
    bit = idx % n
    return ((word >> (n - 1 - bit)) & 1).astype(np.uint8)


def regular_toeplitz_example(horizon: int = 1 << 20, skeleton_levels: int = 16) -> SubshiftModel:
    """Toeplitz point whose ``n``-th progression ``j_n + 2^n Z_+`` carries ``w^n`` periodically."""
    if horizon < 2:
        raise ValueError("horizon must be >= 2")
    x = SymbolicPoint(2, block=_toeplitz_block, name="toeplitz")
    levels = max(1, min(skeleton_levels, int(horizon).bit_length()))
    js = toeplitz_j_sequence(levels)
    skeleton = PeriodicStructure(
        [Progression(1 << n, j, tuple(toeplitz_word(n).tolist())) for n, j in enumerate(js, start=1)],
        max_period=1 << levels,
        horizon=horizon,
    )
    return SubshiftModel(
        "regular_toeplitz",
        2,
        [x],
        side_info=ToeplitzInfo(skeleton),
        params={"horizon": horizon},
        uniquely_ergodic=True,
    )


# -- Sturmian --------------------------------------------------------------


def parse_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("golden", "phi", "golden_conjugate"):
            return golden_conjugate()
        return Fraction(v)
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def sturmian_model(alpha: Any = "golden", beta: Any = 0, bits: int = 96) -> SubshiftModel:
    a = parse_fraction(alpha)
    b = parse_fraction(beta) % 1
    check_irrational(a)
    if bits < 96:
        raise ValueError("rotation arithmetic needs at least 96 fractional bits")
    x = SymbolicPoint.rotation_coding(a, b, bits)
    return SubshiftModel(
        "sturmian",
        2,
        [x],
        side_info=SturmianInfo(a, b),
        params={"alpha": f"{float(a):.17g}", "beta": f"{float(b):.17g}"},
        uniquely_ergodic=True,
    )


# ---------------------------------------------------------------------------


def language(model: SubshiftModel, length: int, horizon: int, budget: int = PATTERN_BUDGET) -> set[tuple[int, ...]]:
    """Factors of generator prefixes (of length ``horizon``), united with the
    exactly enumerated words for models whose language is known in closed form."""
    if length > horizon:
        raise ValueError("length must not exceed horizon")
    if length == 0:
        return {()}
    words = model.generator_factors(length, horizon)
    exact = model.exact_words(length, budget)
    if exact is not None:
        words |= exact
    return words


_BUILDERS: dict[str, Callable[..., SubshiftModel]] = {
    "full_shift": full_shift,
    "single_one": single_one_subshift,
    "single_one_subshift": single_one_subshift,
    "powers": powers_subshift,
    "powers_subshift": powers_subshift,
    "regular_toeplitz": regular_toeplitz_example,
    "regular_toeplitz_example": regular_toeplitz_example,
    "toeplitz": regular_toeplitz_example,
    "sturmian": sturmian_model,
}


def build_model(decl: dict | str) -> SubshiftModel:
    """Instantiate a built-in model from ``{"name": ..., **params}`` or a bare name."""
    if isinstance(decl, str):
        decl = {"name": decl}
    decl = dict(decl)
    name = decl.pop("name", None)
    decl.pop("label", None)
    if name not in _BUILDERS:
        raise KeyError(f"unknown model {name!r}; choose from {sorted(_BUILDERS)}")
    return _BUILDERS[name](**decl)
