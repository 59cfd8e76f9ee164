"""Sequence entropy: pattern counts, partition entropy, independence sets and
the greedy splitting-time construction."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .systems import PATTERN_BUDGET, PatternBudgetExceeded, SubshiftModel

__all__ = [
    "PositionSet",
    "pattern_count",
    "seq_entropy_estimate",
    "SeqEntropyEstimate",
    "PartitionEntropy",
    "empirical_partition_entropy",
    "IndependenceCertificate",
    "BudgetExhausted",
    "independence_search",
    "validate_certificate",
    "GrowthCurve",
    "seqentr_builder",
    "tail_slope",
]


@dataclass(frozen=True)
class PositionSet:
    positions: tuple[int, ...]

    def __init__(self, positions: Iterable[int]):
        pos = tuple(int(p) for p in positions)
        if not pos:
            raise ValueError("position set must be nonempty")
        if pos[0] < 0 or any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError("positions must be strictly increasing and >= 0")
        object.__setattr__(self, "positions", pos)

    def __len__(self) -> int:
        return len(self.positions)

    def __iter__(self):
        return iter(self.positions)

    def prefix(self, k: int) -> "PositionSet":
        return PositionSet(self.positions[:k])

    @property
    def max(self) -> int:
        return self.positions[-1]


def _positions(s) -> PositionSet:
    return s if isinstance(s, PositionSet) else PositionSet(s)


def pattern_count(model: SubshiftModel, s, horizon: int, budget: int = PATTERN_BUDGET) -> int:
    """Number of distinct symbol tuples read at ``s`` across the observed language."""
    s = _positions(s)
    if s.max + 1 > horizon:
        raise ValueError("max position + 1 must not exceed horizon")
    return int(model.pattern_codes(list(s), horizon, budget).size)


def tail_slope(values: Sequence[float], start: int = 1) -> float:
    """Least-squares slope of ``values`` against their index over the tail half."""
    n = len(values)
    k0 = n // 2
    xs = np.arange(start + k0, start + n, dtype=np.float64)
    ys = np.asarray(values[k0:], dtype=np.float64)
    if xs.size < 2:
        raise ValueError("need at least two tail points")
    return float(np.polyfit(xs, ys, 1)[0])


@dataclass
class SeqEntropyEstimate:
    rate: float
    counts: list[int]
    horizon: int

    def to_json(self) -> dict:
        return {"rate_bits": round(self.rate, 12), "counts": self.counts, "horizon": self.horizon}


def seq_entropy_estimate(model: SubshiftModel, s, horizon: int, budget: int = PATTERN_BUDGET) -> SeqEntropyEstimate:
    """Growth rate (bits per position) of pattern counts along the prefixes of ``s``."""
    s = _positions(s)
    if len(s) < 4:
        raise ValueError("need at least four positions")
    counts = [pattern_count(model, s.prefix(k), horizon, budget) for k in range(1, len(s) + 1)]
    rate = tail_slope([math.log2(c) for c in counts])
    return SeqEntropyEstimate(rate, counts, horizon)


@dataclass
class PartitionEntropy:
    bits: float
    patterns: int
    samples: int
    measure_valid: bool

    def to_json(self) -> dict:
        return {
            "bits": round(self.bits, 12),
            "patterns": self.patterns,
            "samples": self.samples,
            "measure_valid": self.measure_valid,
        }


def empirical_partition_entropy(model: SubshiftModel, generator: int, s, horizon: int) -> PartitionEntropy:
    """Shannon entropy of the tuple ``(x_{i+s_1}, ..., x_{i+s_n})`` over one orbit.

    ``measure_valid`` is set only for uniquely ergodic models, where orbit
    frequencies estimate the invariant measure.
    """
    s = _positions(s)
    if horizon < 100 * max(s.max, 1):
        raise ValueError("horizon must be at least 100 * max position")
    x = model.generators[generator]
    a = model.alphabet_size
    count = horizon - s.max + 1
    pre = x.prefix(horizon + 1).astype(np.int64)
    code = np.zeros(count, dtype=np.int64)
    w = 1
    for p in s:
        code += pre[p : p + count] * w
        w *= a
    _, freq = np.unique(code, return_counts=True)
    prob = freq / count
    bits = float(-(prob * np.log2(prob)).sum())
    return PartitionEntropy(bits, int(freq.size), count, bool(model.uniquely_ergodic))


# ---------------------------------------------------------------------------
# independence sets


class BudgetExhausted(RuntimeError):
    """The search hit its node budget; ``best`` is the largest certificate seen."""

    def __init__(self, message: str, best: "IndependenceCertificate | None", nodes: int):
        super().__init__(message)
        self.best = best
        self.nodes = nodes


@dataclass
class IndependenceCertificate:
    u: tuple[int, ...]
    v: tuple[int, ...]
    positions: PositionSet
    witnesses: dict[tuple[int, ...], tuple[int, ...]]
    horizon: int
    nodes: int = 0
    exhaustive: bool = True

    @property
    def size(self) -> int:
        return len(self.positions)

    def to_json(self) -> dict:
        text = lambda w: "".join(str(a) for a in w)
        return {
            "u": text(self.u),
            "v": text(self.v),
            "positions": list(self.positions),
            "horizon": self.horizon,
            "nodes": self.nodes,
            "witnesses": {text(p): text(w) for p, w in sorted(self.witnesses.items())},
        }


class _WindowOracle:
    """Placement tags of ``u``/``v`` over deduplicated generator windows."""

    def __init__(self, model, u, v, bound, horizon):
        L = max(len(u), len(v))
        width = bound + L - 1
        rows = []
        for g in model.generators:
            pre = g.prefix(horizon)
            count = horizon - width + 1
            if count <= 0:
                continue
            view = np.lib.stride_tricks.sliding_window_view(pre, width)[:count]
            rows.append(np.unique(view, axis=0))
        self.windows = np.unique(np.concatenate(rows), axis=0) if rows else np.zeros((0, width), np.uint8)
        tags = np.full((self.windows.shape[0], bound), 2, dtype=np.int8)
        for tag, word in ((1, v), (0, u)):
            ok = np.ones((self.windows.shape[0], bound), dtype=bool)
            for k, a in enumerate(word):
                ok &= self.windows[:, k : k + bound] == a
            tags[ok] = tag
        self.tags = tags
        self.L = L

    def codes(self, state, c):
        rows, code = state
        t = self.tags[rows, c]
        keep = t < 2
        return rows[keep], code[keep] * 2 + t[keep]

    def root(self):
        n = self.tags.shape[0]
        return np.arange(n), np.zeros(n, dtype=np.int64)

    def realised(self, state) -> int:
        return int(np.unique(state[1]).size)

    def witnesses(self, state, positions):
        rows, code = state
        out = {}
        k = len(positions)
        top = positions[-1] + self.L if positions else 0
        for r, c in zip(rows.tolist(), code.tolist()):
            pat = tuple((c >> (k - 1 - i)) & 1 for i in range(k))
            if pat not in out:
                out[pat] = tuple(int(a) for a in self.windows[r, :top])
        return out


class _PredicateOracle:
    """Zero-filled placements checked against an exact, 0-downward-closed language."""

    def __init__(self, model, u, v):
        self.model = model
        self.u, self.v = tuple(u), tuple(v)
        self.L = max(len(u), len(v))
        self.cache: dict = {}

    def word(self, positions, pat):
        top = positions[-1] + self.L
        w = [0] * top
        fixed = [False] * top
        for p, b in zip(positions, pat):
            for k, a in enumerate(self.v if b else self.u):
                if fixed[p + k] and w[p + k] != a:
                    return None
                w[p + k], fixed[p + k] = a, True
        return tuple(w)

    def ok(self, positions, pat):
        key = (positions, pat)
        if key not in self.cache:
            w = self.word(positions, pat)
            self.cache[key] = w is not None and self.model.admits(w)
        return self.cache[key]

    def root(self):
        return ()

    def codes(self, state, c):
        return state + (c,)

    def realised(self, positions) -> int:
        k = len(positions)
        return sum(self.ok(positions, tuple((m >> (k - 1 - i)) & 1 for i in range(k))) for m in range(1 << k))

    def witnesses(self, positions, _positions):
        k = len(positions)
        pats = [tuple((m >> (k - 1 - i)) & 1 for i in range(k)) for m in range(1 << k)]
        return {p: self.word(positions, p) for p in pats if self.ok(positions, p)}


def independence_search(
    model: SubshiftModel,
    u,
    v,
    max_k: int,
    horizon: int = 1 << 16,
    node_budget: int = 100_000,
    position_bound: int | None = None,
) -> IndependenceCertificate | None:
    """Largest ``S`` (``|S| <= max_k``, ``S`` inside ``[0, position_bound)``)
    such that every 0/1 pattern on ``S`` is realised by placing ``u``/``v``.

    Branch and bound over sets in which every pattern is realised (a
    hereditary property), so a node's bound is ``|S|`` plus the number of
    candidates still compatible with it.  Candidates are tried by realised
    pattern count, ties by smallest position.  Raises :class:`BudgetExhausted`
    when more than ``node_budget`` nodes would be expanded.
    """
    u = tuple(int(a) for a in (u if not isinstance(u, str) else [int(c, 36) for c in u]))
    v = tuple(int(a) for a in (v if not isinstance(v, str) else [int(c, 36) for c in v]))
    if not u or not v:
        raise ValueError("cylinder words must be nonempty")
    if u[: len(v)] == v[: len(u)]:
        raise ValueError("cylinders must be disjoint (neither word a prefix of the other)")
    if position_bound is None:
        position_bound = max(16, 1 << (max_k + 1))
    if model.predicate_exact and getattr(model, "zero_fill_exact", False):
        oracle = _PredicateOracle(model, u, v)
        exact = True
    else:
        oracle = _WindowOracle(model, u, v, position_bound, horizon)
        exact = False

    def full(positions, state):
        if exact:
            return oracle.realised(positions) == 1 << len(positions)
        return oracle.realised(state) == 1 << len(positions)

    class _Stop(Exception):
        pass

    nodes = 0
    best: list = [(), None]

    root = oracle.root()
    cands = []
    for c in range(position_bound):
        st = oracle.codes(root, c)
        if full((c,), st):
            cands.append((c, st))

    def expand(positions, state, cands):
        nonlocal nodes
        if len(positions) > len(best[0]):
            best[0], best[1] = positions, state
        if len(best[0]) >= max_k:
            return True
        for idx, (c, st) in enumerate(cands):
            if len(positions) + len(cands) - idx <= len(best[0]):
                return False
            nodes += 1
            if nodes > node_budget:
                raise _Stop()
            grown = positions + (c,)
            nxt = []
            for c2, _ in cands[idx + 1 :]:
                st2 = oracle.codes(st, c2)
                if full(grown + (c2,), st2):
                    nxt.append((c2, st2, oracle.realised(st2) if not exact else 0))
            nxt.sort(key=lambda t: (-t[2], t[0]))
            if expand(grown, st, [(c2, st2) for c2, st2, _ in nxt]):
                return True
        return False

    def certificate(exhaustive=True):
        pos, st = best
        if not pos:
            return None
        w = oracle.witnesses(pos if exact else st, pos)
        return IndependenceCertificate(u, v, PositionSet(pos), w, horizon, nodes, exhaustive)

    try:
        expand((), root, cands)
    except _Stop:
        raise BudgetExhausted(f"node budget {node_budget} exhausted", certificate(False), nodes) from None
    return certificate()


def validate_certificate(cert: IndependenceCertificate, model: SubshiftModel, horizon: int | None = None) -> bool:
    """Re-check every witness: placements by direct comparison, membership by
    the model predicate or by a byte search through generator prefixes."""
    horizon = cert.horizon if horizon is None else horizon
    k = len(cert.positions)
    if len(cert.witnesses) != 1 << k:
        return False
    haystacks = None
    for pattern, word in cert.witnesses.items():
        if len(pattern) != k:
            return False
        for s, bit in zip(cert.positions.positions, pattern):
            want = cert.v if bit else cert.u
            if tuple(word[s : s + len(want)]) != tuple(want):
                return False
        if model.word_predicate is not None and model.predicate_exact:
            if not model.word_predicate(tuple(word)):
                return False
            continue
        if haystacks is None:
            haystacks = [bytes(g.prefix(horizon).tolist()) for g in model.generators]
        needle = bytes(word)
        if not any(h.find(needle) >= 0 for h in haystacks):
            return False
    return True


# ---------------------------------------------------------------------------
# greedy splitting times


@dataclass
class GrowthCurve:
    steps: list[tuple[int, int]]
    split_fractions: list[Fraction]
    rate_estimate: float
    stalled: bool = False
    notes: dict = field(default_factory=dict)

    @property
    def counts(self) -> list[int]:
        return [n for _, n in self.steps]

    def to_json(self) -> dict:
        return {
            "steps": [{"time": s, "cells": n, "split_fraction": round(float(f), 12)} for (s, n), f in zip(self.steps, self.split_fractions)],
            "rate_bits": round(self.rate_estimate, 12),
            "stalled": self.stalled,
        }


def seqentr_builder(
    model: SubshiftModel,
    m: int,
    n_steps: int,
    horizon: int = 1 << 16,
    max_time: int = 64,
):
    """Choose times ``s_1, s_2, ...`` that split as many current cells as possible.

    Cells are the classes of observed points (generator windows starting
    below ``horizon - max_time - m``) under the cylinder cover of length
    ``m`` pulled back along the chosen times.  At each step every ``g`` in
    ``[0, max_time)`` is scanned and the one splitting the largest fraction
    of cells wins, ties going to the smallest ``g``.
    """
    a = model.alphabet_size
    width = max_time + m - 1
    count = horizon - width
    if count <= 0:
        raise ValueError("horizon too small for max_time")
    pres = [g.prefix(horizon).astype(np.int64) for g in model.generators]
    # cylinder code of the m-window at time g, for every start t
    def window_codes(g):
        out = []
        for pre in pres:
            c = np.zeros(count, dtype=np.int64)
            w = 1
            for k in range(m):
                c += pre[g + k : g + k + count] * w
                w *= a
            out.append(c)
        return np.concatenate(out)

    codes = [window_codes(g) for g in range(max_time)]
    base = a**m
    cell = np.zeros(count * len(pres), dtype=np.int64)
    n_cells = 1
    steps: list[tuple[int, int]] = [(-1, 1)]
    fractions: list[Fraction] = [Fraction(0)]
    chosen: list[int] = []
    stalled = False
    for _ in range(n_steps):
        best = None
        for g in range(max_time):
            keys = np.unique(cell * base + codes[g])
            parents, children = np.unique(keys // base, return_counts=True)
            split = int(np.count_nonzero(children > 1))
            if best is None or split > best[1]:
                best = (g, split, keys.size)
        g, split, size = best
        if split == 0:
            stalled = True
            break
        chosen.append(g)
        fractions.append(Fraction(split, n_cells))
        _, cell = np.unique(cell * base + codes[g], return_inverse=True)
        cell = cell.astype(np.int64).ravel()
        n_cells = size
        steps.append((g, n_cells))
    logs = [math.log2(n) for _, n in steps]
    rate = tail_slope(logs, start=0) if len(logs) >= 4 else float("nan")
    curve = GrowthCurve(steps, fractions, rate, stalled, {"m": m, "horizon": horizon, "max_time": max_time})
    return chosen, curve
