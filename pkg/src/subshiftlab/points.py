"""One-sided symbolic sequences and exact fixed-point circle rotations."""
from __future__ import annotations

import threading
from fractions import Fraction
from math import isqrt
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "SymbolicPoint",
    "golden_conjugate",
    "to_fixed",
    "rotation_orbit",
    "rotation_coding_block",
    "simplest_rational_between",
    "check_irrational",
    "IrrationalityGuardError",
]

_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)
_RANDOM_BLOCK = 1 << 16
_CHUNK = 1 << 20


class SymbolicPoint:
    """A point of ``A^{Z_+}`` given by a deterministic rule plus a prefix cache.

    ``rule(i)`` returns the symbol at index ``i``.  ``block(start, stop)``, if
    given, must return the same symbols as a ``uint8`` array and is used for
    fast bulk extension.  The cache only grows; extension is serialised by a
    lock so concurrent readers are safe.
    """

    def __init__(
        self,
        alphabet_size: int,
        rule: Callable[[int], int] | None = None,
        block: Callable[[int, int], np.ndarray] | None = None,
        name: str | None = None,
    ):
        if alphabet_size < 2:
            raise ValueError("alphabet_size must be >= 2")
        if rule is None and block is None:
            raise ValueError("need a rule or a block rule")
        self.alphabet_size = int(alphabet_size)
        self._rule = rule
        self._block_rule = block
        self.name = name or "point"
        self._cache = np.zeros(0, dtype=np.uint8)
        self._lock = threading.Lock()

    # -- evaluation ---------------------------------------------------
    def block(self, start: int, stop: int) -> np.ndarray:
        """Symbols on ``[start, stop)``, bypassing the cache when cheap."""
        if stop <= start:
            return np.zeros(0, dtype=np.uint8)
        if stop <= self._cache.size:
            return self._cache[start:stop]
        if self._block_rule is not None:
            return np.asarray(self._block_rule(start, stop), dtype=np.uint8)
        rule = self._rule
        return np.fromiter((rule(i) for i in range(start, stop)), dtype=np.uint8, count=stop - start)

    def prefix(self, n: int) -> np.ndarray:
        """The first ``n`` symbols (a read-only view of the cache)."""
        n = int(n)
        if n > self._cache.size:
            with self._lock:
                have = self._cache.size
                if n > have:
                    grow = max(n, 2 * have)
                    parts = [self._cache]
                    for lo in range(have, grow, _CHUNK):
                        parts.append(self.block(lo, min(grow, lo + _CHUNK)))
                    cache = np.concatenate(parts)
                    cache.flags.writeable = False
                    self._cache = cache
        return self._cache[:n]

    def __getitem__(self, i: int) -> int:
        i = int(i)
        if i < 0:
            raise IndexError("points are one-sided")
        if i < self._cache.size:
            return int(self._cache[i])
        if self._rule is not None:
            return int(self._rule(i))
        return int(self.block(i, i + 1)[0])

    def shift(self, t: int) -> "SymbolicPoint":
        """The shifted point ``sigma^t x``."""
        t = int(t)
        if t < 0:
            raise ValueError("shift must be non-negative")
        if t == 0:
            return self
        parent = self
        rule = None if self._rule is None else (lambda i: parent[i + t])
        return SymbolicPoint(
            self.alphabet_size,
            rule=rule,
            block=lambda a, b: parent.block(a + t, b + t),
            name=f"sigma^{t}({self.name})",
        )

    def to_text(self, n: int) -> str:
        digits = "0123456789abcdefghijklmnopqrstuvwxyz"
        if self.alphabet_size > len(digits):
            raise ValueError("alphabet too large for text export")
        return "".join(digits[s] for s in self.prefix(n).tolist())

    def __repr__(self) -> str:
        return f"SymbolicPoint({self.name!r}, alphabet_size={self.alphabet_size})"

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, symbol: int = 0, alphabet_size: int = 2) -> "SymbolicPoint":
        return cls(
            alphabet_size,
            rule=lambda i: symbol,
            block=lambda a, b: np.full(b - a, symbol, dtype=np.uint8),
            name=f"{symbol}^inf",
        )

    @classmethod
    def periodic(cls, word: Sequence[int] | str, alphabet_size: int = 2) -> "SymbolicPoint":
        w = _as_word(word)
        if not w:
            raise ValueError("empty period word")
        arr = np.array(w, dtype=np.uint8)
        p = len(w)
        return cls(
            alphabet_size,
            rule=lambda i: w[i % p],
            block=lambda a, b: arr[np.arange(a, b) % p],
            name="(" + "".join(map(str, w)) + ")^inf",
        )

    @classmethod
    def from_text(cls, text: str, alphabet_size: int = 2, tail: str = "periodic") -> "SymbolicPoint":
        """Import a prefix.  ``tail`` is ``"periodic"`` (repeat the text) or a
        symbol string such as ``"0"`` used after the text ends."""
        w = _as_word(text.strip())
        if any(s >= alphabet_size for s in w):
            raise ValueError("symbol outside alphabet")
        if tail == "periodic":
            return cls.periodic(w, alphabet_size)
        fill = int(tail, 36)
        return cls.eventually_constant(w, fill, alphabet_size)

    @classmethod
    def eventually_constant(cls, word: Sequence[int] | str, fill: int = 0, alphabet_size: int = 2) -> "SymbolicPoint":
        w = np.array(_as_word(word), dtype=np.uint8)
        m = w.size

        def block(a, b):
            out = np.full(b - a, fill, dtype=np.uint8)
            if a < m:
                hi = min(b, m)
                out[: hi - a] = w[a:hi]
            return out

        return cls(alphabet_size, block=block, name="".join(map(str, w.tolist())) + f"{fill}^inf")

    @classmethod
    def from_support(cls, support: Iterable[int] | Callable, alphabet_size: int = 2, name: str | None = None) -> "SymbolicPoint":
        """Binary point with 1 exactly on ``support``.

        ``support`` is a finite iterable of positions, or a vectorised
        predicate ``ndarray -> bool ndarray``.
        """
        if callable(support):
            pred = support

            def block(a, b):
                return np.asarray(pred(np.arange(a, b, dtype=np.int64)), dtype=np.uint8)

            return cls(alphabet_size, block=block, name=name or "support(pred)")
        pos = np.array(sorted(set(int(p) for p in support)), dtype=np.int64)

        def block(a, b):
            out = np.zeros(b - a, dtype=np.uint8)
            lo, hi = np.searchsorted(pos, [a, b])
            out[pos[lo:hi] - a] = 1
            return out

        return cls(alphabet_size, block=block, name=name or f"support{pos.tolist()[:8]}")

    @classmethod
    def bernoulli(cls, seed: int, alphabet_size: int = 2) -> "SymbolicPoint":
        """Uniform i.i.d. symbols; index ``i`` depends only on ``(seed, i)``."""

        def gen_block(k):
            rng = np.random.default_rng([int(seed), int(k)])
            return rng.integers(0, alphabet_size, _RANDOM_BLOCK, dtype=np.uint8)

        def block(a, b):
            first, last = a // _RANDOM_BLOCK, (b - 1) // _RANDOM_BLOCK
            chunk = np.concatenate([gen_block(k) for k in range(first, last + 1)])
            off = first * _RANDOM_BLOCK
            return chunk[a - off : b - off]

        return cls(alphabet_size, block=block, name=f"bernoulli(seed={seed})")

    @classmethod
    def with_prefix(cls, word: Sequence[int], tail: "SymbolicPoint") -> "SymbolicPoint":
        """``word`` followed by ``tail`` restricted to indices ``>= len(word)``."""
        w = np.array(_as_word(word), dtype=np.uint8)
        m = w.size

        def block(a, b):
            out = tail.block(a, b).copy()
            if a < m:
                hi = min(b, m)
                out[: hi - a] = w[a:hi]
            return out

        return cls(tail.alphabet_size, block=block, name=f"{''.join(map(str, w.tolist()))}|{tail.name}")

    @classmethod
    def rotation_coding(cls, alpha: Fraction, beta: Fraction, bits: int = 96) -> "SymbolicPoint":
        """Sturmian coding ``x_i = 1`` iff ``frac(beta + i alpha) in [1 - alpha, 1)``."""
        a_fx = to_fixed(alpha, bits)
        b_fx = to_fixed(beta, bits)

        def block(lo, hi):
            return rotation_coding_block(a_fx, b_fx, lo, hi, bits)

        return cls(2, block=block, name=f"sturmian(alpha~{float(alpha):.6f}, beta~{float(beta):.6f})")


def _as_word(word: Sequence[int] | str) -> list[int]:
    if isinstance(word, str):
        return [int(c, 36) for c in word]
    return [int(s) for s in word]


# ---------------------------------------------------------------------------
# fixed-point rotation


def golden_conjugate(bits: int = 256) -> Fraction:
    """``(sqrt 5 - 1) / 2`` truncated to ``bits`` fractional bits."""
    scale = 1 << bits
    return Fraction(isqrt(5 * scale * scale) - scale, 2 * scale)


def to_fixed(x: Fraction, bits: int) -> int:
    """``floor(frac(x) * 2**bits)`` as a Python int."""
    x = Fraction(x)
    return (x.numerator * (1 << bits) // x.denominator) % (1 << bits)


def _limbs(v: int, n: int) -> list[np.uint64]:
    return [np.uint64((v >> (32 * k)) & 0xFFFFFFFF) for k in range(n)]


def rotation_orbit(alpha_fx: int, beta_fx: int, start: int, stop: int, bits: int) -> list[np.ndarray]:
    """Exact ``(beta + i alpha) mod 1`` for ``i in [start, stop)``.

    Values are fixed-point numbers with ``bits`` fractional bits returned as
    32-bit limbs (uint64 arrays), most significant limb first.  Each limb
    product ``i * a_k`` stays below ``2**64`` as long as ``i < 2**32``.
    """
    if bits % 32:
        raise ValueError("bits must be a multiple of 32")
    if stop > 1 << 32:
        raise ValueError("orbit index must stay below 2**32")
    n = bits // 32
    idx = np.arange(start, stop, dtype=np.uint64)
    a = _limbs(alpha_fx, n)
    b = _limbs(beta_fx, n)
    carry = np.zeros(idx.size, dtype=np.uint64)
    out = []
    for k in range(n):
        v = idx * a[k] + b[k] + carry
        out.append(v & _MASK32)
        carry = v >> _SHIFT32
    out.reverse()
    return out


def _ge_const(limbs: list[np.ndarray], c: int, bits: int) -> np.ndarray:
    """Lexicographic ``value >= c`` on most-significant-first limbs."""
    n = bits // 32
    cl = _limbs(c, n)[::-1]
    gt = np.zeros(limbs[0].size, dtype=bool)
    eq = np.ones(limbs[0].size, dtype=bool)
    for z, ck in zip(limbs, cl):
        gt |= eq & (z > ck)
        eq &= z == ck
    return gt | eq


def rotation_coding_block(alpha_fx: int, beta_fx: int, start: int, stop: int, bits: int) -> np.ndarray:
    out = np.empty(stop - start, dtype=np.uint8)
    threshold = (1 << bits) - alpha_fx
    for lo in range(start, stop, _CHUNK):
        hi = min(stop, lo + _CHUNK)
        limbs = rotation_orbit(alpha_fx, beta_fx, lo, hi, bits)
        out[lo - start : hi - start] = _ge_const(limbs, threshold, bits)
    return out


def rotation_high64(alpha_fx: int, beta_fx: int, start: int, stop: int, bits: int = 96) -> np.ndarray:
    """Top 64 bits of the orbit points, as uint64 (resolution ``2**-64``)."""
    limbs = rotation_orbit(alpha_fx, beta_fx, start, stop, bits)
    return (limbs[0] << _SHIFT32) | limbs[1]


# ---------------------------------------------------------------------------
# irrationality guard


class IrrationalityGuardError(ValueError):
    pass


def simplest_rational_between(lo: Fraction, hi: Fraction) -> Fraction:
    """The rational of least denominator in the open interval ``(lo, hi)``, ``lo >= 0``."""
    lo, hi = Fraction(lo), Fraction(hi)
    if not 0 <= lo < hi:
        raise ValueError("need 0 <= lo < hi")
    terms: list[int] = []
    upper_infinite = False
    while True:
        n = lo.numerator // lo.denominator
        if upper_infinite or n + 1 < hi:
            terms.append(n + 1)
            break
        # no integer strictly inside; peel off n and invert the interval
        terms.append(n)
        if lo == n:
            lo, upper_infinite = 1 / (hi - n), True
        else:
            lo, hi = 1 / (hi - n), 1 / (lo - n)
    value = Fraction(terms[-1])
    for t in reversed(terms[:-1]):
        value = t + 1 / value
    return value


def check_irrational(alpha: Fraction, window_bits: int = 64, min_denominator: int = 1 << 30) -> None:
    """Reject ``alpha`` if a small-denominator rational sits within ``2**-window_bits``."""
    alpha = Fraction(alpha)
    if not 0 < alpha < 1:
        raise IrrationalityGuardError("alpha must lie in (0, 1)")
    eps = Fraction(1, 1 << window_bits)
    q = simplest_rational_between(alpha - eps, alpha + eps).denominator
    if q <= min_denominator:
        raise IrrationalityGuardError(
            f"alpha is within 2^-{window_bits} of a rational with denominator {q} <= {min_denominator}"
        )
