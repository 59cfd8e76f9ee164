from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subshiftlab.density import (
    PigeonholeError,
    TimeSet,
    density_profile,
    dyadic_schedule,
    exact_density,
    pigeonhole_select,
    window_density,
)
from oracles import count_members, pigeonhole_bruteforce


EVENS = TimeSet.arithmetic(0, 2)


def powers_of_two():
    return TimeSet.from_predicate(lambda i: (i >= 2) & ((i & (i - 1)) == 0), vectorized=True)


def oscillating():
    # [4^k, 2*4^k): the highest set bit has an even index
    def member(i):
        i = np.asarray(i)
        hb = np.zeros(i.shape, dtype=np.int64)
        pos = i > 0
        hb[pos] = np.floor(np.log2(i[pos].astype(np.float64))).astype(np.int64)
        return pos & (hb % 2 == 0)

    return TimeSet.from_predicate(member, vectorized=True)


class TestWindowDensity:
    def test_evens(self):
        assert window_density(EVENS, 10) == Fraction(6, 11)

    def test_powers_of_two(self):
        assert window_density(powers_of_two(), 1024) == Fraction(10, 1025)

    def test_full_set(self):
        assert window_density(TimeSet.complement(TimeSet.finite([])), 7) == 1

    def test_negative_window_rejected(self):
        with pytest.raises(ValueError):
            window_density(EVENS, -1)

    def test_matches_direct_count(self):
        s = TimeSet.union([TimeSet.arithmetic(3, 7), TimeSet.finite([1, 2, 40])])
        assert window_density(s, 100) == Fraction(count_members(lambda i: i in s, 100), 101)


class TestProfile:
    def test_arithmetic(self):
        prof = density_profile(TimeSet.arithmetic(3, 5), dyadic_schedule(1 << 20))
        assert abs(prof.liminf_est - Fraction(1, 5)) < Fraction(1, 10**4)
        assert abs(prof.limsup_est - Fraction(1, 5)) < Fraction(1, 10**4)
        assert prof.converged

    def test_oscillating_extremes(self):
        sched = sorted({2 * 4**k - 1 for k in range(11)} | {4 ** (k + 1) - 1 for k in range(10)})
        prof = density_profile(oscillating(), sched)
        assert abs(prof.limsup_est - Fraction(2, 3)) < Fraction(1, 100)
        assert abs(prof.liminf_est - Fraction(1, 3)) < Fraction(1, 100)
        assert not prof.converged

    def test_complement_values(self):
        sched = dyadic_schedule(4096)
        a = density_profile(EVENS, sched)
        b = density_profile(TimeSet.complement(EVENS), sched)
        assert all(x + y == 1 for x, y in zip(a.values, b.values))

    def test_schedule_must_increase(self):
        with pytest.raises(ValueError):
            density_profile(EVENS, [4, 4, 8])

    def test_exclude_drops_finite_prefix(self):
        s = TimeSet.finite(range(10))
        prof = density_profile(s, [16, 32, 64], exclude=10)
        assert prof.limsup_est == 0

    def test_csv(self):
        text = density_profile(EVENS, [1, 3]).to_csv()
        assert text.splitlines() == ["window_end,value", "1,0.5", "3,0.5"]


class TestExactDensity:
    @pytest.mark.parametrize(
        "s, expected",
        [
            (TimeSet.arithmetic(0, 2), Fraction(1, 2)),
            (TimeSet.finite([5, 9]), Fraction(0)),
            (TimeSet.complement(TimeSet.arithmetic(0, 4)), Fraction(3, 4)),
            # overlapping union: multiples of 2 or 3
            (TimeSet.union([TimeSet.arithmetic(0, 2), TimeSet.arithmetic(0, 3)]), Fraction(2, 3)),
        ],
    )
    def test_closed_forms(self, s, expected):
        assert exact_density(s) == (expected, expected)

    def test_predicate_has_no_closed_form(self):
        assert exact_density(powers_of_two()) is None

    def test_lower_plus_upper_of_complement(self):
        s = TimeSet.union([TimeSet.arithmetic(1, 6), TimeSet.finite([0, 3])])
        lo, _ = exact_density(s)
        _, hi_c = exact_density(TimeSet.complement(s))
        assert lo + hi_c == 1

    @pytest.mark.parametrize("a,p", [(0, 1), (3, 5), (7, 9), (2, 16)])
    def test_profile_close_to_exact(self, a, p):
        s = TimeSet.arithmetic(a, p)
        lo, _ = exact_density(s)
        for n in (50, 100, 1000, 5000):
            assert abs(window_density(s, n) - lo) <= Fraction(p, n)


class TestSerialisation:
    def test_roundtrip(self):
        s = TimeSet.shifted(TimeSet.union([TimeSet.arithmetic(3, 5), TimeSet.complement(TimeSet.finite([1, 2]))]), 4)
        t = TimeSet.from_json(s.to_json())
        assert np.array_equal(s.indicator(300), t.indicator(300))

    def test_json_shape(self):
        assert TimeSet.arithmetic(3, 5).to_json() == {"kind": "arithmetic", "a": 3, "p": 5}


structured = st.deferred(
    lambda: st.one_of(
        st.builds(TimeSet.arithmetic, st.integers(0, 20), st.integers(1, 12)),
        st.builds(TimeSet.finite, st.lists(st.integers(0, 200), max_size=8)),
        st.builds(lambda xs: TimeSet.union(xs), st.lists(structured, min_size=1, max_size=3)),
        st.builds(TimeSet.complement, structured),
        st.builds(TimeSet.shifted, structured, st.integers(0, 30)),
    )
)


@settings(max_examples=60, deadline=None)
@given(structured, st.integers(0, 400))
def test_indicator_agrees_with_membership(s, n):
    ind = s.indicator(n)
    assert [bool(v) for v in ind] == [i in s for i in range(n + 1)]


@settings(max_examples=60, deadline=None)
@given(structured, st.integers(0, 30), st.integers(1, 2000))
def test_shift_changes_window_density_little(s, t, n):
    d = window_density(TimeSet.shifted(s, t), n) - window_density(s, n)
    assert abs(d) <= Fraction(t + 1, n + 1)


class TestPigeonhole:
    def test_single_key(self):
        assert pigeonhole_select(["a"], {"a": EVENS}, Fraction(1, 2), 100) == (0, ["a"])

    def test_evens_and_odds(self):
        i, sub = pigeonhole_select(["a", "b"], {"a": EVENS, "b": TimeSet.arithmetic(1, 2)}, Fraction(9, 10), 100)
        assert (i, sub) == (0, ["a"])

    def test_four_keys_multiples_of_three(self):
        keys = list("abcd")
        i, sub = pigeonhole_select(keys, {k: TimeSet.arithmetic(0, 3) for k in keys}, Fraction(3, 10), 100)
        assert (i, sub) == (0, keys)

    def test_hypothesis_violation_reported(self):
        with pytest.raises(PigeonholeError, match="density"):
            pigeonhole_select(["a"], {"a": TimeSet.finite([])}, Fraction(1, 2), 50)

    def test_callable_assignment_matches_bruteforce(self):
        rng = np.random.default_rng(3)
        sets = {k: TimeSet.arithmetic(int(rng.integers(0, 5)), int(rng.integers(1, 5))) for k in range(10)}
        got = pigeonhole_select(list(sets), sets.get, Fraction(1, 5), 60)
        assert got == pigeonhole_bruteforce(list(sets), lambda k, i: i in sets[k], 60)
