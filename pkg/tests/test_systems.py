from itertools import product

import numpy as np
import pytest

from subshiftlab.points import IrrationalityGuardError, golden_conjugate, to_fixed
from subshiftlab.systems import (
    Cylinder,
    PatternBudgetExceeded,
    build_model,
    full_shift,
    language,
    powers_subshift,
    regular_toeplitz_example,
    single_one_subshift,
    sturmian_model,
    toeplitz_j_sequence,
    toeplitz_word,
)
from oracles import distinct_factors, j_recursion, powers_admissible, sturmian_bits, toeplitz_oracle


class TestCylinder:
    def test_of_text(self):
        c = Cylinder.of("0110", offset=2)
        assert c.word == (0, 1, 1, 0) and len(c) == 4 and str(c) == "0110"

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            Cylinder(())


class TestFullShift:
    def test_language_is_everything(self):
        assert len(language(full_shift(), 6, 1 << 12)) == 64

    def test_ternary(self):
        assert len(language(full_shift(3), 3, 1 << 10)) == 27

    def test_budget(self):
        with pytest.raises(PatternBudgetExceeded):
            full_shift().pattern_codes(list(range(30)), 1 << 10)


class TestSingleOne:
    def test_language(self):
        words = language(single_one_subshift(), 5, 1 << 10)
        assert words == {tuple(0 for _ in range(5))} | {tuple(int(i == k) for i in range(5)) for k in range(5)}

    def test_generators_realise_every_e_k(self):
        m = single_one_subshift(far=64)
        assert m.generator_factors(8, 1 << 10) == language(m, 8, 1 << 10)

    def test_predicate(self):
        m = single_one_subshift()
        assert m.admits("0100") and not m.admits("0101")


class TestPowers:
    @pytest.mark.parametrize("word", ["1", "11", "101", "1001", "10001", "0110", "1000000010", "100000001", "110"])
    def test_predicate_matches_exhaustive(self, word):
        w = [int(c) for c in word]
        assert powers_subshift().admits(w) == powers_admissible(w, limit=1 << 12)

    def test_all_short_words_match_exhaustive(self):
        m = powers_subshift()
        for n in range(1, 8):
            for w in product((0, 1), repeat=n):
                assert m.admits(w) == powers_admissible(list(w), limit=1 << 10), w

    def test_language_size_is_polynomial(self):
        sizes = [len(language(powers_subshift(), n, 1 << 14)) for n in range(1, 9)]
        brute = [sum(powers_admissible(list(w), 1 << 10) for w in product((0, 1), repeat=n)) for n in range(1, 9)]
        assert sizes == brute

    def test_generator_support(self):
        m = powers_subshift()
        assert m.in_base_set(m.generators[1], 1 << 12)
        assert m.in_base_set(m.generators[2], 1 << 12)

    def test_consistent_shifts(self):
        assert powers_subshift().consistent_shifts([0, 2], limit=100) == [2]


class TestToeplitz:
    def test_j_sequence_matches_recursion(self):
        assert toeplitz_j_sequence(12) == j_recursion(12)

    def test_j_closed_form(self):
        assert toeplitz_j_sequence(8) == [(1 << (n - 1)) - 1 for n in range(1, 9)]

    def test_word(self):
        assert toeplitz_word(2).tolist() == [0, 0, 0, 1, 1, 0, 1, 1]

    def test_prefix_matches_literal_recursion(self):
        x, js = toeplitz_oracle(1 << 13, levels=14)
        got = regular_toeplitz_example().generators[0].prefix(1 << 13).tolist()
        assert got == x
        assert js == toeplitz_j_sequence(len(js))

    def test_skeleton(self):
        m = regular_toeplitz_example(1 << 10)
        sk = m.side_info.skeleton
        assert sk.levels()[:3] == [(2, 0), (4, 1), (8, 3)]
        assert m.uniquely_ergodic


class TestSturmian:
    def test_generator_matches_oracle(self):
        m = sturmian_model()
        alpha = m.side_info.alpha
        expect = sturmian_bits(to_fixed(alpha, 96), 0, 96, 20_000)
        assert m.generators[0].prefix(20_000).tobytes() == expect

    def test_factor_complexity(self):
        pre = sturmian_model().generators[0].prefix(100_000).tobytes()
        for n in range(1, 21):
            assert len(distinct_factors(pre, n)) == n + 1

    def test_language_helper_agrees(self):
        assert [len(language(sturmian_model(), n, 1 << 16)) for n in range(1, 9)] == list(range(2, 10))

    def test_rational_rejected(self):
        with pytest.raises(IrrationalityGuardError):
            sturmian_model("2/5")

    def test_alpha_string(self):
        assert sturmian_model("golden").side_info.alpha == golden_conjugate()


class TestPatternCodes:
    def test_unsorted_positions_remap(self):
        m = single_one_subshift()
        a = set(m.pattern_codes([0, 3], 1 << 10).tolist())
        b = set(m.pattern_codes([3, 0], 1 << 10).tolist())
        assert a == b == {0, 1, 2}

    def test_duplicate_positions(self):
        codes = full_shift().pattern_codes([2, 2], 1 << 10).tolist()
        assert codes == [0, 3]

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            full_shift().pattern_codes([-1], 100)


class TestNeighbours:
    def test_in_cylinder(self):
        rng = np.random.default_rng(0)
        for model in (full_shift(), single_one_subshift(), powers_subshift(), sturmian_model()):
            u = model.generators[0].to_text(4)
            pts = model.neighbors(u, rng, 6, 1 << 12)
            assert pts
            assert all(p.to_text(4) == u for p in pts)

    def test_powers_extensions_admissible(self):
        m = powers_subshift()
        pts = m.neighbors("0010", np.random.default_rng(1), 8, 1 << 10)
        for p in pts:
            assert m.admits(p.prefix(600).tolist())


class TestAmbiguity:
    def test_single_one_zero_word(self):
        mask, info = single_one_subshift().ambiguity_mask("0000", 1, 20, 1 << 10)
        assert not mask[:4].any() and mask[4:].all()
        assert info["exact"]

    def test_single_one_with_one_is_determined(self):
        mask, _ = single_one_subshift().ambiguity_mask("0100", 1, 20, 1 << 10)
        assert not mask.any()

    def test_toeplitz_prefix8(self):
        # level 1 is fixed by the first 8 symbols; level 2 only in half its residues
        m = regular_toeplitz_example(1 << 16)
        mask, _ = m.ambiguity_mask(m.generators[0].to_text(8), 1, 1 << 12, 1 << 16)
        assert not mask[0::2].any()


def test_build_model_registry():
    assert build_model("single_one").name == "single_one"
    assert build_model({"name": "powers", "seed": 3}).params == {"seed": 3}
    with pytest.raises(KeyError):
        build_model("nope")
