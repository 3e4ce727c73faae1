"""Character error rate against a brute-force edit-distance oracle."""

import itertools
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artic.errors import StatisticsError
from artic.evaluation.cer import cer, edit_distance, normalize_text


def oracle_distance(a: str, b: str) -> int:
    """Textbook recursive Levenshtein, memoized. Deliberately naive."""

    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            d(i - 1, j) + 1,
            d(i, j - 1) + 1,
            d(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )

    return d(len(a), len(b))


def all_strings(alphabet, max_len):
    out = [""]
    for n in range(1, max_len + 1):
        out.extend("".join(p) for p in itertools.product(alphabet, repeat=n))
    return out


class TestEditDistance:
    def test_exhaustive_short_pairs(self):
        # every pair of strings up to length 3 over {a, b, c}: 1600 cases
        strings = all_strings("abc", 3)
        assert len(strings) == 40
        count = 0
        for x in strings:
            for y in strings:
                assert edit_distance(x, y) == oracle_distance(x, y), (x, y)
                count += 1
        assert count == 1600

    def test_random_pairs_to_length_six(self):
        # 2000 seeded random pairs, lengths 0..6 over {a, b, c}
        rng = np.random.default_rng(99)
        alphabet = np.array(list("abc"))
        for _ in range(2000):
            nx, ny = rng.integers(0, 7, size=2)
            x = "".join(rng.choice(alphabet, size=nx))
            y = "".join(rng.choice(alphabet, size=ny))
            assert edit_distance(x, y) == oracle_distance(x, y), (x, y)

    def test_known_values(self):
        assert edit_distance("kitten", "sitting") == 3
        assert edit_distance("flaw", "lawn") == 2
        assert edit_distance("", "abc") == 3
        assert edit_distance("abc", "") == 3
        assert edit_distance("same", "same") == 0

    @settings(max_examples=60, deadline=None)
    @given(st.text("abcd", max_size=8), st.text("abcd", max_size=8))
    def test_metric_axioms(self, x, y):
        d = edit_distance(x, y)
        assert d == edit_distance(y, x)
        assert (d == 0) == (x == y)
        assert d <= max(len(x), len(y))
        assert d >= abs(len(x) - len(y))


class TestNormalization:
    def test_case_punctuation_whitespace(self):
        assert normalize_text("Hello, World!") == "hello world"
        assert normalize_text("  a\tb\n c ") == "a b c"
        assert normalize_text("don't-stop") == "dont stop" or normalize_text("don't-stop") == "dontstop"

    def test_pure_punctuation_collapses_to_empty(self):
        assert normalize_text("?!...") == ""


class TestCer:
    def test_exact_match_is_zero(self):
        assert cer("the tone", "The tone!") == 0.0

    def test_known_ratio(self):
        # "abc" -> "axc": one substitution over three reference characters
        assert cer("abc", "axc") == pytest.approx(1.0 / 3.0)

    def test_can_exceed_one(self):
        assert cer("ab", "wxyz") > 1.0

    def test_empty_reference_raises(self):
        with pytest.raises(StatisticsError):
            cer("", "anything")
        with pytest.raises(StatisticsError):
            cer("?!", "anything")  # normalizes to empty

    def test_empty_hypothesis_is_total_deletion(self):
        assert cer("abcd", "") == 1.0

    def test_unnormalized_mode_is_case_sensitive(self):
        assert cer("AB", "ab", normalize=False) == 1.0
        assert cer("AB", "ab", normalize=True) == 0.0
