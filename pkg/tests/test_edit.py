import random

from hypothesis import given
from hypothesis import strategies as st

from docforge.metrics import levenshtein, normalized_edit_distance
from oracles import levenshtein_full_matrix


def test_examples():
    assert levenshtein("abc", "abc") == 0
    assert levenshtein("kitten", "sitting") == levenshtein_full_matrix("kitten", "sitting") == 3
    assert levenshtein("", "a") == 1
    assert levenshtein(["a", "b"], ["b", "a"]) == 2


def test_normalized():
    assert normalized_edit_distance("same", "same") == 0.0
    assert normalized_edit_distance("kitten", "sitting") == 3 / 7
    assert normalized_edit_distance("", "") == 0.0


def test_counts_code_points():
    assert levenshtein("naïve", "naive") == 1
    assert levenshtein("😀x", "x") == 1


def test_matches_full_matrix_oracle():
    rng = random.Random(7)
    for _ in range(300):
        a = "".join(rng.choice("abcd") for _ in range(rng.randint(0, 30)))
        b = "".join(rng.choice("abcd") for _ in range(rng.randint(0, 30)))
        assert levenshtein(a, b) == levenshtein_full_matrix(a, b)


short = st.text(alphabet="abc", max_size=12)


@given(short, short, short)
def test_metric_axioms(a, b, c):
    assert (levenshtein(a, b) == 0) == (a == b)
    assert levenshtein(a, b) == levenshtein(b, a)
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)
    assert 0.0 <= normalized_edit_distance(a, b) <= 1.0
