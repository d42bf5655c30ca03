import random

import pytest

from citeval.tokens import ngrams, tokenize


def test_empty_text():
    assert tokenize("") == []


def test_plain_sentence():
    assert tokenize("The Court has held") == ["the", "court", "has", "held"]


def test_citation_reference():
    assert tokenize("EU:C:2015:572, paragraph 55") == ["eu", "c", "2015", "572", "paragraph", "55"]


def test_punctuation_and_digits():
    assert tokenize("Article 3(6) of Directive 93/13") == [
        "article", "3", "6", "of", "directive", "93", "13",
    ]


def test_underscore_is_a_separator():
    assert tokenize("a_b c") == ["a", "b", "c"]


def test_unicode_letters():
    assert tokenize("Căldăraru études") == ["căldăraru", "études"]


def test_lowercase_idempotent():
    text = "The COURT Has Held; Article 3(6)"
    once = tokenize(text)
    assert tokenize(" ".join(once)) == once


def test_ngrams_basic():
    assert ngrams(["a", "b", "c"], 2) == [("a", "b"), ("b", "c")]


def test_ngrams_window_exceeds_length():
    assert ngrams(["a", "b"], 3) == []


def test_ngrams_duplicates_preserved():
    assert ngrams(["a", "a", "a"], 2) == [("a", "a"), ("a", "a")]


def test_ngrams_unigrams():
    assert ngrams(["x", "y"], 1) == [("x",), ("y",)]


def test_ngrams_rejects_bad_n():
    with pytest.raises(ValueError):
        ngrams(["a"], 0)


def test_ngram_count_identity():
    rng = random.Random(3)
    for _ in range(100):
        tokens = [rng.choice("abc") for _ in range(rng.randint(0, 15))]
        n = rng.randint(1, 6)
        assert len(ngrams(tokens, n)) == max(0, len(tokens) - n + 1)
