"""Deterministic tokenization and n-gram extraction.

Every text statistic in this package (index term counts, word counts,
edit distances, n-gram overlaps) is defined on the output of
:func:`tokenize`, so the rule is pinned exactly: split on every maximal
run of non-alphanumeric characters, lowercase the pieces. No stemming,
no stop words, digits kept. The rule is locale-independent: the same
bytes always produce the same tokens.
"""
from __future__ import annotations

import re

# Alphanumeric runs per Unicode (str.isalnum), underscore excluded.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

#: Identifier recorded in manifests and index snapshots so that outputs
#: produced under different tokenization rules are never compared.
TOKENIZER_ID = "alnum-lower-v1"

# Word-level rule for overlap profiles against published figures:
# whitespace-delimited words keep internal hyphens/slashes/colons
# ("c-569/13" stays one word), while sentence punctuation becomes
# standalone tokens.
_WORD_PUNCT_RE = re.compile(r"[^\s(),.;!?\"']+|[(),.;!?\"']")

WORD_PUNCT_TOKENIZER_ID = "word-punct-v1"


def tokenize(text: str) -> list[str]:
    """Split ``text`` into lowercase alphanumeric tokens.

    >>> tokenize("EU:C:2015:572, paragraph 55")
    ['eu', 'c', '2015', '572', 'paragraph', '55']
    """
    return [m.group().lower() for m in _TOKEN_RE.finditer(text)]


def tokenize_word_punct(text: str) -> list[str]:
    """Lowercase word-and-punctuation tokens (citation compounds glued).

    >>> tokenize_word_punct("Bricmate, C-569/13, paragraph 55.")
    ['bricmate', ',', 'c-569/13', ',', 'paragraph', '55', '.']
    """
    return [m.group().lower() for m in _WORD_PUNCT_RE.finditer(text)]


def ngrams(tokens: list[str], n: int) -> list[tuple[str, ...]]:
    """All contiguous ``n``-grams of ``tokens`` (stride 1, duplicates kept).

    Returns ``max(0, len(tokens) - n + 1)`` tuples.
    """
    if n < 1:
        raise ValueError(f"n-gram size must be >= 1, got {n}")
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]
