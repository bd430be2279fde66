"""Tokenization and stemmed phrase matching over document fields."""

from __future__ import annotations

import re
from functools import lru_cache

from .stemming import stem

# Letters and digits only: underscores, hyphens, and all punctuation split,
# so "drive-by-wire" and "drive by wire" produce the same token stream.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list:
    """Split text into lowercased alphanumeric tokens."""
    return _TOKEN_RE.findall(text.casefold())


@lru_cache(maxsize=65536)
def stemmed_tokens(text: str) -> tuple:
    """Tokenize then stem; cached because documents are matched repeatedly."""
    return tuple(stem(tok) for tok in tokenize(text))


def contains_phrase(field_tokens: tuple, phrase_tokens: tuple) -> bool:
    """True iff phrase_tokens occurs contiguously within field_tokens.

    An empty phrase matches nothing: a phrase whose text tokenizes to
    zero tokens (punctuation only) must not select every document.
    """
    k = len(phrase_tokens)
    if k == 0 or k > len(field_tokens):
        return False
    first = phrase_tokens[0]
    for i in range(len(field_tokens) - k + 1):
        if field_tokens[i] == first and field_tokens[i : i + k] == phrase_tokens:
            return True
    return False
