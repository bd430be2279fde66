"""Corpus layer: documents, thesaurus, boolean retrieval, stemming."""

from .documents import (
    CorpusSlice,
    Document,
    DocumentStore,
    Genre,
    Thesaurus,
    ThesaurusEntry,
    match_document,
    match_thesaurus,
    retrieve_corpus,
)
from .query import And, Or, Phrase, QueryNode, QuerySyntaxError, parse_query, query_to_text
from .stemming import stem
from .text import contains_phrase, stemmed_tokens, tokenize

__all__ = [
    "And",
    "CorpusSlice",
    "Document",
    "DocumentStore",
    "Genre",
    "Or",
    "Phrase",
    "QueryNode",
    "QuerySyntaxError",
    "Thesaurus",
    "ThesaurusEntry",
    "contains_phrase",
    "match_document",
    "match_thesaurus",
    "parse_query",
    "query_to_text",
    "retrieve_corpus",
    "stem",
    "stemmed_tokens",
    "tokenize",
]
