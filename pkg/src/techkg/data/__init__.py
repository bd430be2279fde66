"""Bundled demo inputs: a 30-document corpus, a small thesaurus,
recorded extraction fixtures, and a ready-to-run config."""

from pathlib import Path

DATA_DIR = Path(__file__).parent


def corpus_path() -> Path:
    return DATA_DIR / "mini_corpus.jsonl"


def thesaurus_path() -> Path:
    return DATA_DIR / "thesaurus.tsv"


def fixtures_dir() -> Path:
    return DATA_DIR / "fixtures"


def config_path() -> Path:
    return DATA_DIR / "config.json"
