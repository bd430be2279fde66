"""techkg: build technology knowledge graphs from document corpora.

The pipeline runs corpus retrieval, per-genre term scoring, semantic
clustering, schema-constrained triple extraction, and consistency
checking, and exposes the results through a CLI and an HTTP service.
"""

__version__ = "0.1.0"
