"""Explanations for knowledge-graph-embedding link predictions via local path surrogates."""

__version__ = "0.1.0"
