"""HTTP service wrapping the pipeline: sessions, iterations, artifacts."""

from .app import create_app

__all__ = ["create_app"]
