"""HTTP service wrapping the marching toolkit."""

from .app import create_app

__all__ = ["create_app"]
