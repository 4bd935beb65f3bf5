from .base import Record

__all__ = ["Record"]
