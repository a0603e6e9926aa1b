"""Exact symbolic layer: operator ring, field expressions, kernel matrices."""

from .ring import OpPoly, parse_op

__all__ = ["OpPoly", "parse_op"]
