"""Lossless text encoding of rationals ("p/q" strings)."""
from __future__ import annotations

from fractions import Fraction
from typing import Any


def fmt(x: Fraction | int) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse(s: str | int | Fraction) -> Fraction:
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    if isinstance(s, float):
        raise TypeError("floats are not exact rationals")
    return Fraction(s.strip())


def encode(obj: Any) -> Any:
    """Recursively replace Fractions by "p/q" strings so the result is JSON-ready."""
    if isinstance(obj, Fraction):
        return fmt(obj)
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    return obj
