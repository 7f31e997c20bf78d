"""Canonical text form of rationals: ``"p/q"`` in lowest terms, ``"0/1"`` for zero."""

from __future__ import annotations

import re
from fractions import Fraction

_PATTERN = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


class RationalParseError(ValueError):
    pass


def format_rational(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"`` or an integer; zero denominators are rejected."""
    if isinstance(text, bool):
        raise RationalParseError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise RationalParseError(f"not a rational: {text!r}")
    m = _PATTERN.match(text)
    if not m:
        raise RationalParseError(f"not a rational: {text!r}")
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise RationalParseError(f"zero denominator in {text!r}")
    return Fraction(int(m.group(1)), den)
