"""
Rational helpers

Parsing of "p/q" strings and formatting of exact and inexact scalars for
reports and trace files.
"""

import math
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Union


def parse_rational(value: Union[str, int, Fraction]) -> Fraction:
    """
    Parse an exact rational.

    Accepts ints, Fractions, "p/q" strings, integers as strings and finite
    decimal strings ("0.25", "1e-9"), which are read exactly.
    """
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if not isinstance(value, str):
        raise ValueError(f"cannot read {value!r} as a rational")
    text = value.strip()
    if not text:
        raise ValueError("empty rational")
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return Fraction(int(num.strip()), int(den.strip()))
        return Fraction(Decimal(text))
    except (ValueError, ZeroDivisionError, InvalidOperation) as exc:
        raise ValueError(f"cannot read {value!r} as a rational") from exc


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_float(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return repr(float(value))
