"""Exact arithmetic for sparse multivariate polynomials and rational functions."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .modular import (
    PRIME,
    Certificate,
    EqualityResult,
    PointSampler,
    ResamplingExhausted,
    random_trials,
    rf_equal,
)
from .polynomial import Polynomial, grlex_key, poly_sum
from .rational import PoleError, RationalFunction, rf_product, rf_sum
from .registry import RegistryMismatch, VariableRegistry
from .series import series_expand
from .textfmt import ParseError, format_rational, parse_polynomial, parse_rational


def rf_arith(a: RationalFunction, b: RationalFunction | None, op: str) -> RationalFunction:
    if op == "neg":
        return -a
    if b is None:
        raise ValueError(f"operation {op!r} needs two operands")
    a.reg.check(b.reg)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def rf_shift(a: RationalFunction, v: Sequence[int]) -> RationalFunction:
    return a.shift(v)


def rf_eval(a: RationalFunction, point: Mapping[str, Fraction | int]) -> Fraction:
    return a.evaluate(point)


__all__ = [
    "PRIME",
    "Certificate",
    "EqualityResult",
    "ParseError",
    "PointSampler",
    "PoleError",
    "Polynomial",
    "RationalFunction",
    "RegistryMismatch",
    "ResamplingExhausted",
    "VariableRegistry",
    "format_rational",
    "grlex_key",
    "parse_polynomial",
    "parse_rational",
    "poly_sum",
    "random_trials",
    "rf_arith",
    "rf_eval",
    "rf_equal",
    "rf_product",
    "rf_shift",
    "rf_sum",
    "series_expand",
]
