"""Taylor expansion of rational functions in a single variable."""

from __future__ import annotations

from .polynomial import Polynomial
from .rational import PoleError, RationalFunction


def series_expand(a: RationalFunction, var: str, order: int) -> list[RationalFunction]:
    """Coefficients of ``var**0 .. var**order`` in the expansion of ``a`` about ``var = 0``."""
    if order < 0:
        raise ValueError("order must be non-negative")
    reg = a.reg
    idx = reg.index(var)
    if a.is_zero():
        return [RationalFunction.zero(reg) for _ in range(order + 1)]
    zero = {var: Polynomial(reg)}
    num_parts = a.numerator().coefficients_in(idx)
    den = a.denominator()
    den_parts = den.coefficients_in(idx)
    # the constant term of the denominator, kept factored
    d0 = RationalFunction.one(reg)
    for f, e in a.denominator_factors():
        f0 = f.substitute(zero)
        if f0.is_zero():
            raise PoleError(f, f"pole at {var}=0: factor ({f.to_text()}) vanishes")
        d0 = d0 * RationalFunction.from_poly(f0) ** e
    inv_d0 = d0.inverse()
    coeffs: list[RationalFunction] = []
    for k in range(order + 1):
        acc = RationalFunction.from_poly(num_parts.get(k, Polynomial(reg)))
        for j in range(1, k + 1):
            dj = den_parts.get(j)
            if dj is not None and not dj.is_zero():
                acc = acc - RationalFunction.from_poly(dj) * coeffs[k - j]
        coeffs.append(acc * inv_d0)
    return coeffs
