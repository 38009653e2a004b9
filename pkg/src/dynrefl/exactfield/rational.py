"""Exact multivariate rational functions in a factored representation.

A value is stored as ``scalar * prod(f ** e) * residual`` where each factor
``f`` is a primitive integer polynomial with positive leading coefficient and
``e`` is a nonzero integer.  Denominators therefore only ever appear as
factors.  Linear forms are the common case; any other irreducible piece that
ends up in a denominator is kept as a single general factor (the fallback).

Invariant: no factor with a negative exponent divides the residual.  For
irreducible factors this makes the printed numerator/denominator pair
reduced and hence canonical.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence, Union

from .polynomial import Polynomial, poly_sum
from .registry import VariableRegistry

log = logging.getLogger(__name__)

Number = Union[int, Fraction]


_OPERANDS = (int, Fraction, Polynomial)


class PoleError(ZeroDivisionError):
    """A denominator factor vanishes at the requested point."""

    def __init__(self, factor: Polynomial, message: str | None = None):
        self.factor = factor
        super().__init__(message or f"pole: factor ({factor.to_text()}) vanishes")


class FallbackNotice:
    """Counts how often a non-linear denominator factor had to be created."""

    count = 0


@lru_cache(maxsize=200_000)
def _shift_factor(f: Polynomial, v: tuple[int, ...]) -> Polynomial:
    # shifts preserve content and the grlex leading monomial, so the image of
    # a normalized factor is again normalized
    return f.shift(v)


@lru_cache(maxsize=200_000)
def _factor_key(f: Polynomial) -> tuple:
    return (f.degree(), f.to_text())


def _is_linear(p: Polynomial) -> bool:
    return p.degree() == 1


class RationalFunction:
    __slots__ = ("reg", "scalar", "factors", "residual", "_text", "_hash")

    def __init__(self, reg: VariableRegistry, scalar: Number, factors: Mapping[Polynomial, int], residual: Polynomial):
        self.reg = reg
        self.scalar = Fraction(scalar)
        self.factors: dict[Polynomial, int] = dict(factors) if self.scalar else {}
        self.residual = residual if self.scalar else Polynomial.const(reg, 1)
        self._text = None
        self._hash = None

    # constructors ---------------------------------------------------------
    @classmethod
    def zero(cls, reg: VariableRegistry) -> "RationalFunction":
        return cls(reg, 0, {}, Polynomial.const(reg, 1))

    @classmethod
    def const(cls, reg: VariableRegistry, c: Number) -> "RationalFunction":
        return cls(reg, Fraction(c), {}, Polynomial.const(reg, 1))

    @classmethod
    def one(cls, reg: VariableRegistry) -> "RationalFunction":
        return cls.const(reg, 1)

    @classmethod
    def var(cls, reg: VariableRegistry, name: str) -> "RationalFunction":
        return cls.from_poly(Polynomial.var(reg, name))

    @classmethod
    def from_poly(cls, p: Polynomial) -> "RationalFunction":
        reg = p.reg
        if p.is_zero():
            return cls.zero(reg)
        s, prim = p.primitive()
        if prim.is_constant():
            return cls(reg, s, {}, prim)
        if _is_linear(prim):
            return cls(reg, s, {prim: 1}, Polynomial.const(reg, 1))
        return cls(reg, s, {}, prim)

    @classmethod
    def parse(cls, text: str, reg: VariableRegistry) -> "RationalFunction":
        from .textfmt import parse_rational

        return parse_rational(text, reg)

    # queries --------------------------------------------------------------
    def is_zero(self) -> bool:
        return self.scalar == 0

    def is_constant(self) -> bool:
        return self.is_zero() or (not self.factors and self.residual.is_constant())

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self.to_text()} is not constant")
        return self.scalar * (self.residual.constant_value() if self.scalar else 1)

    def is_polynomial(self) -> bool:
        return all(e > 0 for e in self.factors.values())

    def denominator_factors(self) -> list[tuple[Polynomial, int]]:
        """Sorted ``(factor, exponent)`` pairs of the reduced denominator."""
        den = [(f, -e) for f, e in self.factors.items() if e < 0]
        den.sort(key=lambda t: _factor_key(t[0]))
        return den

    def numerator(self) -> Polynomial:
        """Expanded numerator, scalar included."""
        if self.is_zero():
            return Polynomial(self.reg)
        out = self.residual
        for f, e in sorted(self.factors.items(), key=lambda t: _factor_key(t[0])):
            if e > 0:
                out = out * (f ** e)
        return out.scale(self.scalar)

    def denominator(self) -> Polynomial:
        out = Polynomial.const(self.reg, 1)
        for f, e in self.denominator_factors():
            out = out * (f ** e)
        return out

    def degree_bound(self) -> int:
        """Total degree of numerator plus denominator (used for error bounds)."""
        d = self.residual.degree()
        for f, e in self.factors.items():
            d += f.degree() * abs(e)
        return d

    def numerator_degree(self) -> int:
        return self.residual.degree() + sum(f.degree() * e for f, e in self.factors.items() if e > 0)

    def denominator_degree(self) -> int:
        return sum(f.degree() * -e for f, e in self.factors.items() if e < 0)

    def depends_on(self, idx: int) -> bool:
        if self.is_zero():
            return False
        if idx in self.residual.support():
            return True
        return any(idx in f.support() for f in self.factors)

    def has_general_denominator(self) -> bool:
        return any(e < 0 and not _is_linear(f) for f, e in self.factors.items())

    # normalization helpers ------------------------------------------------
    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            self.reg.check(other.reg)
            return other
        if isinstance(other, (int, Fraction)):
            return RationalFunction.const(self.reg, other)
        if isinstance(other, Polynomial):
            self.reg.check(other.reg)
            return RationalFunction.from_poly(other)
        raise TypeError(f"cannot combine RationalFunction with {type(other).__name__}")

    @staticmethod
    def _finish(reg, scalar: Fraction, factors: dict, residual: Polynomial, check: Iterable[Polynomial]):
        """Cancel ``check`` factors (negative exponent) from the residual, promote linears."""
        if residual.is_zero() or scalar == 0:
            return RationalFunction.zero(reg)
        s, residual = residual.primitive()
        scalar = scalar * s
        for f in check:
            while factors.get(f, 0) < 0:
                q = residual.exact_div(f)
                if q is None:
                    break
                residual = q
                e = factors[f] + 1
                if e:
                    factors[f] = e
                else:
                    del factors[f]
        if _is_linear(residual):
            s, residual = residual.primitive()
            scalar = scalar * s
            e = factors.get(residual, 0) + 1
            if e:
                factors[residual] = e
            else:
                factors.pop(residual, None)
            residual = Polynomial.const(reg, 1)
        return RationalFunction(reg, scalar, factors, residual)

    # arithmetic -----------------------------------------------------------
    def __neg__(self):
        return RationalFunction(self.reg, -self.scalar, self.factors, self.residual)

    def __add__(self, other):
        if not isinstance(other, _OPERANDS):
            return NotImplemented
        other = self._coerce(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        reg = self.reg
        keys = set(self.factors) | set(other.factors)
        common: dict[Polynomial, int] = {}
        pa = self.residual
        pb = other.residual
        ea_extra = []
        eb_extra = []
        for f in keys:
            ea = self.factors.get(f, 0)
            eb = other.factors.get(f, 0)
            m = min(ea, eb)
            if m:
                common[f] = m
            if ea > m:
                ea_extra.append((f, ea - m))
            if eb > m:
                eb_extra.append((f, eb - m))
        for f, k in sorted(ea_extra, key=lambda t: _factor_key(t[0])):
            pa = pa * (f ** k)
        for f, k in sorted(eb_extra, key=lambda t: _factor_key(t[0])):
            pb = pb * (f ** k)
        # factor the larger scalar out to keep coefficients small
        sa, sb = self.scalar, other.scalar
        total = pa.scale(sa) + pb.scale(sb)
        neg = [f for f, e in common.items() if e < 0]
        neg.sort(key=_factor_key)
        return RationalFunction._finish(reg, Fraction(1), common, total, neg)

    def __radd__(self, other):
        if not isinstance(other, _OPERANDS):
            return NotImplemented
        return self._coerce(other) + self

    def __sub__(self, other):
        if not isinstance(other, _OPERANDS):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        if not isinstance(other, _OPERANDS):
            return NotImplemented
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, _OPERANDS):
            return NotImplemented
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            return RationalFunction.zero(self.reg)
        if other.is_constant():
            c = other.constant_value()
            return RationalFunction(self.reg, self.scalar * c, self.factors, self.residual)
        if self.is_constant():
            c = self.constant_value()
            return RationalFunction(self.reg, other.scalar * c, other.factors, other.residual)
        factors = dict(self.factors)
        for f, e in other.factors.items():
            k = factors.get(f, 0) + e
            if k:
                factors[f] = k
            else:
                del factors[f]
        ra, rb = self.residual, other.residual
        scalar = self.scalar * other.scalar
        # cross cancellation: a negative factor coming from one operand may
        # divide the other operand's residual
        for f, e in list(factors.items()):
            if e >= 0:
                continue
            for res_owner, resid_is_a in ((self, True), (other, False)):
                if res_owner.factors.get(f, 0) < 0:
                    continue
                while factors.get(f, 0) < 0:
                    r = ra if resid_is_a else rb
                    if r.is_constant():
                        break
                    q = r.exact_div(f)
                    if q is None:
                        break
                    if resid_is_a:
                        ra = q
                    else:
                        rb = q
                    k = factors[f] + 1
                    if k:
                        factors[f] = k
                    else:
                        del factors[f]
        residual = ra * rb
        if _is_linear(residual):
            return RationalFunction._finish(self.reg, scalar, factors, residual, ())
        return RationalFunction(self.reg, scalar, factors, residual)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        return self._inverse(())

    def _inverse(self, hints: Iterable[Polynomial]) -> "RationalFunction":
        if self.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        factors = {f: -e for f, e in self.factors.items()}
        r = self.residual
        if not r.is_constant():
            # split the residual using known factors before creating a general one
            for f in sorted(set(hints), key=_factor_key):
                if r.is_constant():
                    break
                while not r.is_constant():
                    q = r.exact_div(f)
                    if q is None:
                        break
                    r = q
                    k = factors.get(f, 0) - 1
                    if k:
                        factors[f] = k
                    else:
                        del factors[f]
            if not r.is_constant():
                s, r = r.primitive()
                extra = Fraction(1) / s
                if not _is_linear(r):
                    FallbackNotice.count += 1
                    log.debug("general denominator factor %s", r.to_text())
                k = factors.get(r, 0) - 1
                if k:
                    factors[r] = k
                else:
                    del factors[r]
                inv = RationalFunction(self.reg, extra / self.scalar, factors, Polynomial.const(self.reg, 1))
                return inv
        c = r.constant_value() if not r.is_zero() else 1
        return RationalFunction(self.reg, Fraction(1) / (self.scalar * c), factors, Polynomial.const(self.reg, 1))

    def __truediv__(self, other):
        if not isinstance(other, _OPERANDS):
            return NotImplemented
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        if other.is_constant():
            return RationalFunction(self.reg, self.scalar / other.constant_value(), self.factors, self.residual)
        hints = list(self.factors) + list(other.factors)
        return self * other._inverse(hints)

    def __rtruediv__(self, other):
        if not isinstance(other, _OPERANDS):
            return NotImplemented
        return self._coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = RationalFunction.one(self.reg)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    # equality ---------------------------------------------------------------
    def equals(self, other) -> bool:
        other = self._coerce(other)
        if self.scalar == other.scalar and self.factors == other.factors and self.residual == other.residual:
            return True
        return (self - other).is_zero()

    def __eq__(self, other):
        if isinstance(other, (RationalFunction, int, Fraction, Polynomial)):
            try:
                return self.equals(other)
            except TypeError:
                return NotImplemented
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.to_text())
        return self._hash

    # substitutions ----------------------------------------------------------
    def shift(self, v: Sequence[int]) -> "RationalFunction":
        v = tuple(int(x) for x in v)
        if len(v) != self.reg.n:
            raise ValueError(f"shift vector {v} has length {len(v)}, registry has n={self.reg.n}")
        if self.is_zero() or not any(v):
            return self
        factors = {_shift_factor(f, v): e for f, e in self.factors.items()}
        return RationalFunction(self.reg, self.scalar, factors, self.residual.shift(v))

    def substitute(self, mapping: Mapping[str, Polynomial], target: VariableRegistry | None = None) -> "RationalFunction":
        """Replace variables by polynomials (possibly into another registry)."""
        target = target or self.reg
        if self.is_zero():
            return RationalFunction.zero(target)
        out = RationalFunction.from_poly(self.residual.substitute(mapping, target)) * self.scalar
        for f, e in sorted(self.factors.items(), key=lambda t: _factor_key(t[0])):
            img = RationalFunction.from_poly(f.substitute(mapping, target))
            if img.is_zero() and e < 0:
                raise PoleError(f, f"substitution sends factor ({f.to_text()}) to zero")
            out = out * (img ** e)
        return out

    def derivative(self, name_or_idx) -> "RationalFunction":
        idx = name_or_idx if isinstance(name_or_idx, int) else self.reg.index(name_or_idx)
        if self.is_zero():
            return self
        base = RationalFunction(self.reg, self.scalar, self.factors, Polynomial.const(self.reg, 1))
        total = base * RationalFunction.from_poly(self.residual.derivative(idx))
        rest = RationalFunction(self.reg, self.scalar, self.factors, self.residual)
        for f, e in self.factors.items():
            df = f.derivative(idx)
            if df.is_zero():
                continue
            total = total + rest * RationalFunction.from_poly(df.scale(e)) / RationalFunction.from_poly(f)
        return total

    # evaluation -------------------------------------------------------------
    def _point_tuple(self, point) -> tuple:
        if isinstance(point, Mapping):
            # unused variables may be left out
            missing = [nm for i, nm in enumerate(self.reg.names) if nm not in point and self.depends_on(i)]
            if missing:
                raise ValueError(f"point does not assign {missing}")
            return tuple(Fraction(point.get(nm, 0)) for nm in self.reg.names)
        pt = tuple(point)
        if len(pt) != self.reg.nvars:
            raise ValueError(f"point has {len(pt)} coordinates, registry has {self.reg.nvars}")
        return pt

    def evaluate(self, point) -> Fraction:
        pt = self._point_tuple(point)
        if self.is_zero():
            return Fraction(0)
        val = self.scalar * self.residual.evaluate(pt)
        for f, e in self.factors.items():
            fv = f.evaluate(pt)
            if fv == 0:
                if e < 0:
                    raise PoleError(f)
                return Fraction(0)
            val *= fv ** e
        return val

    def evaluate_mod(self, pt: tuple[int, ...], p: int) -> int:
        if self.is_zero():
            return 0
        s = self.scalar
        val = s.numerator * pow(s.denominator, -1, p) % p
        val = val * self.residual.evaluate_mod(pt, p) % p
        for f, e in self.factors.items():
            fv = f.evaluate_mod(pt, p)
            if fv == 0:
                if e < 0:
                    raise PoleError(f)
                return 0
            val = val * pow(fv, e, p) % p
        return val

    # canonical form ---------------------------------------------------------
    def normalize(self) -> "RationalFunction":
        """Canonical structure: denominators factored, numerator expanded."""
        if self.is_zero():
            return RationalFunction.zero(self.reg)
        num = self.residual
        for f, e in sorted(self.factors.items(), key=lambda t: _factor_key(t[0])):
            if e > 0:
                num = num * (f ** e)
        den = {f: e for f, e in self.factors.items() if e < 0}
        return RationalFunction._finish(self.reg, self.scalar, den, num, ())

    def to_text(self) -> str:
        if self._text is None:
            from .textfmt import format_rational

            self._text = format_rational(self)
        return self._text

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"RationalFunction({self.to_text()!r})"


_OPERANDS = _OPERANDS + (RationalFunction,)


def rf_sum(reg: VariableRegistry, items: Iterable[RationalFunction]) -> RationalFunction:
    """Sum many rational functions over a common factored denominator.

    Cheaper than repeated binary addition: every term is brought to the
    common factor map once and the numerators are added in one pass.
    """
    terms = [t for t in items if not t.is_zero()]
    if not terms:
        return RationalFunction.zero(reg)
    if len(terms) == 1:
        return terms[0]
    for t in terms:
        reg.check(t.reg)
    keys: set[Polynomial] = set()
    for t in terms:
        keys.update(t.factors)
    common: dict[Polynomial, int] = {}
    for f in keys:
        m = min(t.factors.get(f, 0) for t in terms)
        if m:
            common[f] = m
    pieces = []
    for t in terms:
        p = t.residual
        extra = sorted(((f, t.factors.get(f, 0) - common.get(f, 0)) for f in keys), key=lambda x: _factor_key(x[0]))
        for f, k in extra:
            if k:
                p = p * (f ** k)
        pieces.append(p.scale(t.scalar))
    total = poly_sum(reg, pieces)
    neg = sorted((f for f, e in common.items() if e < 0), key=_factor_key)
    return RationalFunction._finish(reg, Fraction(1), common, total, neg)


def rf_product(reg: VariableRegistry, items: Iterable[RationalFunction]) -> RationalFunction:
    out = RationalFunction.one(reg)
    for t in items:
        out = out * t
        if out.is_zero():
            break
    return out
