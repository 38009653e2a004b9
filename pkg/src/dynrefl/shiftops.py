"""The skew algebra of difference operators ``sum_v f_v(q) exp(mu v.d)``.

Coefficients always sit to the left of the shift, and the product rule is
``(f e^v)(g e^w) = f * g(q + v mu) e^(v+w)``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .exactfield import RationalFunction, VariableRegistry, parse_rational, rf_sum
from .tensor import Leg, TensorMatrix, embed

Vec = tuple[int, ...]


class ShiftOperator:
    __slots__ = ("reg", "terms")

    def __init__(self, reg: VariableRegistry, terms: Mapping[Sequence[int], RationalFunction] | None = None):
        self.reg = reg
        clean: dict[Vec, RationalFunction] = {}
        for v, c in (terms or {}).items():
            v = tuple(int(x) for x in v)
            if len(v) != reg.n:
                raise ValueError(f"shift vector {v} has length {len(v)}, registry has n={reg.n}")
            if not isinstance(c, RationalFunction):
                c = RationalFunction.const(reg, c)
            else:
                reg.check(c.reg)
            if not c.is_zero():
                clean[v] = c
        self.terms = clean

    # constructors ---------------------------------------------------------------
    @classmethod
    def lift(cls, x) -> "ShiftOperator":
        if isinstance(x, ShiftOperator):
            return x
        if isinstance(x, RationalFunction):
            return cls(x.reg, {(0,) * x.reg.n: x})
        raise TypeError(f"cannot lift {type(x).__name__} to a ShiftOperator")

    @classmethod
    def translation(cls, reg: VariableRegistry, v: Sequence[int], coeff: RationalFunction | int = 1) -> "ShiftOperator":
        """The single term ``coeff * exp(mu v.d)``."""
        return cls(reg, {tuple(v): coeff})

    @classmethod
    def zero(cls, reg: VariableRegistry) -> "ShiftOperator":
        return cls(reg, {})

    @classmethod
    def one(cls, reg: VariableRegistry) -> "ShiftOperator":
        return cls(reg, {(0,) * reg.n: 1})

    # queries -----------------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_multiplication(self) -> bool:
        return all(not any(v) for v in self.terms)

    def coefficient(self, v: Sequence[int]) -> RationalFunction:
        return self.terms.get(tuple(v), RationalFunction.zero(self.reg))

    def sorted_terms(self) -> list[tuple[Vec, RationalFunction]]:
        return sorted(self.terms.items())

    # arithmetic ----------------------------------------------------------------------
    def _coerce(self, other) -> "ShiftOperator | None":
        if isinstance(other, ShiftOperator):
            self.reg.check(other.reg)
            return other
        if isinstance(other, RationalFunction):
            return ShiftOperator.lift(other)
        if isinstance(other, (int, Fraction)):
            return ShiftOperator(self.reg, {(0,) * self.reg.n: other})
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return op_sum(self.reg, [self, other])

    __radd__ = __add__

    def __neg__(self):
        return ShiftOperator(self.reg, {v: -c for v, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return ShiftOperator(self.reg, {v: c * other for v, c in self.terms.items()})
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return shift_mul(self, other)

    def __rmul__(self, other):
        # other * self with other a function or number: plain left multiplication
        if isinstance(other, (int, Fraction, RationalFunction)):
            return ShiftOperator(self.reg, {v: other * c for v, c in self.terms.items()})
        return NotImplemented

    def conjugate(self, v: Sequence[int]) -> "ShiftOperator":
        """``e^v X e^-v``: every coefficient shifted by ``v``."""
        v = tuple(v)
        if not any(v):
            return self
        return ShiftOperator(self.reg, {w: c.shift(v) for w, c in self.terms.items()})

    def shift(self, v: Sequence[int]) -> "ShiftOperator":
        # used by the tensor module for dynamical shifts of operator entries
        return self.conjugate(v)

    def equals(self, other) -> bool:
        other = self._coerce(other)
        return (self - other).is_zero()

    def __eq__(self, other):
        if isinstance(other, (ShiftOperator, RationalFunction, int, Fraction)):
            return self.equals(other)
        return NotImplemented

    __hash__ = None

    # action --------------------------------------------------------------------------
    def apply(self, f: RationalFunction) -> RationalFunction:
        """Act on a function: ``(g e^v) f = g * f(q + v mu)``."""
        return rf_sum(self.reg, [c * f.shift(v) for v, c in self.terms.items()])

    def apply_numeric(self, fn: Callable[[tuple], complex], point: Mapping[str, object]) -> complex:
        """Act on a numeric test function at a numeric point.

        ``fn`` receives the tuple of shifted dynamical coordinates; coefficients
        are evaluated at ``point`` (which must carry every registry variable).
        """
        reg = self.reg
        mu = point[reg.mu]
        q = [point[nm] for nm in reg.qnames]
        total = 0.0
        for v, c in self.sorted_terms():
            shifted = tuple(qi + vi * mu for qi, vi in zip(q, v))
            total += eval_float(c, point) * fn(shifted)
        return total

    # serialization ----------------------------------------------------------------------
    def to_json(self) -> list:
        return [{"v": list(v), "coeff": c.to_text()} for v, c in self.sorted_terms()]

    @classmethod
    def from_json(cls, data: Iterable[dict], reg: VariableRegistry) -> "ShiftOperator":
        return cls(reg, {tuple(t["v"]): parse_rational(t["coeff"], reg) for t in data})

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for v, c in self.sorted_terms():
            if any(v):
                parts.append(f"[{c.to_text()}] e^{list(v)}")
            else:
                parts.append(f"[{c.to_text()}]")
        return " + ".join(parts)

    def __repr__(self):
        return f"ShiftOperator({self.to_text()})"


def eval_float(c: RationalFunction, point: Mapping[str, float]) -> float:
    """Floating-point value of a rational function (for numeric eigenfunction checks)."""
    pt = tuple(point[nm] for nm in c.reg.names)
    num = c.numerator()
    val = 0.0
    for e, k in num.terms.items():
        t = float(k)
        for x, p in zip(pt, e):
            if p:
                t *= x ** p
        val += t
    for f, e in c.denominator_factors():
        fv = 0.0
        for ex, k in f.terms.items():
            t = float(k)
            for x, p in zip(pt, ex):
                if p:
                    t *= x ** p
            fv += t
        val /= fv ** e
    return val


def op_sum(reg: VariableRegistry, ops: Iterable[ShiftOperator]) -> ShiftOperator:
    acc: dict[Vec, list[RationalFunction]] = {}
    for op in ops:
        for v, c in op.terms.items():
            acc.setdefault(v, []).append(c)
    return ShiftOperator(reg, {v: rf_sum(reg, cs) for v, cs in acc.items()})


def shift_mul(a: ShiftOperator, b: ShiftOperator) -> ShiftOperator:
    a.reg.check(b.reg)
    acc: dict[Vec, list[RationalFunction]] = {}
    for v, f in a.terms.items():
        for w, g in b.terms.items():
            u = tuple(x + y for x, y in zip(v, w))
            acc.setdefault(u, []).append(f * g.shift(v))
    return ShiftOperator(a.reg, {u: rf_sum(a.reg, cs) for u, cs in acc.items()})


def shift_commutator(a: ShiftOperator, b: ShiftOperator) -> ShiftOperator:
    return shift_mul(a, b) - shift_mul(b, a)


def exp_shift_matrix(reg: VariableRegistry, leg: Leg, ambient: Sequence[Leg] | None = None, multiplicity: int = 1) -> TensorMatrix:
    """``exp(multiplicity * d_leg)``: basis index ``i`` maps to ``exp(multiplicity mu d/dq_i)``."""
    n = reg.n
    ents = {}
    for i in range(1, n + 1):
        v = [0] * n
        v[i - 1] = multiplicity
        ents[((i,), (i,))] = ShiftOperator.translation(reg, v)
    M = TensorMatrix(reg, (leg,), ents, "exp")
    return embed(M, ambient) if ambient is not None else M


def lift_matrix(M: TensorMatrix) -> TensorMatrix:
    """Rational entries promoted to multiplication operators."""
    return M.map_entries(ShiftOperator.lift)


def trace_over_leg(M: TensorMatrix, leg_id: str):
    from .tensor import partial_trace

    out = partial_trace(M, leg_id)
    if isinstance(out, RationalFunction):
        return ShiftOperator.lift(out)
    return out
