"""Sparse multivariate polynomials with exact rational coefficients."""

from __future__ import annotations

import heapq
from fractions import Fraction
from math import comb, gcd
from typing import Iterable, Mapping, Union

from .registry import VariableRegistry

Coeff = Union[int, Fraction]
Exps = tuple[int, ...]


def grlex_key(e: Exps) -> tuple[int, Exps]:
    return (sum(e), e)


def _norm(c: Coeff) -> Coeff:
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


class Polynomial:
    """Immutable sparse polynomial over Q.

    ``terms`` maps exponent tuples (one slot per registry variable) to nonzero
    coefficients.  Coefficients are plain ``int`` whenever integral.
    """

    __slots__ = ("reg", "terms", "_hash")

    def __init__(self, reg: VariableRegistry, terms: Mapping[Exps, Coeff] | None = None, *, _trusted=False):
        self.reg = reg
        if terms is None:
            self.terms: dict[Exps, Coeff] = {}
        elif _trusted:
            self.terms = terms  # type: ignore[assignment]
        else:
            clean = {}
            nv = reg.nvars
            for e, c in terms.items():
                if c:
                    if len(e) != nv:
                        raise ValueError(f"exponent {e} has wrong length for {reg.names}")
                    clean[tuple(e)] = _norm(c)
            self.terms = clean
        self._hash = None

    # constructors ---------------------------------------------------------
    @classmethod
    def const(cls, reg: VariableRegistry, c: Coeff) -> "Polynomial":
        if not c:
            return cls(reg)
        return cls(reg, {(0,) * reg.nvars: _norm(Fraction(c))}, _trusted=True)

    @classmethod
    def var(cls, reg: VariableRegistry, name: str, power: int = 1) -> "Polynomial":
        e = [0] * reg.nvars
        e[reg.index(name)] = power
        return cls(reg, {tuple(e): 1}, _trusted=True)

    @classmethod
    def linear(cls, reg: VariableRegistry, coeffs: Mapping[str, Coeff], const: Coeff = 0) -> "Polynomial":
        terms: dict[Exps, Coeff] = {}
        for name, c in coeffs.items():
            if c:
                e = [0] * reg.nvars
                e[reg.index(name)] = 1
                terms[tuple(e)] = c
        if const:
            terms[(0,) * reg.nvars] = const
        return cls(reg, terms)

    # basic queries --------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_value(self) -> Coeff:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values())) if self.terms else 0

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, idx: int) -> int:
        return max((e[idx] for e in self.terms), default=0)

    def support(self) -> frozenset[int]:
        s = set()
        for e in self.terms:
            s.update(i for i, k in enumerate(e) if k)
        return frozenset(s)

    def sorted_terms(self) -> list[tuple[Exps, Coeff]]:
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def leading(self) -> tuple[Exps, Coeff]:
        e = max(self.terms, key=grlex_key)
        return e, self.terms[e]

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.reg == other.reg and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self.reg.check(other.reg)
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.const(self.reg, other)
        raise TypeError(f"cannot combine Polynomial with {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        if len(self.terms) < len(other.terms):
            a, b = other.terms, self.terms
        else:
            a, b = self.terms, other.terms
        out = dict(a)
        for e, c in b.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = _norm(v)
            else:
                out.pop(e, None)
        return Polynomial(self.reg, out, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.reg, {e: -c for e, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c: Coeff) -> "Polynomial":
        if not c:
            return Polynomial(self.reg)
        if c == 1:
            return self
        return Polynomial(self.reg, {e: _norm(v * c) for e, v in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if not self.terms or not other.terms:
            return Polynomial(self.reg)
        out: dict[Exps, Coeff] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial(self.reg, {e: _norm(c) for e, c in out.items() if c}, _trusted=True)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = Polynomial.const(self.reg, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # content / normalization ---------------------------------------------
    def content(self) -> Fraction:
        """Positive rational c with self / c primitive in Z[x]."""
        if not self.terms:
            return Fraction(0)
        num = 0
        den = 1
        for c in self.terms.values():
            if isinstance(c, Fraction):
                num = gcd(num, c.numerator)
                den = den * c.denominator // gcd(den, c.denominator)
            else:
                num = gcd(num, c)
        return Fraction(num, den)

    def primitive(self) -> tuple[Fraction, "Polynomial"]:
        """Split into ``(scalar, p)`` with p primitive and positive leading coefficient."""
        if not self.terms:
            raise ZeroDivisionError("primitive part of zero polynomial")
        c = self.content()
        if self.leading()[1] < 0:
            c = -c
        if c == 1:
            return Fraction(1), self
        inv = 1 / c
        return c, Polynomial(self.reg, {e: _norm(v * inv) for e, v in self.terms.items()}, _trusted=True)

    # division ---------------------------------------------------------------
    def divmod(self, divisor: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        """Multivariate division by a single polynomial in grlex order.

        A single polynomial is a Groebner basis of its ideal, so the remainder
        vanishes exactly when ``divisor`` divides ``self``.
        """
        self.reg.check(divisor.reg)
        if not divisor.terms:
            raise ZeroDivisionError("polynomial division by zero")
        lt_e, lt_c = divisor.leading()
        rest = [(e, c) for e, c in divisor.terms.items() if e != lt_e]
        work = dict(self.terms)
        heap = [(-sum(e), tuple(-x for x in e)) for e in work]
        heapq.heapify(heap)
        quot: dict[Exps, Coeff] = {}
        rem: dict[Exps, Coeff] = {}
        while heap:
            _, ne = heapq.heappop(heap)
            e = tuple(-x for x in ne)
            c = work.pop(e, 0)
            if not c:
                continue
            if all(a >= b for a, b in zip(e, lt_e)):
                qe = tuple(a - b for a, b in zip(e, lt_e))
                qc = Fraction(c) / lt_c
                quot[qe] = _norm(qc)
                for re_, rc in rest:
                    te = tuple(a + b for a, b in zip(qe, re_))
                    if te not in work:
                        heapq.heappush(heap, (-sum(te), tuple(-x for x in te)))
                        work[te] = 0
                    work[te] = _norm(work[te] - qc * rc)
            else:
                rem[e] = c
        return Polynomial(self.reg, quot, _trusted=True), Polynomial(self.reg, rem, _trusted=True)

    def exact_div(self, divisor: "Polynomial") -> "Polynomial | None":
        """Quotient if ``divisor`` divides ``self`` exactly, else ``None``."""
        if not self.terms:
            return self
        # cheap rejections: degree per variable
        for i in divisor.support():
            if divisor.degree_in(i) > self.degree_in(i):
                return None
        q, r = self.divmod(divisor)
        return q if r.is_zero() else None

    # substitution -----------------------------------------------------------
    def shift(self, v: tuple[int, ...]) -> "Polynomial":
        """Substitute ``q_k -> q_k + v_k * mu`` for every dynamical coordinate."""
        reg = self.reg
        if len(v) != reg.n:
            raise ValueError(f"shift vector {v} has length {len(v)}, registry has n={reg.n}")
        if not any(v) or not self.terms:
            return self
        m = reg.mu_index
        active = [(k, vk) for k, vk in enumerate(v) if vk]
        out: dict[Exps, Coeff] = {}
        for e, c in self.terms.items():
            partial = [(list(e), c)]
            for k, vk in active:
                ek = e[k]
                if not ek:
                    continue
                nxt = []
                for pe, pc in partial:
                    for j in range(ek + 1):
                        ne = list(pe)
                        ne[k] = ek - j
                        ne[m] += j
                        nxt.append((ne, pc * comb(ek, j) * vk ** j))
                partial = nxt
            for pe, pc in partial:
                t = tuple(pe)
                out[t] = out.get(t, 0) + pc
        return Polynomial(reg, {e: _norm(c) for e, c in out.items() if c}, _trusted=True)

    def substitute(self, mapping: Mapping[str, "Polynomial"], target: VariableRegistry | None = None) -> "Polynomial":
        """Simultaneous substitution of variables by polynomials.

        Variables not in ``mapping`` are carried over by name into ``target``
        (default: the same registry); every image must live in ``target``.
        """
        target = target or self.reg
        idx_map = {self.reg.index(k): v for k, v in mapping.items()}
        for v in idx_map.values():
            target.check(v.reg)
        carry = {}
        for i, nm in enumerate(self.reg.names):
            if i not in idx_map:
                carry[i] = target.index(nm)
        cache: dict[tuple[int, int], Polynomial] = {}

        def power(i: int, k: int) -> Polynomial:
            key = (i, k)
            if key not in cache:
                cache[key] = idx_map[i] ** k
            return cache[key]

        result = Polynomial(target)
        for e, c in self.terms.items():
            base = [0] * target.nvars
            for i, k in enumerate(e):
                if k and i in carry:
                    base[carry[i]] += k
            term = Polynomial(target, {tuple(base): c}, _trusted=True)
            for i, k in enumerate(e):
                if k and i in idx_map:
                    term = term * power(i, k)
            result = result + term
        return result

    def derivative(self, idx: int) -> "Polynomial":
        out = {}
        for e, c in self.terms.items():
            k = e[idx]
            if k:
                ne = list(e)
                ne[idx] = k - 1
                out[tuple(ne)] = c * k
        return Polynomial(self.reg, out, _trusted=True)

    def coefficients_in(self, idx: int) -> dict[int, "Polynomial"]:
        """Split as ``sum_k c_k * x_idx^k``; the ``c_k`` are free of ``x_idx``."""
        parts: dict[int, dict[Exps, Coeff]] = {}
        for e, c in self.terms.items():
            k = e[idx]
            ne = e[:idx] + (0,) + e[idx + 1:]
            parts.setdefault(k, {})[ne] = c
        return {k: Polynomial(self.reg, t, _trusted=True) for k, t in parts.items()}

    # evaluation -------------------------------------------------------------
    def evaluate(self, point: tuple) -> Fraction:
        total = Fraction(0)
        for e, c in self.terms.items():
            t = Fraction(c)
            for x, k in zip(point, e):
                if k:
                    t *= x ** k
            total += t
        return total

    def evaluate_mod(self, point: tuple[int, ...], p: int) -> int:
        total = 0
        for e, c in self.terms.items():
            if isinstance(c, Fraction):
                t = c.numerator * pow(c.denominator, -1, p)
            else:
                t = c
            for x, k in zip(point, e):
                if k:
                    t = t * pow(x, k, p)
            total = (total + t) % p
        return total % p

    # printing -----------------------------------------------------------------
    def to_text(self) -> str:
        from .textfmt import format_polynomial

        return format_polynomial(self)

    def __repr__(self):
        return f"Polynomial({self.to_text()})"


def poly_sum(reg: VariableRegistry, polys: Iterable[Polynomial]) -> Polynomial:
    out: dict[Exps, Coeff] = {}
    for p in polys:
        for e, c in p.terms.items():
            out[e] = out.get(e, 0) + c
    return Polynomial(reg, {e: _norm(c) for e, c in out.items() if c}, _trusted=True)
