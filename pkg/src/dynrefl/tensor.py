"""Weight-basis tensor calculus on ordered legs.

Indices are 1-based: basis vector ``i`` of any leg carries the Cartan weight
``e_i`` (the i-th unit vector of the dynamical coordinates).  A matrix entry
is keyed by ``(row, col)`` multi-indices, one slot per leg in leg order.
Coefficients are RationalFunctions or ShiftOperators; both support ``+``,
``*``, ``is_zero`` and ``shift`` so most operations are coefficient-agnostic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from .exactfield import RationalFunction, VariableRegistry, parse_rational, rf_sum

ROLES = ("auxiliary", "quantum")

Index = tuple[int, ...]


class LegError(ValueError):
    """Unknown, duplicated or mismatched legs."""


class ShiftNotDefined(ValueError):
    """A dynamical shift targets a leg on which the matrix acts non-trivially."""


class SingularMatrixError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class Leg:
    id: str
    dim: int
    role: str = "auxiliary"
    spectral: Optional[str] = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise LegError(f"leg role must be one of {ROLES}, got {self.role!r}")
        if self.dim < 1:
            raise LegError("leg dimension must be positive")

    def renamed(self, new_id: str) -> "Leg":
        return Leg(new_id, self.dim, self.role, self.spectral)


def legs_of(n: int, ids: Iterable[str], role: str = "auxiliary") -> tuple[Leg, ...]:
    return tuple(Leg(str(i), n, role) for i in ids)


@dataclass(frozen=True)
class ShiftSpec:
    """``q -> q + sign * multiplicity * h^(target)`` in the notation ``K(q + h^(a))``."""

    target: str
    sign: int = 1
    multiplicity: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("shift sign must be +1 or -1")
        if self.multiplicity < 1:
            raise ValueError("shift multiplicity must be >= 1")

    @property
    def amount(self) -> int:
        return self.sign * self.multiplicity


def _sum(reg, items: list):
    if not items:
        return None
    if all(isinstance(x, RationalFunction) for x in items):
        return rf_sum(reg, items)
    from .shiftops import ShiftOperator, op_sum

    return op_sum(reg, [ShiftOperator.lift(x) for x in items])


def _is_zero(c) -> bool:
    return c is None or c.is_zero()


class TensorMatrix:
    """Sparse matrix on an ordered tuple of legs."""

    __slots__ = ("reg", "legs", "entries", "tag", "_pos")

    def __init__(self, reg: VariableRegistry, legs: Sequence[Leg], entries: Mapping[tuple[Index, Index], object], tag: str | None = None):
        self.reg = reg
        self.legs = tuple(legs)
        ids = [l.id for l in self.legs]
        if len(set(ids)) != len(ids):
            raise LegError(f"duplicate leg ids {ids}")
        for l in self.legs:
            if l.dim != reg.n:
                raise LegError(f"leg {l.id} has dim {l.dim}, registry has n={reg.n}")
        self._pos = {l.id: k for k, l in enumerate(self.legs)}
        clean = {}
        nl = len(self.legs)
        for (r, c), v in entries.items():
            if len(r) != nl or len(c) != nl:
                raise LegError(f"multi-index length mismatch for legs {ids}: {r},{c}")
            if not _is_zero(v):
                clean[(tuple(r), tuple(c))] = v
        self.entries = clean
        self.tag = tag

    # constructors -------------------------------------------------------------
    @classmethod
    def identity(cls, reg: VariableRegistry, legs: Sequence[Leg], tag: str | None = None) -> "TensorMatrix":
        one = RationalFunction.one(reg)
        ents = {}
        for idx in itertools.product(range(1, reg.n + 1), repeat=len(legs)):
            ents[(idx, idx)] = one
        return cls(reg, legs, ents, tag)

    @classmethod
    def zero(cls, reg: VariableRegistry, legs: Sequence[Leg]) -> "TensorMatrix":
        return cls(reg, legs, {})

    @classmethod
    def unit(cls, reg, legs, row: Index, col: Index, coeff=None) -> "TensorMatrix":
        return cls(reg, legs, {(tuple(row), tuple(col)): coeff if coeff is not None else RationalFunction.one(reg)})

    # basic access -------------------------------------------------------------
    @property
    def leg_ids(self) -> tuple[str, ...]:
        return tuple(l.id for l in self.legs)

    def position(self, leg_id: str) -> int:
        try:
            return self._pos[leg_id]
        except KeyError:
            raise LegError(f"unknown leg {leg_id!r}; matrix has legs {self.leg_ids}") from None

    def leg(self, leg_id: str) -> Leg:
        return self.legs[self.position(leg_id)]

    def get(self, row: Index, col: Index):
        v = self.entries.get((tuple(row), tuple(col)))
        return v if v is not None else RationalFunction.zero(self.reg)

    def nnz(self) -> int:
        return len(self.entries)

    def is_operator_valued(self) -> bool:
        return any(not isinstance(v, RationalFunction) for v in self.entries.values())

    def with_tag(self, tag: str | None) -> "TensorMatrix":
        return TensorMatrix(self.reg, self.legs, self.entries, tag)

    def map_entries(self, fn: Callable) -> "TensorMatrix":
        return TensorMatrix(self.reg, self.legs, {k: fn(v) for k, v in self.entries.items()}, self.tag)

    def _same_legs(self, other: "TensorMatrix") -> "TensorMatrix":
        self.reg.check(other.reg)
        if other.leg_ids == self.leg_ids:
            return other
        if set(other.leg_ids) == set(self.leg_ids):
            return other.reorder(self.leg_ids)
        raise LegError(f"leg mismatch: {self.leg_ids} vs {other.leg_ids}")

    # linear structure ---------------------------------------------------------
    def __add__(self, other: "TensorMatrix") -> "TensorMatrix":
        other = self._same_legs(other)
        keys = set(self.entries) | set(other.entries)
        out = {}
        for k in keys:
            items = [x for x in (self.entries.get(k), other.entries.get(k)) if x is not None]
            out[k] = _sum(self.reg, items)
        return TensorMatrix(self.reg, self.legs, out)

    def __neg__(self):
        return self.map_entries(lambda v: -v)

    def __sub__(self, other: "TensorMatrix") -> "TensorMatrix":
        return self + (-other)

    def scale(self, c) -> "TensorMatrix":
        """Left multiplication of every entry by a scalar or rational function."""
        return self.map_entries(lambda v: c * v)

    def __matmul__(self, other: "TensorMatrix") -> "TensorMatrix":
        return matmul(self, other)

    def equals(self, other: "TensorMatrix") -> bool:
        return self.first_difference(other) is None

    def first_difference(self, other: "TensorMatrix"):
        """First ``(row, col, residual)`` where the matrices differ, in sorted order."""
        other = self._same_legs(other)
        for k in sorted(set(self.entries) | set(other.entries)):
            a = self.entries.get(k)
            b = other.entries.get(k)
            if a is None:
                d = -b
            elif b is None:
                d = a
            else:
                d = a - b
            if not d.is_zero():
                return k[0], k[1], d
        return None

    # leg manipulation ---------------------------------------------------------
    def reorder(self, order: Sequence[str]) -> "TensorMatrix":
        order = tuple(order)
        if sorted(order) != sorted(self.leg_ids):
            raise LegError(f"reorder {order} is not a permutation of {self.leg_ids}")
        perm = [self.position(i) for i in order]
        ents = {(tuple(r[p] for p in perm), tuple(c[p] for p in perm)): v for (r, c), v in self.entries.items()}
        return TensorMatrix(self.reg, [self.legs[p] for p in perm], ents, self.tag)

    def relabel(self, mapping: Mapping[str, str]) -> "TensorMatrix":
        """Rename legs; entries are untouched (leg order is kept)."""
        for k in mapping:
            self.position(k)
        legs = [l.renamed(mapping.get(l.id, l.id)) for l in self.legs]
        return TensorMatrix(self.reg, legs, self.entries, self.tag)

    def embed(self, ambient: Sequence[Leg]) -> "TensorMatrix":
        return embed(self, ambient)

    def acts_trivially_on(self, leg_id: str) -> bool:
        p = self.position(leg_id)
        if any(r[p] != c[p] for (r, c) in self.entries):
            return False
        # the entries must also be independent of the index on that leg
        blocks: dict = {}
        for (r, c), v in self.entries.items():
            key = (r[:p] + r[p + 1:], c[:p] + c[p + 1:])
            blocks.setdefault(key, []).append((r[p], v))
        n = self.reg.n
        for key, vals in blocks.items():
            if len(vals) != n:
                return False
            first = vals[0][1]
            if any(not (v - first).is_zero() for _, v in vals[1:]):
                return False
        return True

    def drop_leg(self, leg_id: str) -> "TensorMatrix":
        """Remove a leg on which the matrix is the identity."""
        if not self.acts_trivially_on(leg_id):
            raise LegError(f"matrix acts non-trivially on leg {leg_id}")
        p = self.position(leg_id)
        ents = {}
        for (r, c), v in self.entries.items():
            if r[p] == 1:
                ents[(r[:p] + r[p + 1:], c[:p] + c[p + 1:])] = v
        return TensorMatrix(self.reg, self.legs[:p] + self.legs[p + 1:], ents, self.tag)

    # shifts ----------------------------------------------------------------------
    def shift_constant(self, v: Sequence[int]) -> "TensorMatrix":
        """Shift every coefficient by the same lattice vector (in units of mu)."""
        v = tuple(v)
        if not any(v):
            return self
        return self.map_entries(lambda c: c.shift(v))

    def dynamical_shift(self, specs: Union[ShiftSpec, Sequence[ShiftSpec]]) -> "TensorMatrix":
        return dynamical_shift(self, specs)

    def slsc_shift(self, leg_id: str, kind: str, sign: int = 1) -> "TensorMatrix":
        return slsc_shift(self, leg_id, kind, sign)

    def transpose(self, legs: Iterable[str]) -> "TensorMatrix":
        return partial_transpose(self, legs)

    def trace_over(self, leg_id: str) -> "TensorMatrix":
        return partial_trace(self, leg_id)

    # evaluation -----------------------------------------------------------------
    def evaluate_mod(self, pt: tuple[int, ...], p: int) -> dict:
        return {k: v.evaluate_mod(pt, p) for k, v in self.entries.items()}

    # serialization ----------------------------------------------------------------
    def to_json(self) -> dict:
        ents = []
        for (r, c) in sorted(self.entries):
            v = self.entries[(r, c)]
            if isinstance(v, RationalFunction):
                coeff = v.to_text()
            else:
                coeff = {"shifts": v.to_json()}
            ents.append({"row": list(r), "col": list(c), "coeff": coeff})
        return {
            "legs": [{"id": l.id, "dim": l.dim, "role": l.role} for l in self.legs],
            "entries": ents,
        }

    @classmethod
    def from_json(cls, data: dict, reg: VariableRegistry) -> "TensorMatrix":
        legs = [Leg(str(d["id"]), int(d["dim"]), d.get("role", "auxiliary")) for d in data["legs"]]
        ents = {}
        for e in data["entries"]:
            coeff = e["coeff"]
            if isinstance(coeff, str):
                v = parse_rational(coeff, reg)
            else:
                from .shiftops import ShiftOperator

                v = ShiftOperator.from_json(coeff["shifts"], reg)
            ents[(tuple(e["row"]), tuple(e["col"]))] = v
        return cls(reg, legs, ents)

    def __repr__(self):
        return f"TensorMatrix(legs={self.leg_ids}, nnz={self.nnz()}, tag={self.tag!r})"


# -------------------------------------------------------------------------------------
# free functions


def embed(M: TensorMatrix, ambient: Sequence[Leg]) -> TensorMatrix:
    """Extend ``M`` by the identity on every ambient leg it does not carry."""
    ambient = tuple(ambient)
    amb_ids = [l.id for l in ambient]
    for lid in M.leg_ids:
        if lid not in amb_ids:
            raise LegError(f"leg {lid!r} of the matrix is not in the ambient legs {amb_ids}")
    if tuple(amb_ids) == M.leg_ids:
        return M
    pos = [M._pos.get(i) for i in amb_ids]
    new_slots = [k for k, p in enumerate(pos) if p is None]
    n = M.reg.n
    ents = {}
    for (r, c), v in M.entries.items():
        for extra in itertools.product(range(1, n + 1), repeat=len(new_slots)):
            fill = dict(zip(new_slots, extra))
            row = tuple(r[p] if p is not None else fill[k] for k, p in enumerate(pos))
            col = tuple(c[p] if p is not None else fill[k] for k, p in enumerate(pos))
            ents[(row, col)] = v
    return TensorMatrix(M.reg, ambient, ents, M.tag)


def matmul(M: TensorMatrix, N: TensorMatrix) -> TensorMatrix:
    N = M._same_legs(N)
    by_row: dict[Index, list] = {}
    for (r, c), v in N.entries.items():
        by_row.setdefault(r, []).append((c, v))
    acc: dict[tuple[Index, Index], list] = {}
    for (r, k), a in M.entries.items():
        for c, b in by_row.get(k, ()):
            acc.setdefault((r, c), []).append(a * b)
    out = {key: _sum(M.reg, items) for key, items in acc.items()}
    return TensorMatrix(M.reg, M.legs, out)


def matmul_chain(mats: Sequence[TensorMatrix]) -> TensorMatrix:
    out = mats[0]
    for m in mats[1:]:
        out = matmul(out, m)
    return out


def _shift_vector_for(M: TensorMatrix, specs: Sequence[ShiftSpec], idx: Index) -> tuple[int, ...]:
    v = [0] * M.reg.n
    for s in specs:
        v[idx[M.position(s.target)] - 1] += s.amount
    return tuple(v)


def dynamical_shift(M: TensorMatrix, specs: Union[ShiftSpec, Sequence[ShiftSpec]]) -> TensorMatrix:
    """``M(q + sum_a sign_a * h^(a))`` for identity-acting target legs ``a``."""
    if isinstance(specs, ShiftSpec):
        specs = [specs]
    specs = list(specs)
    for s in specs:
        p = M.position(s.target)
        for (r, c) in M.entries:
            if r[p] != c[p]:
                raise ShiftNotDefined(
                    f"cannot shift by h^({s.target}): matrix acts non-trivially on leg {s.target} "
                    f"(entry row {r}, col {c})"
                )
    if not specs:
        return M
    ents = {}
    for (r, c), v in M.entries.items():
        vec = _shift_vector_for(M, specs, r)
        ents[(r, c)] = v.shift(vec) if any(vec) else v
    return TensorMatrix(M.reg, M.legs, ents, M.tag)


def slsc_shift(M: TensorMatrix, leg_id: str, kind: str, sign: int = 1) -> TensorMatrix:
    """Shift entry ``(i, j)`` on ``leg_id`` by ``sign*mu*e_i`` (sl) or ``sign*mu*e_j`` (sc)."""
    if kind not in ("sl", "sc"):
        raise ValueError(f"kind must be 'sl' or 'sc', got {kind!r}")
    p = M.position(leg_id)
    n = M.reg.n
    ents = {}
    for (r, c), v in M.entries.items():
        k = r[p] if kind == "sl" else c[p]
        vec = [0] * n
        vec[k - 1] = sign
        ents[(r, c)] = v.shift(tuple(vec))
    return TensorMatrix(M.reg, M.legs, ents, M.tag)


def partial_transpose(M: TensorMatrix, legs: Iterable[str]) -> TensorMatrix:
    ps = {M.position(l) for l in legs}
    ents = {}
    for (r, c), v in M.entries.items():
        nr = tuple(c[k] if k in ps else r[k] for k in range(len(r)))
        nc = tuple(r[k] if k in ps else c[k] for k in range(len(r)))
        ents[(nr, nc)] = v
    return TensorMatrix(M.reg, M.legs, ents, M.tag)


def partial_trace(M: TensorMatrix, leg_id: str):
    """Trace over one leg; returns the bare coefficient if it was the last leg."""
    p = M.position(leg_id)
    acc: dict = {}
    for (r, c), v in M.entries.items():
        if r[p] != c[p]:
            continue
        acc.setdefault((r[:p] + r[p + 1:], c[:p] + c[p + 1:]), []).append(v)
    legs = M.legs[:p] + M.legs[p + 1:]
    if not legs:
        total = _sum(M.reg, acc.get(((), ()), []))
        return total if total is not None else RationalFunction.zero(M.reg)
    return TensorMatrix(M.reg, legs, {k: _sum(M.reg, v) for k, v in acc.items()})


def permutation_matrix(reg: VariableRegistry, leg_a: Leg, leg_b: Leg, ambient: Sequence[Leg] | None = None) -> TensorMatrix:
    """``P = sum_ij E_ij (x) E_ji`` on legs ``a, b``, embedded in ``ambient``."""
    if leg_a.dim != leg_b.dim:
        raise LegError(f"dimension mismatch between legs {leg_a.id} and {leg_b.id}")
    one = RationalFunction.one(reg)
    n = reg.n
    ents = {((i, j), (j, i)): one for i in range(1, n + 1) for j in range(1, n + 1)}
    P = TensorMatrix(reg, (leg_a, leg_b), ents, "P")
    return embed(P, ambient) if ambient is not None else P


def swap_legs(M: TensorMatrix, a: str, b: str) -> TensorMatrix:
    """``P_ab M P_ab`` computed by relabeling (``M_12 -> M_21``)."""
    return M.relabel({a: b, b: a}).reorder(M.leg_ids)


def zero_weight_violations(M: TensorMatrix, weights: Mapping[str, int]) -> list[tuple[Index, Index, tuple[int, ...]]]:
    n = M.reg.n
    pos = {M.position(l): w for l, w in weights.items()}
    bad = []
    for (r, c) in sorted(M.entries):
        vec = [0] * n
        for p, w in pos.items():
            vec[r[p] - 1] += w
            vec[c[p] - 1] -= w
        if any(vec):
            bad.append((r, c, tuple(vec)))
    return bad


def zero_weight_check(M: TensorMatrix, weights: Mapping[str, int]):
    """Check ``[sum_a w_a h^(a), M] = 0`` entry by entry."""
    from .checks import VerificationReport

    bad = zero_weight_violations(M, weights)
    wt = ",".join(f"{k}:{v}" for k, v in weights.items())
    if not bad:
        return VerificationReport(f"zero-weight[{wt}]", "zerow", "exact", None, True, None)
    r, c, vec = bad[0]
    return VerificationReport(
        f"zero-weight[{wt}]", "zerow", "exact", None, False,
        {"row": list(r), "col": list(c), "residual": f"weight imbalance {list(vec)}"},
    )


def tilde_matrix(M: TensorMatrix, legs: tuple[str, str] | None = None) -> TensorMatrix:
    """The c-number matrix obtained by pushing the Cartan shifts through ``M``.

    ``exp(h1 d) M exp(-h2 d) = exp(-h2 d) Mt exp(h1 d)`` forces each entry of
    ``Mt`` to be the entry of ``M`` shifted by the weights of both row
    indices, i.e. ``Mt = M^{sl1,sl2}`` (equal to ``M^{sc1,sc2}`` by zero
    weight).
    """
    a, b = legs or M.leg_ids[:2]
    if zero_weight_violations(M, {a: 1, b: 1}):
        raise ValueError("tilde_matrix needs a matrix of zero weight for h1 + h2")
    return slsc_shift(slsc_shift(M, a, "sl"), b, "sl")


def inverse(M: TensorMatrix) -> TensorMatrix:
    """Exact inverse of a rational-function valued matrix (Gauss-Jordan over Q(q, mu))."""
    if M.is_operator_valued():
        raise TypeError("inverse is only available for rational-function entries")
    reg = M.reg
    idxs = list(itertools.product(range(1, reg.n + 1), repeat=len(M.legs)))
    rows: dict[Index, dict[Index, RationalFunction]] = {i: {} for i in idxs}
    inv: dict[Index, dict[Index, RationalFunction]] = {i: {i: RationalFunction.one(reg)} for i in idxs}
    for (r, c), v in M.entries.items():
        rows[r][c] = v
    free = list(idxs)
    pivot_of: dict[Index, Index] = {}
    for col in idxs:
        piv = next((r for r in free if col in rows[r]), None)
        if piv is None:
            raise SingularMatrixError(f"matrix is singular (no pivot in column {col})")
        free.remove(piv)
        pivot_of[col] = piv
        scale = rows[piv][col].inverse()
        rows[piv] = {k: v * scale for k, v in rows[piv].items()}
        inv[piv] = {k: v * scale for k, v in inv[piv].items()}
        for r in idxs:
            if r == piv or col not in rows[r]:
                continue
            f = rows[r][col]
            for src, dst in ((rows[piv], rows[r]), (inv[piv], inv[r])):
                for k, v in src.items():
                    nv = dst.get(k, RationalFunction.zero(reg)) - f * v
                    if nv.is_zero():
                        dst.pop(k, None)
                    else:
                        dst[k] = nv
    ents = {}
    for col, piv in pivot_of.items():
        for k, v in inv[piv].items():
            ents[(col, k)] = v
    return TensorMatrix(reg, M.legs, ents)


def block_diagonal_inverse(M: TensorMatrix) -> TensorMatrix:
    """Inverse of a diagonal matrix, entry by entry."""
    for (r, c) in M.entries:
        if r != c:
            return inverse(M)
    n_full = M.reg.n ** len(M.legs)
    if len(M.entries) != n_full:
        raise SingularMatrixError("diagonal matrix has a zero diagonal entry")
    return M.map_entries(lambda v: v.inverse())
