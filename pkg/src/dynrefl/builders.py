"""Constructions: B, C, D from A, dual matrices, Lax-type objects, fusion and dressing.

Every builder returns plain :class:`TensorMatrix` values.  With
``strict=True`` the premises and postconditions are re-verified through the
checks module and a :class:`BuildError` carrying the failing report is raised
on any violation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .checks import (
    NEW,
    AlgebraSignature,
    Term,
    VerificationReport,
    check_coaction,
    check_dressing,
    check_dYBE,
    check_products,
    check_reflection,
    check_RLL,
    check_unitarity,
    check_zero_weight,
    exchange_sides,
    on,
    on_K,
    product,
    shifted,
    term,
)
from .exactfield import Polynomial
from .tensor import (
    Leg,
    TensorMatrix,
    embed,
    inverse,
    matmul,
    partial_transpose,
    permutation_matrix,
    slsc_shift,
    swap_legs,
)


class BuildError(ValueError):
    def __init__(self, message: str, report: VerificationReport | None = None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SpectralMap:
    """Affine map ``z -> s z + c`` on spectral variables, or absent."""

    s: Fraction = Fraction(1)
    c: Fraction = Fraction(0)
    present: bool = True

    def __post_init__(self):
        if self.present and self.s == 0:
            raise ValueError("spectral map must be invertible (s != 0)")

    @classmethod
    def absent(cls) -> "SpectralMap":
        return cls(Fraction(1), Fraction(0), False)

    @classmethod
    def negation(cls) -> "SpectralMap":
        return cls(Fraction(-1), Fraction(0))

    def apply(self, M: TensorMatrix, legs: Sequence[str]) -> TensorMatrix:
        """Substitute ``z -> f(z)`` for the spectral variables carried by ``legs``."""
        if not self.present:
            return M
        reg = M.reg
        mapping = {}
        for lid in legs:
            z = M.leg(lid).spectral
            if z is None:
                continue
            zp = Polynomial.var(reg, z)
            mapping[z] = zp.scale(self.s) + Polynomial.const(reg, self.c)
        if not mapping:
            return M
        return M.map_entries(lambda v: v.substitute(mapping))


ABSENT = SpectralMap.absent()


@dataclass
class ABCDQuadruple:
    A: TensorMatrix
    B: TensorMatrix
    C: TensorMatrix
    D: TensorMatrix
    sig: AlgebraSignature = NEW
    name: str = "quadruple"

    def __post_init__(self):
        legs = self.A.leg_ids
        for X in (self.B, self.C, self.D):
            if X.leg_ids != legs:
                raise ValueError(f"structure matrices must share the leg template {legs}, got {X.leg_ids}")
            self.A.reg.check(X.reg)

    @property
    def reg(self):
        return self.A.reg

    def items(self):
        return (("A", self.A), ("B", self.B), ("C", self.C), ("D", self.D))

    def to_json(self) -> dict:
        return {"name": self.name, "signature": [self.sig.eps_R, self.sig.eps_L],
                **{k: v.to_json() for k, v in self.items()}}

    @classmethod
    def trivial(cls, reg, sig: AlgebraSignature = NEW) -> "ABCDQuadruple":
        legs = (Leg("1", reg.n), Leg("2", reg.n))
        I = TensorMatrix.identity(reg, legs)
        return cls(I, I, I, I, sig, "identity")


def _require(report: VerificationReport, what: str):
    if not report.passed:
        raise BuildError(f"{what}: {report.identity} failed at {report.witness}", report)


def certify_quadruple(q: ABCDQuadruple, mode: str = "exact", seed: int = 0) -> list[VerificationReport]:
    reps = [check_unitarity(q, mode, seed), check_zero_weight(q, q.sig)]
    reps += [check_dYBE(q, v, q.sig, mode, seed) for v in "abcd"]
    return reps


# ------------------------------------------------------------------------------------
# B, C, D from A


def build_BCD_from_A(A: TensorMatrix, f: SpectralMap = ABSENT, strict: bool = False) -> ABCDQuadruple:
    """The quadruple generated by a unitary zero-weight solution of the first dYBE."""
    if A.leg_ids != ("1", "2"):
        A = on(A, "1", "2")
    if strict:
        I = TensorMatrix.identity(A.reg, A.legs)
        _require(check_products("A12A21=I", [term(A), term(on(A, "2", "1"))], [term(I)], A.legs), "precondition")
        _require(check_dYBE(ABCDQuadruple(A, A, A, A), "a", NEW), "precondition")
    A21 = swap_legs(A, "1", "2")
    D = slsc_shift(slsc_shift(f.apply(partial_transpose(A21, ["1", "2"]), ["1", "2"]), "1", "sl"), "2", "sl")
    C = slsc_shift(f.apply(partial_transpose(A21, ["2"]), ["2"]), "2", "sc")
    B = slsc_shift(f.apply(partial_transpose(A, ["1"]), ["1"]), "1", "sc")
    if not B.equals(swap_legs(C, "1", "2")):
        raise BuildError("postcondition B12 = C21 failed")
    q = ABCDQuadruple(A.with_tag("A"), B.with_tag("B"), C.with_tag("C"), D.with_tag("D"), NEW, "from-A")
    if strict:
        for r in certify_quadruple(q):
            _require(r, "postcondition")
    return q


def compare_quadruples(q1: ABCDQuadruple, q2: ABCDQuadruple) -> dict[str, Optional[dict]]:
    """Entrywise comparison; ``None`` for equal matrices, otherwise the first difference."""
    out = {}
    for (k, X), (_, Y) in zip(q1.items(), q2.items()):
        d = X.first_difference(Y)
        out[k] = None if d is None else {"row": list(d[0]), "col": list(d[1]), "residual": d[2].to_text()}
    return out


# ------------------------------------------------------------------------------------
# dual quadruple


def build_dual_ABCD(q: ABCDQuadruple, strict: bool = False) -> ABCDQuadruple:
    A, B, C, D = q.A, q.B, q.C, q.D
    At = partial_transpose(inverse(A), ["1", "2"])
    Bt = partial_transpose(inverse(partial_transpose(B, ["2"])), ["1"])
    Ct = partial_transpose(inverse(partial_transpose(C, ["1"])), ["2"])
    Dt = inverse(partial_transpose(D, ["1", "2"]))
    dual = ABCDQuadruple(At.with_tag("A~"), Bt.with_tag("B~"), Ct.with_tag("C~"), Dt.with_tag("D~"), q.sig, "dual")
    if strict:
        _require(check_products("C~12=B~21", [term(dual.C)], [term(on(dual.B, "2", "1"))], dual.A.legs), "postcondition")
    return dual


def dual_structure_reports(dual: ABCDQuadruple, f: SpectralMap = ABSENT) -> list[VerificationReport]:
    """Do the tilde matrices obey the same inter-relations as a quadruple built from its A?"""
    A = dual.A
    rebuilt = build_BCD_from_A(A, f)
    reps = [check_products("C~12=B~21", [term(dual.C)], [term(on(dual.B, "2", "1"))], A.legs, anchor="theo:dual")]
    for k in ("D", "C", "B"):
        reps.append(check_products(f"{k}~ from A~", [term(getattr(dual, k))], [term(getattr(rebuilt, k))], A.legs,
                                   anchor="dynKdual"))
    return reps


# ------------------------------------------------------------------------------------
# Lax matrices and K matrices


def build_transposed_lax(T: TensorMatrix, f: SpectralMap = ABSENT, strict: bool = False,
                         A: TensorMatrix | None = None) -> TensorMatrix:
    """``(T^t(f(z)))^sc`` with transposition and shift on the auxiliary leg only."""
    aux = T.leg_ids[0]
    if strict and A is not None:
        _require(check_RLL(T, A), "precondition")
    return slsc_shift(f.apply(partial_transpose(T, [aux]), [aux]), aux, "sc").with_tag("calT")


def build_K_from_T_gamma(T: TensorMatrix, gamma: TensorMatrix, f: SpectralMap = ABSENT,
                         gamma_shift: int = -1, quad: ABCDQuadruple | None = None,
                         strict: bool = False) -> TensorMatrix:
    """``K = T gamma(q + gamma_shift * h^(q)) calT``.

    The default shift ``-1`` is the sign for which the product realizes the
    exchange algebra for every admissible gamma; ``+1`` is kept to reproduce
    the alternative reading.
    """
    aux = T.leg_ids[0]
    qlegs = T.leg_ids[1:]
    calT = build_transposed_lax(T, f)
    g = embed(on(gamma, aux), T.legs)
    K = product([term(T), shifted(g, qlegs, gamma_shift), term(calT)], T.legs).with_tag("K")
    if strict:
        if quad is None:
            raise BuildError("strict mode needs the quadruple to verify against")
        _require(check_reflection(gamma, quad), "gamma admission")
        _require(check_reflection(K, quad), "postcondition")
    return K


def coaction_dress(K: TensorMatrix, L: TensorMatrix, J: TensorMatrix, alpha: int,
                   quad: ABCDQuadruple | None = None, strict: bool = False) -> TensorMatrix:
    """``L(q) K(q + alpha h^(q)) J(q)`` where ``q`` labels the quantum legs of L and J."""
    aux = K.leg_ids[0]
    L = on(L, aux)
    J = on(J, aux)
    newq = L.leg_ids[1:]
    if J.leg_ids[1:] != newq:
        raise BuildError("L and J must carry the same quantum legs")
    clash = set(newq) & set(K.leg_ids[1:])
    if clash:
        raise BuildError(f"quantum legs {sorted(clash)} of the coaction already occur in K")
    if strict:
        if quad is None:
            raise BuildError("strict mode needs the quadruple to verify against")
        _require(check_coaction(L, J, quad, alpha), "premise")
    legs = tuple(K.legs) + tuple(L.legs[1:])
    out = product([term(L), shifted(K, newq, int(alpha)), term(J)], legs).with_tag("K~")
    if strict:
        _require(check_reflection(out, quad), "postcondition")
    return out


def quantum_copy(M: TensorMatrix, leg: str = "a", role: str = "quantum") -> TensorMatrix:
    """A two-leg matrix ``M_12`` viewed as ``M_{1 leg}`` with a quantum second leg."""
    l0, l1 = M.legs
    legs = (l0.renamed("1"), Leg(leg, l1.dim, role, l1.spectral))
    return TensorMatrix(M.reg, legs, M.entries, M.tag)


def monodromy(A: TensorMatrix, sites: int, strict: bool = False) -> TensorMatrix:
    """``prod_{i from sites down to 1} A_{1,a_i}(q - sum_{j>i} h^(a_j))``."""
    if sites < 1:
        raise ValueError("sites must be >= 1")
    qids = [f"a{i}" for i in range(1, sites + 1)]
    legs = (Leg("1", A.reg.n),) + tuple(Leg(a, A.reg.n, "quantum") for a in qids)
    factors = []
    for i in range(sites, 0, -1):
        Ai = quantum_copy(A, qids[i - 1])
        factors.append(shifted(Ai, qids[i:], -1))
    T = product(factors, legs).with_tag("T")
    if strict:
        _require(check_RLL(T, A), "postcondition")
    return T


def build_Kplus_crossing(K: TensorMatrix, eta: Fraction | int = 0, A: TensorMatrix | None = None,
                         strict: bool = False) -> TensorMatrix:
    """``((K^t(z + eta/2))^-1)^{-sc}`` on the auxiliary leg.

    With ``A`` given, the crossing hypothesis on ``A`` is checked first; this
    needs spectral variables on both legs of ``A``.
    """
    aux = K.leg_ids[0]
    if A is not None:
        rep = check_crossing(A, eta)
        if strict:
            _require(rep, "crossing hypothesis")
    Kz = SpectralMap(Fraction(1), Fraction(eta) / 2).apply(K, [aux]) if eta else K
    Kt = partial_transpose(Kz, [aux])
    return slsc_shift(inverse(Kt), aux, "sc", -1).with_tag("K+")


def check_crossing(A: TensorMatrix, eta) -> VerificationReport:
    """``(A^{t1}(z1, z2))^-1 = (A^-1(z1 + eta/2, z2 - eta/2))^{t2}``."""
    z1, z2 = A.leg("1").spectral, A.leg("2").spectral
    if z1 is None or z2 is None:
        raise BuildError("the crossing relation needs spectral variables on both legs")
    half = Fraction(eta) / 2
    lhs = inverse(partial_transpose(A, ["1"]))
    Ash = SpectralMap(Fraction(1), half).apply(A, ["1"])
    Ash = SpectralMap(Fraction(1), -half).apply(Ash, ["2"])
    rhs = partial_transpose(inverse(Ash), ["2"])
    return check_products("crossing", [term(lhs)], [term(rhs)], A.legs, anchor="crossing relation")


# ------------------------------------------------------------------------------------
# fusion


def _legs(reg, ids, quantum=()):
    return tuple(Leg(i, reg.n) for i in ids) + tuple(quantum)


def fused_left_matrices(q: ABCDQuadruple, x: str = "1", xp: str = "1p", y: str = "2") -> dict[str, TensorMatrix]:
    """Structure matrices for the composite leg ``<x xp>`` against ``y``."""
    amb = _legs(q.reg, (x, xp, y))
    A, B, C, D = q.A, q.B, q.C, q.D
    return {
        "A": product([shifted(on(A, xp, y), [x], -1), term(on(A, x, y))], amb),
        "D": product([term(on(D, xp, y)), shifted(on(D, x, y), [xp], 1)], amb),
        "B": product([term(on(B, xp, y)), shifted(on(B, x, y), [xp], 1)], amb),
        "C": product([shifted(on(C, xp, y), [x], -1), term(on(C, x, y))], amb),
    }


def fused_right_matrices(q: ABCDQuadruple, x: str = "1", y: str = "2", yp: str = "2p") -> dict[str, TensorMatrix]:
    """Structure matrices for ``x`` against the composite leg ``<y yp>``."""
    amb = _legs(q.reg, (x, y, yp))
    A, B, C, D = q.A, q.B, q.C, q.D
    return {
        "A": product([term(on(A, x, y)), shifted(on(A, x, yp), [y], -1)], amb),
        "D": product([shifted(on(D, x, y), [yp], 1), term(on(D, x, yp))], amb),
        "B": product([shifted(on(B, x, yp), [y], -1), term(on(B, x, y))], amb),
        "C": product([term(on(C, x, yp)), shifted(on(C, x, y), [yp], 1)], amb),
    }


def fused_K(K: TensorMatrix, Kp: TensorMatrix, q: ABCDQuadruple, first: str, second: str) -> TensorMatrix:
    """``K'_second(q - h^first) B_{second first} K_first(q + h^second)``."""
    if K.leg_ids[1:] != Kp.leg_ids[1:]:
        raise BuildError("fusion needs both K matrices on the same quantum space")
    legs = (Leg(first, q.reg.n), Leg(second, q.reg.n)) + tuple(K.legs[1:])
    return product([shifted(on_K(Kp, second), [first], -1), term(on(q.B, second, first)),
                    shifted(on_K(K, first), [second], 1)], legs).with_tag("K<>")


@dataclass
class FusionResult:
    K: TensorMatrix
    matrices: dict
    composite: tuple[str, str]
    single: str
    side: str

    def exchange_report(self, K_single: TensorMatrix, mode: str = "exact", seed: int = 0) -> VerificationReport:
        m = self.matrices
        Ks = on_K(K_single, self.single)
        X, Y = list(self.composite), [self.single]
        legs = tuple(m["A"].legs) + tuple(self.K.legs[2:])
        if self.side == "left":
            lhs, rhs = exchange_sides(self.K, Ks, X, Y, m["A"], m["B"], m["C"], m["D"])
            name = "fusion-left"
        else:
            lhs, rhs = exchange_sides(Ks, self.K, Y, X, m["A"], m["B"], m["C"], m["D"])
            name = "fusion-right"
        return check_products(name, lhs, rhs, legs, mode, seed, anchor="lem:fus" if self.side == "left" else "lem:fus2")


def fuse(K: TensorMatrix, Kp: TensorMatrix, q: ABCDQuadruple, side: str = "left",
         strict: bool = False) -> FusionResult:
    """Fuse ``K`` (old leg) and ``K'`` (added leg) into a composite-leg K matrix.

    The fused exchange partner is the original single-leg ``K``; see
    :meth:`FusionResult.exchange_report`.
    """
    if side == "left":
        res = FusionResult(fused_K(K, Kp, q, "1", "1p"), fused_left_matrices(q), ("1", "1p"), "2", "left")
    elif side == "right":
        res = FusionResult(fused_K(K, Kp, q, "2", "2p"), fused_right_matrices(q), ("2", "2p"), "1", "right")
    else:
        raise ValueError("side must be 'left' or 'right'")
    if strict:
        _require(res.exchange_report(K), "postcondition")
    return res


def fused_pair_matrices(q: ABCDQuadruple, x="1", xp="1p", y="2", yp="2p", order: str = "LR") -> dict[str, TensorMatrix]:
    """``X_{<x xp><y yp>}`` built by adding ``xp`` then ``yp`` (LR) or ``yp`` then ``xp`` (RL)."""
    amb = _legs(q.reg, ("1", "1p", "2", "2p"))
    A, B, C, D = q.A, q.B, q.C, q.D
    s = lambda M, a, b, *sh: Term(on(M, a, b), tuple(sh))
    if order == "LR":
        terms = {
            "A": [s(A, xp, y, (x, -1)), s(A, x, y), s(A, xp, yp, (x, -1), (y, -1)), s(A, x, yp, (y, -1))],
            "D": [s(D, xp, y, (yp, 1)), s(D, x, y, (xp, 1), (yp, 1)), s(D, xp, yp), s(D, x, yp, (xp, 1))],
            "B": [s(B, xp, yp, (y, -1)), s(B, x, yp, (xp, 1), (y, -1)), s(B, xp, y), s(B, x, y, (xp, 1))],
            "C": [s(C, xp, yp, (x, -1)), s(C, x, yp), s(C, xp, y, (x, -1), (yp, 1)), s(C, x, y, (yp, 1))],
        }
    elif order == "RL":
        terms = {
            "A": [s(A, xp, y, (x, -1)), s(A, xp, yp, (x, -1), (y, -1)), s(A, x, y), s(A, x, yp, (y, -1))],
            "D": [s(D, xp, y, (yp, 1)), s(D, xp, yp), s(D, x, y, (xp, 1), (yp, 1)), s(D, x, yp, (xp, 1))],
            "B": [s(B, xp, yp, (y, -1)), s(B, xp, y), s(B, x, yp, (xp, 1), (y, -1)), s(B, x, y, (xp, 1))],
            "C": [s(C, xp, yp, (x, -1)), s(C, xp, y, (x, -1), (yp, 1)), s(C, x, yp), s(C, x, y, (yp, 1))],
        }
    else:
        raise ValueError("order must be 'LR' or 'RL'")
    return {k: product(v, amb) for k, v in terms.items()}


def fused_order_reports(q: ABCDQuadruple) -> list[VerificationReport]:
    lr = fused_pair_matrices(q, order="LR")
    rl = fused_pair_matrices(q, order="RL")
    out = []
    for k in "ABCD":
        d = lr[k].first_difference(rl[k])
        out.append(VerificationReport(f"fused-order-{k}", "lem:fus/lem:fus2", "exact", None, d is None,
                                      None if d is None else {"row": list(d[0]), "col": list(d[1]), "residual": d[2].to_text()}))
    return out


def fused_unitarity_reports(q: ABCDQuadruple, order: str = "LR") -> list[VerificationReport]:
    fw = fused_pair_matrices(q, "1", "1p", "2", "2p", order)
    bw = fused_pair_matrices(q, "2", "2p", "1", "1p", order)
    I = TensorMatrix.identity(q.reg, fw["A"].legs)
    amb = fw["A"].legs
    return [
        check_products("fused A A21 = I", [term(fw["A"]), term(bw["A"])], [term(I)], amb, anchor="lem:fus2"),
        check_products("fused D D21 = I", [term(fw["D"]), term(bw["D"])], [term(I)], amb, anchor="lem:fus2"),
        check_products("fused C = B21", [term(fw["C"])], [term(bw["B"])], amb, anchor="lem:fus2"),
    ]


# ------------------------------------------------------------------------------------
# dressing


def fused_NM(q: ABCDQuadruple, N: Sequence[str], m: str) -> dict[str, TensorMatrix]:
    """``X_{N m}`` for a composite leg ``N`` built by repeated left fusion."""
    amb = _legs(q.reg, tuple(N) + (m,))
    out = {}
    for k, R in q.items():
        acc = embed(on(R, N[0], m), amb)
        for idx in range(1, len(N)):
            new = on(R, N[idx], m)
            prev = N[:idx]
            if k in "AC":
                acc = matmul(product([shifted(new, prev, -1)], amb), acc)
            else:
                acc = product([term(new), shifted(acc, [N[idx]], 1)], amb)
        out[k] = acc
    return out


def build_dressing_QS(q: ABCDQuadruple, spaces: int, q_shift: int = -1, m_legs: Sequence[str] = ("m",),
                      strict: bool = False):
    """Dressing operators on ``spaces`` auxiliary legs ``1..spaces``.

    ``Q = Ach_21 Ach_32(q + s h1) ... Ach_{n,n-1}(q + s(h1+..+h_{n-2}))`` with
    ``s = q_shift`` and ``S = Dch_21(q+h3+..+hn) ... Dch_{n,n-1}(q)``, where
    ``Rch = P R``.  Returns ``(Q, S)`` on the legs ``1..spaces``.
    """
    if spaces < 2:
        raise ValueError("spaces must be >= 2")
    reg = q.reg
    N = [str(i) for i in range(1, spaces + 1)]
    legs = _legs(reg, N)
    Qf, Sf = [], []
    for k in range(1, spaces):
        a, b = str(k + 1), str(k)
        P = permutation_matrix(reg, Leg(a, reg.n), Leg(b, reg.n))
        Ach = matmul(P, on(q.A, a, b))
        Dch = matmul(P, on(q.D, a, b))
        Qf.append(shifted(Ach, N[:k - 1], q_shift))
        Sf.append(shifted(Dch, N[k + 1:], 1))
    Q = product(Qf, legs).with_tag("Q")
    S = product(Sf, legs).with_tag("S")
    if strict:
        _require(dressing_report(q, Q, S, m_legs), "postcondition")
    return Q, S


def dressing_report(q: ABCDQuadruple, Q: TensorMatrix, S: TensorMatrix, m_legs: Sequence[str] = ("m",),
                    mode: str = "exact", seed: int = 0) -> VerificationReport:
    N = list(Q.leg_ids)
    if len(m_legs) != 1:
        raise ValueError("only a single M leg is supported")
    fused = fused_NM(q, N, m_legs[0])
    return check_dressing(Q, S, fused, N, list(m_legs), mode, seed)
