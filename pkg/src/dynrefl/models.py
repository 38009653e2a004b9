"""The rational sl(n) model: structure matrices, scalar K solutions, Hamiltonians, zero modes."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .builders import ABCDQuadruple, fused_K
from .checks import NEW, VerificationReport, check_commutator_zero
from .exactfield import Polynomial, RationalFunction, VariableRegistry, rf_sum
from .shiftops import ShiftOperator, exp_shift_matrix, lift_matrix, trace_over_leg
from .tensor import Leg, TensorMatrix, inverse, matmul

D_VARIANTS = ("corrected", "printed")


def _two_legs(reg):
    return (Leg("1", reg.n), Leg("2", reg.n))


def _frac(reg, i: int, j: int, plus_mu: bool) -> RationalFunction:
    """``mu / (q_i - q_j [+ mu])`` for 1-based i, j."""
    mu = Polynomial.var(reg, reg.mu)
    den = Polynomial.var(reg, reg.qnames[i - 1]) - Polynomial.var(reg, reg.qnames[j - 1])
    if plus_mu:
        den = den + mu
    return RationalFunction.from_poly(mu) / RationalFunction.from_poly(den)


def _assemble(reg, contributions) -> TensorMatrix:
    acc: dict = {}
    for key, v in contributions:
        acc.setdefault(key, []).append(v)
    return TensorMatrix(reg, _two_legs(reg), {k: rf_sum(reg, v) for k, v in acc.items()})


def _structure(reg, kind: str) -> TensorMatrix:
    n = reg.n
    one = RationalFunction.one(reg)
    terms = [(((i, j), (i, j)), one) for i in range(1, n + 1) for j in range(1, n + 1)]
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            if kind in ("A", "Dp"):
                c = _frac(reg, i, j, False)
                terms += [(((i, j), (j, i)), c), (((i, j), (i, j)), -c)]
            elif kind == "D":
                c = _frac(reg, i, j, False)
                terms += [(((i, j), (j, i)), c), (((j, i), (j, i)), -c)]
            elif kind == "B":
                c = _frac(reg, i, j, True)
                terms += [(((j, j), (i, i)), c), (((i, j), (i, j)), -c)]
            elif kind == "C":
                c = _frac(reg, i, j, True)
                terms += [(((j, j), (i, i)), c), (((j, i), (j, i)), -c)]
    return _assemble(reg, terms).with_tag(kind.rstrip("p"))


@dataclass
class RationalModel:
    n: int
    reg: VariableRegistry
    quad: ABCDQuadruple
    d_variant: str

    @property
    def masses(self) -> list[RationalFunction]:
        return [RationalFunction.var(self.reg, f"m{i}") for i in range(1, self.n + 1)]


def rational_model(n: int, d_variant: str = "corrected", reg: VariableRegistry | None = None) -> RationalModel:
    """The four structure matrices of the rational model on C^n (x) C^n.

    ``d_variant="printed"`` takes D identical to A, as displayed;
    ``"corrected"`` uses the D obtained from A by transposition and shifts,
    which differs from A only in the diagonal term (``E_jj (x) E_ii``).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if d_variant not in D_VARIANTS:
        raise ValueError(f"d_variant must be one of {D_VARIANTS}")
    reg = reg or VariableRegistry.standard(n)
    A = _structure(reg, "A")
    D = _structure(reg, "D" if d_variant == "corrected" else "Dp")
    quad = ABCDQuadruple(A, _structure(reg, "B"), _structure(reg, "C"), D, NEW, f"rational-{d_variant}")
    return RationalModel(n, reg, quad, d_variant)


# ------------------------------------------------------------------------------------
# scalar solutions

GAMMA_KINDS = {"rank_one": "sol1", "antisym_scaled": "sol2", "diagonal": "sol3"}


def _masses(reg, masses):
    if masses is None:
        return [RationalFunction.var(reg, f"m{i}") for i in range(1, reg.n + 1)]
    return [m if isinstance(m, RationalFunction) else RationalFunction.const(reg, m) for m in masses]


def gamma_solution(kind: str, reg: VariableRegistry, masses: Sequence | None = None,
                   f: RationalFunction | None = None, f_ratios: Sequence[RationalFunction] | None = None) -> TensorMatrix:
    """One of the three scalar solutions on a single leg ``1``.

    For the diagonal solution, the f-dependence is either a function ``f``
    (the ratio ``f(q + mu e_i) / f(q - mu e_i)`` is then formed exactly) or
    a list of explicit ratio samples.  Samples must be compatible with a
    single f: constants always are, ratios that depend on the other
    coordinates in an unrelated way generally are not.
    """
    n = reg.n
    leg = (Leg("1", n),)
    q = [RationalFunction.var(reg, nm) for nm in reg.qnames]
    if kind == "rank_one":
        m = _masses(reg, masses)
        ents = {((i,), (j,)): m[i - 1] * m[j - 1] for i in range(1, n + 1) for j in range(1, n + 1)}
    elif kind == "antisym_scaled":
        m = _masses(reg, masses)
        ents = {((i,), (j,)): (q[i - 1] - q[j - 1]) * m[i - 1] * m[j - 1]
                for i in range(1, n + 1) for j in range(1, n + 1) if i != j}
    elif kind == "diagonal":
        ents = {}
        for i in range(1, n + 1):
            e = [0] * n
            e[i - 1] = 1
            if f_ratios is not None:
                r = f_ratios[i - 1]
                r = r if isinstance(r, RationalFunction) else RationalFunction.const(reg, r)
            elif f is not None:
                r = f.shift(e) / f.shift([-x for x in e])
            else:
                r = RationalFunction.one(reg)
            prod = RationalFunction.one(reg)
            for k in range(1, n + 1):
                if k != i:
                    prod = prod * (q[i - 1] - q[k - 1])
            ents[((i,), (i,))] = r * prod
    else:
        raise ValueError(f"unknown gamma kind {kind!r}; expected one of {sorted(GAMMA_KINDS)}")
    return TensorMatrix(reg, leg, ents, f"gamma-{kind}")


def is_invertible_kind(kind: str) -> bool:
    return kind == "diagonal"


# ------------------------------------------------------------------------------------
# Hamiltonians


def trace_hamiltonian(M: TensorMatrix) -> ShiftOperator:
    """``Tr(e^d M e^d)`` over every leg of ``M`` with ``d`` the sum of the leg shifts."""
    reg = M.reg
    E = None
    for l in M.legs:
        e = exp_shift_matrix(reg, l, M.legs)
        E = e if E is None else matmul(E, e)
    X = matmul(matmul(E, lift_matrix(M)), E)
    out = X
    for l in M.leg_ids:
        out = trace_over_leg(out, l) if isinstance(out, TensorMatrix) else out
    return out if isinstance(out, ShiftOperator) else ShiftOperator.lift(out)


def hamiltonian_from_pair(K: TensorMatrix, KK: TensorMatrix) -> ShiftOperator:
    """``Tr(e^d K KK^-1 e^d)`` for scalar K matrices on the same legs."""
    if K.leg_ids != KK.leg_ids:
        raise ValueError("K and KK must live on the same legs")
    return trace_hamiltonian(matmul(K, inverse(KK)))


def hamiltonian_closed_form(reg: VariableRegistry, masses: Sequence | None = None) -> ShiftOperator:
    """``sum_l mu m_l^2 / prod_k (q_l - q_k + mu) exp(2 mu d_l)``."""
    n = reg.n
    m = _masses(reg, masses)
    mu = RationalFunction.var(reg, reg.mu)
    q = [RationalFunction.var(reg, nm) for nm in reg.qnames]
    terms = {}
    for l in range(n):
        den = RationalFunction.one(reg)
        for k in range(n):
            den = den * (q[l] - q[k] + mu)
        v = [0] * n
        v[l] = 2
        terms[tuple(v)] = mu * m[l] * m[l] / den
    return ShiftOperator(reg, terms)


def total_translation(reg: VariableRegistry, amount: int = 2) -> ShiftOperator:
    return ShiftOperator.translation(reg, [amount] * reg.n)


def relative_registry(reg: VariableRegistry) -> VariableRegistry:
    return VariableRegistry(("q", "Q"), reg.extras, reg.mu)


def reduce_n2(H: ShiftOperator) -> ShiftOperator:
    """Rewrite an n=2 operator in ``q = q1 - q2``, ``Q = q1 + q2``.

    Shift vectors map as ``(v1, v2) -> (v1 - v2, v1 + v2)``: a shift of
    ``q1`` by ``v1 mu`` and of ``q2`` by ``v2 mu`` moves ``q`` by
    ``(v1 - v2) mu`` and ``Q`` by ``(v1 + v2) mu``.
    """
    reg = H.reg
    if reg.n != 2:
        raise ValueError("reduce_n2 needs n = 2")
    for v, c in H.terms.items():
        if not (c.shift((1, 1)) - c).is_zero():
            raise ValueError(f"coefficient of e^{list(v)} is not translation invariant")
    target = relative_registry(reg)
    qv, Qv = Polynomial.var(target, "q"), Polynomial.var(target, "Q")
    mapping = {reg.qnames[0]: (Qv + qv).scale(Fraction(1, 2)), reg.qnames[1]: (Qv - qv).scale(Fraction(1, 2))}
    for nm in reg.extras:
        mapping[nm] = Polynomial.var(target, nm)
    mapping[reg.mu] = Polynomial.var(target, target.mu)
    terms = {}
    for (v1, v2), c in H.terms.items():
        terms[(v1 - v2, v1 + v2)] = c.substitute(mapping, target)
    return ShiftOperator(target, terms)


def printed_relative_form(reg: VariableRegistry) -> ShiftOperator:
    """``[m1^2/(q+mu) e^{2mu d_q} - m2^2/(q-mu) e^{-2mu d_q}] e^{2mu d_Q}``."""
    q = RationalFunction.var(reg, "q")
    mu = RationalFunction.var(reg, reg.mu)
    m1, m2 = RationalFunction.var(reg, "m1"), RationalFunction.var(reg, "m2")
    return ShiftOperator(reg, {(2, 2): m1 * m1 / (q + mu), (-2, 2): -(m2 * m2) / (q - mu)})


def conjugate_by(H: ShiftOperator, f: RationalFunction) -> ShiftOperator:
    """``f H f^-1``."""
    inv = f.inverse()
    return ShiftOperator.lift(f) * H * ShiftOperator.lift(inv)


# ------------------------------------------------------------------------------------
# fused trace experiment


def fused_trace_hamiltonian(reg: VariableRegistry, masses: Sequence | None = None) -> ShiftOperator:
    """Trace over a left-fused pair of legs of ``K_<11'> KK_<11'>^-1``.

    Both fused objects come from two copies of a scalar solution (rank one
    for K, diagonal for KK) through the left fusion rule.
    """
    model = rational_model(reg.n, reg=reg)
    K = gamma_solution("rank_one", reg, masses)
    KK = gamma_solution("diagonal", reg)
    Kf = fused_K(K, K, model.quad, "1", "1p")
    KKf = fused_K(KK, KK, model.quad, "1", "1p")
    return trace_hamiltonian(matmul(Kf, inverse(KKf)))


def fused_trace_experiment(n: int = 2, masses: Sequence | None = None) -> VerificationReport:
    reg = VariableRegistry.standard(n)
    H = hamiltonian_closed_form(reg, masses)
    H2 = fused_trace_hamiltonian(reg, masses)
    rep = check_commutator_zero(H, H2, f"fused-trace-commutator[n={n}]")
    rep.details["fused_trace_terms"] = len(H2.terms)
    return rep


# ------------------------------------------------------------------------------------
# numerics: Gamma ratios and zero modes


class GammaPole(ValueError):
    pass


class GammaEvaluator:
    """Real Gamma function through ``math.lgamma`` with an explicit sign."""

    def sign(self, x: float) -> int:
        if x > 0:
            return 1
        if x == math.floor(x):
            raise GammaPole(f"Gamma has a pole at {x}")
        return -1 if math.floor(x) % 2 else 1

    def log_abs(self, x: float) -> float:
        if x <= 0 and x == math.floor(x):
            raise GammaPole(f"Gamma has a pole at {x}")
        return math.lgamma(x)

    def __call__(self, x: float) -> float:
        return self.sign(x) * math.exp(self.log_abs(x))

    def ratio(self, a: float, b: float) -> float:
        """``Gamma(a) / Gamma(b)`` without overflow."""
        return self.sign(a) * self.sign(b) * math.exp(self.log_abs(a) - self.log_abs(b))


GAMMA = GammaEvaluator()
EXPONENT_MODES = ("derived", "displayed")


@dataclass(frozen=True)
class Eigenfunction:
    k: int
    parity: str = "sin"
    m1: float = 1.0
    m2: float = 1.0
    mu: float = 1.0
    exponent: str = "derived"

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be a non-negative integer")
        if self.parity not in ("sin", "cos"):
            raise ValueError("parity must be 'sin' or 'cos'")
        if self.exponent not in EXPONENT_MODES:
            raise ValueError(f"exponent mode must be one of {EXPONENT_MODES}")
        if self.m1 <= 0 or self.m2 <= 0 or self.mu <= 0:
            raise ValueError("masses and mu must be positive")

    @property
    def coefficient(self) -> float:
        """Coefficient c in ``exp(-c q ln(m1/m2))``."""
        return 1 / (2 * self.mu) if self.exponent == "derived" else 1 / (4 * self.mu)


def eigenfunction_value(e: Eigenfunction, q: float) -> float:
    x = (q + e.mu) / (4 * e.mu)
    r = GAMMA.ratio(x + 0.5, x)
    expo = math.exp(-e.coefficient * q * math.log(e.m1 / e.m2))
    arg = e.k * math.pi * q / e.mu
    trig = math.sin(arg) if e.parity == "sin" else math.cos(arg)
    return r * expo * trig


def relative_terms(e: Eigenfunction, q: float) -> tuple[float, float]:
    if abs(q + e.mu) < 1e-14 or abs(q - e.mu) < 1e-14:
        raise GammaPole(f"q = {q} sits on a pole of the relative Hamiltonian")
    t1 = e.m1 ** 2 / (q + e.mu) * eigenfunction_value(e, q + 2 * e.mu)
    t2 = e.m2 ** 2 / (q - e.mu) * eigenfunction_value(e, q - 2 * e.mu)
    return t1, t2


def apply_relative_hamiltonian(e: Eigenfunction, q: float) -> float:
    """``m1^2/(q+mu) psi(q+2mu) - m2^2/(q-mu) psi(q-2mu)``."""
    t1, t2 = relative_terms(e, q)
    return t1 - t2


def relative_residual(e: Eigenfunction, q: float) -> float:
    """``|H psi| / max(|terms|)``; zero when both terms vanish."""
    t1, t2 = relative_terms(e, q)
    scale = max(abs(t1), abs(t2))
    return 0.0 if scale == 0 else abs(t1 - t2) / scale


def sample_points(mu: float, count: int, seed: int = 0) -> list[float]:
    """Sample q away from the poles at -mu, mu (and the Gamma poles of the shifted arguments)."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        u = rng.uniform(0.05, 0.45) if rng.random() < 0.5 else rng.uniform(0.55, 0.95)
        q = (u * 8 - 4) * mu
        bad = False
        for s in (-2, 0, 2):
            x = (q + s * mu + mu) / (4 * mu)
            for y in (x, x + 0.5):
                if y <= 0 and abs(y - round(y)) < 1e-3:
                    bad = True
        if abs(abs(q) - mu) < 1e-3 * mu:
            bad = True
        if not bad:
            out.append(q)
    return out
