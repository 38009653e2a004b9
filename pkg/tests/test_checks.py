import json
from fractions import Fraction

import pytest

from dynrefl import checks as chk
from dynrefl.builders import ABCDQuadruple, build_dressing_QS, build_transposed_lax, dressing_report, quantum_copy
from dynrefl.exactfield import RationalFunction, parse_rational
from dynrefl.models import gamma_solution, hamiltonian_closed_form, total_translation
from dynrefl.shiftops import ShiftOperator
from dynrefl.tensor import Leg, TensorMatrix, embed, matmul


def with_flipped_coupling(A):
    """Negate the (1,2)->(2,1) coupling coefficient."""
    ents = dict(A.entries)
    key = ((1, 2), (2, 1))
    ents[key] = -ents[key]
    return TensorMatrix(A.reg, A.legs, ents, "A-flipped")


def identity_lax(reg):
    return TensorMatrix.identity(reg, (Leg("1", reg.n), Leg("a", reg.n, "quantum")))


def test_signatures():
    assert chk.NEW == chk.AlgebraSignature(1, 1)
    assert str(chk.BOUNDARY) and chk.BOUNDARY.eps_R == -1
    with pytest.raises(ValueError):
        chk.AlgebraSignature(Fraction(1, 2), 1)


@pytest.mark.parametrize("variant", "abcd")
def test_dybe_passes_on_model(model2, variant):
    rep = chk.check_dYBE(model2.quad, variant)
    assert rep.passed and rep.witness is None
    assert rep.anchor.startswith("dynYBE")


@pytest.mark.parametrize("variant", "abcd")
def test_dybe_identity(reg2, variant):
    assert chk.check_dYBE(ABCDQuadruple.trivial(reg2), variant).passed


def test_dybe_flipped_sign_fails_with_witness(model2):
    q = model2.quad
    bad = ABCDQuadruple(with_flipped_coupling(q.A), q.B, q.C, q.D)
    rep = chk.check_dYBE(bad, "a")
    assert not rep.passed
    assert set(rep.witness) >= {"row", "col", "residual"}
    rnd = chk.check_dYBE(bad, "a", mode="random", seed=3)
    assert not rnd.passed and rnd.witness is not None


def test_reflection_examples(model2, model3, reg2):
    for m in (model2, model3):
        assert chk.check_reflection(gamma_solution("rank_one", m.reg), m.quad).passed
    I = TensorMatrix.identity(reg2, (Leg("1", 2),))
    assert chk.check_reflection(I, ABCDQuadruple.trivial(reg2)).passed
    f = parse_rational("(q1*q2+mu*q1+1)/(q2-3)", model2.reg)
    assert chk.check_reflection(gamma_solution("diagonal", model2.reg, f=f), model2.quad).passed
    consts = [parse_rational("5/3", model2.reg), parse_rational("m1^2+1", model2.reg)]
    assert chk.check_reflection(gamma_solution("diagonal", model2.reg, f_ratios=consts), model2.quad).passed


def test_reflection_unrelated_ratios_fail(model2):
    """Ratio samples that cannot come from one function f break the exchange relation."""
    ratios = [parse_rational("q2", model2.reg), parse_rational("1", model2.reg)]
    rep = chk.check_reflection(gamma_solution("diagonal", model2.reg, f_ratios=ratios), model2.quad)
    assert not rep.passed and rep.witness["row"] == [1, 2]


def test_dual_reflection_identity(reg2):
    I = TensorMatrix.identity(reg2, (Leg("1", 2),))
    assert chk.check_dual_reflection(I, ABCDQuadruple.trivial(reg2)).passed


def test_unitarity(model2, reg2):
    assert chk.check_unitarity(model2.quad).passed
    assert chk.check_unitarity(ABCDQuadruple.trivial(reg2)).passed
    q = model2.quad
    assert not chk.check_unitarity(ABCDQuadruple(q.A.scale(2), q.B, q.C, q.D)).passed


def test_zero_weight(model2):
    assert chk.check_zero_weight(model2.quad).passed


def test_rll(model2, model3, reg2):
    for m in (model2, model3):
        assert chk.check_RLL(quantum_copy(m.quad.A), m.quad.A).passed
    assert chk.check_RLL(identity_lax(reg2), TensorMatrix.identity(reg2, (Leg("1", 2), Leg("2", 2)))).passed


def test_crossed_exchange(model2, reg2):
    T = identity_lax(reg2)
    assert chk.check_crossed_exchange(T, T, ABCDQuadruple.trivial(reg2)).passed
    T = quantum_copy(model2.quad.A)
    calT = build_transposed_lax(T)
    assert chk.check_crossed_exchange(T, calT, model2.quad).passed
    ents = dict(calT.entries)
    key = sorted(ents)[0]
    ents[key] = ents[key] + RationalFunction.var(reg2, "q1")
    bad = TensorMatrix(calT.reg, calT.legs, ents)
    assert not chk.check_crossed_exchange(T, bad, model2.quad).passed


def test_coaction(model2, reg2):
    q = model2.quad
    assert chk.check_coaction(quantum_copy(q.C), quantum_copy(q.D), q, 1).passed
    assert chk.check_coaction(quantum_copy(q.A), quantum_copy(q.B), q, -1).passed
    I = identity_lax(reg2)
    assert chk.check_coaction(I, I, ABCDQuadruple.trivial(reg2), 0).passed


def test_dressing(model2, reg2):
    q = model2.quad
    for spaces in (2, 3):
        Q, S = build_dressing_QS(q, spaces)
        assert dressing_report(q, Q, S).passed
    triv = ABCDQuadruple.trivial(reg2)
    Q, S = build_dressing_QS(triv, 3)
    assert dressing_report(triv, Q, S).passed
    # the relations are homogeneous in Q: the identity and a truncated product still pass,
    # a factor without its dynamical shift does not
    Q2, _ = build_dressing_QS(q, 2)
    Q3, S3 = build_dressing_QS(q, 3)
    assert dressing_report(q, embed(Q2, Q3.legs), S3).passed
    assert dressing_report(q, TensorMatrix.identity(reg2, Q3.legs), S3).passed
    unshifted = matmul(embed(Q2, Q3.legs), embed(Q2.relabel({"1": "2", "2": "3"}), Q3.legs))
    rep = dressing_report(q, unshifted, S3)
    assert not rep.passed and not rep.details["parts"]["AQcom"]


def test_classical(model2, model3, reg2):
    for m in (model2, model3):
        assert chk.check_classical_limit(m.quad).passed
    assert chk.check_classical_limit(ABCDQuadruple.trivial(reg2)).passed
    q = model2.quad
    I = TensorMatrix.identity(reg2, q.A.legs)
    assert not chk.check_classical_limit(ABCDQuadruple(q.A, q.B, q.C, I)).passed
    z = TensorMatrix.zero(reg2, q.A.legs)
    assert chk.check_classical_dYBE(z, z, z, z).passed


def test_classical_gamma_recorded(model2):
    parts = [chk.classical_part(X) for _, X in model2.quad.items()]
    rep = chk.check_classical_gamma(gamma_solution("rank_one", model2.reg), *parts)
    assert rep.passed


def test_commutator(reg2):
    H = hamiltonian_closed_form(reg2)
    assert chk.check_commutator_zero(H, H).passed
    assert chk.check_commutator_zero(H, total_translation(reg2)).passed
    q1 = ShiftOperator.lift(RationalFunction.var(reg2, "q1"))
    rep = chk.check_commutator_zero(H, q1)
    assert not rep.passed and rep.witness["residual"]


def test_random_mode_certificate(model2):
    rep = chk.check_dYBE(model2.quad, "d", mode="random", seed=5)
    assert rep.passed and rep.mode == "random" and rep.seed == 5
    d = rep.details
    assert d["trials"] == 3 and d["prime"] == 2 ** 62 - 57
    assert d["failure_bound"]


def test_report_json_is_deterministic(model2):
    a = chk.check_dYBE(model2.quad, "b", mode="random", seed=9).to_json(timing=False)
    b = chk.check_dYBE(model2.quad, "b", mode="random", seed=9).to_json(timing=False)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert set(a) >= {"identity", "anchor", "mode", "seed", "pass", "witness"}


def test_combine_reports_first_failure():
    good = chk.VerificationReport("x", "a", "exact", None, True)
    bad = chk.VerificationReport("y", "b", "exact", None, False, {"row": [1], "col": [1], "residual": "1"})
    rep = chk.combine("both", [good, bad], "z")
    assert not rep.passed and rep.witness
