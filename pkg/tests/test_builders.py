import pytest

from dynrefl import builders as bld
from dynrefl import checks as chk
from dynrefl.models import gamma_solution, rational_model
from dynrefl.tensor import Leg, ShiftSpec, dynamical_shift, TensorMatrix, embed, partial_transpose, slsc_shift, swap_legs, zero_weight_violations


def test_bcd_from_identity(reg2):
    I = TensorMatrix.identity(reg2, (Leg("1", 2), Leg("2", 2)))
    q = bld.build_BCD_from_A(I, strict=True)
    for _, X in q.items():
        assert X.equals(I)


@pytest.mark.parametrize("n", [2, 3])
def test_bcd_from_model(n):
    m = rational_model(n)
    q = bld.build_BCD_from_A(m.quad.A, strict=True)
    assert all(r.passed for r in bld.certify_quadruple(q))
    assert chk.check_unitarity(q).passed
    diff = bld.compare_quadruples(q, m.quad)
    assert diff == {"A": None, "B": None, "C": None, "D": None}


def test_bcd_vs_displayed_D():
    m = rational_model(2)
    printed = rational_model(2, "printed").quad
    diff = bld.compare_quadruples(bld.build_BCD_from_A(m.quad.A), printed)
    assert diff["B"] is None and diff["C"] is None
    assert diff["D"]["row"] == [1, 2] and diff["D"]["col"] == [1, 2]


def test_transposed_lax(reg2, model2):
    I = TensorMatrix.identity(reg2, (Leg("1", 2), Leg("a", 2, "quantum")))
    assert bld.build_transposed_lax(I).equals(I)
    T = embed(gamma_solution("diagonal", reg2), I.legs)
    assert bld.build_transposed_lax(T).equals(slsc_shift(T, "1", "sc"))


def test_K_from_T_gamma(reg2, model2):
    I = TensorMatrix.identity(reg2, (Leg("1", 2), Leg("a", 2, "quantum")))
    g = TensorMatrix.identity(reg2, (Leg("1", 2),))
    triv = bld.ABCDQuadruple.trivial(reg2)
    assert chk.check_reflection(bld.build_K_from_T_gamma(I, g, quad=triv, strict=True), triv).passed
    T = bld.quantum_copy(model2.quad.A)
    K = bld.build_K_from_T_gamma(T, gamma_solution("diagonal", reg2), quad=model2.quad, strict=True)
    assert chk.check_reflection(K, model2.quad).passed
    Td = embed(gamma_solution("diagonal", reg2), I.legs)
    Kd = bld.build_K_from_T_gamma(Td, gamma_solution("diagonal", reg2))
    assert all(r == c for r, c in Kd.entries)


def test_K_from_T_gamma_requires_quad_when_strict(model2):
    T = bld.quantum_copy(model2.quad.A)
    with pytest.raises(bld.BuildError):
        bld.build_K_from_T_gamma(T, gamma_solution("diagonal", model2.reg), strict=True)


def test_coaction_dress(model2):
    q = model2.quad
    K = gamma_solution("diagonal", model2.reg)
    I = TensorMatrix.identity(model2.reg, (Leg("1", 2), Leg("b", 2, "quantum")))
    assert bld.coaction_dress(K, I, I, 0).equals(embed(K, I.legs))
    # with trivial L, J the dressing only moves K along the new quantum leg
    assert bld.coaction_dress(K, I, I, 5).equals(dynamical_shift(embed(K, I.legs), ShiftSpec("b", 1, 5)))
    for alpha, L, J in ((1, q.C, q.D), (-1, q.A, q.B)):
        Kt = bld.coaction_dress(K, bld.quantum_copy(L), bld.quantum_copy(J), alpha, quad=q, strict=True)
        assert chk.check_reflection(Kt, q).passed


def test_monodromy(model2):
    A = model2.quad.A
    assert bld.monodromy(A, 1).equals(bld.quantum_copy(A, "a1"))
    T = bld.monodromy(A, 2, strict=True)
    assert not zero_weight_violations(T, {"1": 1, "a1": 1, "a2": 1})


def test_dual(reg2, model2):
    triv = bld.ABCDQuadruple.trivial(reg2)
    for _, X in bld.build_dual_ABCD(triv).items():
        assert X.equals(triv.A)
    A = model2.quad.A
    d = bld.build_dual_ABCD(model2.quad, strict=True)
    assert d.A.equals(partial_transpose(swap_legs(A, "1", "2"), ["1", "2"]))
    assert chk.check_dual_reflection(bld.build_Kplus_crossing(gamma_solution("diagonal", reg2)), d).passed


def test_kplus(reg2):
    I = TensorMatrix.identity(reg2, (Leg("1", 2),))
    assert bld.build_Kplus_crossing(I).equals(I)
    g = gamma_solution("diagonal", reg2)
    Kp = bld.build_Kplus_crossing(g)
    for (r, c), v in g.entries.items():
        e = [0, 0]
        e[c[0] - 1] = -1
        assert Kp.get(r, c).equals(v.inverse().shift(tuple(e)))


def test_crossing_needs_spectral_legs(model2):
    with pytest.raises(bld.BuildError):
        bld.check_crossing(model2.quad.A, 1)


def test_fusion(model2):
    q = model2.quad
    for kind in ("rank_one", "diagonal"):
        g = gamma_solution(kind, model2.reg)
        for side in ("left", "right"):
            assert bld.fuse(g, g, q, side, strict=True).exchange_report(g).passed
    assert all(r.passed for r in bld.fused_order_reports(q))
    assert all(r.passed for r in bld.fused_unitarity_reports(q))


def test_fusion_of_mixed_solutions_fails(model2):
    q = model2.quad
    r1, d = gamma_solution("rank_one", model2.reg), gamma_solution("diagonal", model2.reg)
    assert not bld.fuse(r1, d, q, "left").exchange_report(r1).passed


def test_dressing_two_spaces(model2, reg2):
    q = model2.quad
    Q, S = bld.build_dressing_QS(q, 2, strict=True)
    # two spaces: a single factor P A_21 and P D_21
    from dynrefl.tensor import matmul, permutation_matrix

    P = permutation_matrix(reg2, Leg("2", 2), Leg("1", 2))
    assert Q.equals(matmul(P, chk.on(q.A, "2", "1")))
    assert S.equals(matmul(P, chk.on(q.D, "2", "1")))
    Qt, St = bld.build_dressing_QS(bld.ABCDQuadruple.trivial(reg2), 2)
    assert Qt.equals(P) and St.equals(P)


def test_spectral_map():
    assert bld.ABSENT.present is False
    with pytest.raises(ValueError):
        bld.build_dressing_QS(rational_model(2).quad, 1)
