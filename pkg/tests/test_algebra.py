import random
from fractions import Fraction

import pytest

from jetlie import expr as ex
from jetlie import symbols as sy
from jetlie.algebra import (
    AdjointMap,
    AlgebraError,
    SubalgebraError,
    ad_matrix,
    adjoint_exp,
    apply_adjoint_at,
    char_poly,
    exact_matrix_exp,
    integer_eigenvalues,
    normalize_1d,
    normalize_2d,
    preserves_structure,
    replay_steps,
)
from jetlie.fields import PointVectorField, structure_table

F = Fraction
x = ex.symbol(sy.X)
t = ex.symbol(sy.T)
u = ex.symbol(sy.U)

V1 = PointVectorField(ex.ONE, ex.ZERO, ex.ZERO)
V2 = PointVectorField(ex.ZERO, ex.ONE, ex.ZERO)
V3 = PointVectorField(x, -t, u)  # derived weight


@pytest.fixture(scope="module")
def table():
    return structure_table([V1, V2, V3])


def test_ad_matrices(table):
    ad3 = ad_matrix(table, 2)
    assert ad3 == [[F(-1), 0, 0], [0, F(1), 0], [0, 0, 0]]
    ad1 = ad_matrix(table, 0)
    # nilpotent: only [v1, v3] = v1
    assert ad1[0][2] == 1
    sq = [[sum(ad1[i][k] * ad1[k][j] for k in range(3)) for j in range(3)] for i in range(3)]
    assert all(v == 0 for row in sq for v in row)


def test_abelian_ad_is_zero():
    tab = structure_table([V1, V2])
    assert ad_matrix(tab, 0) == [[0, 0], [0, 0]]


def test_char_poly_and_eigenvalues():
    a = [[F(1), F(0)], [F(0), F(-1)]]
    assert char_poly(a) == [F(-1), F(0), F(1)]
    assert integer_eigenvalues(a) == {1: 1, -1: 1}
    nil = [[F(0), F(1)], [F(0), F(0)]]
    assert integer_eigenvalues(nil) == {0: 2}
    bad = [[F(0), F(1)], [F(-1), F(0)]]  # eigenvalues +-i
    with pytest.raises(AlgebraError):
        integer_eigenvalues(bad)
    half = [[F(1, 2)]]
    with pytest.raises(AlgebraError):
        integer_eigenvalues(half)


def test_exact_matrix_exp_nilpotent():
    nil = [[F(0), F(1)], [F(0), F(0)]]
    m = exact_matrix_exp(nil, "e")
    eps = ex.symbol(sy.eps("e"))
    assert m[0][0] == ex.ONE
    assert m[0][1] == eps
    assert m[1][1] == ex.ONE


def test_exact_matrix_exp_diagonal():
    d = [[F(2), F(0)], [F(0), F(-1)]]
    m = exact_matrix_exp(d, "e")
    e = ex.symbol(sy.exp_eps("e"))
    assert m[0][0] == e ** 2
    assert m[1][1] == e ** -1
    assert m[0][1].is_zero()


def test_exact_matrix_exp_jordan_block():
    a = [[F(1), F(1)], [F(0), F(1)]]
    m = exact_matrix_exp(a, "e")
    e = ex.symbol(sy.exp_eps("e"))
    eps = ex.symbol(sy.eps("e"))
    assert m[0][0] == e
    assert m[0][1] == e * eps
    assert m[1][1] == e


def test_adjoint_maps_reproduce_closed_forms(table):
    # F2 matches the claimed pattern literally; F1 and F3 match under
    # the reparameterization eps -> -eps
    eps = ex.symbol(sy.eps("eps"))
    e = ex.symbol(sy.exp_eps("eps"))
    f1 = adjoint_exp(table, 0)
    assert f1.matrix[0][2] == -eps  # (c1 - eps c3, c2, c3)
    assert f1.matrix[0][0] == ex.ONE and f1.matrix[1][1] == ex.ONE
    f2 = adjoint_exp(table, 1)
    assert f2.matrix[1][2] == eps  # (c1, c2 + eps c3, c3): exact match
    f3 = adjoint_exp(table, 2)
    assert f3.matrix[0][0] == e and f3.matrix[1][1] == e ** -1
    assert f3.matrix[2][2] == ex.ONE


def test_adjoint_exp_is_automorphism(table):
    for i in range(3):
        m = adjoint_exp(table, i)
        assert preserves_structure(table, m.matrix)
        assert m.is_identity_at_zero()


def test_adjoint_inverse_composes_to_identity(table):
    for i in range(3):
        m = adjoint_exp(table, i, "eps")
        inv = [
            [
                entry.substitute(
                    {
                        sy.eps("eps"): -ex.symbol(sy.eps("eps")),
                        sy.exp_eps("eps"): ex.symbol(sy.exp_eps("eps")) ** -1,
                    }
                )
                for entry in row
            ]
            for row in m.matrix
        ]
        prod = [
            [
                sum((m.matrix[r][k] * inv[k][c] for k in range(3)), ex.ZERO)
                for c in range(3)
            ]
            for r in range(3)
        ]
        for r in range(3):
            for c in range(3):
                assert prod[r][c] == (ex.ONE if r == c else ex.ZERO)


def test_adjoint_lie_series_example(table):
    # Ad(exp(eps v1)) v3 = v3 - eps v1: series truncates at the linear term
    got = apply_adjoint_at(table, 0, F(1), (F(0), F(0), F(1)))
    assert got == (F(-1), F(0), F(1))


def test_normalize_1d_examples(table):
    r = normalize_1d(table, (0, 0, 5))
    assert r.representative == (0, 0, 1) and r.family == "v3"
    assert r.steps == [("scale", F(1, 5))]

    r = normalize_1d(table, (1, 1, 4))
    assert r.representative == (0, 0, 1)
    assert ("adjoint", 0, F(1, 4)) in r.steps
    assert ("adjoint", 1, F(-1, 4)) in r.steps
    assert ("scale", F(1, 4)) in r.steps

    r = normalize_1d(table, (2, 3, 0))
    assert r.family == "v1 + a*v2"
    assert r.representative == (1, F(3, 2), 0)
    assert r.parameter == F(3, 2)
    assert r.steps == [("scale", F(1, 2))]

    r = normalize_1d(table, (0, 7, 0))
    assert r.family == "b*v1 + v2"
    assert r.representative == (0, 1, 0)
    assert r.parameter == 0


def test_normalize_1d_zero_rejected(table):
    with pytest.raises(AlgebraError):
        normalize_1d(table, (0, 0, 0))


def test_normalize_1d_witness_and_idempotence(table):
    rng = random.Random(17)
    for _ in range(300):
        c = tuple(F(rng.randint(-8, 8), rng.randint(1, 5)) for _ in range(3))
        if not any(c):
            continue
        r = normalize_1d(table, c)
        assert replay_steps(table, c, r.steps) == r.representative
        again = normalize_1d(table, r.representative)
        assert again.representative == r.representative
        # orbit invariants
        assert (c[2] != 0) == (r.family == "v3")
        if c[2] == 0:
            rep = r.representative
            sign_in = (c[0] * c[1] > 0) - (c[0] * c[1] < 0)
            sign_out = (rep[0] * rep[1] > 0) - (rep[0] * rep[1] < 0)
            assert sign_in == sign_out


def test_normalize_2d_representatives(table):
    r = normalize_2d(table, (1, 0, 0), (0, 1, 0))
    assert r.representative == ("v1", "v2")
    r = normalize_2d(table, (2, 0, 0), (1, 0, 5))
    assert r.representative == ("v1", "v3")
    r = normalize_2d(table, (0, 3, 0), (0, 1, 1))
    assert r.representative == ("v2", "v3")


def test_normalize_2d_rejections(table):
    with pytest.raises(SubalgebraError) as err:
        normalize_2d(table, (1, 1, 0), (0, 0, 1))
    assert err.value.bracket == (1, -1, 0)
    with pytest.raises(AlgebraError):
        normalize_2d(table, (1, 0, 0), (2, 0, 0))  # not 2-dimensional
