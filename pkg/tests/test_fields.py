import random
from fractions import Fraction

import pytest

from jetlie import expr as ex
from jetlie import symbols as sy
from jetlie.fields import (
    Characteristic,
    ClosureError,
    FieldError,
    PointVectorField,
    characteristic_of,
    commutator,
    point_field_of,
    structure_table,
)

x = ex.symbol(sy.X)
t = ex.symbol(sy.T)
u = ex.symbol(sy.U)
ux = ex.symbol(sy.jet(1, 0))
ut = ex.symbol(sy.jet(0, 1))

V1 = PointVectorField(ex.ONE, ex.ZERO, ex.ZERO)
V2 = PointVectorField(ex.ZERO, ex.ONE, ex.ZERO)


def scaling(weight) -> PointVectorField:
    return PointVectorField(x, -t, ex.constant(weight) * u)


def test_characteristic_of_translation():
    assert characteristic_of(V1).q == ux


def test_characteristic_of_scaling_fixture():
    # the claimed weight-3 generator is carried as a fixture; the conversion
    # itself is weight-agnostic
    q = characteristic_of(scaling(3))
    assert q.q == x * ux - t * ut - 3 * u


def test_characteristic_of_vertical_field():
    v = PointVectorField(ex.ZERO, ex.ZERO, u)
    assert characteristic_of(v).q == -u


def test_point_field_of_translation():
    data = point_field_of(Characteristic(ux))
    assert (data.xi, data.tau, data.eta) == (ex.ONE, ex.ZERO, ex.ZERO)
    assert data.kind == "point"


def test_point_field_of_scaling_candidate():
    data = point_field_of(Characteristic(x * ux - t * ut - 3 * u))
    assert (data.xi, data.tau, data.eta) == (x, -t, 3 * u)
    assert data.kind == "point"
    # eta^x = -Q_x - u_x Q_u and eta^t symmetric
    assert data.eta_x == 2 * ux
    assert data.eta_t == 4 * ut


def test_point_field_of_contact_example():
    data = point_field_of(Characteristic(ux ** 2))
    assert (data.xi, data.tau, data.eta) == (2 * ux, ex.ZERO, ux ** 2)
    assert data.kind == "contact"


def test_point_field_of_rejects_higher_order():
    with pytest.raises(FieldError):
        point_field_of(Characteristic(ex.symbol(sy.jet(2, 0))))


def test_round_trip_point():
    for v in (V1, V2, scaling(3), scaling(1), PointVectorField(x * t, u, x + u)):
        q = characteristic_of(v)
        back = point_field_of(q).field()
        assert back == v
        assert characteristic_of(back).q == q.q


def test_commutators_of_claimed_algebra():
    v3 = scaling(3)
    assert commutator(V1, V2) == PointVectorField(ex.ZERO, ex.ZERO, ex.ZERO)
    assert commutator(V1, v3) == V1
    assert commutator(v3, V2) == V2


def test_commutator_rejects_contact_fields():
    contact = PointVectorField(2 * ux, ex.ZERO, ux ** 2)
    with pytest.raises(FieldError):
        commutator(contact, V1)


def test_structure_table_weight_independent():
    for weight in (3, 1, Fraction(5, 7)):
        table = structure_table([V1, V2, scaling(weight)])
        expected = {
            (0, 2, 0): Fraction(1),
            (2, 0, 0): Fraction(-1),
            (1, 2, 1): Fraction(-1),
            (2, 1, 1): Fraction(1),
        }
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    assert table.constants[i][j][k] == expected.get((i, j, k), 0)


def test_structure_table_abelian():
    table = structure_table([V1, V2])
    assert all(c == 0 for row in table.constants for col in row for c in col)


def test_structure_table_affine_line():
    xdx = PointVectorField(x, ex.ZERO, ex.ZERO)
    table = structure_table([V1, xdx])
    assert table.constants[0][1][0] == 1
    assert table.constants[0][1][1] == 0


def test_structure_table_non_closure():
    v = PointVectorField(x * x, ex.ZERO, ex.ZERO)  # [d/dx, x^2 d/dx] = 2x d/dx
    with pytest.raises(ClosureError) as err:
        structure_table([V1, v])
    assert err.value.residual.xi == 2 * x


def _random_affine_field(rng):
    def affine():
        return (
            ex.constant(rng.randint(-2, 2))
            + ex.constant(rng.randint(-2, 2)) * x
            + ex.constant(rng.randint(-2, 2)) * t
            + ex.constant(rng.randint(-2, 2)) * u
        )

    return PointVectorField(affine(), affine(), affine())


def test_antisymmetry_and_jacobi():
    rng = random.Random(5)
    zero = PointVectorField(ex.ZERO, ex.ZERO, ex.ZERO)
    for _ in range(20):
        v, w, z = (_random_affine_field(rng) for _ in range(3))
        vw = commutator(v, w)
        assert commutator(w, v) == PointVectorField(-vw.xi, -vw.tau, -vw.eta)
        jacobi = commutator(vw, z)
        wz = commutator(w, z)
        zv = commutator(z, v)
        total = PointVectorField(
            jacobi.xi + commutator(wz, v).xi + commutator(zv, w).xi,
            jacobi.tau + commutator(wz, v).tau + commutator(zv, w).tau,
            jacobi.eta + commutator(wz, v).eta + commutator(zv, w).eta,
        )
        assert total == zero
