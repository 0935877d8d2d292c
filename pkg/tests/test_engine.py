import random
from fractions import Fraction

import pytest

from jetlie import claims
from jetlie import expr as ex
from jetlie import symbols as sy
from jetlie.engine import (
    BasisTooLargeError,
    EngineError,
    ansatz_solve,
    bounded_nonexistence,
    determining_system,
    jet_monomial_basis,
    opaque_q,
    point_affine_basis,
    residual,
    spot_check,
)
from jetlie.jets import Manifold, expand_equation
from jetlie.parser import parse

x = ex.symbol(sy.X)
t = ex.symbol(sy.T)
u = ex.symbol(sy.U)
ux = ex.symbol(sy.jet(1, 0))
ut = ex.symbol(sy.jet(0, 1))
uxx = ex.symbol(sy.jet(2, 0))
alpha = ex.symbol(sy.ALPHA)
beta = ex.symbol(sy.BETA)


@pytest.fixture(scope="module")
def man():
    return Manifold()


def test_translations_are_symmetries(man):
    assert residual(man, ux).is_zero
    assert residual(man, ut).is_zero


def test_residual_of_u(man):
    # oracle: D_x D_t u = F while F'[u] = F + 4 beta u u_x^2 + 2 beta u^2 u_xx
    rep = residual(man, u)
    assert rep.value == -2 * beta * u * (2 * ux ** 2 + u * uxx)
    assert not rep.is_zero
    assert sy.jet(1, 0) in rep.free_coordinates


def test_residual_scaling_weight_is_linear_in_c(man):
    c = sy.const("c9")
    q = x * ux - t * ut - ex.symbol(c) * u
    rep = residual(man, q)
    # residual = 2 beta (c - 1) u (2 u_x^2 + u u_xx): vanishes exactly at c = 1
    expected = 2 * beta * (ex.symbol(c) - 1) * u * (2 * ux ** 2 + u * uxx)
    assert rep.value == expected
    at_one = rep.value.substitute({c: ex.ONE})
    assert at_one.is_zero()
    at_claimed = rep.value.substitute({c: ex.constant(3)})
    assert not at_claimed.is_zero()


def test_residual_order_cap():
    man = Manifold(max_order=4)
    with pytest.raises(EngineError):
        residual(man, ex.symbol(sy.jet(3, 0)))


def test_determining_system_contains_reference_equations(man):
    arity = (sy.X, sy.T, sy.U, sy.jet(1, 0), sy.jet(0, 1))
    ds = determining_system(man, arity, (sy.jet(2, 0), sy.jet(0, 2)))

    def d2(i, j):
        multi = [0] * 5
        multi[i] += 1
        multi[j] += 1
        return ex.symbol(sy.opaque("Q", arity, tuple(multi)))

    # pure second-order equations
    assert ds.contains(d2(3, 3))  # Q_{u_x,u_x}
    assert ds.contains(d2(3, 4))  # Q_{u_x,u_t}
    assert ds.contains(d2(4, 4))  # Q_{u_t,u_t}
    # the mixed equation u_t Q_{u,u_x} + alpha u Q_{u_x,u_x} + Q_{t,u_x}
    mixed = ut * d2(2, 3) + alpha * u * d2(3, 3) + d2(1, 3)
    assert ds.contains(mixed)
    # and its u_t-counterpart alpha u Q_{u_t,u_t} + u_x Q_{u,u_t} + Q_{x,u_t}
    mixed_t = alpha * u * d2(4, 4) + ux * d2(2, 4) + d2(0, 4)
    assert ds.contains(mixed_t)


def test_determining_system_rejects_overlap(man):
    with pytest.raises(EngineError):
        determining_system(man, (sy.U, sy.jet(2, 0)), (sy.jet(2, 0),))


def test_determining_system_linear_case_single_arity():
    lin = Manifold(expand_equation(None, 0))
    ds = determining_system(lin, (sy.U,), (sy.jet(1, 0), sy.jet(0, 1)))
    # Q = lambda u solves the linear equation: residual of u must vanish
    assert residual(lin, u).is_zero
    # every generated equation must annihilate Q(u) = u, i.e. contain only
    # derivatives of order >= 2 in u or mixed first derivatives
    q_u = ex.symbol(sy.opaque("Q", (sy.U,), (1,)))
    q = ex.symbol(sy.opaque("Q", (sy.U,), (0,)))
    for eq in ds.equations:
        # substituting Q -> u, Q_u -> 1, higher -> 0 must satisfy the system
        subs = {sy.opaque("Q", (sy.U,), (0,)): u,
                sy.opaque("Q", (sy.U,), (1,)): ex.ONE,
                sy.opaque("Q", (sy.U,), (2,)): ex.ZERO,
                sy.opaque("Q", (sy.U,), (3,)): ex.ZERO}
        val = eq.substitute({s: subs.get(s, ex.ZERO) for s in eq.free_symbols()
                             if s.kind == sy.K_OPAQUE})
        assert val.is_zero()


def test_ansatz_single_translation(man):
    result = ansatz_solve(man, [ux])
    assert result.dimension == 1
    assert result.characteristics == [ux]


def test_ansatz_u_and_one_empty(man):
    result = ansatz_solve(man, [u, ex.ONE])
    assert result.dimension == 0


def test_point_affine_rediscovers_three_dims(man):
    result = ansatz_solve(man, point_affine_basis())
    assert result.dimension == 3
    sols = result.characteristics
    assert ux in sols
    assert ut in sols
    scaling = [q for q in sols if q not in (ux, ut)]
    assert len(scaling) == 1
    q = scaling[0]
    # canonical form x u_x - t u_t - c* u with the derived weight c* = 1
    assert q == x * ux - t * ut - u
    derived_weight = -q.coefficient(
        ex.monomial(((sy.U, 1),)), lambda s: s == sy.U
    ).as_fraction()
    assert derived_weight == 1
    assert derived_weight != claims.CLAIMED_SCALING_WEIGHT


def test_translation_closure_property(man):
    # any ansatz containing u_x and u_t keeps them in the solution span
    result = ansatz_solve(man, [ux, ut, u * ux, x * u])
    assert ux in result.characteristics
    assert ut in result.characteristics


def test_ansatz_rejects_unknown_constants(man):
    with pytest.raises(EngineError):
        ansatz_solve(man, [parse("c1*u")])


def test_bounded_order1_contact_scan(man):
    report = bounded_nonexistence(man, order=1, degree=3)
    assert report.total_dimension == 3
    assert report.new_dimension == 0  # no proper contact symmetry in the ansatz
    assert report.label == "ansatz-bounded"


def test_bounded_order2_scan(man):
    report = bounded_nonexistence(man, order=2, degree=3)
    assert report.total_dimension == 3
    assert report.new_dimension == 0
    assert report.basis_size == 168


def test_basis_limit():
    with pytest.raises(BasisTooLargeError):
        bounded_nonexistence(Manifold(), order=2, degree=3, basis_limit=10)


def test_spot_check_agreement(man):
    rng = random.Random(0)
    zero_rep = residual(man, ux)
    chk = spot_check(zero_rep.value, claims_zero=True, points=50, rng=rng)
    assert chk.agrees
    nonzero_rep = residual(man, u)
    chk2 = spot_check(nonzero_rep.value, claims_zero=False, points=50, rng=rng)
    assert chk2.agrees
    chk3 = spot_check(nonzero_rep.value, claims_zero=True, points=50, rng=rng)
    assert not chk3.agrees and chk3.witness is not None


def test_jet_monomial_basis_counts():
    basis = jet_monomial_basis(2, 3)
    # C(5+3,3) = 56 jet monomials, times {1, x, t}
    assert len(basis) == 168
    assert len({ex.grammar(b) if False else str(b) for b in basis}) == 168
