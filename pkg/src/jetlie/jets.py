"""Reduced jet space of u_xt = F(u, u_x, ..., u_{x^n}).

Coordinates are x, t, u and the pure derivatives u_{x^i}, u_{t^j}; every
mixed derivative is eliminated through the equation and its differential
consequences u_{x^i t^j} = D_x^{i-1} D_t^{j-1} F, memoized per manifold.
Total derivatives come in two flavours: `total_dx`/`total_dt` act on the
solution manifold (mixed coordinates are reduced away), while the `free_`
variants act on the full jet space and are what off-manifold checks use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Union

from . import symbols as sy
from .expr import Expr, as_expr, symbol

DEFAULT_MAX_ORDER = 12


class JetOrderError(ValueError):
    def __init__(self, i: int, j: int, cap: int):
        super().__init__(
            f"coordinate u_[{i},{j}] exceeds the configured order cap {cap}"
        )
        self.coordinate = (i, j)
        self.cap = cap


@dataclass(frozen=True)
class Equation:
    """u_xt = rhs, with rhs polynomial in u and pure x-derivatives."""

    rhs: Expr

    def __post_init__(self):
        for s in self.rhs.free_symbols():
            if s.kind == sy.K_JET:
                i, j = s.jet_orders
                if j != 0:
                    raise ValueError("equation right side must not contain t-derivatives")
            elif s.kind not in (sy.K_PARAM, sy.K_CONST):
                raise ValueError(f"unsupported symbol {s.pretty()} in equation")


def expand_equation(alpha: Union[Expr, Fraction, int] = None,
                    beta: Union[Expr, Fraction, int] = None) -> Equation:
    """The short pulse equation u_xt = alpha*u + (beta/3)*(u^3)_xx, expanded."""
    a = symbol(sy.ALPHA) if alpha is None else as_expr(alpha)
    b = symbol(sy.BETA) if beta is None else as_expr(beta)
    u3 = symbol(sy.U) ** 3
    rhs = a * symbol(sy.U) + b.scale(Fraction(1, 3)) * free_total_dx(free_total_dx(u3))
    return Equation(rhs=rhs)


def _rate(s: sy.Sym, direction: int, produce):
    """D(s) for a single symbol; direction 0 = x, 1 = t.

    `produce(i, j)` maps a requested jet coordinate to an expression (free or
    manifold-reduced).  Returns None for symbols with zero rate.
    """
    if s.kind == sy.K_VAR:
        moving = sy.X if direction == 0 else sy.T
        return _const_one() if s == moving else None
    if s.kind == sy.K_JET:
        i, j = s.jet_orders
        return produce(i + (1 - direction), j + direction)
    if s.kind == sy.K_OPAQUE:
        func, args, multi = s.data
        total = None
        for idx, arg in enumerate(args):
            rate = _rate(arg, direction, produce)
            if rate is None or rate.is_zero():
                continue
            bumped = list(multi)
            bumped[idx] += 1
            piece = symbol(sy.opaque(func, args, tuple(bumped))) * rate
            total = piece if total is None else total + piece
        return total
    return None


def _const_one() -> Expr:
    from .expr import ONE

    return ONE


def _total_derivative(e: Expr, direction: int, produce) -> Expr:
    from .expr import ZERO

    total = ZERO
    for s in sorted(e.free_symbols(), key=lambda s: s.sort_key()):
        rate = _rate(s, direction, produce)
        if rate is None or rate.is_zero():
            continue
        total = total + e.diff_atom(s) * rate
    return total


def free_total_dx(e: Expr, max_order: int = DEFAULT_MAX_ORDER) -> Expr:
    return _total_derivative(e, 0, _free_producer(max_order))


def free_total_dt(e: Expr, max_order: int = DEFAULT_MAX_ORDER) -> Expr:
    return _total_derivative(e, 1, _free_producer(max_order))


def _free_producer(max_order: int):
    def produce(i: int, j: int) -> Expr:
        if i + j > max_order:
            raise JetOrderError(i, j, max_order)
        return symbol(sy.jet(i, j))

    return produce


class Manifold:
    """The equation's solution manifold with memoized mixed-derivative elimination."""

    def __init__(self, equation: Optional[Equation] = None,
                 max_order: int = DEFAULT_MAX_ORDER):
        self.equation = equation if equation is not None else expand_equation()
        self.max_order = max_order
        self._mixed: Dict[tuple, Expr] = {}

    @property
    def rhs(self) -> Expr:
        return self.equation.rhs

    def reduce_mixed(self, i: int, j: int) -> Expr:
        """u_{x^i t^j} (i, j >= 1) written in reduced coordinates."""
        if i < 1 or j < 1:
            raise ValueError("reduce_mixed needs a mixed coordinate (i, j >= 1)")
        if i + j > self.max_order:
            raise JetOrderError(i, j, self.max_order)
        key = (i, j)
        cached = self._mixed.get(key)
        if cached is not None:
            return cached
        if i == 1 and j == 1:
            value = self.rhs
        elif i > 1:
            value = self.total_dx(self.reduce_mixed(i - 1, j))
        else:
            value = self.total_dt(self.reduce_mixed(1, j - 1))
        self._mixed[key] = value
        return value

    def _producer(self):
        def produce(i: int, j: int) -> Expr:
            if i + j > self.max_order:
                raise JetOrderError(i, j, self.max_order)
            if i >= 1 and j >= 1:
                return self.reduce_mixed(i, j)
            return symbol(sy.jet(i, j))

        return produce

    def total_dx(self, e: Expr) -> Expr:
        return _total_derivative(e, 0, self._producer())

    def total_dt(self, e: Expr) -> Expr:
        return _total_derivative(e, 1, self._producer())

    def dx_power(self, e: Expr, n: int) -> Expr:
        for _ in range(n):
            e = self.total_dx(e)
        return e
