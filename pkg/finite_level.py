"""
Finite-level basis-type invariants on projective space

Sections of O(D) on P^n are monomials of degree D in x_0..x_n, so the
vanishing orders of a basis adapted to a monomial valuation are read off
by stars-and-bars counting.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import comb
from typing import Iterable, List, Optional, Sequence, Tuple

import config
from exact_arith import RationalLike, as_rational
from invariants import mixed_log_discrepancy, s_invariant
from model import (DivisorOrders, FoliatedModel, ValuationRecord, hyperplane_valuation,
                   make_pn_model, point_blowup_valuation)

logger = logging.getLogger(__name__)


class Template(Enum):
    """Monomial valuations on P^n"""
    HYPERPLANE = "hyperplane"   # ord along {x_0 = 0}
    POINT = "point"             # ord at [1:0:...:0]


@dataclass(frozen=True)
class OrderHistogram:
    """Vanishing orders of an adapted basis of H^0(X, mL) with multiplicities."""
    m: int
    counts: Tuple[Tuple[int, int], ...]
    N_m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"level m must be positive, got {self.m}")
        orders = [order for order, _ in self.counts]
        if any(order < 0 for order in orders) or any(a >= b for a, b in zip(orders, orders[1:])):
            raise ValueError("orders must be nonnegative and strictly increasing")
        if any(mult <= 0 for _, mult in self.counts):
            raise ValueError("multiplicities must be positive")
        if sum(mult for _, mult in self.counts) != self.N_m:
            raise ValueError(f"multiplicities do not add up to N_m = {self.N_m}")

    def as_dict(self) -> dict:
        return dict(self.counts)


@dataclass(frozen=True)
class ConvergenceRow:
    m: int
    S_m: Fraction
    gap: Fraction


def section_count(n: int, degree: int) -> int:
    """h^0(P^n, O(degree)) = binomial(degree + n, n)."""
    if degree < 0:
        raise ValueError(f"negative degree {degree}")
    return comb(degree + n, n)


def order_histogram(n: int, degree: int, template: Template, m: Optional[int] = None) -> OrderHistogram:
    """Adapted-basis vanishing orders for a monomial template.

    m defaults to degree (L = H). For the hyperplane template the order is
    the x_0-exponent; for the point template it is the total degree in
    x_1..x_n.
    """
    if not isinstance(template, Template):
        raise ValueError(f"unsupported template {template!r}")
    N = section_count(n, degree)
    if template is Template.HYPERPLANE:
        # monomials of degree (degree - k) in x_1..x_n
        counts = tuple((k, comb(degree - k + n - 1, n - 1)) for k in range(degree + 1))
    else:
        # monomials of degree j in x_1..x_n
        counts = tuple((j, comb(j + n - 1, n - 1)) for j in range(degree + 1))
    return OrderHistogram(m=degree if m is None else m, counts=counts, N_m=N)


def level_degree(d: RationalLike, m: int) -> int:
    """Degree of mL for L = dH; mL must be Cartier."""
    d = as_rational(d)
    if m < 1 or m > config.MAX_LEVEL:
        raise ValueError(f"level m must lie in [1, {config.MAX_LEVEL}], got {m}")
    degree = d * m
    if degree.denominator != 1:
        raise ValueError(f"m = {m} does not clear the denominator of L = {d}H")
    return int(degree)


def histogram_at_level(n: int, d: RationalLike, m: int, template: Template) -> OrderHistogram:
    return order_histogram(n, level_degree(d, m), template, m=m)


def s_m(hist: OrderHistogram) -> Fraction:
    """S_m = (1 / (m N_m)) * sum of adapted-basis vanishing orders."""
    total = sum(order * mult for order, mult in hist.counts)
    return Fraction(total, hist.m * hist.N_m)


def basis_type_divisor_orders(v: ValuationRecord, hist: OrderHistogram) -> DivisorOrders:
    """The m-basis type divisor D_v adapted to v, seen through v: v(D_v) = S_m(v)."""
    return DivisorOrders(((v, s_m(hist)),))


def delta_m(t: RationalLike, model: FoliatedModel,
            candidates: Sequence[Tuple[ValuationRecord, OrderHistogram]], m: int) -> Fraction:
    """min over candidates of A^[t] / S_m, an upper bound of delta_m^[t]."""
    t = model.check_ample(t)
    if not candidates:
        raise ValueError("empty candidate set")
    ratios = []
    for v, hist in candidates:
        if hist.m != m:
            raise ValueError(f"{v.label}: histogram is at level {hist.m}, expected {m}")
        level_s = s_m(hist)
        if level_s == 0:
            raise ValueError(f"{v.label}: S_m = 0 (trivial valuation)")
        ratios.append(mixed_log_discrepancy(t, v).value / level_s)
    return min(ratios)


def _template_valuation(template: Template, model: FoliatedModel) -> ValuationRecord:
    if template is Template.HYPERPLANE:
        return hyperplane_valuation(model, invariant=False, label="hyperplane")
    return point_blowup_valuation(model, a_X=model.n - 1, a_F=0, epsilon=1, label="point")


def convergence_report(template: Template, m_list: Iterable[int], n: int = 2,
                       d: RationalLike = 3) -> List[ConvergenceRow]:
    """Rows (m, S_m, |S_m - S|) for L = dH on P^n; S comes from the volume function."""
    d = as_rational(d)
    model = make_pn_model(n, d, d, fixed_coefficient=d, label=f"P^{n}, L={d}H")
    S = s_invariant(_template_valuation(template, model), model, 0)
    rows = []
    for m in m_list:
        level_s = s_m(histogram_at_level(n, d, m, template))
        rows.append(ConvergenceRow(m=m, S_m=level_s, gap=abs(level_s - S)))
        logger.debug(f"{template.value} m={m}: S_m={level_s}, S={S}")
    return rows
