"""
Donaldson-Futaki, Ding and J^NA from intersection numbers of a compactified
test configuration, plus the DF = beta identity for Rees configurations.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

from exact_arith import RationalLike, as_rational
from invariants import beta, lct_over_candidates, mixed_discrepancy_with_divisor
from model import DiscrepancyData, DivisorOrders, FoliatedModel, ValuationRecord, check_t

logger = logging.getLogger(__name__)


class InconsistentDataError(ValueError):
    """Intersection numbers that no test configuration can have"""


@dataclass(frozen=True)
class TestConfigData:
    """Intersection numbers of a compactified test configuration.

    Lbar_pow = Lbar^{n+1}, K_dot_L = K^[t]_{Xbar/P1} . Lbar^n,
    L_mu_pullback = Lbar . (mu^* L)^n.
    """
    __test__ = False  # keep pytest from collecting this as a test class

    n: int
    V: Fraction
    mu: Fraction
    Lbar_pow: Fraction
    K_dot_L: Fraction
    t: Fraction
    L_mu_pullback: Fraction = Fraction(0)
    lct_along_fibre: Optional[Fraction] = None
    label: str = ""

    def __post_init__(self):
        for name in ('V', 'mu', 'Lbar_pow', 'K_dot_L', 't', 'L_mu_pullback'):
            object.__setattr__(self, name, as_rational(getattr(self, name)))
        if self.lct_along_fibre is not None:
            object.__setattr__(self, 'lct_along_fibre', as_rational(self.lct_along_fibre))
        if self.n < 1:
            raise ValueError(f"dimension must be positive, got {self.n}")
        if self.V <= 0:
            raise ValueError(f"V must be positive, got {self.V}")


class FibreComponent(NamedTuple):
    """A divisorial valuation w over the total space, seen through its numbers."""
    discrepancy: DiscrepancyData
    order_B: Fraction
    order_fibre: Fraction


class ReesCheck(NamedTuple):
    beta: Fraction
    Lbar_pow: Fraction
    df: Fraction


@dataclass(frozen=True)
class TestConfigVerdict:
    __test__ = False

    df_nonnegative: bool
    ding_nonnegative: Optional[bool]
    df_uniform: Optional[bool]
    ding_uniform: Optional[bool]


def _require_volume(V: Fraction) -> None:
    if V <= 0:
        raise ValueError(f"V must be positive, got {V}")


def df(data: TestConfigData) -> Fraction:
    """DF = (1/V) (n/(n+1) mu Lbar^{n+1} + K^[t] . Lbar^n)."""
    _require_volume(data.V)
    n = data.n
    return (Fraction(n, n + 1) * data.mu * data.Lbar_pow + data.K_dot_L) / data.V


def df_anti_adjoint(n: int, V: RationalLike, Lbar_pow: RationalLike) -> Fraction:
    """DF when L = -K^[t]: mu = 1 and DF = -Lbar^{n+1} / ((n+1) V)."""
    V = as_rational(V)
    _require_volume(V)
    return -as_rational(Lbar_pow) / ((n + 1) * V)


def df_from_beta(v: ValuationRecord, model: FoliatedModel, t: RationalLike) -> ReesCheck:
    """DF of the Rees configuration of a dreamy valuation equals beta.

    The synthetic Lbar^{n+1} = -(n+1) V beta is pushed back through the
    anti-adjoint formula and must return beta exactly.
    """
    report = beta(v, model, t)
    V = model.volume(report.t)
    Lbar_pow = -(model.n + 1) * V * report.beta
    value = df_anti_adjoint(model.n, V, Lbar_pow)
    if value != report.beta:
        raise ArithmeticError(f"{v.label}: DF {value} != beta {report.beta}")
    return ReesCheck(beta=report.beta, Lbar_pow=Lbar_pow, df=value)


def jna(data: TestConfigData) -> Fraction:
    """J^NA = (1/V) (Lbar . (mu^* L)^n - Lbar^{n+1} / (n+1))."""
    _require_volume(data.V)
    value = (data.L_mu_pullback - data.Lbar_pow / (data.n + 1)) / data.V
    if value < 0:
        raise InconsistentDataError(f"inconsistent intersection data: J^NA = {value} < 0")
    return value


def ding(data: TestConfigData) -> Fraction:
    """Ding = -Lbar^{n+1} / ((n+1) V) - (1 - t) + lct^[t]."""
    _require_volume(data.V)
    if data.lct_along_fibre is None:
        raise ValueError(f"{data.label or 'test configuration'}: missing lct along the central fibre")
    return -data.Lbar_pow / ((data.n + 1) * data.V) - (1 - data.t) + data.lct_along_fibre


def fibre_lct(t: RationalLike, components: Sequence[FibreComponent]) -> Fraction:
    """inf over fibre valuations w of (A^[t](w) - w(B)) / w(Xbar_0).

    An invariant vertical component with a_X = a_F = 0 has A^[t] = 1 - t.
    """
    t = check_t(t)
    if not any(as_rational(c.order_fibre) > 0 for c in components):
        raise ValueError("no component with positive order along the central fibre")
    if all(as_rational(c.order_B) == 0 for c in components):
        # no boundary: this is the lct of the central fibre itself
        return lct_over_candidates(t, DivisorOrders(tuple((c.discrepancy, c.order_fibre) for c in components)))
    ratios = []
    for c in components:
        order_fibre = as_rational(c.order_fibre)
        if order_fibre <= 0:
            continue
        ratios.append(mixed_discrepancy_with_divisor(t, c.discrepancy, c.order_B) / order_fibre)
    return min(ratios)


def stability_verdict(data: TestConfigData, delta: RationalLike = 0) -> TestConfigVerdict:
    """Sign checks DF >= 0, Ding >= 0 and the uniform checks against delta * J^NA."""
    delta = as_rational(delta)
    df_value = df(data)
    ding_value = ding(data) if data.lct_along_fibre is not None else None
    j_value = jna(data) if delta > 0 else None
    return TestConfigVerdict(
        df_nonnegative=df_value >= 0,
        ding_nonnegative=None if ding_value is None else ding_value >= 0,
        df_uniform=None if j_value is None else df_value >= delta * j_value,
        ding_uniform=None if j_value is None or ding_value is None else ding_value >= delta * j_value,
    )
