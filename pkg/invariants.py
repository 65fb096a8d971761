"""
Core invariant calculators: mixed log discrepancy, T/S/j, mixed beta,
finite-candidate lct, alpha/delta upper bounds and normalized volume.

Every infimum here runs over a finite candidate set, so alpha, delta and
lct values are upper bounds of the true invariants.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence, Union

from exact_arith import RationalLike, as_rational
from model import DiscrepancyData, DivisorOrders, FoliatedModel, ValuationRecord, check_t

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MixedDiscrepancy:
    """A^[t](E) = (1-t)(a_X+1) + t(a_F+eps), with both parts kept."""
    value: Fraction
    t: Fraction
    ambient_part: Fraction
    foliated_part: Fraction


@dataclass(frozen=True)
class BetaReport:
    """Everything the valuative criterion looks at for one valuation."""
    valuation_label: str
    t: Fraction
    A: Fraction
    S: Fraction
    T: Fraction
    j: Fraction
    beta: Fraction

    def as_row(self) -> dict:
        return {'valuation': self.valuation_label, 't': self.t, 'A': self.A,
                'S': self.S, 'T': self.T, 'j': self.j, 'beta': self.beta}


class CandidateBounds(NamedTuple):
    alpha_ub: Fraction
    delta_ub: Fraction


def mixed_log_discrepancy(t: RationalLike, v: Union[ValuationRecord, DiscrepancyData]) -> MixedDiscrepancy:
    t = check_t(t)
    ambient = (1 - t) * v.A_X
    foliated = t * v.A_F
    return MixedDiscrepancy(value=ambient + foliated, t=t, ambient_part=ambient, foliated_part=foliated)


def mixed_discrepancy_with_divisor(t: RationalLike, v: Union[ValuationRecord, DiscrepancyData],
                                   ordD: RationalLike) -> Fraction:
    """A^[t]_{X,F;D}(E) = A^[t]_{X,F}(E) - ord_E(D)."""
    return mixed_log_discrepancy(t, v).value - as_rational(ordD)


def pseudoeffective_threshold(v: ValuationRecord, model: FoliatedModel, t: RationalLike) -> Fraction:
    """T_{L_t}(E): the last breakpoint of x -> vol(L_t - xE)."""
    return v.volume_function(model, check_t(t)).threshold


def s_invariant(v: ValuationRecord, model: FoliatedModel, t: RationalLike) -> Fraction:
    """S_{L_t}(E) = (1/vol(L_t)) * integral_0^T vol(L_t - xE) dx."""
    f = v.volume_function(model, check_t(t))
    total = f.total_volume
    if total == 0:
        raise ZeroDivisionError(f"{v.label}: zero total volume")
    return f.integrate(0, f.threshold) / total


def j_invariant(v: ValuationRecord, model: FoliatedModel, t: RationalLike) -> Fraction:
    return pseudoeffective_threshold(v, model, t) - s_invariant(v, model, t)


def beta(v: ValuationRecord, model: FoliatedModel, t: RationalLike) -> BetaReport:
    """beta^[t](E) = A^[t](E) - S_{L_t}(E)."""
    t = model.check_ample(t)
    v.check_against(model)
    A = mixed_log_discrepancy(t, v).value
    S = s_invariant(v, model, t)
    T = pseudoeffective_threshold(v, model, t)
    report = BetaReport(valuation_label=v.label, t=t, A=A, S=S, T=T, j=T - S, beta=A - S)
    logger.debug(f"beta({v.label}; t={t}) = {report.beta} (A={A}, S={S}, T={T})")
    return report


def lct_over_candidates(t: RationalLike, D: DivisorOrders) -> Fraction:
    """min over entries with v(D) > 0 of A^[t](v) / v(D)."""
    support = D.support
    if not support:
        raise ValueError("every order is zero; the lct of D is not bounded by these candidates")
    return min(mixed_log_discrepancy(t, v).value / order for v, order in support)


def ratio_table(model: FoliatedModel, candidates: Sequence[ValuationRecord],
                t: RationalLike) -> List[dict]:
    """Per-candidate A, S, T and the ratios A/T, A/S."""
    rows = []
    for v in candidates:
        report = beta(v, model, t)
        rows.append({
            'valuation': v.label,
            'A': report.A,
            'S': report.S,
            'T': report.T,
            'A_over_T': report.A / report.T,
            'A_over_S': report.A / report.S,
        })
    return rows


def alpha_delta_over_candidates(model: FoliatedModel, candidates: Sequence[ValuationRecord],
                                t: RationalLike) -> CandidateBounds:
    """Upper bounds alpha_ub = min A/T and delta_ub = min A/S over the candidates."""
    if not candidates:
        raise ValueError("empty candidate set")
    rows = ratio_table(model, candidates, t)
    bounds = CandidateBounds(alpha_ub=min(r['A_over_T'] for r in rows),
                             delta_ub=min(r['A_over_S'] for r in rows))
    logger.debug(f"alpha_ub={bounds.alpha_ub}, delta_ub={bounds.delta_ub} over {len(rows)} candidates")
    return bounds


def uniform_margin(model: FoliatedModel, candidates: Sequence[ValuationRecord],
                   t: RationalLike) -> Optional[Fraction]:
    """min beta/j over the candidates, or None when some beta is negative.

    A positive value bounds the uniform-stability constant from above.
    """
    if not candidates:
        raise ValueError("empty candidate set")
    reports = [beta(v, model, t) for v in candidates]
    if any(r.beta < 0 for r in reports):
        return None
    return min(r.beta / r.j for r in reports)


def normalized_volume(v: ValuationRecord, t: RationalLike) -> Fraction:
    """A^[t](v)^n * vol(v)."""
    if v.val_volume is None:
        raise ValueError(f"{v.label}: no valuation volume supplied")
    return mixed_log_discrepancy(t, v).value ** v.n * v.val_volume
