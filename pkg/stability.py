"""
Wall-crossing in t, destabilizer searches, sufficient stability criteria,
weighted blow-up discrepancies and the epsilon-lc boundedness certificate.

Verdicts are one-sided: a candidate with negative beta refutes
semistability, while "no destabilizer" only speaks about the candidates
that were checked.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence

import config
from exact_arith import RationalLike, as_rational
from invariants import BetaReport, alpha_delta_over_candidates, beta, s_invariant
from model import FoliatedModel, PolarizationRule, ValuationRecord, check_t

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AffineInT:
    """f(t) = intercept + slope * t"""
    intercept: Fraction
    slope: Fraction

    def __call__(self, t: RationalLike) -> Fraction:
        return self.intercept + self.slope * as_rational(t)

    def root(self) -> Optional[Fraction]:
        if self.slope == 0:
            return None
        return -self.intercept / self.slope

    def __str__(self):
        return f"{self.intercept} + ({self.slope})*t"


@dataclass(frozen=True)
class TInterval:
    """Closed interval [lo, hi] inside [0, 1], or empty.

    wall holds the exact ampleness wall when hi closes an open boundary.
    """
    lo: Fraction = Fraction(0)
    hi: Fraction = Fraction(1)
    empty: bool = False
    wall: Optional[Fraction] = None

    def __post_init__(self):
        if not self.empty and not 0 <= self.lo <= self.hi <= 1:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @classmethod
    def nothing(cls, wall: Optional[Fraction] = None) -> 'TInterval':
        return cls(Fraction(0), Fraction(0), empty=True, wall=wall)

    def contains(self, t: RationalLike) -> bool:
        t = as_rational(t)
        return not self.empty and self.lo <= t <= self.hi

    def intersect(self, other: 'TInterval') -> 'TInterval':
        wall = self.wall if self.wall is not None else other.wall
        if self.empty or other.empty:
            return TInterval.nothing(wall)
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            return TInterval.nothing(wall)
        return TInterval(lo, hi, wall=wall)

    def is_subset_of(self, other: 'TInterval') -> bool:
        if self.empty:
            return True
        return not other.empty and other.lo <= self.lo and self.hi <= other.hi

    def __str__(self):
        text = "empty" if self.empty else f"[{self.lo}, {self.hi}]"
        if self.wall is not None:
            text += f" (ampleness wall at t = {self.wall})"
        return text


class AlphaVerdict(Enum):
    UNIFORMLY_STABLE = "uniformly stable"
    SEMISTABLE = "semistable (sufficient criterion)"
    INCONCLUSIVE = "inconclusive"


class BlowupCase(Enum):
    INVARIANT = "invariant"
    TRANSVERSE = "transverse"


class BlowupPullback(NamedTuple):
    value: Fraction
    bound_ok: bool


@dataclass
class DestabilizerVerdict:
    """Outcome of a destabilizer search at one t"""
    t: Fraction
    n_candidates: int
    destabilized: bool
    label: Optional[str] = None
    beta: Optional[Fraction] = None
    delta_ub: Optional[Fraction] = None
    reports: List[BetaReport] = field(default_factory=list)

    @property
    def message(self) -> str:
        if self.destabilized:
            return f"destabilized by {self.label} with beta = {self.beta}"
        return f"no destabilizer among {self.n_candidates} candidates; delta_ub = {self.delta_ub}"


def _require_proportional(model: FoliatedModel) -> None:
    if not model.is_proportional:
        raise ValueError(f"model {model.label!r} is not in proportional mode")


def beta_affine_form(v: ValuationRecord, model: FoliatedModel) -> AffineInT:
    """beta^[t](v) as an affine function of t on a proportional model.

    With L_t = lambda_t (-K_X):
        beta(t) = lambda_t (A_X - S_0) + t (A_F - q A_X),  S_0 = S_{-K_X}(v).
    With a fixed polarization S does not move and beta(t) = A_X - S + t (A_F - A_X).
    """
    _require_proportional(model)
    v.check_against(model)
    S0 = s_invariant(v, model, 0)
    if model.polarization is PolarizationRule.ANTI_ADJOINT:
        q = model.q
        intercept = v.A_X - S0
        slope = (q - 1) * (v.A_X - S0) + v.A_F - q * v.A_X
    else:
        intercept = v.A_X - S0
        slope = v.A_F - v.A_X
    return AffineInT(intercept, slope)


def ample_interval(model: FoliatedModel) -> TInterval:
    """{t in [0,1] : lambda_t > 0}, closed just below an open wall."""
    wall = model.ample_wall() if model.is_proportional else None
    if wall is None:
        return TInterval(Fraction(0), Fraction(1))
    grid = config.AMPLE_WALL_DENOMINATOR
    hi = Fraction(math.ceil(wall * grid) - 1, grid)
    if hi < 0:
        return TInterval.nothing(wall)
    return TInterval(Fraction(0), hi, wall=wall)


def admissible_interval(f: AffineInT, ample_range: TInterval) -> TInterval:
    """{t : f(t) >= 0} intersected with ample_range."""
    if ample_range.empty:
        raise ValueError("ample range is empty")
    lo, hi = ample_range.lo, ample_range.hi
    if f.slope == 0:
        return ample_range if f.intercept >= 0 else TInterval.nothing(ample_range.wall)
    r = f.root()
    if f.slope > 0:
        lo = max(lo, r)
    else:
        hi = min(hi, r)
    if lo > hi:
        return TInterval.nothing(ample_range.wall)
    wall = ample_range.wall if hi == ample_range.hi else None
    return TInterval(lo, hi, wall=wall)


def semistable_interval(model: FoliatedModel, candidates: Sequence[ValuationRecord]) -> TInterval:
    """Intersection of the candidates' admissible intervals with the ample range.

    The result contains the true semistable locus.
    """
    _require_proportional(model)
    if not candidates:
        raise ValueError("empty candidate set; refusing a vacuous interval")
    ample = ample_interval(model)
    if ample.empty:
        return ample
    result = ample
    for v in candidates:
        result = result.intersect(admissible_interval(beta_affine_form(v, model), ample))
    logger.info(f"semistable interval for {model.label} over {len(candidates)} candidates: {result}")
    return result


def destabilizer_search(model: FoliatedModel, candidates: Sequence[ValuationRecord],
                        t: RationalLike) -> DestabilizerVerdict:
    """Look for a candidate with negative beta; most negative first, ties by label."""
    t = model.check_ample(t)
    if not candidates:
        raise ValueError("empty candidate set")
    reports = sorted((beta(v, model, t) for v in candidates),
                     key=lambda r: (r.beta, r.valuation_label))
    worst = reports[0]
    if worst.beta < 0:
        verdict = DestabilizerVerdict(t=t, n_candidates=len(reports), destabilized=True,
                                      label=worst.valuation_label, beta=worst.beta, reports=reports)
    else:
        bounds = alpha_delta_over_candidates(model, candidates, t)
        verdict = DestabilizerVerdict(t=t, n_candidates=len(reports), destabilized=False,
                                      delta_ub=bounds.delta_ub, reports=reports)
    logger.info(f"t={t}: {verdict.message}")
    return verdict


def sufficient_alpha_verdict(n: int, alpha_lb: RationalLike) -> AlphaVerdict:
    """alpha >= n/(n+1) gives semistability; strict inequality gives uniform stability.

    alpha_lb must be a certified lower bound; it is trusted as given.
    """
    alpha_lb = as_rational(alpha_lb)
    threshold = Fraction(n, n + 1)
    if alpha_lb > threshold:
        return AlphaVerdict.UNIFORMLY_STABLE
    if alpha_lb == threshold:
        return AlphaVerdict.SEMISTABLE
    return AlphaVerdict.INCONCLUSIVE


def _check_blowup(d: int, r: int, k: Fraction, b: Fraction, t: Fraction, case: BlowupCase) -> None:
    if d < 1 or not 1 <= r <= d:
        raise ValueError(f"need 1 <= r <= d, got r={r}, d={d}")
    if case is BlowupCase.INVARIANT and r == d:
        raise ValueError("a rank-d foliation has no invariant divisors; invariant case needs r < d")
    if k <= 0 or b <= 0:
        raise ValueError(f"weights need k > 0 and b > 0, got k={k}, b={b}")
    check_t(t)


def weighted_blowup_discrepancy(d: int, r: int, k: RationalLike, b: RationalLike, t: RationalLike,
                                case: BlowupCase) -> Fraction:
    """A^[t] of the weighted blow-up with weights (k/b, k, ..., k) at a smooth point.

    invariant:  (1-t)(k/b + (d-1)k) + t r k
    transverse: (1-t)(k/b + (d-1)k) + t (k/b + (r-1)k)
    """
    k, b, t = as_rational(k), as_rational(b), as_rational(t)
    _check_blowup(d, r, k, b, t, case)
    ambient = k / b + (d - 1) * k
    foliated = r * k if case is BlowupCase.INVARIANT else k / b + (r - 1) * k
    return (1 - t) * ambient + t * foliated


def weighted_blowup_pullback(d: int, r: int, k: RationalLike, b: RationalLike, t: RationalLike,
                             case: BlowupCase, a: RationalLike) -> BlowupPullback:
    """A^[t]_{X,F}(F) for the weighted blow-up over a divisor E with A^[t](E) = a.

    The coefficient of E in K^[t]_Y - mu^* K^[t]_X is a - ((1-t) + t eps(E)),
    and ord_F(E) = k/b; the bound checked is A^[t](F) <= k d.
    """
    a = as_rational(a)
    if a < 0:
        raise ValueError(f"log discrepancy a must be >= 0, got {a}")
    k, b, t = as_rational(k), as_rational(b), as_rational(t)
    upstairs = weighted_blowup_discrepancy(d, r, k, b, t, case)
    eps = 0 if case is BlowupCase.INVARIANT else 1
    value = upstairs + (a - ((1 - t) + t * eps)) * k / b
    return BlowupPullback(value=value, bound_ok=value <= k * d)


def epsilon_zero(d: int, V: RationalLike, delta: RationalLike) -> Fraction:
    """Lower bound min(delta^d V / d^d, 1) for divisorial A^[t] under alpha >= delta."""
    V, delta = as_rational(V), as_rational(delta)
    if d < 1 or V <= 0 or delta <= 0:
        raise ValueError(f"need d >= 1, V > 0, delta > 0; got d={d}, V={V}, delta={delta}")
    return min(delta ** d * V / Fraction(d) ** d, Fraction(1))


def epsilon_lc_certificate(d: int, V: RationalLike, delta: RationalLike, t: RationalLike) -> Fraction:
    """The epsilon of the boundedness statement: min(eps_0, t, 1 - t)."""
    t = as_rational(t)
    if not 0 < t < 1:
        raise ValueError(f"boundedness needs 0 < t < 1, got {t}")
    return min(epsilon_zero(d, V, delta), t, 1 - t)


def proportional_sufficient_check(model: FoliatedModel,
                                  candidates: Sequence[ValuationRecord]) -> List[dict]:
    """Per candidate: does A_X - S_0 >= 0 and A_F >= q A_X hold?

    Both terms of the affine form are then nonnegative wherever lambda_t > 0.
    """
    _require_proportional(model)
    rows = []
    for v in candidates:
        v.check_against(model)
        S0 = s_invariant(v, model, 0)
        rows.append({
            'valuation': v.label,
            'ambient_term': v.A_X - S0,
            'foliated_term': v.A_F - model.q * v.A_X,
            'holds': v.A_X - S0 >= 0 and v.A_F - model.q * v.A_X >= 0,
        })
    return rows


def instability_threshold(model: FoliatedModel,
                          candidates: Sequence[ValuationRecord]) -> Optional[Fraction]:
    """Smallest t0 such that some candidate has beta < 0 for every ample t > t0."""
    _require_proportional(model)
    ample = ample_interval(model)
    if ample.empty:
        return None
    walls = []
    for v in candidates:
        f = beta_affine_form(v, model)
        if f.slope < 0:
            r = max(f.root(), Fraction(0))
            if r < ample.hi:
                walls.append(r)
    return min(walls) if walls else None
