"""
Data model for polarized adjoint foliated structures and divisorial valuations

A FoliatedModel only stores numbers: the dimension, the volume of a
reference polarization and how the canonical classes relate. Valuations are
extensional records carrying their discrepancy data and a volume function
at the reference polarization; nothing is derived from equations.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from exact_arith import PiecewisePoly, RationalLike, UniPoly, as_rational, piecewise_scale

logger = logging.getLogger(__name__)


class ModelError(ValueError):
    """Malformed foliated model or valuation record"""


class RelationKind(Enum):
    """How K_F is tied to K_X"""
    PROPORTIONAL = "proportional"
    EXPLICIT = "explicit"


class PolarizationRule(Enum):
    """How the polarization depends on t"""
    FIXED = "fixed"
    ANTI_ADJOINT = "anti_adjoint"   # L_t = -K^[t] = lambda_t * (-K_X)


class VolumeScaling(Enum):
    """How a valuation's reference volume function follows L_t"""
    IDENTITY = "identity"
    LAMBDA = "lambda"


@dataclass(frozen=True)
class CanonicalRelation:
    """K_F ~ q K_X (proportional) or an explicit affine slope mu(t)."""
    kind: RelationKind
    q: Optional[Fraction] = None
    mu_intercept: Optional[Fraction] = None
    mu_slope: Optional[Fraction] = None

    @classmethod
    def proportional(cls, q: RationalLike) -> 'CanonicalRelation':
        return cls(RelationKind.PROPORTIONAL, q=as_rational(q))

    @classmethod
    def explicit(cls, mu_intercept: RationalLike, mu_slope: RationalLike = 0) -> 'CanonicalRelation':
        return cls(RelationKind.EXPLICIT, mu_intercept=as_rational(mu_intercept),
                   mu_slope=as_rational(mu_slope))


def check_t(t: RationalLike) -> Fraction:
    t = as_rational(t)
    if not 0 <= t <= 1:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    return t


@dataclass(frozen=True)
class FoliatedModel:
    """Numerical data of a polarized adjoint foliated structure.

    V is the volume of the reference polarization L_ref. With the
    ANTI_ADJOINT rule L_ref = -K_X and L_t = lambda_t * L_ref; with the FIXED
    rule L_t = L_ref for every t and L_ref ~ polarization_ratio * (-K_X).
    """
    n: int
    V: Fraction
    relation: CanonicalRelation
    polarization: PolarizationRule = PolarizationRule.ANTI_ADJOINT
    label: str = ""
    polarization_ratio: Fraction = Fraction(1)
    # Projective-space type data: L_ref = ref_coefficient * H, H^n = hyperplane_degree
    hyperplane_degree: Optional[Fraction] = None
    ref_coefficient: Optional[Fraction] = None

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ModelError(f"dimension must be a positive integer, got {self.n!r}")
        object.__setattr__(self, 'V', as_rational(self.V))
        object.__setattr__(self, 'polarization_ratio', as_rational(self.polarization_ratio))
        if self.V <= 0:
            raise ModelError(f"volume must be positive, got {self.V}")
        if self.polarization_ratio <= 0:
            raise ModelError("polarization ratio must be positive")
        if self.polarization is PolarizationRule.ANTI_ADJOINT and self.polarization_ratio != 1:
            raise ModelError("the anti-adjoint polarization has L_ref = -K_X; polarization_ratio must be 1")
        if self.relation.kind is RelationKind.EXPLICIT and self.polarization is PolarizationRule.ANTI_ADJOINT:
            raise ModelError("explicit slope data needs a fixed polarization")

    @property
    def is_proportional(self) -> bool:
        return self.relation.kind is RelationKind.PROPORTIONAL

    @property
    def is_projective_space_type(self) -> bool:
        return self.hyperplane_degree is not None and self.ref_coefficient is not None

    @property
    def q(self) -> Fraction:
        if not self.is_proportional:
            raise ModelError(f"model {self.label!r} has no proportionality constant")
        return self.relation.q

    def lambda_t(self, t: RationalLike) -> Fraction:
        """lambda_t = 1 + (q - 1) t, so that -K^[t] ~ lambda_t (-K_X)."""
        return 1 + (self.q - 1) * as_rational(t)

    def ample_wall(self) -> Optional[Fraction]:
        """First t in (0, 1] where lambda_t stops being positive, if any."""
        if not self.is_proportional or self.q >= 1:
            return None
        wall = 1 / (1 - self.q)
        return wall if wall <= 1 else None

    def is_adjoint_fano(self, t: RationalLike) -> bool:
        t = check_t(t)
        if self.is_proportional:
            return self.lambda_t(t) > 0
        return True

    def check_ample(self, t: RationalLike) -> Fraction:
        t = check_t(t)
        if not self.is_adjoint_fano(t):
            raise ValueError(f"not adjoint Fano at this t: lambda_{t} = {self.lambda_t(t)} <= 0")
        return t

    def polarization_scale(self, t: RationalLike) -> Fraction:
        """The factor c with L_t = c * L_ref."""
        if self.polarization is PolarizationRule.ANTI_ADJOINT:
            return self.lambda_t(t)
        return Fraction(1)

    def volume(self, t: RationalLike) -> Fraction:
        """V(t) = L_t^n."""
        t = self.check_ample(t)
        return self.V * self.polarization_scale(t) ** self.n

    def slope(self, t: RationalLike) -> Fraction:
        """Foliated slope mu = (-K^[t] . L^{n-1}) / L^n."""
        t = as_rational(t)
        if not self.is_proportional:
            return self.relation.mu_intercept + self.relation.mu_slope * t
        if self.polarization is PolarizationRule.ANTI_ADJOINT:
            return Fraction(1)
        return self.lambda_t(t) / self.polarization_ratio

    def h_coefficient(self, t: RationalLike) -> Fraction:
        """Coefficient of H in L_t on a projective-space type model."""
        if not self.is_projective_space_type:
            raise ModelError(f"model {self.label!r} is not of projective-space type")
        return self.ref_coefficient * self.polarization_scale(t)


def make_pn_model(n: int, d_X: RationalLike, d_F: RationalLike,
                  hyperplane_degree: RationalLike = 1,
                  fixed_coefficient: Optional[RationalLike] = None,
                  label: str = "") -> FoliatedModel:
    """Projective-space type model with -K_X = d_X H and -K_F = d_F H.

    By default L_t = -K^[t] = ((1-t) d_X + t d_F) H. Passing fixed_coefficient c
    fixes L = cH for every t instead.
    """
    if not isinstance(n, int) or n < 1:
        raise ModelError(f"dimension must be a positive integer, got {n!r}")
    d_X, d_F = as_rational(d_X), as_rational(d_F)
    degree = as_rational(hyperplane_degree)
    if d_X <= 0:
        raise ModelError(f"-K_X must be ample: d_X = {d_X}")
    if degree <= 0:
        raise ModelError("hyperplane degree H^n must be positive")
    relation = CanonicalRelation.proportional(d_F / d_X)
    if fixed_coefficient is None:
        coefficient = d_X
        rule = PolarizationRule.ANTI_ADJOINT
    else:
        coefficient = as_rational(fixed_coefficient)
        rule = PolarizationRule.FIXED
        if coefficient <= 0:
            raise ModelError("fixed polarization coefficient must be positive")
    model = FoliatedModel(
        n=n,
        V=degree * coefficient ** n,
        relation=relation,
        polarization=rule,
        label=label or f"P^{n}(d_X={d_X}, d_F={d_F})",
        polarization_ratio=coefficient / d_X,
        hyperplane_degree=degree,
        ref_coefficient=coefficient,
    )
    logger.debug(f"built model {model.label}: q={model.q}, V_ref={model.V}, rule={rule.value}")
    return model


def make_proportional_model(n: int, V: RationalLike, q: RationalLike,
                            polarization: PolarizationRule = PolarizationRule.ANTI_ADJOINT,
                            polarization_ratio: RationalLike = 1,
                            label: str = "") -> FoliatedModel:
    """Proportional model K_F ~ q K_X on an arbitrary Fano X; V = L_ref^n."""
    return FoliatedModel(n=n, V=as_rational(V), relation=CanonicalRelation.proportional(q),
                         polarization=polarization, label=label,
                         polarization_ratio=as_rational(polarization_ratio))


def make_explicit_model(n: int, V: RationalLike, mu_intercept: RationalLike,
                        mu_slope: RationalLike = 0, label: str = "") -> FoliatedModel:
    """Model with a fixed polarization and explicitly supplied slope mu(t)."""
    return FoliatedModel(n=n, V=as_rational(V),
                         relation=CanonicalRelation.explicit(mu_intercept, mu_slope),
                         polarization=PolarizationRule.FIXED, label=label)


@dataclass(frozen=True)
class DiscrepancyData:
    """Discrepancy triple of a divisor without volume data (fibre components)."""
    label: str
    a_X: Fraction
    a_F: Fraction
    epsilon: int

    def __post_init__(self):
        object.__setattr__(self, 'a_X', as_rational(self.a_X))
        object.__setattr__(self, 'a_F', as_rational(self.a_F))
        if self.epsilon not in (0, 1):
            raise ModelError(f"{self.label}: epsilon must be 0 (invariant) or 1 (transverse)")

    @property
    def A_X(self) -> Fraction:
        return self.a_X + 1

    @property
    def A_F(self) -> Fraction:
        return self.a_F + self.epsilon


@dataclass(frozen=True)
class ValuationRecord:
    """A divisorial valuation with its discrepancy data.

    vol_fn_base is x -> vol(L_ref - xE) in reference dimension n.
    """
    label: str
    a_X: Fraction
    a_F: Fraction
    epsilon: int
    vol_fn_base: PiecewisePoly
    n: int
    vol_fn_scaling: VolumeScaling = VolumeScaling.LAMBDA
    val_volume: Optional[Fraction] = None
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, 'a_X', as_rational(self.a_X))
        object.__setattr__(self, 'a_F', as_rational(self.a_F))
        if self.val_volume is not None:
            object.__setattr__(self, 'val_volume', as_rational(self.val_volume))
            if self.val_volume <= 0:
                raise ModelError(f"{self.label}: valuation volume must be positive")
        if self.epsilon not in (0, 1):
            raise ModelError(f"{self.label}: epsilon must be 0 (invariant) or 1 (transverse)")
        if self.n < 1:
            raise ModelError(f"{self.label}: reference dimension must be positive")
        if self.vol_fn_base.threshold <= 0:
            raise ModelError(f"{self.label}: trivial valuation (T = 0)")

    @property
    def A_X(self) -> Fraction:
        """Ambient log discrepancy a(E, X) + 1."""
        return self.a_X + 1

    @property
    def A_F(self) -> Fraction:
        """Foliated log discrepancy a(E, F) + epsilon(E)."""
        return self.a_F + self.epsilon

    @property
    def is_invariant(self) -> bool:
        return self.epsilon == 0

    @property
    def reference_volume(self) -> Fraction:
        return self.vol_fn_base.total_volume

    def check_against(self, model: FoliatedModel) -> None:
        if self.n != model.n:
            raise ModelError(f"{self.label}: dimension {self.n} does not match model dimension {model.n}")
        if self.reference_volume != model.V:
            raise ModelError(
                f"{self.label}: volume function starts at {self.reference_volume}, "
                f"model reference volume is {model.V}")

    def volume_function(self, model: FoliatedModel, t: RationalLike) -> PiecewisePoly:
        """x -> vol(L_t - xE)."""
        if self.vol_fn_scaling is VolumeScaling.IDENTITY:
            return self.vol_fn_base
        return piecewise_scale(self.vol_fn_base, model.polarization_scale(t), self.n)


@dataclass(frozen=True)
class DivisorOrders:
    """The orders v(D) of a fixed effective divisor D along candidate valuations."""
    entries: Tuple[Tuple[Union[ValuationRecord, DiscrepancyData], Fraction], ...] = field(default_factory=tuple)

    def __post_init__(self):
        entries = tuple((v, as_rational(order)) for v, order in self.entries)
        for v, order in entries:
            if order < 0:
                raise ModelError(f"{v.label}: order of an effective divisor must be >= 0")
        object.__setattr__(self, 'entries', entries)

    @property
    def support(self) -> List[Tuple[Union[ValuationRecord, DiscrepancyData], Fraction]]:
        return [(v, order) for v, order in self.entries if order > 0]


def _scaling_for(model: FoliatedModel) -> VolumeScaling:
    if model.polarization is PolarizationRule.ANTI_ADJOINT:
        return VolumeScaling.LAMBDA
    return VolumeScaling.IDENTITY


def divisor_class_valuation(model: FoliatedModel, class_multiple: RationalLike,
                            invariant: bool, a_X: RationalLike = 0, a_F: RationalLike = 0,
                            label: str = "", val_volume: Optional[RationalLike] = None) -> ValuationRecord:
    """ord_D for a prime divisor D ~ mH on a projective-space type model.

    vol(cH - xD) = H^n (c - m x)^n on [0, c/m].
    """
    if not model.is_projective_space_type:
        raise ModelError(f"model {model.label!r} is not of projective-space type")
    m = as_rational(class_multiple)
    if m <= 0:
        raise ModelError("divisor class multiple must be positive")
    c = model.ref_coefficient
    piece = UniPoly.linear_power(c, -m, model.n, scale=model.hyperplane_degree)
    return ValuationRecord(
        label=label or ("invariant_divisor" if invariant else "transverse_divisor"),
        a_X=as_rational(a_X),
        a_F=as_rational(a_F),
        epsilon=0 if invariant else 1,
        vol_fn_base=PiecewisePoly((Fraction(0), c / m), (piece,)),
        n=model.n,
        vol_fn_scaling=_scaling_for(model),
        val_volume=None if val_volume is None else as_rational(val_volume),
        provenance=f"divisor of class {m}H",
    )


def hyperplane_valuation(model: FoliatedModel, invariant: bool, a_X: RationalLike = 0,
                         a_F: RationalLike = 0, label: str = "",
                         val_volume: Optional[RationalLike] = None) -> ValuationRecord:
    """ord_D for a hyperplane-class divisor D ~ H."""
    return divisor_class_valuation(model, 1, invariant, a_X=a_X, a_F=a_F,
                                   label=label or ("invariant_line" if invariant else "transverse_line"),
                                   val_volume=val_volume)


def _integer_root(k: int, n: int) -> Optional[int]:
    """Exact n-th root of a nonnegative integer, or None."""
    lo, hi = 0, 1
    while hi ** n < k:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** n < k:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo ** n == k else None


def exact_root(value: Fraction, n: int) -> Optional[Fraction]:
    num = _integer_root(value.numerator, n)
    den = _integer_root(value.denominator, n)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def point_blowup_valuation(model: FoliatedModel, a_X: RationalLike, a_F: RationalLike,
                           epsilon: int, label: str = "point",
                           breakpoint: Optional[RationalLike] = None,
                           val_volume: Optional[RationalLike] = 1) -> ValuationRecord:
    """Exceptional divisor of the blow-up of a smooth point.

    vol(L_ref - xE) = V_ref - x^n on [0, V_ref^(1/n)]. When that root is
    irrational the caller supplies the threshold b and the template becomes
    V_ref (1 - (x/b)^n).
    """
    if not model.is_projective_space_type:
        raise ModelError(f"model {model.label!r} is not of projective-space type")
    n, V = model.n, model.V
    if breakpoint is None:
        root = exact_root(V, n)
        if root is None:
            raise ModelError(
                f"{label}: V_ref^(1/{n}) = {V}^(1/{n}) is irrational; supply the breakpoint")
        threshold = root
    else:
        threshold = as_rational(breakpoint)
        if threshold <= 0:
            raise ModelError(f"{label}: breakpoint must be positive")
    coefficients = [V] + [Fraction(0)] * (n - 1) + [-V / threshold ** n]
    return ValuationRecord(
        label=label,
        a_X=as_rational(a_X),
        a_F=as_rational(a_F),
        epsilon=epsilon,
        vol_fn_base=PiecewisePoly((Fraction(0), threshold), (UniPoly(tuple(coefficients)),)),
        n=n,
        vol_fn_scaling=_scaling_for(model),
        val_volume=None if val_volume is None else as_rational(val_volume),
        provenance="point blow-up",
    )


def explicit_valuation(label: str, a_X: RationalLike, a_F: RationalLike, epsilon: int,
                       breakpoints: Sequence[RationalLike],
                       coefficients: Sequence[Sequence[RationalLike]], n: int,
                       scaling: VolumeScaling = VolumeScaling.LAMBDA,
                       val_volume: Optional[RationalLike] = None,
                       provenance: str = "") -> ValuationRecord:
    """Fully explicit record for models without a template."""
    return ValuationRecord(
        label=label,
        a_X=as_rational(a_X),
        a_F=as_rational(a_F),
        epsilon=epsilon,
        vol_fn_base=PiecewisePoly.from_coefficients(breakpoints, coefficients),
        n=n,
        vol_fn_scaling=scaling,
        val_volume=None if val_volume is None else as_rational(val_volume),
        provenance=provenance or "explicit",
    )
