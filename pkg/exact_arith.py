"""
Exact rational scalars, univariate polynomials and piecewise polynomial
volume functions. Every invariant in the toolkit is computed on top of this
module; nothing here ever touches floating point.

Polynomials are evaluated, differentiated and integrated through
numpy.polynomial.polynomial on object arrays of Fraction, which keeps the
arithmetic exact.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P

logger = logging.getLogger(__name__)

Rational = Fraction
RationalLike = Union[int, str, Fraction]


def as_rational(value: RationalLike) -> Fraction:
    """Convert an int, a "p/q" string or a Fraction to a Fraction.

    Floats are refused: a float has already lost the exact value.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rational scalars")
    if isinstance(value, float):
        raise TypeError(f"refusing float {value!r}; pass a 'p/q' string or a Fraction")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"not a rational literal: {value!r}") from e
    raise TypeError(f"cannot read {type(value).__name__} as a rational")


def _object_array(values: Iterable[Fraction]) -> np.ndarray:
    return np.array(list(values), dtype=object)


@dataclass(frozen=True)
class UniPoly:
    """Univariate polynomial with Fraction coefficients, ascending degree.

    The zero polynomial is the empty tuple.
    """
    coefficients: Tuple[Fraction, ...] = ()

    def __post_init__(self):
        coeffs = [as_rational(c) for c in self.coefficients]
        if any(c != 0 for c in coeffs):
            trimmed = P.polytrim(_object_array(coeffs), 0)
            coeffs = [Fraction(c) for c in trimmed]
        else:
            coeffs = []
        object.__setattr__(self, 'coefficients', tuple(coeffs))

    @classmethod
    def constant(cls, value: RationalLike) -> 'UniPoly':
        return cls((as_rational(value),))

    @classmethod
    def linear_power(cls, a: RationalLike, b: RationalLike, n: int,
                     scale: RationalLike = 1) -> 'UniPoly':
        """scale * (a + b*x)**n, expanded binomially."""
        a, b, scale = as_rational(a), as_rational(b), as_rational(scale)
        return cls(tuple(scale * comb(n, k) * a ** (n - k) * b ** k for k in range(n + 1)))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def __call__(self, x: RationalLike) -> Fraction:
        return poly_eval(self, x)

    def derivative(self) -> 'UniPoly':
        if self.degree < 1:
            return UniPoly()
        return UniPoly(tuple(P.polyder(_object_array(self.coefficients))))

    def antiderivative(self) -> 'UniPoly':
        """Antiderivative vanishing at 0."""
        if self.is_zero:
            return UniPoly()
        return UniPoly(tuple(P.polyint(_object_array(self.coefficients))))

    def substitute_scale(self, c: RationalLike, n: int) -> 'UniPoly':
        """The polynomial x -> c**n * p(x / c)."""
        c = as_rational(c)
        return UniPoly(tuple(a * c ** (n - k) for k, a in enumerate(self.coefficients)))

    def __str__(self):
        if self.is_zero:
            return "0"
        terms = []
        for k, a in enumerate(self.coefficients):
            if a == 0:
                continue
            terms.append(f"{a}" if k == 0 else f"{a}*x" if k == 1 else f"{a}*x^{k}")
        return " + ".join(terms)


def poly_eval(p: UniPoly, x: RationalLike) -> Fraction:
    """Exact value of p at x."""
    x = as_rational(x)
    if p.is_zero:
        return Fraction(0)
    return Fraction(P.polyval(x, _object_array(p.coefficients)))


def poly_integrate(p: UniPoly, lo: RationalLike, hi: RationalLike) -> Fraction:
    """Exact definite integral of p over [lo, hi]."""
    lo, hi = as_rational(lo), as_rational(hi)
    if lo > hi:
        raise ValueError(f"integration bounds out of order: lo={lo} > hi={hi}")
    primitive = p.antiderivative()
    return poly_eval(primitive, hi) - poly_eval(primitive, lo)


def poly_divmod(p: UniPoly, q: UniPoly) -> Tuple[UniPoly, UniPoly]:
    """Quotient and remainder of p by q over the rationals."""
    if q.is_zero:
        raise ZeroDivisionError("polynomial division by zero")
    if p.is_zero:
        return UniPoly(), UniPoly()
    quotient, remainder = P.polydiv(_object_array(p.coefficients), _object_array(q.coefficients))
    return UniPoly(tuple(quotient)), UniPoly(tuple(remainder))


def poly_gcd(p: UniPoly, q: UniPoly) -> UniPoly:
    """Monic greatest common divisor (the zero polynomial when both are zero)."""
    while not q.is_zero:
        p, q = q, poly_divmod(p, q)[1]
    if p.is_zero:
        return p
    lead = p.coefficients[-1]
    return UniPoly(tuple(c / lead for c in p.coefficients))


def sturm_sequence(p: UniPoly) -> List[UniPoly]:
    """p, p', then negated remainders until one vanishes."""
    sequence = [p, p.derivative()]
    while not sequence[-1].is_zero:
        remainder = poly_divmod(sequence[-2], sequence[-1])[1]
        if remainder.is_zero:
            break
        sequence.append(UniPoly(tuple(-c for c in remainder.coefficients)))
    return [s for s in sequence if not s.is_zero]


def _sign_changes(values: Iterable[Fraction]) -> int:
    nonzero = [v for v in values if v != 0]
    return sum(1 for a, b in zip(nonzero, nonzero[1:]) if (a > 0) != (b > 0))


def count_roots(sequence: Sequence[UniPoly], lo: Fraction, hi: Fraction) -> int:
    """Distinct real roots in (lo, hi] of the square-free head of a Sturm sequence."""
    return (_sign_changes(s(lo) for s in sequence)
            - _sign_changes(s(hi) for s in sequence))


def is_nonpositive_on(p: UniPoly, lo: RationalLike, hi: RationalLike) -> bool:
    """Exact test of p <= 0 on [lo, hi] by Sturm root isolation."""
    lo, hi = as_rational(lo), as_rational(hi)
    if p.degree < 1:
        return p(lo) <= 0
    squarefree = poly_divmod(p, poly_gcd(p, p.derivative()))[0]
    sequence = sturm_sequence(squarefree)

    def check(a: Fraction, b: Fraction) -> bool:
        pa, pb = p(a), p(b)
        if pa > 0 or pb > 0:
            return False
        inner = count_roots(sequence, a, b) - (1 if pb == 0 else 0)
        if inner == 0:
            return p((a + b) / 2) <= 0
        if inner == 1 and pa != 0 and pb != 0:
            # one sign change point; both sides take the endpoint signs
            return True
        mid = (a + b) / 2
        return check(a, mid) and check(mid, b)

    return check(lo, hi)


@dataclass(frozen=True)
class PiecewisePoly:
    """A volume function x -> vol(L - xE) as polynomial pieces.

    Piece i lives on [breakpoints[i], breakpoints[i+1]); at and beyond the
    last breakpoint the function is 0.
    """
    breakpoints: Tuple[Fraction, ...]
    pieces: Tuple[UniPoly, ...]

    def __post_init__(self):
        breakpoints = tuple(as_rational(x) for x in self.breakpoints)
        pieces = tuple(p if isinstance(p, UniPoly) else UniPoly(tuple(p)) for p in self.pieces)
        object.__setattr__(self, 'breakpoints', breakpoints)
        object.__setattr__(self, 'pieces', pieces)
        self._validate()

    @classmethod
    def from_coefficients(cls, breakpoints: Sequence[RationalLike],
                          coefficient_lists: Sequence[Sequence[RationalLike]]) -> 'PiecewisePoly':
        return cls(tuple(breakpoints), tuple(UniPoly(tuple(c)) for c in coefficient_lists))

    def _validate(self):
        bps, pieces = self.breakpoints, self.pieces
        if len(bps) < 2 or len(pieces) != len(bps) - 1:
            raise ValueError("need K+1 breakpoints for K pieces, with K >= 1")
        if bps[0] != 0:
            raise ValueError(f"domain must start at 0, got {bps[0]}")
        if any(a >= b for a, b in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if pieces[0](0) <= 0:
            raise ValueError("total volume (value at 0) must be positive")
        if pieces[-1](bps[-1]) != 0:
            raise ValueError(f"volume must vanish at the last breakpoint {bps[-1]}")

        for i, piece in enumerate(pieces):
            lo, hi = bps[i], bps[i + 1]
            if not is_nonpositive_on(piece.derivative(), lo, hi):
                logger.debug(f"piece {i} increases somewhere on [{lo}, {hi}]: {piece}")
                raise ValueError(f"volume function increases on piece {i} within [{lo}, {hi}]")
            if piece(hi) < 0:
                raise ValueError(f"volume function negative at x={hi}")
            if i + 1 < len(pieces) and pieces[i + 1](hi) > piece(hi):
                raise ValueError(f"volume function jumps up at breakpoint {hi}")

    @property
    def total_volume(self) -> Fraction:
        return self.pieces[0](0)

    @property
    def threshold(self) -> Fraction:
        return self.breakpoints[-1]

    def __call__(self, x: RationalLike) -> Fraction:
        x = as_rational(x)
        if x < 0:
            raise ValueError(f"x={x} is outside the domain [0, inf)")
        if x >= self.threshold:
            return Fraction(0)
        for i, piece in enumerate(self.pieces):
            if x < self.breakpoints[i + 1]:
                return piece(x)
        return Fraction(0)

    def integrate(self, lo: RationalLike, hi: RationalLike) -> Fraction:
        return piecewise_integrate(self, lo, hi)

    def scale(self, c: RationalLike, n: int) -> 'PiecewisePoly':
        return piecewise_scale(self, c, n)


def piecewise_integrate(f: PiecewisePoly, lo: RationalLike, hi: RationalLike) -> Fraction:
    """Exact integral of f over [lo, hi], clipping pieces at both ends."""
    lo, hi = as_rational(lo), as_rational(hi)
    if not 0 <= lo <= hi <= f.threshold:
        raise ValueError(f"bounds [{lo}, {hi}] outside [0, {f.threshold}]")
    total = Fraction(0)
    for i, piece in enumerate(f.pieces):
        a = max(lo, f.breakpoints[i])
        b = min(hi, f.breakpoints[i + 1])
        if a < b:
            total += poly_integrate(piece, a, b)
    return total


def piecewise_scale(f: PiecewisePoly, c: RationalLike, n: int) -> PiecewisePoly:
    """Realize vol(cL - xE) = c**n * vol(L - (x/c)E) on a dimension-n volume function."""
    c = as_rational(c)
    if c <= 0:
        raise ValueError(f"scale factor must be positive, got {c}")
    if c == 1:
        return f
    return PiecewisePoly(
        tuple(c * x for x in f.breakpoints),
        tuple(p.substitute_scale(c, n) for p in f.pieces),
    )
