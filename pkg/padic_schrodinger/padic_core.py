"""
p-adic valuation, norm and digit expansions of rationals.

Rationals are `fractions.Fraction` throughout. A PAdicApprox is a finite
expansion p^γ·(d_0 + d_1 p + ... + d_{N-1} p^{N-1}) that remembers how many
digits are guaranteed, so sums and products report the precision they
actually carry.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Tuple, Union

import gmpy2

logger = logging.getLogger(__name__)

INFINITE_VALUATION = math.inf

RationalLike = Union[int, Fraction, Rational]


class PAdicError(Exception):
    """Base class for every error raised by this package."""

    pass


class ArgumentError(PAdicError, ValueError):
    """Invalid argument (non-prime modulus, bad precision, mismatched primes)."""

    pass


class DomainError(PAdicError, ValueError):
    """A closed form was asked for outside the parameters where it holds."""

    pass


@lru_cache(maxsize=256, typed=True)
def require_prime(p: int) -> int:
    """
    Check that p is a prime number.

    Args:
        p: Candidate prime

    Returns:
        p unchanged

    Raises:
        ArgumentError: If p is not a prime integer
    """
    if isinstance(p, bool) or not isinstance(p, int):
        raise ArgumentError(f"p must be an integer prime, got {p!r}")
    if p < 2 or not gmpy2.is_prime(p):
        raise ArgumentError(f"p must be prime, got {p}")
    return p


def _as_fraction(q: RationalLike) -> Fraction:
    if isinstance(q, Fraction):
        return q
    try:
        return Fraction(q)
    except (TypeError, ValueError) as e:
        raise ArgumentError(f"expected an exact rational, got {q!r}") from e


def _strip(n: int, p: int) -> Tuple[int, int]:
    """Split a nonzero integer as p^v·m with p not dividing m."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def valuation(q: RationalLike, p: int) -> Union[int, float]:
    """
    Exponent of p in q.

    Args:
        q: Rational number
        p: Prime

    Returns:
        γ with q = p^γ·(m/n), m and n coprime to p; INFINITE_VALUATION for q = 0

    Raises:
        ArgumentError: If p is not prime

    Example:
        >>> valuation(114514, 2)
        1
        >>> valuation(Fraction(1919, 810), 5)
        -1
    """
    require_prime(p)
    q = _as_fraction(q)
    if q == 0:
        return INFINITE_VALUATION
    up, _ = _strip(abs(q.numerator), p)
    down, _ = _strip(q.denominator, p)
    return up - down


def padic_norm(q: RationalLike, p: int) -> Fraction:
    """
    The p-adic absolute value |q|_p = p^(-valuation).

    Args:
        q: Rational number
        p: Prime

    Returns:
        Exact norm, 0 for q = 0
    """
    v = valuation(q, p)
    if v == INFINITE_VALUATION:
        return Fraction(0)
    return Fraction(p) ** -int(v)


def padic_distance(a: RationalLike, b: RationalLike, p: int) -> Fraction:
    """Ultrametric distance |a - b|_p."""
    return padic_norm(_as_fraction(a) - _as_fraction(b), p)


def is_p_integer(q: RationalLike, p: int) -> bool:
    """True when |q|_p <= 1, i.e. q lies in Z_p."""
    return valuation(q, p) >= 0


def shell_index(q: RationalLike, p: int) -> int:
    """
    Shell exponent k with |q|_p = p^k.

    Raises:
        DomainError: For q = 0, which lies on no shell
    """
    v = valuation(q, p)
    if v == INFINITE_VALUATION:
        raise DomainError("0 does not lie on any shell |x|_p = p^k")
    return -int(v)


def in_ball(q: RationalLike, p: int, m: int) -> bool:
    """True when q lies in the ball p^m Z_p."""
    return valuation(q, p) >= m


@dataclass(frozen=True)
class PAdicApprox:
    """
    Finite-precision p-adic number.

    The value is p^valuation·Σ digits[k]·p^k, known modulo
    p^(valuation + precision). For zero, `digits` is empty and the value is 0
    modulo p^(valuation + precision).
    """

    prime: int
    valuation: int
    digits: Tuple[int, ...]
    is_zero: bool
    precision: int

    def __post_init__(self) -> None:
        if self.precision < 1:
            raise ArgumentError(f"precision must be positive, got {self.precision}")
        if self.is_zero:
            if self.digits:
                raise ArgumentError("zero value carries no digits")
            return
        if len(self.digits) != self.precision:
            raise ArgumentError(
                f"expected {self.precision} digits, got {len(self.digits)}"
            )
        if any(not 0 <= d < self.prime for d in self.digits):
            raise ArgumentError(f"digits must lie in [0, {self.prime - 1}]")
        if self.digits[0] == 0:
            raise ArgumentError("leading digit of a nonzero expansion must be positive")

    @property
    def absolute_precision(self) -> int:
        """Exponent e such that the value is known modulo p^e."""
        return self.valuation + self.precision

    def unit_integer(self) -> int:
        """Digits read back as an integer in [0, p^precision)."""
        total = 0
        for d in reversed(self.digits):
            total = total * self.prime + d
        return total

    def to_rational(self) -> Fraction:
        """Partial sum p^γ·Σ d_k p^k as an exact rational."""
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.prime) ** self.valuation * self.unit_integer()

    def norm(self) -> Fraction:
        """|x|_p = p^(-γ); 0 for the zero value."""
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.prime) ** -self.valuation


def _digits_of(n: int, p: int, count: int) -> Tuple[int, ...]:
    out = []
    for _ in range(count):
        n, d = divmod(n, p)
        out.append(d)
    return tuple(out)


def _zero(p: int, absolute: int) -> PAdicApprox:
    """Zero known modulo p^absolute, in canonical form."""
    if absolute >= 1:
        return PAdicApprox(p, 0, (), True, absolute)
    return PAdicApprox(p, absolute - 1, (), True, 1)


def _from_residue(p: int, shift: int, residue: int, modulus_exp: int) -> PAdicApprox:
    """
    Normalise p^shift·residue known modulo p^(shift + modulus_exp).

    Pulls any factors of p out of the residue into the valuation and keeps only
    the digits that remain guaranteed.
    """
    residue %= p**modulus_exp
    if residue == 0:
        return _zero(p, shift + modulus_exp)
    v, _ = _strip(residue, p)
    remaining = modulus_exp - v
    unit = (residue // p**v) % p**remaining
    return PAdicApprox(p, shift + v, _digits_of(unit, p, remaining), False, remaining)


def expand_rational(q: RationalLike, p: int, N: int) -> PAdicApprox:
    """
    First N digits of the p-adic expansion of a rational.

    The unit part m/n is reduced modulo p^N with a single modular inverse of n,
    and the digits are read off in base p.

    Args:
        q: Rational to expand
        p: Prime
        N: Number of digits (precision)

    Returns:
        PAdicApprox with |q - p^γ Σ d_k p^k|_p <= p^-(γ+N)

    Raises:
        ArgumentError: If p is not prime or N < 1

    Example:
        >>> expand_rational(Fraction(4, 3), 5, 3).digits
        (3, 3, 1)
    """
    require_prime(p)
    if N < 1:
        raise ArgumentError(f"number of digits must be positive, got {N}")
    q = _as_fraction(q)
    if q == 0:
        return PAdicApprox(p, 0, (), True, N)

    up, m = _strip(q.numerator, p)
    down, n = _strip(q.denominator, p)
    modulus = p**N
    unit = (m * pow(n, -1, modulus)) % modulus
    digits = _digits_of(unit, p, N)
    logger.debug("expanded %s in Q_%d: valuation %d, %d digits", q, p, up - down, N)
    return PAdicApprox(p, up - down, digits, False, N)


def _check_same_prime(a: PAdicApprox, b: PAdicApprox) -> int:
    if a.prime != b.prime:
        raise ArgumentError(f"cannot combine {a.prime}-adic and {b.prime}-adic values")
    return a.prime


def padic_add(a: PAdicApprox, b: PAdicApprox) -> PAdicApprox:
    """
    Sum of two approximations with carry propagation.

    The result is known modulo p^min(absolute precisions); digits beyond
    that are dropped rather than padded.
    """
    p = _check_same_prime(a, b)
    top = min(a.absolute_precision, b.absolute_precision)
    low = min(a.valuation, b.valuation)
    total = 0
    for x in (a, b):
        if not x.is_zero:
            total += x.unit_integer() * p ** (x.valuation - low)
    if top <= low:
        # no guaranteed digit survives
        return _zero(p, top)
    return _from_residue(p, low, total, top - low)


def padic_neg(a: PAdicApprox) -> PAdicApprox:
    """Additive inverse at the same valuation and precision."""
    if a.is_zero:
        return a
    modulus = a.prime**a.precision
    negated = (modulus - a.unit_integer()) % modulus
    return PAdicApprox(
        a.prime, a.valuation, _digits_of(negated, a.prime, a.precision), False, a.precision
    )


def padic_mul(a: PAdicApprox, b: PAdicApprox) -> PAdicApprox:
    """
    Product of two approximations.

    Valuations add; the relative precision is the smaller of the two.
    """
    p = _check_same_prime(a, b)
    if a.is_zero and b.is_zero:
        return _zero(p, a.absolute_precision + b.absolute_precision)
    if a.is_zero or b.is_zero:
        zero, other = (a, b) if a.is_zero else (b, a)
        return _zero(p, zero.absolute_precision + other.valuation)
    precision = min(a.precision, b.precision)
    return _from_residue(
        p, a.valuation + b.valuation, a.unit_integer() * b.unit_integer(), precision
    )
