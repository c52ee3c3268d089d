"""
Haar-measure integrals of radial functions on Q_p.

A radial function is constant on every shell |x|_p = p^k, so an integral over
any union of shells is a series Σ F(p^k)·μ(shell k). Closed forms are exact
rationals; `integrate_radial` sums the shell series directly and is the oracle
the closed forms are checked against.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Tuple

from .padic_core import DomainError, PAdicError, require_prime

logger = logging.getLogger(__name__)

DEFAULT_TAIL_TOL = Fraction(1, 10**30)
DEFAULT_DIVERGENCE_WINDOW = 5
DEFAULT_MAX_TERMS = 5000


class DivergenceError(PAdicError, ArithmeticError):
    """A shell series failed to decay."""

    pass


@dataclass(frozen=True)
class RadialFunction:
    """
    Function of |x|_p only.

    `rule(k)` is the value on the shell |x|_p = p^k. Outside [k_min, k_max] the
    function is 0. `breakpoints` lists shells where the rule changes shape;
    series summation does not judge convergence before passing them.
    """

    rule: Callable[[int], Fraction]
    k_min: Optional[int] = None
    k_max: Optional[int] = None
    breakpoints: Tuple[int, ...] = field(default_factory=tuple)

    def __call__(self, k: int) -> Fraction:
        if self.k_min is not None and k < self.k_min:
            return Fraction(0)
        if self.k_max is not None and k > self.k_max:
            return Fraction(0)
        return Fraction(self.rule(k))

    def all_breakpoints(self) -> Tuple[int, ...]:
        bounds = tuple(b for b in (self.k_min, self.k_max) if b is not None)
        return tuple(sorted(set(self.breakpoints + bounds)))

    def __add__(self, other: "RadialFunction") -> "RadialFunction":
        return RadialFunction(
            rule=lambda k: self(k) + other(k),
            breakpoints=tuple(sorted(set(self.all_breakpoints() + other.all_breakpoints()))),
        )

    def __rmul__(self, c: Fraction) -> "RadialFunction":
        c = Fraction(c)
        return RadialFunction(
            rule=lambda k: c * self(k),
            breakpoints=self.all_breakpoints(),
        )

    @classmethod
    def power(
        cls, p: int, s: int, k_min: Optional[int] = None, k_max: Optional[int] = None
    ) -> "RadialFunction":
        """|x|_p^s, optionally restricted to k_min <= k <= k_max."""
        base = Fraction(p)
        return cls(rule=lambda k: base ** (k * s), k_min=k_min, k_max=k_max)

    @classmethod
    def constant(cls, c: Fraction) -> "RadialFunction":
        value = Fraction(c)
        return cls(rule=lambda k: value)

    @classmethod
    def zero(cls) -> "RadialFunction":
        return cls(rule=lambda k: Fraction(0))


class RegionKind(Enum):
    SHELL = "shell"
    BALL = "ball"
    COMPLEMENT = "complement"
    WHOLE = "whole"


@dataclass(frozen=True)
class ShellRegion:
    """Union of shells: one shell, a ball p^m Z_p, Q_p \\ Z_p, or Q_p."""

    kind: RegionKind
    parameter: int = 0

    @classmethod
    def shell(cls, gamma: int) -> "ShellRegion":
        return cls(RegionKind.SHELL, gamma)

    @classmethod
    def ball(cls, m: int) -> "ShellRegion":
        return cls(RegionKind.BALL, m)

    @classmethod
    def integers(cls) -> "ShellRegion":
        return cls(RegionKind.BALL, 0)

    @classmethod
    def complement(cls) -> "ShellRegion":
        return cls(RegionKind.COMPLEMENT)

    @classmethod
    def whole(cls) -> "ShellRegion":
        return cls(RegionKind.WHOLE)

    def ranges(self) -> List[Tuple[int, int, Optional[int]]]:
        """
        Shell exponents as (start, step, count) runs; count None means unbounded.
        """
        if self.kind is RegionKind.SHELL:
            return [(self.parameter, 1, 1)]
        if self.kind is RegionKind.BALL:
            # |x| <= p^-m
            return [(-self.parameter, -1, None)]
        if self.kind is RegionKind.COMPLEMENT:
            return [(1, 1, None)]
        return [(0, -1, None), (1, 1, None)]


@dataclass(frozen=True)
class ShellSum:
    """Truncated series value with the number of terms used and a tail estimate."""

    value: Fraction
    terms: int
    tail_bound: Fraction

    def __add__(self, other: "ShellSum") -> "ShellSum":
        return ShellSum(
            self.value + other.value, self.terms + other.terms, self.tail_bound + other.tail_bound
        )


def shell_measure(p: int, gamma: int) -> Fraction:
    """
    Haar measure of the shell |x|_p = p^γ.

    Returns:
        p^γ·(1 - 1/p)
    """
    require_prime(p)
    return Fraction(p) ** gamma * Fraction(p - 1, p)


def ball_measure(p: int, m: int) -> Fraction:
    """Haar measure of the ball p^m Z_p, which is p^-m."""
    require_prime(p)
    return Fraction(p) ** -m


def moment_zp(p: int, s: int) -> Fraction:
    """
    ∫_{Z_p} |x|_p^s dx.

    Args:
        p: Prime
        s: Integer exponent, s > -1

    Returns:
        (p - 1)/(p - p^-s)

    Raises:
        DomainError: If s <= -1 (the shell series diverges)
    """
    require_prime(p)
    if s <= -1:
        raise DomainError(f"moment over Z_p needs s > -1, got s = {s}")
    return Fraction(p - 1) / (p - Fraction(p) ** -s)


def moment_complement(p: int, s: int) -> Fraction:
    """
    ∫_{Q_p \\ Z_p} |x|_p^s dx.

    Args:
        p: Prime
        s: Integer exponent, s < -1

    Returns:
        -(p - 1)/(p - p^-s), which is positive

    Raises:
        DomainError: If s >= -1
    """
    require_prime(p)
    if s >= -1:
        raise DomainError(f"moment over Q_p \\ Z_p needs s < -1, got s = {s}")
    return -Fraction(p - 1) / (p - Fraction(p) ** -s)


def moment_ball(p: int, s: int, m: int) -> Fraction:
    """
    ∫_{p^m Z_p} |x|_p^s dx, by the substitution x = p^m y and d(ax) = |a|_p dx.

    Raises:
        DomainError: If s <= -1
    """
    return Fraction(p) ** (-m * (s + 1)) * moment_zp(p, s)


def sum_shell_series(
    term: Callable[[int], Fraction],
    start: int,
    step: int,
    tail_tol: Fraction = DEFAULT_TAIL_TOL,
    breakpoints: Iterable[int] = (),
    window: int = DEFAULT_DIVERGENCE_WINDOW,
    max_terms: int = DEFAULT_MAX_TERMS,
    depth: Optional[int] = None,
) -> ShellSum:
    """
    Sum term(start) + term(start + step) + ... until the tail is negligible.

    After a warm-up that walks past every breakpoint, the tail is estimated as
    |T|·ρ/(1 - ρ) from the ratio ρ of the last two nonzero terms. Summation stops
    once that estimate drops below tail_tol, or after two consecutive zero terms.

    Args:
        term: Shell exponent -> term value
        start: First shell exponent
        step: +1 (outward) or -1 (inward)
        tail_tol: Stop once the estimated tail is below this
        breakpoints: Shells where the terms change shape
        window: Number of consecutive non-decreasing terms treated as divergence
        max_terms: Hard cap on the number of terms
        depth: If given, sum exactly this many terms and only estimate the tail

    Returns:
        ShellSum with value, terms used and tail estimate

    Raises:
        DivergenceError: If the terms stop decaying or max_terms is reached
    """
    if step not in (1, -1):
        raise ValueError(f"step must be +1 or -1, got {step}")
    warmup = max([2] + [(b - start) * step + 2 for b in breakpoints])
    limit = depth if depth is not None else max(max_terms, warmup + window + 1)

    total = Fraction(0)
    previous: Optional[Fraction] = None
    ratio: Optional[Fraction] = None
    growth = 0
    zeros = 0
    k = start
    for count in range(1, limit + 1):
        value = term(k)
        total += value
        k += step
        magnitude = abs(value)

        if magnitude == 0:
            zeros += 1
            if depth is None and count >= warmup and zeros >= 2:
                return ShellSum(total, count, Fraction(0))
            continue
        zeros = 0
        if previous is not None:
            ratio = magnitude / previous
        previous = magnitude
        if count < warmup or ratio is None:
            continue

        if ratio >= 1:
            growth += 1
            if depth is None and growth >= window:
                raise DivergenceError(
                    f"shell series terms stopped decaying near shell {k - step} "
                    f"({growth} consecutive non-decreasing terms)"
                )
            continue
        growth = 0
        tail = magnitude * ratio / (1 - ratio)
        if depth is None and tail < tail_tol:
            logger.debug("shell series from %d converged after %d terms", start, count)
            return ShellSum(total, count, tail)

    if depth is not None:
        if previous is None:
            return ShellSum(total, depth, Fraction(0))
        if ratio is None or ratio >= 1:
            raise DivergenceError(f"shell series is not decaying after {depth} terms")
        return ShellSum(total, depth, previous * ratio / (1 - ratio))
    raise DivergenceError(f"shell series did not reach the tail tolerance in {limit} terms")


def integrate_radial(
    p: int,
    f: RadialFunction,
    region: ShellRegion,
    tail_tol: Fraction = DEFAULT_TAIL_TOL,
    window: int = DEFAULT_DIVERGENCE_WINDOW,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> ShellSum:
    """
    ∫_region f dx as a truncated shell sum.

    Args:
        p: Prime
        f: Radial integrand
        region: Union of shells to integrate over
        tail_tol: Tail tolerance for each unbounded run of shells

    Returns:
        ShellSum carrying the value, the truncation depth and the tail estimate

    Raises:
        DivergenceError: If the shell terms do not decay

    Example:
        >>> result = integrate_radial(5, RadialFunction.power(5, 2), ShellRegion.integers())
        >>> abs(result.value - Fraction(25, 31)) <= result.tail_bound
        True
    """
    require_prime(p)

    def term(k: int) -> Fraction:
        return f(k) * shell_measure(p, k)

    result = ShellSum(Fraction(0), 0, Fraction(0))
    for start, step, count in region.ranges():
        if count is not None:
            finite = sum((term(start + i * step) for i in range(count)), Fraction(0))
            result = result + ShellSum(finite, count, Fraction(0))
            continue
        result = result + sum_shell_series(
            term,
            start,
            step,
            tail_tol=tail_tol,
            breakpoints=f.all_breakpoints(),
            window=window,
            max_terms=max_terms,
        )
    logger.debug(
        "integrated over %s: %d terms, tail %s", region.kind.value, result.terms, result.tail_bound
    )
    return result
