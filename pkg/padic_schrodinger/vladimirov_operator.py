"""
The p-adic Gamma function and the Vladimirov derivative D^α.

D^α f(x) = (1/Γ_p(-α)) ∫_{Q_p} (f(y) - f(x)) / |x - y|_p^(α+1) dy.

Closed forms are given for |x|^n on Q_p and for the two halves of it, f_n
(supported on Z_p) and g_n (supported off Z_p). `d_alpha_oracle` evaluates the
defining integral directly as two shell series and is the independent check on
every closed form.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Optional, Tuple

from .haar_measure import (
    DEFAULT_DIVERGENCE_WINDOW,
    DEFAULT_MAX_TERMS,
    DEFAULT_TAIL_TOL,
    RadialFunction,
    ShellSum,
    shell_measure,
    sum_shell_series,
)
from .padic_core import ArgumentError, DomainError, require_prime

logger = logging.getLogger(__name__)

Terms = Tuple[Tuple[int, Fraction], ...]


class GammaUndefinedError(DomainError):
    """Γ_p(0) was requested."""

    pass


class ResonanceError(DomainError):
    """A Γ_p(1) = 0 denominator: the index n equals α."""

    pass


class InconclusiveCheckError(ResonanceError):
    """The semigroup identity could not be checked because a stage resonates."""

    pass


class DegenerateIndexError(DomainError):
    """A closed form has a vanishing denominator at this index."""

    pass


@lru_cache(maxsize=8192)
def gamma_p(p: int, x: int) -> Fraction:
    """
    Γ_p(x) = (1 - p^(x-1)) / (1 - p^(-x)).

    Args:
        p: Prime
        x: Nonzero integer argument

    Returns:
        Exact value; Γ_p(1) = 0

    Raises:
        GammaUndefinedError: If x = 0

    Example:
        >>> gamma_p(5, 3)
        Fraction(-750, 31)
    """
    require_prime(p)
    if x == 0:
        raise GammaUndefinedError("Γ_p(0) is undefined: 1 - p^0 = 0 in the denominator")
    base = Fraction(p)
    return (1 - base ** (x - 1)) / (1 - base**-x)


def _check_order(alpha: int) -> None:
    if isinstance(alpha, bool) or not isinstance(alpha, int) or alpha < 1:
        raise ArgumentError(f"α must be a positive integer, got {alpha!r}")


def _gamma_ratio(p: int, a: int, b: int, *, limit_at_zero: bool = False) -> Fraction:
    """
    Γ_p(a)/Γ_p(b).

    With limit_at_zero, b = 0 gives 0: 1/Γ_p(y) -> 0 as y -> 0.
    """
    if a == 0:
        raise GammaUndefinedError(f"Γ_p({a}) is undefined (numerator of Γ_p({a})/Γ_p({b}))")
    if b == 0:
        if limit_at_zero:
            return Fraction(0)
        raise GammaUndefinedError(f"Γ_p(0) is undefined (denominator of Γ_p({a})/Γ_p(0))")
    if b == 1:
        raise ResonanceError(f"Γ_p(1) = 0 in the denominator of Γ_p({a})/Γ_p(1)")
    return gamma_p(p, a) / gamma_p(p, b)


def _monomial_coefficient(p: int, alpha: int, n: int) -> Fraction:
    if n == alpha:
        raise ResonanceError(f"D^{alpha} |x|^{n}: n = α puts Γ_p(1) = 0 in the denominator")
    if n + 1 == 0:
        raise GammaUndefinedError(f"D^{alpha} |x|^{n} needs Γ_p(0)")
    if n - alpha + 1 == 0:
        raise GammaUndefinedError(f"D^{alpha} |x|^{n} needs Γ_p(0) in the denominator")
    return gamma_p(p, n + 1) / gamma_p(p, n - alpha + 1)


def d_alpha_monomial(p: int, alpha: int, n: int) -> Tuple[Fraction, int]:
    """
    D^α |x|_p^n on all of Q_p.

    Args:
        p: Prime
        alpha: Order, positive integer
        n: Exponent, positive integer

    Returns:
        (Γ_p(n+1)/Γ_p(n-α+1), n - α): coefficient and exponent of the result

    Raises:
        ResonanceError: If n = α
        GammaUndefinedError: If n - α + 1 = 0
    """
    require_prime(p)
    _check_order(alpha)
    if n < 1:
        raise ArgumentError(f"monomial exponent must be positive, got {n}")
    return _monomial_coefficient(p, alpha, n), n - alpha


def _merge(pairs: Iterable[Tuple[int, Fraction]]) -> Terms:
    collected: Dict[int, Fraction] = {}
    for exponent, coefficient in pairs:
        collected[exponent] = collected.get(exponent, Fraction(0)) + coefficient
    return tuple(sorted((e, c) for e, c in collected.items() if c != 0))


@dataclass(frozen=True)
class PiecewiseRadial:
    """
    Σ coefficient·|x|_p^exponent, one list on Z_p and another off it.

    A branch of None has no closed form here; evaluating it raises
    GammaUndefinedError with `note` as the reason.
    """

    prime: int
    inside: Optional[Terms]
    outside: Optional[Terms]
    analytically_continued: bool = False
    note: str = ""

    def branch(self, k: int) -> Terms:
        terms = self.inside if k <= 0 else self.outside
        if terms is None:
            side = "inside" if k <= 0 else "outside"
            raise GammaUndefinedError(f"{side} branch has no closed form: {self.note}")
        return terms

    def evaluate(self, k: int) -> Fraction:
        """Value on the shell |x|_p = p^k."""
        base = Fraction(self.prime)
        return sum((c * base ** (k * e) for e, c in self.branch(k)), Fraction(0))

    def coefficient(self, inside: bool, exponent: int) -> Fraction:
        """Coefficient of |x|^exponent on one branch (0 when absent)."""
        terms = self.branch(0 if inside else 1)
        return dict(terms).get(exponent, Fraction(0))

    def to_radial(self) -> RadialFunction:
        return RadialFunction(rule=self.evaluate, breakpoints=(0, 1))

    def scaled(self, c: Fraction) -> "PiecewiseRadial":
        c = Fraction(c)
        return PiecewiseRadial(
            self.prime,
            None if self.inside is None else _merge((e, c * v) for e, v in self.inside),
            None if self.outside is None else _merge((e, c * v) for e, v in self.outside),
            self.analytically_continued,
            self.note,
        )

    def __add__(self, other: "PiecewiseRadial") -> "PiecewiseRadial":
        if self.prime != other.prime:
            raise ArgumentError("cannot add piecewise functions over different primes")
        inside = None
        if self.inside is not None and other.inside is not None:
            inside = _merge(self.inside + other.inside)
        outside = None
        if self.outside is not None and other.outside is not None:
            outside = _merge(self.outside + other.outside)
        return PiecewiseRadial(
            self.prime,
            inside,
            outside,
            self.analytically_continued or other.analytically_continued,
            "; ".join(n for n in (self.note, other.note) if n),
        )


@lru_cache(maxsize=4096)
def d_alpha_f(p: int, alpha: int, n: int) -> PiecewiseRadial:
    """
    D^α f_n where f_n = |x|_p^n on Z_p and 0 elsewhere.

    Inside Z_p:  Γ_p(n+1)/Γ_p(n-α+1)·|x|^(n-α) + (1/Γ_p(-α))·(p-1)/(p - p^(α+1-n))
    Outside:     (1/Γ_p(-α))·(p-1)/(p - p^-n)·|x|^-(α+1)

    For n = α - 1 the monomial coefficient is its limiting value 0.

    Raises:
        ResonanceError: If n = α
        DegenerateIndexError: If a denominator vanishes
    """
    require_prime(p)
    _check_order(alpha)
    if n < 0:
        raise ArgumentError(f"f_n needs n >= 0, got {n}")
    if n == alpha:
        raise ResonanceError(f"D^{alpha} f_{n}: n = α puts Γ_p(1) = 0 in the denominator")

    base = Fraction(p)
    scale = 1 / gamma_p(p, -alpha)
    inner_denominator = p - base ** (alpha + 1 - n)
    if inner_denominator == 0:
        raise DegenerateIndexError(f"p - p^(α+1-n) = 0 for α = {alpha}, n = {n}")

    monomial = _gamma_ratio(p, n + 1, n - alpha + 1, limit_at_zero=True)
    inside = _merge(
        [(n - alpha, monomial), (0, scale * (p - 1) / inner_denominator)]
    )
    outside = _merge([(-(alpha + 1), scale * (p - 1) / (p - base**-n))])
    return PiecewiseRadial(p, inside, outside)


@lru_cache(maxsize=4096)
def d_alpha_g(p: int, alpha: int, n: int) -> PiecewiseRadial:
    """
    D^α g_n where g_n = |x|_p^n off Z_p and 0 on Z_p.

    Inside Z_p:  -(1/Γ_p(-α))·(p-1)/(p - p^(α+1-n))
    Outside:     Γ_p(n+1)/Γ_p(n-α+1)·|x|^(n-α) - (1/Γ_p(-α))·(p-1)/(p - p^-n)·|x|^-(α+1)

    n may be negative. For n > α the defining integral diverges and the result
    is flagged as analytically continued. For n = -1 the outside branch has no
    closed form (Γ_p(0) in a numerator) and is left undefined.

    Raises:
        ResonanceError: If n = α
    """
    require_prime(p)
    _check_order(alpha)
    if n == alpha:
        raise ResonanceError(f"D^{alpha} g_{n}: n = α puts Γ_p(1) = 0 in the denominator")

    base = Fraction(p)
    scale = 1 / gamma_p(p, -alpha)
    inside = _merge([(0, -scale * (p - 1) / (p - base ** (alpha + 1 - n)))])

    outside: Optional[Terms]
    note = ""
    if n == -1:
        outside = None
        note = "g_-1 outside Z_p needs Γ_p(0) in a numerator (logarithmic term)"
    else:
        monomial = _gamma_ratio(p, n + 1, n - alpha + 1, limit_at_zero=True)
        outside = _merge(
            [(n - alpha, monomial), (-(alpha + 1), -scale * (p - 1) / (p - base**-n))]
        )
    return PiecewiseRadial(p, inside, outside, analytically_continued=n > alpha, note=note)


def d_alpha_oracle(
    p: int,
    alpha: int,
    f: RadialFunction,
    t: int,
    tail_tol: Fraction = DEFAULT_TAIL_TOL,
    depth: Optional[int] = None,
    window: int = DEFAULT_DIVERGENCE_WINDOW,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> ShellSum:
    """
    D^α f on the shell |x|_p = p^t from the defining integral.

    The integral splits into shells |y| > |x|, where |x - y| = |y|, and shells
    |y| < |x|, where |x - y| = |x|; the shell |y| = |x| contributes nothing for
    radial f.

    Args:
        p: Prime
        alpha: Order, positive integer
        f: Radial function
        t: Shell exponent of x
        tail_tol: Tail tolerance for each of the two shell series
        depth: Fixed number of terms per series instead of the tail test

    Returns:
        ShellSum with value, terms used and tail bound (already scaled by 1/Γ_p(-α))

    Raises:
        DivergenceError: If either series fails to converge
    """
    require_prime(p)
    _check_order(alpha)
    base = Fraction(p)
    f_t = f(t)
    near_kernel = base ** (-t * (alpha + 1))

    def outer(k: int) -> Fraction:
        return (f(k) - f_t) * base ** (-k * (alpha + 1)) * shell_measure(p, k)

    def inner(k: int) -> Fraction:
        return (f(k) - f_t) * near_kernel * shell_measure(p, k)

    breakpoints = f.all_breakpoints() + (t, 0, 1)
    kwargs = dict(
        tail_tol=tail_tol,
        breakpoints=breakpoints,
        window=window,
        max_terms=max_terms,
        depth=depth,
    )
    far = sum_shell_series(outer, t + 1, 1, **kwargs)  # type: ignore[arg-type]
    near = sum_shell_series(inner, t - 1, -1, **kwargs)  # type: ignore[arg-type]

    scale = 1 / gamma_p(p, -alpha)
    logger.debug(
        "oracle D^%d at shell %d: %d + %d terms", alpha, t, far.terms, near.terms
    )
    return ShellSum(
        scale * (far.value + near.value),
        far.terms + near.terms,
        abs(scale) * (far.tail_bound + near.tail_bound),
    )


def semigroup_check(p: int, alpha: int, beta: int, n: int) -> bool:
    """
    Check D^α D^β |x|^n = D^(α+β) |x|^n through the exact Γ_p coefficients.

    Raises:
        InconclusiveCheckError: If either stage, or the combined operator, resonates
    """
    require_prime(p)
    _check_order(alpha)
    _check_order(beta)
    if n < 1:
        raise ArgumentError(f"monomial exponent must be positive, got {n}")
    try:
        first = _monomial_coefficient(p, beta, n)
        second = _monomial_coefficient(p, alpha, n - beta)
        combined = _monomial_coefficient(p, alpha + beta, n)
    except (ResonanceError, GammaUndefinedError) as e:
        raise InconclusiveCheckError(
            f"semigroup check for α={alpha}, β={beta}, n={n} is inconclusive: {e}"
        ) from e
    return first * second == combined


class BasisKind(Enum):
    MONOMIAL = "monomial"
    F_INSIDE = "f"
    G_OUTSIDE = "g"


@dataclass(frozen=True)
class BasisTerm:
    """|x|^n on Q_p, on Z_p only (f_n), or off Z_p only (g_n)."""

    kind: BasisKind
    n: int

    def radial(self, p: int) -> RadialFunction:
        if self.kind is BasisKind.F_INSIDE:
            return RadialFunction.power(p, self.n, k_max=0)
        if self.kind is BasisKind.G_OUTSIDE:
            return RadialFunction.power(p, self.n, k_min=1)
        return RadialFunction.power(p, self.n)

    def d_alpha(self, p: int, alpha: int) -> PiecewiseRadial:
        if self.kind is BasisKind.F_INSIDE:
            return d_alpha_f(p, alpha, self.n)
        if self.kind is BasisKind.G_OUTSIDE:
            return d_alpha_g(p, alpha, self.n)
        coefficient, exponent = d_alpha_monomial(p, alpha, self.n)
        terms = _merge([(exponent, coefficient)])
        return PiecewiseRadial(p, terms, terms)
