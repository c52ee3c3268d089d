"""
Ground state of the p-adic Schrodinger equation D²Ψ + B|x|_p²Ψ = EΨ.

Ψ₀ = Σ c_n f_n + Σ k_n g_{-n}. Matching powers of |x|_p gives two three-term
recurrences (one for the c_n on Z_p, one for the k_n off it) and two leftover
equations, the constant on Z_p and the |x|^-3 coefficient off it. Those two are
linear in (c_0, k_5); a nonzero solution exists only when AD = FC, which fixes E.

Public values are `fractions.Fraction`. The recurrences and the bisection run
on gmpy2 rationals and convert at the boundary.
"""

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

from gmpy2 import mpq

from .haar_measure import DivergenceError, ShellSum
from .padic_core import ArgumentError, DomainError, PAdicError, require_prime
from .vladimirov_operator import d_alpha_f, d_alpha_g, gamma_p

logger = logging.getLogger(__name__)

OPERATOR_ORDER = 2
DEFAULT_TRUNCATION = 60
DEFAULT_SOLVE_TOL = Fraction(1, 10**12)

Number = Union[int, Fraction]
Polynomial = Tuple[mpq, ...]


class UnsupportedParameterError(DomainError):
    """Coupling B outside the supported set (B = 0, or no asymptotic formula)."""

    pass


class StructuralError(PAdicError):
    """A nonzero coefficient met a vanishing denominator in a constraint sum."""

    pass


class BracketError(PAdicError):
    """The determinant does not change sign on the bracket, or the bracket is empty."""

    def __init__(
        self,
        message: str,
        lo: Fraction,
        hi: Fraction,
        g_lo: Optional[Fraction] = None,
        g_hi: Optional[Fraction] = None,
    ):
        super().__init__(message)
        self.lo = lo
        self.hi = hi
        self.g_lo = g_lo
        self.g_hi = g_hi


def _q(x: Number) -> mpq:
    x = Fraction(x)
    return mpq(x.numerator, x.denominator)


def _frac(x: mpq) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def _sign(x: Union[mpq, Fraction]) -> int:
    return (x > 0) - (x < 0)


@lru_cache(maxsize=8192)
def _gamma_q(p: int, x: int) -> mpq:
    return _q(gamma_p(p, x))


@lru_cache(maxsize=8192)
def _power_q(p: int, e: int) -> mpq:
    return mpq(p**e) if e >= 0 else mpq(1, p**-e)


@lru_cache(maxsize=8192)
def _inside_ratio(p: int, n: int) -> mpq:
    """Γ_p(2n+3)/Γ_p(2n+5), the step factor of the c recurrence."""
    return _gamma_q(p, 2 * n + 3) / _gamma_q(p, 2 * n + 5)


@lru_cache(maxsize=8192)
def _outside_ratio(p: int, n: int) -> mpq:
    """Γ_p(-2n)/Γ_p(-2n-2), n >= 1."""
    return _gamma_q(p, -2 * n) / _gamma_q(p, -2 * n - 2)


@dataclass(frozen=True)
class ModelParams:
    """Prime, coupling B, energy E and truncation depth N."""

    p: int
    B: Fraction
    E: Fraction = Fraction(0)
    truncation: int = DEFAULT_TRUNCATION

    def __post_init__(self) -> None:
        require_prime(self.p)
        object.__setattr__(self, "B", Fraction(self.B))
        object.__setattr__(self, "E", Fraction(self.E))
        if self.B == 0:
            raise UnsupportedParameterError(
                "B = 0 is unsupported: the outside recurrence divides by B"
            )
        if self.truncation < 1:
            raise ArgumentError(f"truncation must be positive, got {self.truncation}")

    def with_energy(self, E: Number) -> "ModelParams":
        return replace(self, E=Fraction(E))


@dataclass(frozen=True)
class CoefficientTable:
    """
    Series coefficients of Ψ₀ indexed by subscript.

    c[i] = c_i for 0 <= i <= 2N; k[i] = k_i for 0 <= i <= 2N+5 (k[0] is an
    unused 0). tau and s are the same sequences normalised to c_0 = 1 and
    k_5 = 1.
    """

    c: Tuple[Fraction, ...]
    k: Tuple[Fraction, ...]
    tau: Tuple[Fraction, ...]
    s: Tuple[Fraction, ...]

    @property
    def truncation(self) -> int:
        return (len(self.c) - 1) // 2

    @property
    def c0(self) -> Fraction:
        return self.c[0]

    @property
    def k5(self) -> Fraction:
        return self.k[5]


@dataclass(frozen=True)
class ConstraintValues:
    """The four constraint series at one energy, with their tail estimates (A, C, D, F order)."""

    A: Fraction
    C: Fraction
    D: Fraction
    F: Fraction
    truncation: int
    tail_bounds: Tuple[Fraction, Fraction, Fraction, Fraction]

    def determinant(self) -> Fraction:
        return self.A * self.D - self.F * self.C


def _inside_sequence(p: int, B: mpq, E: mpq, c0: mpq, N: int) -> List[mpq]:
    c = [mpq(0)] * (2 * N + 1)
    c[0] = c0
    for n in range(N - 1):
        c[2 * n + 4] = (E * c[2 * n + 2] - B * c[2 * n]) * _inside_ratio(p, n)
    return c


def _outside_sequence(p: int, B: mpq, E: mpq, k5: mpq, N: int) -> List[mpq]:
    k = [mpq(0)] * (2 * N + 6)
    k[5] = k5
    for n in range(1, N + 1):
        # the n = 0 equation is the outside constraint itself
        carry = k[2 * n + 1] * _outside_ratio(p, n) if k[2 * n + 1] != 0 else mpq(0)
        k[2 * n + 5] = (E * k[2 * n + 3] - carry) / B
    return k


def coeffs_inside(params: ModelParams, c0: Number, N: Optional[int] = None) -> Tuple[Fraction, ...]:
    """
    c_0..c_2N from c_{2n+4} = (E·c_{2n+2} - B·c_{2n})·Γ_p(2n+3)/Γ_p(2n+5).

    Seeds are c_0 = c0 and c_2 = 0; every odd entry is 0.

    Example:
        >>> params = ModelParams(5, 1)
        >>> coeffs_inside(params, 1, 2)[4] == -gamma_p(5, 3) / gamma_p(5, 5)
        True
    """
    N = params.truncation if N is None else N
    if N < 1:
        raise ArgumentError(f"truncation must be positive, got {N}")
    c = _inside_sequence(params.p, _q(params.B), _q(params.E), _q(c0), N)
    return tuple(_frac(x) for x in c)


def coeffs_outside(
    params: ModelParams, k5: Number, N: Optional[int] = None
) -> Tuple[Fraction, ...]:
    """
    k_0..k_{2N+5} from k_{2n+5} = (E·k_{2n+3} - k_{2n+1}·Γ_p(-2n)/Γ_p(-2n-2))/B.

    Seeds are k_1 = k_3 = 0 and k_5 = k5; every even entry is 0.
    """
    N = params.truncation if N is None else N
    if N < 1:
        raise ArgumentError(f"truncation must be positive, got {N}")
    k = _outside_sequence(params.p, _q(params.B), _q(params.E), _q(k5), N)
    return tuple(_frac(x) for x in k)


def coefficient_table(
    params: ModelParams, c0: Number, k5: Number, N: Optional[int] = None
) -> CoefficientTable:
    """Coefficient table for the given (c_0, k_5) at the energy in params."""
    tau = coeffs_inside(params, 1, N)
    s = coeffs_outside(params, 1, N)
    c0, k5 = Fraction(c0), Fraction(k5)
    return CoefficientTable(
        c=tuple(c0 * x for x in tau), k=tuple(k5 * x for x in s), tau=tau, s=s
    )


def scale_solution(table: CoefficientTable, c: Number) -> CoefficientTable:
    """c·Ψ₀, which solves the same equation."""
    c = Fraction(c)
    return CoefficientTable(
        c=tuple(c * x for x in table.c),
        k=tuple(c * x for x in table.k),
        tau=table.tau,
        s=table.s,
    )


def _weighted_sum(
    p: int, terms: Iterable[Tuple[int, mpq]], exponent: Callable[[int], int], label: str
) -> Tuple[mpq, mpq]:
    """
    Σ coefficient/(p - p^exponent(index)), skipping zero coefficients.

    Returns the sum and the last nonzero term.
    """
    total = mpq(0)
    last = mpq(0)
    for index, coefficient in terms:
        if coefficient == 0:
            continue
        denominator = p - _power_q(p, exponent(index))
        if denominator == 0:
            raise StructuralError(
                f"{label}: nonzero coefficient at index {index} over a vanishing denominator"
            )
        last = coefficient / denominator
        total += last
    return total, last


def _constraint_series(
    p: int, B: mpq, E: mpq, tau: Sequence[mpq], s: Sequence[mpq], N: int
) -> Tuple[Tuple[mpq, mpq, mpq, mpq], Tuple[mpq, mpq, mpq, mpq]]:
    inside = [(n, tau[2 * n]) for n in range(N + 1)]
    outside = [(n, s[2 * n + 1]) for n in range(2, N + 3)]
    shift = _gamma_q(p, -OPERATOR_ORDER) / (p - 1)

    A, last_A = _weighted_sum(p, inside, lambda n: -2 * n, "A")
    C, last_C = _weighted_sum(p, inside, lambda n: 3 - 2 * n, "C")
    D, last_D = _weighted_sum(p, outside, lambda n: 2 * n + 4, "D")
    F, last_F = _weighted_sum(p, outside, lambda n: 2 * n + 1, "F")
    values = (A, C - E * shift, D, F - B * shift)
    lasts = (last_A, last_C, last_D, last_F)
    return values, lasts


def constraint_values(params: ModelParams, N: Optional[int] = None) -> ConstraintValues:
    """
    A, C, D and F at the energy in params.

        A = Σ_{n=0}^{N} τ_{2n}/(p - p^-2n)
        C = Σ_{n=0}^{N} τ_{2n}/(p - p^(3-2n)) - E·Γ_p(-2)/(p-1)
        D = Σ_{n=2}^{N+2} s_{2n+1}/(p - p^(2n+4))
        F = Σ_{n=2}^{N+2} s_{2n+1}/(p - p^(2n+1)) - B·Γ_p(-2)/(p-1)

    Zero coefficients are skipped before their denominator is formed. Each tail
    bound is |last nonzero term|/(p - 1), the sum of a geometric tail of ratio 1/p
    (not p^-2) started after that term.

    Raises:
        StructuralError: If a nonzero coefficient meets a zero denominator
    """
    N = params.truncation if N is None else N
    if N < 1:
        raise ArgumentError(f"truncation must be positive, got {N}")
    p = params.p
    B, E = _q(params.B), _q(params.E)
    tau = _inside_sequence(p, B, E, mpq(1), N)
    s = _outside_sequence(p, B, E, mpq(1), N)
    values, lasts = _constraint_series(p, B, E, tau, s, N)
    tails = tuple(_frac(abs(last) / (p - 1)) for last in lasts)
    A, C, D, F = (_frac(v) for v in values)
    return ConstraintValues(A, C, D, F, N, tails)  # type: ignore[arg-type]


def determinant(params: ModelParams, N: Optional[int] = None) -> Fraction:
    """G(E) = A·D - F·C at the energy in params."""
    return constraint_values(params, N).determinant()


def raw_constraints(params: ModelParams, table: CoefficientTable) -> Tuple[Fraction, Fraction]:
    """
    Residuals of the two leftover coefficient-matching equations.

    The first is the constant term of D²Ψ + B|x|²Ψ - EΨ on Z_p, the second the
    |x|^-3 coefficient off Z_p. Both vanish for an exact solution; they equal
    ((p-1)/Γ_p(-2))·(c_0 C - k_5 D) and ((p-1)/Γ_p(-2))·(c_0 A - k_5 F).
    """
    p = params.p
    scale = _q(Fraction(p - 1) / gamma_p(p, -OPERATOR_ORDER))
    c = [(i, _q(x)) for i, x in enumerate(table.c)]
    k = [(i, _q(x)) for i, x in enumerate(table.k)]

    inside_c, _ = _weighted_sum(p, c, lambda i: 3 - i, "constant on Z_p")
    inside_k, _ = _weighted_sum(p, k, lambda i: 3 + i, "constant on Z_p")
    outside_c, _ = _weighted_sum(p, c, lambda i: -i, "|x|^-3 off Z_p")
    outside_k, _ = _weighted_sum(p, k, lambda i: i, "|x|^-3 off Z_p")

    constant = scale * (inside_c - inside_k) - _q(params.E) * _q(table.c0)
    decay = scale * (outside_c - outside_k) + _q(params.B) * _q(table.k5)
    return _frac(constant), _frac(decay)


def _horner(coefficients: Polynomial, x: mpq) -> mpq:
    total = mpq(0)
    for a in reversed(coefficients):
        total = total * x + a
    return total


def _poly_add(a: Sequence[mpq], b: Sequence[mpq]) -> List[mpq]:
    size = max(len(a), len(b))
    return [
        (a[i] if i < len(a) else mpq(0)) + (b[i] if i < len(b) else mpq(0)) for i in range(size)
    ]


def _poly_scale(a: Sequence[mpq], c: mpq) -> List[mpq]:
    return [x * c for x in a]


@dataclass(frozen=True)
class DeterminantPolynomial:
    """A, C, D and F as exact polynomials in E (coefficients lowest degree first)."""

    p: int
    B: Fraction
    truncation: int
    A: Polynomial
    C: Polynomial
    D: Polynomial
    F: Polynomial

    def constraints(self, E: Number) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        x = _q(E)
        A, C, D, F = (_frac(_horner(poly, x)) for poly in (self.A, self.C, self.D, self.F))
        return A, C, D, F

    def evaluate_q(self, E: mpq) -> mpq:
        return _horner(self.A, E) * _horner(self.D, E) - _horner(self.F, E) * _horner(self.C, E)

    def evaluate(self, E: Number) -> Fraction:
        """G(E) = A(E)·D(E) - F(E)·C(E)."""
        return _frac(self.evaluate_q(_q(E)))


def _polynomial_sum(
    p: int, terms: Iterable[Tuple[int, List[mpq]]], exponent: Callable[[int], int]
) -> List[mpq]:
    total: List[mpq] = []
    for index, poly in terms:
        if not any(x != 0 for x in poly):
            continue
        denominator = p - _power_q(p, exponent(index))
        if denominator == 0:
            raise StructuralError(
                f"nonzero polynomial coefficient at index {index} over a vanishing denominator"
            )
        total = _poly_add(total, _poly_scale(poly, 1 / denominator))
    return total


@lru_cache(maxsize=64)
def determinant_polynomial(p: int, B: Fraction, N: int) -> DeterminantPolynomial:
    """
    Expand the constraint series symbolically in E.

    τ_{2n} and s_{2n+1} are polynomials in E, so each bisection step of solve_E
    costs four Horner evaluations instead of two fresh recurrences.
    """
    params = ModelParams(p, B, truncation=N)
    Bq = _q(params.B)

    tau: List[List[mpq]] = [[mpq(0)] for _ in range(2 * N + 1)]
    tau[0] = [mpq(1)]
    for n in range(N - 1):
        shifted = [mpq(0)] + tau[2 * n + 2]
        step = _poly_add(shifted, _poly_scale(tau[2 * n], -Bq))
        tau[2 * n + 4] = _poly_scale(step, _inside_ratio(p, n))

    s: List[List[mpq]] = [[mpq(0)] for _ in range(2 * N + 6)]
    s[5] = [mpq(1)]
    for n in range(1, N + 1):
        shifted = [mpq(0)] + s[2 * n + 3]
        carry = _poly_scale(s[2 * n + 1], -_outside_ratio(p, n))
        s[2 * n + 5] = _poly_scale(_poly_add(shifted, carry), 1 / Bq)

    inside = [(n, tau[2 * n]) for n in range(N + 1)]
    outside = [(n, s[2 * n + 1]) for n in range(2, N + 3)]
    shift = _gamma_q(p, -OPERATOR_ORDER) / (p - 1)

    A = _polynomial_sum(p, inside, lambda n: -2 * n)
    C = _poly_add(_polynomial_sum(p, inside, lambda n: 3 - 2 * n), [mpq(0), -shift])
    D = _polynomial_sum(p, outside, lambda n: 2 * n + 4)
    F = _poly_add(_polynomial_sum(p, outside, lambda n: 2 * n + 1), [-Bq * shift])
    logger.debug("determinant polynomial for p=%d, B=%s, N=%d built", p, params.B, N)
    return DeterminantPolynomial(
        p, params.B, N, tuple(A), tuple(C), tuple(D), tuple(F)
    )


def asymptotic_E(p: int, B: Number) -> Fraction:
    """
    Large-p prediction of the ground-state energy.

    Returns:
        2 - 2/p for B = 1; -2/(3p²) + 7/(3p³) for B = -1

    Raises:
        UnsupportedParameterError: For any other B

    Example:
        >>> asymptotic_E(101, 1)
        Fraction(200, 101)
    """
    require_prime(p)
    B = Fraction(B)
    if B == 1:
        return 2 - Fraction(2, p)
    if B == -1:
        return Fraction(-2, 3 * p**2) + Fraction(7, 3 * p**3)
    raise UnsupportedParameterError(f"no asymptotic energy formula for B = {B}")


def scaled_error(p: int, B: Number, E: Number) -> Optional[Fraction]:
    """
    |E - asymptotic_E|·p² for B = 1 and ·p⁴ for B = -1; None for other B.
    """
    B = Fraction(B)
    if B not in (1, -1):
        return None
    exponent = 2 if B == 1 else 4
    return abs(Fraction(E) - asymptotic_E(p, B)) * p**exponent


def default_bracket(p: int, B: Number) -> Tuple[Fraction, Fraction]:
    """Bracket centred on asymptotic_E with half-width max(1/p, |asymptotic_E|/4)."""
    center = asymptotic_E(p, B)
    half = max(Fraction(1, p), abs(center) / 4)
    return center - half, center + half


@dataclass(frozen=True)
class LeadingOrder:
    """Leading-order predictions for τ_4n, τ_{4n+2}, s_{4n+1} and s_{4n+3}."""

    tau_4n: Optional[Fraction]
    tau_4n_plus_2: Optional[Fraction]
    s_4n_plus_1: Optional[Fraction]
    s_4n_plus_3: Optional[Fraction]


def tau_s_asymptotics(p: int, B: Number, E: Number, n: int) -> LeadingOrder:
    """
    Leading-order size of the normalised coefficients at large p.

    B = 1:  τ_4n = (-1)^n p^-2n, τ_{4n+2} = (-1)^n·n·E·p^(-2n-2),
            s_{4n+1} = (-1)^(n+1) p^(2n-2), s_{4n+3} = (-1)^(n+1)·n·E·p^(2n-2)
    B = -1: τ_4n = p^-2n, τ_{4n+2} = n·E·p^(-2n-2),
            s_{4n+1} = p^(2n-2), s_{4n+3} = -n·E·p^(2n-2)

    Every field is None for n < 1.

    Raises:
        UnsupportedParameterError: For B other than ±1
    """
    require_prime(p)
    B, E = Fraction(B), Fraction(E)
    if B not in (1, -1):
        raise UnsupportedParameterError(f"no coefficient asymptotics for B = {B}")
    if n < 1:
        return LeadingOrder(None, None, None, None)
    base = Fraction(p)
    if B == 1:
        sign = (-1) ** n
        return LeadingOrder(
            tau_4n=sign * base ** (-2 * n),
            tau_4n_plus_2=sign * n * E * base ** (-2 * n - 2),
            s_4n_plus_1=-sign * base ** (2 * n - 2),
            s_4n_plus_3=-sign * n * E * base ** (2 * n - 2),
        )
    return LeadingOrder(
        tau_4n=base ** (-2 * n),
        tau_4n_plus_2=n * E * base ** (-2 * n - 2),
        s_4n_plus_1=base ** (2 * n - 2),
        s_4n_plus_3=-n * E * base ** (2 * n - 2),
    )


def asymptotic_deviation(actual: Number, predicted: Number) -> Fraction:
    """|actual/predicted - 1|."""
    predicted = Fraction(predicted)
    if predicted == 0:
        raise DomainError("deviation from a zero prediction is undefined")
    return abs(Fraction(actual) / predicted - 1)


@dataclass(frozen=True)
class EigenResult:
    """Outcome of solve_E."""

    p: int
    B: Fraction
    E: Fraction
    bracket: Tuple[Fraction, Fraction]
    initial_bracket: Tuple[Fraction, Fraction]
    determinant_residual: Fraction
    truncation: int
    asymptotic: Optional[Fraction]
    iterations: int
    candidate_brackets: Tuple[Tuple[Fraction, Fraction], ...] = field(default_factory=tuple)

    @property
    def deviation(self) -> Optional[Fraction]:
        """E minus the asymptotic prediction."""
        if self.asymptotic is None:
            return None
        return self.E - self.asymptotic

    @property
    def scaled_error(self) -> Optional[Fraction]:
        return scaled_error(self.p, self.B, self.E)

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.p, self.B, self.E, self.truncation)


def scan_brackets(
    p: int, B: Number, lo: Number, hi: Number, points: int, N: int = DEFAULT_TRUNCATION
) -> List[Tuple[Fraction, Fraction]]:
    """
    Split [lo, hi] into `points` equal pieces and keep those where G changes sign.

    A piece whose right end is an exact root is kept as well.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    if points < 1:
        raise ArgumentError(f"scan needs at least one subinterval, got {points}")
    if not lo < hi:
        raise BracketError(f"empty bracket [{lo}, {hi}]", lo, hi)
    poly = determinant_polynomial(p, Fraction(B), N)
    grid = [lo + (hi - lo) * i / points for i in range(points + 1)]
    signs = [_sign(poly.evaluate_q(_q(x))) for x in grid]

    found = []
    for i in range(points):
        left, right = signs[i], signs[i + 1]
        if left * right < 0 or right == 0 or (i == 0 and left == 0):
            found.append((grid[i], grid[i + 1]))
    logger.debug("scan of [%s, %s] in %d pieces: %d sign changes", lo, hi, points, len(found))
    return found


def solve_E(
    p: int,
    B: Number,
    bracket: Optional[Tuple[Number, Number]] = None,
    tol: Number = DEFAULT_SOLVE_TOL,
    N: int = DEFAULT_TRUNCATION,
    scan_points: int = 0,
) -> EigenResult:
    """
    Solve the determinant condition AD = FC for E by exact bisection.

    Args:
        p: Prime
        B: Coupling
        bracket: (lo, hi) with a sign change of G; default_bracket(p, B) if omitted
        tol: Stop once the bracket is narrower than this
        N: Truncation depth of the constraint series
        scan_points: If positive, first split the bracket this many ways and
            bisect the sign change whose midpoint is nearest the prediction

    Returns:
        EigenResult with the bracket midpoint as E

    Raises:
        BracketError: If the bracket is empty or G has the same sign at both ends
        UnsupportedParameterError: If B = 0, or no bracket is given and B is not ±1

    Example:
        >>> result = solve_E(101, 1)
        >>> abs(result.E - asymptotic_E(101, 1)) * 101**2 <= 1
        True
    """
    params = ModelParams(p, Fraction(B), truncation=N)
    tol = Fraction(tol)
    if tol <= 0:
        raise ArgumentError(f"tolerance must be positive, got {tol}")
    lo, hi = default_bracket(p, params.B) if bracket is None else bracket
    lo, hi = Fraction(lo), Fraction(hi)
    initial = (lo, hi)
    if not lo < hi:
        raise BracketError(f"degenerate bracket [{lo}, {hi}]", lo, hi)

    try:
        asymptotic: Optional[Fraction] = asymptotic_E(p, params.B)
    except UnsupportedParameterError:
        asymptotic = None
    target = asymptotic if asymptotic is not None else (lo + hi) / 2

    poly = determinant_polynomial(p, params.B, N)
    candidates: Tuple[Tuple[Fraction, Fraction], ...] = ()
    if scan_points > 0:
        candidates = tuple(scan_brackets(p, params.B, lo, hi, scan_points, N))
        if not candidates:
            raise BracketError(
                f"no sign change of G found scanning [{lo}, {hi}] in {scan_points} pieces",
                lo,
                hi,
            )
        lo, hi = min(candidates, key=lambda b: abs((b[0] + b[1]) / 2 - target))

    a, b = _q(lo), _q(hi)
    g_a, g_b = poly.evaluate_q(a), poly.evaluate_q(b)
    if _sign(g_a) * _sign(g_b) > 0:
        raise BracketError(
            f"G(E) has the same sign at both ends of [{lo}, {hi}]: "
            f"G(lo) = {float(g_a):.6g}, G(hi) = {float(g_b):.6g}",
            lo,
            hi,
            _frac(g_a),
            _frac(g_b),
        )

    tol_q = _q(tol)
    iterations = 0
    root: Optional[mpq] = a if g_a == 0 else b if g_b == 0 else None
    while root is None and b - a >= tol_q:
        mid = (a + b) / 2
        g_mid = poly.evaluate_q(mid)
        iterations += 1
        if g_mid == 0:
            root = mid
        elif _sign(g_mid) == _sign(g_a):
            a, g_a = mid, g_mid
        else:
            b = mid
        logger.debug("bisection step %d: width %.3g", iterations, float(b - a))

    E = root if root is not None else (a + b) / 2
    E_frac = _frac(E)
    logger.info(
        "solved p=%d B=%s N=%d: E ≈ %.15g after %d steps", p, params.B, N, float(E), iterations
    )
    return EigenResult(
        p=p,
        B=params.B,
        E=E_frac,
        bracket=(_frac(a), _frac(b)),
        initial_bracket=initial,
        determinant_residual=_frac(poly.evaluate_q(E)),
        truncation=N,
        asymptotic=asymptotic,
        iterations=iterations,
        candidate_brackets=candidates,
    )


def solve_table(result: EigenResult, N: Optional[int] = None) -> CoefficientTable:
    """Coefficient table at the solved energy with (c_0, k_5) = (F, A), the null vector."""
    params = result.params
    values = constraint_values(params, N)
    return coefficient_table(params, values.F, values.A, N)


def _partial_sum(terms: Sequence[Fraction]) -> ShellSum:
    total = sum(terms, Fraction(0))
    nonzero = [abs(t) for t in terms if t != 0]
    if len(nonzero) < 2:
        return ShellSum(total, len(terms), Fraction(0))
    ratio = nonzero[-1] / nonzero[-2]
    if ratio >= 1:
        raise DivergenceError(f"series terms are growing (last ratio {float(ratio):.3g})")
    return ShellSum(total, len(terms), nonzero[-1] * ratio / (1 - ratio))


def evaluate_psi(params: ModelParams, table: CoefficientTable, t: int) -> ShellSum:
    """
    Ψ₀ on the shell |x|_p = p^t.

    Σ c_n p^(tn) for t <= 0 and Σ k_n p^(-tn) for t >= 1, with a tail estimate
    from the ratio of the last two nonzero terms.

    Raises:
        DivergenceError: If the last terms are not decaying
    """
    base = Fraction(params.p)
    if t <= 0:
        terms = [x * base ** (t * i) for i, x in enumerate(table.c)]
    else:
        terms = [x * base ** (-t * i) for i, x in enumerate(table.k)]
    return _partial_sum(terms)


def apply_operator(params: ModelParams, table: CoefficientTable, t: int) -> Fraction:
    """D²Ψ₀ on the shell |x|_p = p^t, term by term from the closed forms."""
    total = Fraction(0)
    for n, coefficient in enumerate(table.c):
        if coefficient != 0:
            total += coefficient * d_alpha_f(params.p, OPERATOR_ORDER, n).evaluate(t)
    for n, coefficient in enumerate(table.k):
        if coefficient != 0:
            total += coefficient * d_alpha_g(params.p, OPERATOR_ORDER, -n).evaluate(t)
    return total


def residual(params: ModelParams, table: CoefficientTable, t: int) -> Fraction:
    """
    |D²Ψ + B|x|²Ψ - EΨ| on the shell |x|_p = p^t for the truncated series.

    Only the truncation and the energy error contribute; it is exact in the
    coefficients, so scaling the table scales the residual by |c|.
    """
    psi = evaluate_psi(params, table, t).value
    potential = params.B * Fraction(params.p) ** (2 * t)
    value = apply_operator(params, table, t) + potential * psi - params.E * psi
    return abs(value)


def relative_residual(params: ModelParams, table: CoefficientTable, t: int) -> Fraction:
    """residual / |E·Ψ(t)|."""
    absolute = residual(params, table, t)
    scale = abs(params.E * evaluate_psi(params, table, t).value)
    if scale == 0:
        if absolute == 0:
            return Fraction(0)
        raise DomainError(f"E·Ψ vanishes on shell {t}; relative residual is undefined")
    return absolute / scale


@dataclass(frozen=True)
class NaiveSeries:
    """
    Coefficients b_0..b_4N of the single power series Σ b_n |x|^n.

    The series converges only where |x|_p⁴ < region_bound = p²/|B|.
    """

    p: int
    B: Fraction
    coefficients: Tuple[Fraction, ...]
    region_bound: Fraction

    @property
    def convergent_everywhere(self) -> bool:
        return False

    def converges_at(self, t: int) -> bool:
        """True when the shell |x|_p = p^t lies in the convergence region."""
        return Fraction(self.p) ** (4 * t) < self.region_bound


def naive_series(p: int, B: Number, N: int) -> NaiveSeries:
    """
    Single-series ansatz Ψ = Σ b_n |x|^n with b_0 = 1.

    b_{4n} = -B·b_{4n-4}·Γ_p(4n-1)/Γ_p(4n+1); every other coefficient is 0.
    """
    require_prime(p)
    B = Fraction(B)
    if B == 0:
        raise UnsupportedParameterError("B = 0 makes the naive series trivial")
    if N < 1:
        raise ArgumentError(f"number of terms must be positive, got {N}")
    b = [Fraction(0)] * (4 * N + 1)
    b[0] = Fraction(1)
    for n in range(1, N + 1):
        b[4 * n] = -B * b[4 * n - 4] * gamma_p(p, 4 * n - 1) / gamma_p(p, 4 * n + 1)
    return NaiveSeries(p, B, tuple(b), Fraction(p**2) / abs(B))


def naive_partial_sums(series: NaiveSeries, t: int, terms: Optional[int] = None) -> List[Fraction]:
    """Partial sums of Σ b_4n p^(4nt) over the first `terms` nonzero terms."""
    available = (len(series.coefficients) - 1) // 4 + 1
    terms = available if terms is None else terms
    if terms > available:
        raise ArgumentError(f"series carries {available} terms, {terms} requested")
    base = Fraction(series.p)
    sums = []
    total = Fraction(0)
    for n in range(terms):
        total += series.coefficients[4 * n] * base ** (4 * n * t)
        sums.append(total)
    return sums
