"""
Fingerprint generation for sweep-point caching.

Creates SHA256 hashes from the parameters that determine a solved energy,
so a rerun of the same grid point can reuse the stored result.
"""

import hashlib
from fractions import Fraction
from typing import Optional, Tuple


def generate_fingerprint(
    p: int,
    B: Fraction,
    N: int,
    tol: Fraction,
    bracket: Optional[Tuple[Fraction, Fraction]] = None,
    scan_points: int = 0,
) -> str:
    """
    Generate a fingerprint for one sweep grid point.

    The fingerprint is a SHA256 hash of:
    - The prime
    - The coupling B and the truncation depth N
    - The bisection tolerance
    - The bracket ("default" when omitted) and the scan resolution

    Rationals are normalised through Fraction, so "0.5" and "1/2" collide.

    Args:
        p: Prime
        B: Coupling
        N: Truncation depth
        tol: Bisection tolerance
        bracket: Explicit bracket (optional)
        scan_points: Number of scan subintervals

    Returns:
        Hexadecimal SHA256 hash string (64 characters)

    Example:
        >>> fingerprint = generate_fingerprint(101, Fraction(1), 60, Fraction(1, 10**12))
        >>> len(fingerprint)
        64
    """
    bracket_part = "default"
    if bracket is not None:
        bracket_part = f"{Fraction(bracket[0])},{Fraction(bracket[1])}"

    composite = f"{p}|{Fraction(B)}|{N}|{Fraction(tol)}|{bracket_part}|{scan_points}"

    hash_object = hashlib.sha256(composite.encode("utf-8"))

    return hash_object.hexdigest()
