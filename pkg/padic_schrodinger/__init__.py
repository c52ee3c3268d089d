"""
p-adic Schrödinger eigenvalue tool.

Exact p-adic arithmetic, radial Haar integrals, the Vladimirov operator on
radial functions and a truncated-series solver for the bound-state energy
of the p-adic Schrödinger equation D²Ψ + B|x|²_p Ψ = EΨ.
"""

__version__ = "1.0.0"
