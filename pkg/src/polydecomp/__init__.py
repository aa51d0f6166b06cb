"""Functional decomposition of quartic polynomial systems ``f = g o h``.

Exact arithmetic over GF(p) and the rationals, spaces of polynomials with
colon quotients, the decomposition pipelines, instance generators and
brute-force oracles.
"""

from .decomposer import (
    DecompResult,
    decompose_homogeneous,
    decompose_underdetermined,
    fdpmp4,
    recover_right_factor,
    solve_left_factor,
    verify,
)
from .errors import DecompositionFailure, PolyDecompError
from .field import FieldCtx, FieldElem
from .poly import MultiPoly, PolySystem, compose, dehomogenize, homogenize
from .polyspace import PolySpace, build_vtilde, build_vtilde_d, member, quotient_by_linear, quotient_by_power, span

__version__ = "0.1.0"

__all__ = [
    "DecompResult",
    "DecompositionFailure",
    "FieldCtx",
    "FieldElem",
    "MultiPoly",
    "PolyDecompError",
    "PolySpace",
    "PolySystem",
    "build_vtilde",
    "build_vtilde_d",
    "compose",
    "decompose_homogeneous",
    "decompose_underdetermined",
    "dehomogenize",
    "fdpmp4",
    "homogenize",
    "member",
    "quotient_by_linear",
    "quotient_by_power",
    "recover_right_factor",
    "solve_left_factor",
    "span",
    "verify",
]
