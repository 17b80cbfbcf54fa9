"""Intrinsic randomness of quantum measurements.

Guessing probabilities with primal and dual certificates for unbiased
extremal POVMs, Bloch-ball geometry of qubit MICs, and the equivalent
state-discrimination picture.
"""

from .errors import (
    CertificationError,
    ConvergenceError,
    GridError,
    InputError,
    PovmRandError,
)
from .povm import (
    Povm,
    make_projective,
    make_projective_qubit,
    make_qubit_mic,
    make_sic,
    make_skewed_sic,
    make_trine,
    validate,
)
from .randomness import (
    GuessReport,
    certify,
    guessing_probability,
    hmin,
    max_randomness,
)

__all__ = [
    "CertificationError",
    "ConvergenceError",
    "GridError",
    "GuessReport",
    "InputError",
    "Povm",
    "PovmRandError",
    "certify",
    "guessing_probability",
    "hmin",
    "make_projective",
    "make_projective_qubit",
    "make_qubit_mic",
    "make_sic",
    "make_skewed_sic",
    "make_trine",
    "max_randomness",
    "validate",
]
