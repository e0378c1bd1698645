"""Distributed orthogonal space-time block codes for amplify-and-forward relaying."""

from .codes import DistributedCode, RelayMatrixPair, load_code, save_code
from .codebook import (
    CodeVerificationError,
    ConstructionError,
    RateBound,
    construct,
    construct_even_even,
    construct_even_odd,
    construct_odd_even,
    construct_odd_odd,
    rate_bound_dostbc,
    rate_bound_row_monomial,
)
from .verifier import verify

__version__ = "0.1.0"
