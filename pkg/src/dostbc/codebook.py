"""Code constructions achieving the data-rate bounds, and the bounds themselves.

All four constructions return codes whose relay matrices are row-monomial.
Parity notation: ``N = 2l`` or ``2l+1`` symbols, ``K = 2m`` or ``2m+1`` relays.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .codes import DistributedCode
from . import verifier

__all__ = [
    "ConstructionError",
    "CodeVerificationError",
    "RateBound",
    "construct",
    "construct_even_even",
    "construct_odd_even",
    "construct_even_odd",
    "construct_odd_odd",
    "rate_bound_dostbc",
    "rate_bound_row_monomial",
]


class ConstructionError(ValueError):
    """Parameters outside a construction's domain."""


class CodeVerificationError(RuntimeError):
    """A construction ran but its output failed the verifier."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class RateBound:
    """An upper bound ``numerator / denominator`` kept in unreduced ``N/T`` form."""

    numerator: int
    denominator: int
    family: str  # "dostbc" or "row_monomial"

    def __post_init__(self):
        if self.family not in ("dostbc", "row_monomial"):
            raise ValueError(f"unknown family {self.family!r}")
        if not 0 < self.numerator <= self.denominator:
            raise ValueError("bound must lie in (0, 1]")

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __float__(self):
        return self.numerator / self.denominator

    def __str__(self):
        return f"{self.numerator}/{self.denominator}"


def _check_positive(**kw):
    for name, v in kw.items():
        if not isinstance(v, (int, np.integer)) or v < 1:
            raise ConstructionError(f"{name} must be a positive integer, got {v!r}")


def rate_bound_dostbc(N: int, K: int) -> RateBound:
    """Bound valid for every DOSTBC: ``N / ceil(N K / 2)``."""
    _check_positive(N=N, K=K)
    return RateBound(N, -(-N * K // 2), "dostbc")


def rate_bound_row_monomial(N: int, K: int) -> RateBound:
    """Tighter bound for row-monomial DOSTBCs, split by the parities of N and K.

    Requires ``N, K >= 2``.  The returned fraction is ``N / T_min``.
    """
    _check_positive(N=N, K=K)
    if N < 2 or K < 2:
        raise ConstructionError("the row-monomial bound needs N >= 2 and K >= 2")
    l, m = N // 2, K // 2
    if N % 2 == 0 and K % 2 == 0:
        t = m * N                       # 1/m
    elif K % 2 == 0:
        t = 2 * l * m + 2 * m           # (2l+1)/(2lm+2m)
    elif N % 2 == 0:
        t = (m + 1) * N                 # 1/(m+1)
    else:
        t = max(2 * l * m + 2 * m + l + 1, 2 * l * m + 2 * l + m + 1)
    return RateBound(N, t, "row_monomial")


# -- even N, even K ----------------------------------------------------------

def _even_even_arrays(N: int, K: int):
    """Stacked ``(K, N, T)`` arrays for even ``N`` and ``K``.

    Relay ``2p`` carries ``diag(1, -1, ..., 1, -1)`` in A and relay ``2p+1``
    carries ``diag(G_s, ..., G_s)`` with ``G_s = [[0, 1], [1, 0]]`` in B, both
    on column block ``p``.  Blocks are appended one at a time so the length is
    whatever the last block leaves.
    """
    g_a = np.diag(np.tile([1.0, -1.0], N // 2)).astype(complex)
    g_b = np.kron(np.eye(N // 2), [[0, 1], [1, 0]]).astype(complex)
    a_blocks, b_blocks = [], []
    for p in range(K // 2):
        a_blk = np.zeros((K, N, N), complex)
        b_blk = np.zeros((K, N, N), complex)
        a_blk[2 * p] = g_a
        b_blk[2 * p + 1] = g_b
        a_blocks.append(a_blk)
        b_blocks.append(b_blk)
    return np.concatenate(a_blocks, axis=2), np.concatenate(b_blocks, axis=2)


def construct_even_even(N: int, K: int) -> DistributedCode:
    """Rate ``1/m`` code for ``N = 2l``, ``K = 2m``; length ``T = m N``."""
    _check_positive(N=N, K=K)
    if N % 2 or K % 2:
        raise ConstructionError(f"construct_even_even needs even N and K, got ({N}, {K})")
    return DistributedCode.from_arrays(*_even_even_arrays(N, K))


def construct_odd_even(N: int, K: int) -> DistributedCode:
    """Rate ``(2l+1)/(2lm+2m)`` code for ``N = 2l+1 >= 3``, ``K = 2m``.

    The first ``N-1`` symbols use the even-even code; the last symbol is
    sent once by every relay in a ``K x K`` diagonal tail.
    """
    _check_positive(N=N, K=K)
    if N % 2 == 0 or N < 3 or K % 2:
        raise ConstructionError(f"construct_odd_even needs odd N >= 3 and even K, "
                                f"got ({N}, {K})")
    a1, b1 = _even_even_arrays(N - 1, K)
    t1 = a1.shape[2]
    a = np.zeros((K, N, t1 + K), complex)
    b = np.zeros_like(a)
    a[:, :N - 1, :t1] = a1
    b[:, :N - 1, :t1] = b1
    for k in range(K):
        a[k, N - 1, t1 + k] = 1
    return DistributedCode.from_arrays(a, b)


def construct_even_odd(N: int, K: int) -> DistributedCode:
    """Rate ``1/(m+1)`` code for ``N = 2l``, ``K = 2m+1 >= 3``.

    Block diagonal: the even-even code for the first ``K-1`` relays, then the
    last relay sends ``s_0 .. s_{N-1}`` alone.
    """
    _check_positive(N=N, K=K)
    if N % 2 or K % 2 == 0 or K < 3:
        raise ConstructionError(f"construct_even_odd needs even N and odd K >= 3, "
                                f"got ({N}, {K})")
    a1, b1 = _even_even_arrays(N, K - 1)
    t1 = a1.shape[2]
    a = np.zeros((K, N, t1 + N), complex)
    b = np.zeros_like(a)
    a[:K - 1, :, :t1] = a1
    b[:K - 1, :, :t1] = b1
    a[K - 1, :, t1:] = np.eye(N)
    return DistributedCode.from_arrays(a, b)


# -- odd N, odd K ------------------------------------------------------------

def _odd_odd_arrays(N: int, K: int):
    l, m = N // 2, K // 2
    last = K - 1
    # Part I: relay pair p gets a 2 x 2l even-even block in every symbol but s_{p mod N}.
    t1 = 2 * l * m
    a1 = np.zeros((K, N, t1), complex)
    b1 = np.zeros_like(a1)
    pa, pb = _even_even_arrays(2 * l, 2)
    for p in range(m):
        skip = p % N
        symbols = [n for n in range(N) if n != skip]
        block = np.ix_(symbols, range(2 * l * p, 2 * l * (p + 1)))
        for r in range(2):
            a1[2 * p + r][block] = pa[r]
            b1[2 * p + r][block] = pb[r]

    # Part II: give every relay the symbol it skipped.  Where possible the entry
    # is paired Alamouti-style with two entries in the last relay's row, one of
    # them the largest symbol the last relay still lacks.
    width = 4 * m + N
    a2 = np.zeros((K, N, width), complex)
    b2 = np.zeros_like(a2)
    pool = set(range(N))            # symbols the last relay has not received
    c = 0
    # (relay offset, relay's matrix, last relay's matrix, relay sign, last-own sign)
    passes = ((0, b2, a2, 1, -1),   # relays 0, 2, ...: conjugate entries
              (1, a2, b2, -1, 1))   # relays 1, 3, ...: plain entries
    for offset, rel_m, last_m, rel_sign, last_sign in passes:
        used = set()                # symbols already in last_m's row
        for p in range(m):
            own, relay = p % N, 2 * p + offset
            rel_m[relay, own, c] = 1
            partners = pool - {own}
            if not partners or own in used:
                c += 1
                continue
            top = max(partners)
            last_m[last, top, c] = 1
            c += 1
            rel_m[relay, top, c] = rel_sign
            last_m[last, own, c] = last_sign
            used |= {top, own}
            pool -= {top, own}
            c += 1
    # Symbols still in the pool never reached the last relay (N > K, or no
    # admissible partner was left); each gets a column of its own.
    for n in sorted(pool):
        a2[last, n, c] = 1
        c += 1
    return (np.concatenate([a1, a2[:, :, :c]], axis=2),
            np.concatenate([b1, b2[:, :, :c]], axis=2))


def construct_odd_odd(N: int, K: int, *, draws: int = verifier.DEFAULT_DRAWS,
                      seed=0) -> DistributedCode:
    """Code for ``N = 2l+1 >= 3``, ``K = 2m+1 >= 3``, checked before it is returned.

    Raises :class:`CodeVerificationError` if the output is not a row-monomial
    DOSTBC.
    """
    _check_positive(N=N, K=K)
    if N % 2 == 0 or K % 2 == 0 or N < 3 or K < 3:
        raise ConstructionError(f"construct_odd_odd needs odd N, K >= 3, got ({N}, {K})")
    code = DistributedCode.from_arrays(*_odd_odd_arrays(N, K))
    report = verifier.verify(code, draws=draws, seed=seed)
    if report.verdict != "row_monomial_dostbc":
        raise CodeVerificationError(
            f"construction for ({N}, {K}) produced an invalid code: "
            + "; ".join(report.messages[:5]), report)
    return code


def construct(N: int, K: int) -> DistributedCode:
    """Dispatch to the construction matching the parities of ``N`` and ``K``."""
    _check_positive(N=N, K=K)
    if N < 2 or K < 2:
        raise ConstructionError("constructions need N >= 2 and K >= 2")
    if N % 2 == 0 and K % 2 == 0:
        return construct_even_even(N, K)
    if K % 2 == 0:
        return construct_odd_even(N, K)
    if N % 2 == 0:
        return construct_even_odd(N, K)
    return construct_odd_odd(N, K)


def expected_length(N: int, K: int) -> int:
    """Length of the code :func:`construct` returns, from the closed forms."""
    l, m = N // 2, K // 2
    if N % 2 == 0 and K % 2 == 0:
        return m * N
    if K % 2 == 0:
        return 2 * l * m + K
    if N % 2 == 0:
        return 2 * l * m + N
    return rate_bound_row_monomial(N, K).denominator
