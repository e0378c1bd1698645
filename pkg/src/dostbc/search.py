"""Exhaustive minimum-length search for row-monomial DOSTBCs on tiny instances.

Search space
------------
In a row-monomial DOSTBC every column of the code matrix holds at most one
plain entry ``+-h_k s_n`` (times a power of ``j``) and at most one conjugate
entry, and the two never come from the same relay.  A column is therefore
one of these *types*:

* plain only ``(k, n)``,
* conjugate only ``(k', n')``,
* plain ``(k, n)`` together with conjugate ``(k', n', j**p)``, ``k != k'``.

Multiplying a column by a unit changes none of the defining conditions, so
the first non-zero entry of every column is normalised to ``+1``.  Column
order does not matter either, so a code is a strictly increasing sequence of
type indices.

Pruning, applied incrementally while columns are added:

* row-monomial: each ``(relay, symbol)`` slot of ``A`` and of ``B`` is used
  at most once;
* column-monomial and column-disjointness across relays hold by construction
  of the types;
* coverage: every ``(relay, symbol)`` pair needs at least one entry, and a
  column covers at most two, so a branch with more uncovered pairs than
  twice the remaining columns is cut;
* cross condition ``A_k1 B_k2^H + conj(B_k2) A_k1^T = 0``, kept as exact
  Gaussian integers: a non-zero cell can only be cancelled by one mirrored
  type, so the branch is cut once that type can no longer be added.

The remaining conditions (``A_k1 A_k2^H = 0``, ``B_k1 B_k2^H = 0`` and a
diagonal ``A_k A_k^H + conj(B_k) B_k^T``) are implied by the type structure.
Every witness is re-checked with :func:`dostbc.verifier.verify`.

Lengths are tried in increasing order and the first hit in type order is
returned, so the witness is the lexicographically smallest canonical code
of minimal length.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import kernels
from .codes import DistributedCode

__all__ = ["SearchBudgetError", "SearchResult", "column_types",
           "enumeration_bound", "min_length_search", "DEFAULT_BUDGET"]

#: Upper limit on the number of type combinations the search may enumerate.
DEFAULT_BUDGET = 10 ** 9

_PHASES = (1, 1j, -1, -1j)


class SearchBudgetError(ValueError):
    """The enumeration bound exceeds the configured budget."""


@dataclass(frozen=True)
class SearchResult:
    n_symbols: int
    n_relays: int
    max_t: int
    length: int | None
    witness: DistributedCode | None
    nodes: dict = field(default_factory=dict)   # length -> DFS nodes visited

    @property
    def found(self) -> bool:
        return self.length is not None


def column_types(N: int, K: int) -> np.ndarray:
    """All column types as rows ``(k_plain, n_plain, k_conj, n_conj, phase)``, sorted."""
    rows = [(k, n, -1, -1, 0) for k in range(K) for n in range(N)]
    rows += [(-1, -1, k, n, 0) for k in range(K) for n in range(N)]
    rows += [(k, n, k2, n2, p)
             for k in range(K) for n in range(N)
             for k2 in range(K) if k2 != k
             for n2 in range(N) for p in range(4)]
    return np.array(sorted(rows), dtype=np.int64)


def enumeration_bound(N: int, K: int, max_t: int) -> int:
    """Number of unpruned type combinations over all lengths up to ``max_t``."""
    p = len(column_types(N, K))
    return sum(comb(p, t) for t in range(1, max_t + 1))


def _to_code(types: np.ndarray, chosen, N: int, K: int) -> DistributedCode:
    T = len(chosen)
    a = np.zeros((K, N, T), complex)
    b = np.zeros_like(a)
    for t, i in enumerate(chosen):
        ka, na, kb, nb, ph = (int(x) for x in types[i])
        if ka >= 0:
            a[ka, na, t] = 1
        if kb >= 0:
            b[kb, nb, t] = _PHASES[ph]
    return DistributedCode.from_arrays(a, b)


def min_length_search(N: int, K: int, max_t: int, *,
                      budget: int = DEFAULT_BUDGET) -> SearchResult:
    """Smallest ``T <= max_t`` admitting a row-monomial DOSTBC, with a witness.

    Raises
    ------
    SearchBudgetError
        If :func:`enumeration_bound` exceeds ``budget``.
    """
    for name, v in (("N", N), ("K", K), ("max_t", max_t)):
        if not isinstance(v, (int, np.integer)) or v < 1:
            raise ValueError(f"{name} must be a positive integer, got {v!r}")
    bound = enumeration_bound(N, K, max_t)
    if bound > budget:
        raise SearchBudgetError(
            f"search over N={N}, K={K}, T<={max_t} may enumerate {bound:.3g} "
            f"column combinations, above the budget of {budget:.3g}")
    types = column_types(N, K)
    nodes = {}
    for t in range(1, max_t + 1):
        chosen, count = kernels.search_dfs(types, K, N, t)
        nodes[t] = count
        if chosen is not None:
            return SearchResult(N, K, max_t, t, _to_code(types, chosen, N, K), nodes)
    return SearchResult(N, K, max_t, None, None, nodes)
