"""Pure Python / numpy versions of the hot kernels.

Every function here has a twin with the same signature in ``_kernels.pyx``.
Both must return identical results; ``tests/test_kernels.py`` checks that.

Metric convention shared by the decoders: for whitened observation ``y`` and
whitened symbol responses ``u_n, v_n`` (so that the noiseless observation is
``sum_n s_n u_n + conj(s_n) v_n``), the joint metric is
``||y - sum_n (s_n u_n + conj(s_n) v_n)||^2`` and the single-symbol metric of
slot ``n`` is the joint metric at the vector ``c e_n``.  Ties go to the
smallest constellation index (lexicographically smallest vector for joint).
"""

from __future__ import annotations

import numpy as np

_CONJ_UNIT = ((1, 0), (0, -1), (-1, 0), (0, 1))  # conj(j**ph) as (re, im)


def single_symbol_argmin(y, u, v, points):
    """Per-slot metrics ``(F, N, M)`` and their argmins ``(F, N)``."""
    y = np.asarray(y, complex)
    u = np.asarray(u, complex)
    v = np.asarray(v, complex)
    c = np.asarray(points, complex)
    # ||y - c u - c* v||^2 expanded into per-slot sufficient statistics
    yy = np.sum(np.abs(y) ** 2, axis=-1)[:, None, None]
    uu = np.sum(np.abs(u) ** 2, axis=-1)[..., None]
    vv = np.sum(np.abs(v) ** 2, axis=-1)[..., None]
    uv = np.einsum("fnt,fnt->fn", u, v.conj())[..., None]
    yu = np.einsum("ft,fnt->fn", y.conj(), u)[..., None]
    yv = np.einsum("ft,fnt->fn", y.conj(), v)[..., None]
    cc = np.abs(c) ** 2
    metrics = (yy + cc * (uu + vv) + 2 * np.real(c * c * uv)
               - 2 * np.real(c * yu + c.conj() * yv))
    return np.argmin(metrics, axis=-1).astype(np.int64), metrics


def joint_argmin(y, u, v, points, chunk: int = 256):
    """Exhaustive minimisation over all ``M**N`` index vectors, shape ``(F, N)``."""
    y = np.asarray(y, complex)
    u = np.asarray(u, complex)
    v = np.asarray(v, complex)
    c = np.asarray(points, complex)
    F, N, _ = u.shape
    M = len(c)
    grid = np.indices((M,) * N).reshape(N, -1).T          # lexicographic order
    cand = c[grid]                                        # (M**N, N)
    out = np.empty((F, N), np.int64)
    for lo in range(0, F, chunk):
        hi = min(F, lo + chunk)
        wx = (np.einsum("cn,fnt->fct", cand, u[lo:hi])
              + np.einsum("cn,fnt->fct", cand.conj(), v[lo:hi]))
        metric = np.sum(np.abs(y[lo:hi, None, :] - wx) ** 2, axis=-1)
        out[lo:hi] = grid[np.argmin(metric, axis=1)]
    return out


def search_dfs(types, n_relays: int, n_symbols: int, length: int,
               node_limit: int = 0):
    """Find the first strictly increasing ``length``-subset of ``types`` forming a code.

    ``types`` rows are ``(k_plain, n_plain, k_conj, n_conj, phase)`` with
    ``-1`` relay marking an absent entry; the plain entry is ``+1`` and the
    conjugate entry is ``j**phase``.  Returns ``(indices or None, nodes)``.
    ``node_limit > 0`` aborts with ``(None, -nodes)`` once exceeded.
    """
    types = np.asarray(types, np.int64)
    P = len(types)
    K, N, T = n_relays, n_symbols, length
    used_a = np.zeros((K, N), bool)
    used_b = np.zeros((K, N), bool)
    cover = np.zeros((K, N), np.int64)
    acc = np.zeros((K, K, N, N, 2), np.int64)
    state = {"uncovered": K * N, "open": 0, "nodes": 0}
    chosen = []
    rows = [tuple(int(x) for x in r) for r in types]

    def bump(ka, na, kb, nb, ph, sign):
        """Add ``sign * conj(b)`` at both symmetric positions; track open entries."""
        dr, di = _CONJ_UNIT[ph]
        for n1, n2 in {(na, nb), (nb, na)}:
            cell = acc[ka, kb, n1, n2]
            was = cell[0] != 0 or cell[1] != 0
            mult = 2 if n1 == n2 else 1
            cell[0] += sign * mult * dr
            cell[1] += sign * mult * di
            now = cell[0] != 0 or cell[1] != 0
            state["open"] += int(now) - int(was)

    def apply(row, sign):
        ka, na, kb, nb, ph = row
        if ka >= 0:
            used_a[ka, na] = sign > 0
            cover[ka, na] += sign
            if (sign > 0 and cover[ka, na] == 1) or (sign < 0 and cover[ka, na] == 0):
                state["uncovered"] -= sign
        if kb >= 0:
            used_b[kb, nb] = sign > 0
            cover[kb, nb] += sign
            if (sign > 0 and cover[kb, nb] == 1) or (sign < 0 and cover[kb, nb] == 0):
                state["uncovered"] -= sign
        if ka >= 0 and kb >= 0:
            bump(ka, na, kb, nb, ph, sign)

    def dead_pair(row):
        ka, na, kb, nb, _ = row
        if ka < 0 or kb < 0:
            return False
        cell = acc[ka, kb, na, nb]
        if cell[0] == 0 and cell[1] == 0:
            return False
        # The only type that can still cancel this cell is the mirrored one,
        # which comes later in the ordering only when n_conj > n_plain.
        return nb <= na or used_a[ka, nb] or used_b[kb, na]

    def rec(depth, start):
        if depth == T:
            return state["uncovered"] == 0 and state["open"] == 0
        left = T - depth - 1
        for i in range(start, P - left):
            row = rows[i]
            ka, na, kb, nb, _ = row
            if (ka >= 0 and used_a[ka, na]) or (kb >= 0 and used_b[kb, nb]):
                continue
            state["nodes"] += 1
            if node_limit and state["nodes"] > node_limit:
                raise _Abort
            apply(row, 1)
            ok = state["uncovered"] <= 2 * left and not dead_pair(row)
            if ok:
                chosen.append(i)
                if rec(depth + 1, i + 1):
                    return True
                chosen.pop()
            apply(row, -1)
        return False

    try:
        found = rec(0, 0)
    except _Abort:
        return None, -state["nodes"]
    return (list(chosen) if found else None), state["nodes"]


class _Abort(Exception):
    pass
