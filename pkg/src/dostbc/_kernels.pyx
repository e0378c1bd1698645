# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_fallback.py``.

Same signatures, same tie-breaking, same search order.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef double complex cplx

cdef int CONJ_RE[4]
cdef int CONJ_IM[4]
CONJ_RE[:] = [1, 0, -1, 0]
CONJ_IM[:] = [0, -1, 0, 1]


cdef inline double abs2(cplx z) nogil:
    return z.real * z.real + z.imag * z.imag


def single_symbol_argmin(y, u, v, points):
    """Per-slot metrics ``(F, N, M)`` and their argmins ``(F, N)``."""
    cdef const cplx[:, ::1] yv = np.ascontiguousarray(y, dtype=np.complex128)
    cdef const cplx[:, :, ::1] uv = np.ascontiguousarray(u, dtype=np.complex128)
    cdef const cplx[:, :, ::1] vv = np.ascontiguousarray(v, dtype=np.complex128)
    cdef const cplx[::1] cv = np.ascontiguousarray(points, dtype=np.complex128)
    cdef Py_ssize_t F = uv.shape[0], N = uv.shape[1], T = uv.shape[2], M = cv.shape[0]
    metrics = np.empty((F, N, M), np.float64)
    idx = np.empty((F, N), np.int64)
    cdef double[:, :, ::1] mv = metrics
    cdef long long[:, ::1] iv = idx
    cdef Py_ssize_t f, n, m, t, best
    cdef double acc, best_val
    cdef cplx c, cc
    with nogil:
        for f in range(F):
            for n in range(N):
                best = 0
                best_val = 0
                for m in range(M):
                    c = cv[m]
                    cc = c.conjugate()
                    acc = 0
                    for t in range(T):
                        acc = acc + abs2(yv[f, t] - c * uv[f, n, t] - cc * vv[f, n, t])
                    mv[f, n, m] = acc
                    if m == 0 or acc < best_val:
                        best_val = acc
                        best = m
                iv[f, n] = best
    return idx, metrics


def joint_argmin(y, u, v, points, chunk=256):
    """Exhaustive minimisation over all ``M**N`` index vectors, shape ``(F, N)``."""
    cdef const cplx[:, ::1] yv = np.ascontiguousarray(y, dtype=np.complex128)
    cdef const cplx[:, :, ::1] uv = np.ascontiguousarray(u, dtype=np.complex128)
    cdef const cplx[:, :, ::1] vv = np.ascontiguousarray(v, dtype=np.complex128)
    cdef const cplx[::1] cv = np.ascontiguousarray(points, dtype=np.complex128)
    cdef Py_ssize_t F = uv.shape[0], N = uv.shape[1], T = uv.shape[2], M = cv.shape[0]
    out = np.empty((F, N), np.int64)
    cdef long long[:, ::1] ov = out
    cur_arr = np.zeros(N, np.int64)
    best_arr = np.zeros(N, np.int64)
    # partial[n, t]: residual after subtracting slots 0..n-1
    partial_arr = np.zeros((N + 1, T), np.complex128)
    cdef long long[::1] cur = cur_arr
    cdef long long[::1] best = best_arr
    cdef cplx[:, ::1] part = partial_arr
    cdef Py_ssize_t f, n, t, level
    cdef double acc, best_val
    cdef cplx c, cc
    cdef bint first
    with nogil:
        for f in range(F):
            for t in range(T):
                part[0, t] = yv[f, t]
            for n in range(N):
                cur[n] = 0
            level = 0
            first = True
            best_val = 0
            while True:
                # rebuild residuals from ``level`` down to the leaf
                for n in range(level, N):
                    c = cv[cur[n]]
                    cc = c.conjugate()
                    for t in range(T):
                        part[n + 1, t] = part[n, t] - c * uv[f, n, t] - cc * vv[f, n, t]
                acc = 0
                for t in range(T):
                    acc = acc + abs2(part[N, t])
                if first or acc < best_val:
                    first = False
                    best_val = acc
                    for n in range(N):
                        best[n] = cur[n]
                # odometer increment, last slot fastest (lexicographic order)
                level = N - 1
                while level >= 0:
                    cur[level] += 1
                    if cur[level] < M:
                        break
                    cur[level] = 0
                    level -= 1
                if level < 0:
                    break
            for n in range(N):
                ov[f, n] = best[n]
    return out


def search_dfs(types, int n_relays, int n_symbols, int length, long long node_limit=0):
    """Iterative version of the depth-first code search; see ``_fallback``."""
    cdef const long long[:, ::1] ty = np.ascontiguousarray(types, dtype=np.int64).reshape(-1, 5)
    cdef Py_ssize_t P = ty.shape[0]
    cdef int K = n_relays, N = n_symbols, T = length
    used_a_arr = np.zeros(K * N, np.int8)
    used_b_arr = np.zeros(K * N, np.int8)
    cover_arr = np.zeros(K * N, np.int64)
    acc_arr = np.zeros(K * K * N * N * 2, np.int64)
    idx_arr = np.full(T + 1, -1, np.int64)
    cdef signed char[::1] used_a = used_a_arr
    cdef signed char[::1] used_b = used_b_arr
    cdef long long[::1] cover = cover_arr
    cdef long long[::1] acc = acc_arr
    cdef long long[::1] idx = idx_arr
    cdef long long nodes = 0, uncovered = K * N, n_open = 0
    cdef int depth = 0, left
    cdef Py_ssize_t i
    cdef bint found = False, aborted = False, advanced
    if T <= 0 or P < T:
        return None, 0
    with nogil:
        while True:
            left = T - depth - 1
            i = idx[depth]
            if i >= 0:
                _apply(ty, i, -1, K, N, used_a, used_b, cover, acc, &uncovered, &n_open)
                i += 1
            else:
                i = idx[depth - 1] + 1 if depth > 0 else 0
            advanced = False
            while i < P - left:
                if ((ty[i, 0] >= 0 and used_a[ty[i, 0] * N + ty[i, 1]])
                        or (ty[i, 2] >= 0 and used_b[ty[i, 2] * N + ty[i, 3]])):
                    i += 1
                    continue
                nodes += 1
                if node_limit > 0 and nodes > node_limit:
                    aborted = True
                    break
                _apply(ty, i, 1, K, N, used_a, used_b, cover, acc, &uncovered, &n_open)
                if uncovered <= 2 * left and not _dead_pair(ty, i, K, N, used_a, used_b, acc):
                    idx[depth] = i
                    if depth + 1 == T:
                        if uncovered == 0 and n_open == 0:
                            found = True
                            break
                    else:
                        advanced = True
                        break
                _apply(ty, i, -1, K, N, used_a, used_b, cover, acc, &uncovered, &n_open)
                i += 1
            if found or aborted:
                break
            if advanced:
                depth += 1
                idx[depth] = -1
                continue
            idx[depth] = -1
            depth -= 1
            if depth < 0:
                break
    if aborted:
        return None, -nodes
    if found:
        return [int(idx_arr[d]) for d in range(T)], nodes
    return None, nodes


cdef inline Py_ssize_t _cell(int ka, int kb, int n1, int n2, int K, int N) nogil:
    return (((ka * K + kb) * N + n1) * N + n2) * 2


cdef void _bump(long long[::1] acc, int ka, int na, int kb, int nb, int ph, int sign,
                int K, int N, long long *n_open) nogil:
    cdef int dr = CONJ_RE[ph], di = CONJ_IM[ph]
    cdef int rep, n1, n2, mult
    cdef Py_ssize_t p
    cdef bint was, now
    for rep in range(2):
        if rep == 0:
            n1 = na
            n2 = nb
        else:
            if na == nb:
                break
            n1 = nb
            n2 = na
        mult = 2 if n1 == n2 else 1
        p = _cell(ka, kb, n1, n2, K, N)
        was = acc[p] != 0 or acc[p + 1] != 0
        acc[p] += sign * mult * dr
        acc[p + 1] += sign * mult * di
        now = acc[p] != 0 or acc[p + 1] != 0
        n_open[0] += <int>now - <int>was


cdef void _apply(const long long[:, ::1] ty, Py_ssize_t i, int sign, int K, int N,
                 signed char[::1] used_a, signed char[::1] used_b,
                 long long[::1] cover, long long[::1] acc,
                 long long *uncovered, long long *n_open) nogil:
    cdef int ka = <int>ty[i, 0], na = <int>ty[i, 1]
    cdef int kb = <int>ty[i, 2], nb = <int>ty[i, 3], ph = <int>ty[i, 4]
    cdef Py_ssize_t p
    if ka >= 0:
        p = ka * N + na
        used_a[p] = 1 if sign > 0 else 0
        cover[p] += sign
        if (sign > 0 and cover[p] == 1) or (sign < 0 and cover[p] == 0):
            uncovered[0] -= sign
    if kb >= 0:
        p = kb * N + nb
        used_b[p] = 1 if sign > 0 else 0
        cover[p] += sign
        if (sign > 0 and cover[p] == 1) or (sign < 0 and cover[p] == 0):
            uncovered[0] -= sign
    if ka >= 0 and kb >= 0:
        _bump(acc, ka, na, kb, nb, ph, sign, K, N, n_open)


cdef bint _dead_pair(const long long[:, ::1] ty, Py_ssize_t i, int K, int N,
                     signed char[::1] used_a, signed char[::1] used_b,
                     long long[::1] acc) nogil:
    cdef int ka = <int>ty[i, 0], na = <int>ty[i, 1]
    cdef int kb = <int>ty[i, 2], nb = <int>ty[i, 3]
    cdef Py_ssize_t p
    if ka < 0 or kb < 0:
        return False
    p = _cell(ka, kb, na, nb, K, N)
    if acc[p] == 0 and acc[p + 1] == 0:
        return False
    return nb <= na or used_a[ka * N + nb] != 0 or used_b[kb * N + na] != 0
