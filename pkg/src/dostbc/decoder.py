"""Maximum-likelihood decoders for DOSTBC and repetition frames.

With ``w_k = rho_k f_k`` the destination observes

    y_D = sum_n (s_n u_n + conj(s_n) v_n) + n,
    u_n = sum_k w_k h_k A_k[n, :],   v_n = sum_k w_k conj(h_k) B_k[n, :],

and ``n`` has covariance ``R``.  With ``R = L L^H`` the ML metric
``(y_D - w X) R^-1 (y_D - w X)^H`` equals the squared norm of the residual
after solving against ``conj(L)``, so every decoder whitens ``y_D``, ``u_n``
and ``v_n`` once per frame and then works with plain Euclidean distances.

* :func:`joint_ml_decode` enumerates all ``M**N`` symbol vectors (oracle).
* :func:`single_symbol_ml_decode` evaluates the full metric at ``c e_n`` for
  each slot ``n`` and candidate ``c``: ``N M`` evaluations.  It is only exact
  for codes that pass the verifier, and refuses any other code.
* :func:`repetition_ml_decode` combines the ``K`` copies of each symbol with
  maximal-ratio weights.

Ties resolve to the smallest constellation index in every decoder.  Each
decoder accepts a single :class:`~dostbc.channel.ReceivedFrame` or a
:class:`~dostbc.channel.FrameBatch`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .channel import FrameBatch, ReceivedFrame
from .codes import DistributedCode
from .modulation import Constellation
from .verifier import relay_gram, verify

__all__ = [
    "DecodeResult",
    "DecoderBudgetError",
    "UnverifiedCodeError",
    "JOINT_BUDGET",
    "joint_ml_decode",
    "single_symbol_ml_decode",
    "repetition_ml_decode",
    "whitened_model",
]

#: Largest ``M**N`` the joint decoder agrees to enumerate per frame.
JOINT_BUDGET = 10 ** 6


class DecoderBudgetError(ValueError):
    """Joint enumeration would exceed :data:`JOINT_BUDGET`."""


class UnverifiedCodeError(ValueError):
    """Single-symbol decoding was asked for a code that is not a DOSTBC."""


@dataclass(frozen=True, eq=False)
class DecodeResult:
    """Decoded constellation indices, ``(N,)`` per frame or ``(F, N)`` per batch."""

    symbols: np.ndarray
    path: str                                  # single_symbol, joint or repetition
    per_symbol_metrics: np.ndarray | None = None
    metric_evaluations: int = 0


_gram_cache: dict[str, tuple[np.ndarray, bool]] = {}
_verified_cache: dict[str, bool] = {}


def _gram(code: DistributedCode):
    key = code.fingerprint()
    if key not in _gram_cache:
        g = relay_gram(code)
        diagonal = bool(np.all(g == np.einsum("kii->ki", g)[:, :, None]
                               * np.eye(code.length)))
        _gram_cache[key] = (g, diagonal)
    return _gram_cache[key]


def _is_verified(code: DistributedCode) -> bool:
    key = code.fingerprint()
    if key not in _verified_cache:
        _verified_cache[key] = verify(code).is_dostbc
    return _verified_cache[key]


def _as_batch(frame):
    if isinstance(frame, ReceivedFrame):
        return frame.as_batch(), True
    if isinstance(frame, FrameBatch):
        return frame, False
    raise TypeError(f"expected ReceivedFrame or FrameBatch, got {type(frame).__name__}")


def whitened_model(batch: FrameBatch, code: DistributedCode, whiten: bool = True):
    """Whitened ``(y, u, v)`` with shapes ``(F, T)``, ``(F, N, T)``, ``(F, N, T)``."""
    if batch.scheme != "dostbc":
        raise ValueError(f"expected a dostbc frame, got {batch.scheme!r}")
    if batch.y.shape[1] != code.length or batch.n_symbols != code.n_symbols:
        raise ValueError("frame does not match the code dimensions")
    w = batch.rho[None, :] * batch.f                    # (F, K)
    u = np.einsum("fk,knt->fnt", w * batch.h, code.a_stack)
    v = np.einsum("fk,knt->fnt", w * batch.h.conj(), code.b_stack)
    y = batch.y
    if not whiten:
        return y, u, v
    gram, diagonal = _gram(code)
    weights = np.abs(w) ** 2
    if diagonal:
        # R is diagonal for every channel draw: scale each slot
        scale = np.sqrt(weights @ np.einsum("kii->ki", gram).real + 1.0)
        return y / scale, u / scale[:, None, :], v / scale[:, None, :]
    T, N = code.length, code.n_symbols
    r = np.einsum("fk,kij->fij", weights, gram) + np.eye(T)
    lc = np.linalg.cholesky(r).conj()
    rhs = np.concatenate([y[:, :, None], u.transpose(0, 2, 1), v.transpose(0, 2, 1)],
                         axis=2)
    sol = np.linalg.solve(lc, rhs)
    return sol[:, :, 0], sol[:, :, 1:N + 1].transpose(0, 2, 1), \
        sol[:, :, N + 1:].transpose(0, 2, 1)


def joint_ml_decode(frame, code: DistributedCode, constellation: Constellation, *,
                    whiten: bool = True, budget: int = JOINT_BUDGET) -> DecodeResult:
    """Exhaustive ML over all ``M**N`` symbol vectors.

    ``whiten=False`` replaces ``R`` with the identity; it exists to show that
    the whitening matters for codes whose ``R`` is not diagonal.
    """
    batch, single = _as_batch(frame)
    m, n = constellation.size, code.n_symbols
    if m ** n > budget:
        raise DecoderBudgetError(f"joint decoding needs {m}**{n} = {m ** n} "
                                 f"candidates per frame, budget is {budget}")
    y, u, v = whitened_model(batch, code, whiten)
    idx = kernels.joint_argmin(y, u, v, constellation.points)
    return DecodeResult(idx[0] if single else idx, "joint", None,
                        len(batch) * m ** n)


def single_symbol_ml_decode(frame, code: DistributedCode,
                            constellation: Constellation) -> DecodeResult:
    """Per-symbol ML using the metric at ``c e_n``; refuses codes failing the verifier."""
    if not _is_verified(code):
        raise UnverifiedCodeError("single-symbol decoding needs a code that passes "
                                  "the verifier; use joint_ml_decode instead")
    batch, single = _as_batch(frame)
    y, u, v = whitened_model(batch, code)
    idx, metrics = kernels.single_symbol_argmin(y, u, v, constellation.points)
    evals = len(batch) * code.n_symbols * constellation.size
    if single:
        return DecodeResult(idx[0], "single_symbol", metrics[0], evals)
    return DecodeResult(idx, "single_symbol", metrics, evals)


def repetition_ml_decode(frame, n_relays: int,
                         constellation: Constellation) -> DecodeResult:
    """Maximal-ratio combining of the ``K`` copies, then scalar ML per symbol."""
    batch, single = _as_batch(frame)
    if batch.scheme != "repetition":
        raise ValueError(f"expected a repetition frame, got {batch.scheme!r}")
    F, K, N = len(batch), n_relays, batch.n_symbols
    if batch.y.shape[1] != K * N:
        raise ValueError(f"frame has {batch.y.shape[1]} slots, expected {K * N}")
    g = batch.rho[None, :] * batch.f * batch.h          # (F, K) end-to-end gains
    var = np.abs(batch.rho[None, :] * batch.f) ** 2 + 1.0
    y = batch.y.reshape(F, K, N)
    z = np.einsum("fk,fkn->fn", g.conj() / var, y)      # combined statistic
    gain = np.sum(np.abs(g) ** 2 / var, axis=1)         # (F,)
    energy = np.sum(np.abs(y) ** 2 / var[:, :, None], axis=1)
    c = constellation.points
    # sum_k |y_kn - g_k c|^2 / var_k, expanded
    metrics = (energy[:, :, None] + gain[:, None, None] * np.abs(c) ** 2
               - 2 * np.real(c.conj() * z[:, :, None]))
    idx = np.argmin(metrics, axis=-1)
    evals = F * N * constellation.size
    if single:
        return DecodeResult(idx[0], "repetition", metrics[0], evals)
    return DecodeResult(idx, "repetition", metrics, evals)
