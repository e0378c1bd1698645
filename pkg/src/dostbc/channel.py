"""Two-hop amplify-and-forward channel: source -> K relays -> destination.

Per frame the source broadcasts ``s`` (N symbols), relay ``k`` receives
``y_k = h_k s + n_k`` and the destination receives ``T`` samples.  All
channel gains and noises are CN(0, 1), independent, and redrawn every frame.

Two relay schemes are simulated:

* ``dostbc``: relay ``k`` sends ``x_k = rho_k (y_k A_k + conj(y_k) B_k)`` and
  the destination sees ``y_D = sum_k f_k x_k + n_D`` over ``T`` slots.
* ``repetition``: relay ``k`` forwards ``rho_k y_k`` alone in slots
  ``k N .. k N + N - 1`` (``T = N K``).

Random draws are taken from the generator in a fixed order (``h``, ``f``,
relay noise, destination noise), each for the whole batch at once, so a
single frame is exactly a batch of one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import DistributedCode, RelayMatrixPair
from .verifier import noise_covariance

__all__ = [
    "ChannelDraw",
    "PowerConfig",
    "ReceivedFrame",
    "FrameBatch",
    "cn",
    "draw_channels",
    "relay_encode",
    "repetition_power_profile",
    "simulate_dostbc_frame",
    "simulate_dostbc_batch",
    "simulate_repetition_frame",
    "simulate_repetition_batch",
]


def cn(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


@dataclass(frozen=True, eq=False)
class ChannelDraw:
    """Source-relay gains ``h`` and relay-destination gains ``f``.

    Shapes are ``(K,)`` for one frame or ``(F, K)`` for a batch.
    """

    h: np.ndarray
    f: np.ndarray


def draw_channels(rng: np.random.Generator, n_relays: int, size: int | None = None
                  ) -> ChannelDraw:
    shape = (n_relays,) if size is None else (size, n_relays)
    h = cn(rng, shape)
    f = cn(rng, shape)
    return ChannelDraw(h, f)


@dataclass(frozen=True)
class PowerConfig:
    """Source power ``es``, relay per-use power ``er`` and per-relay multipliers.

    Relay ``k`` spends ``er * per_relay_scale[k]`` per channel use; its
    amplification is ``rho_k = sqrt(er * scale_k / (1 + es))``.
    """

    es: float
    er: float
    per_relay_scale: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.es <= 0 or self.er <= 0:
            raise ValueError("powers must be positive")
        if self.per_relay_scale is not None:
            scale = tuple(float(x) for x in self.per_relay_scale)
            if any(x <= 0 for x in scale):
                raise ValueError("per-relay scales must be positive")
            object.__setattr__(self, "per_relay_scale", scale)

    @classmethod
    def from_snr_db(cls, snr_db: float, per_relay_scale=None) -> "PowerConfig":
        """``es = er = 10**(snr_db / 10)`` with unit noise variances."""
        p = 10.0 ** (snr_db / 10.0)
        return cls(p, p, per_relay_scale)

    def scales(self, n_relays: int) -> np.ndarray:
        if self.per_relay_scale is None:
            return np.ones(n_relays)
        if len(self.per_relay_scale) != n_relays:
            raise ValueError(f"per_relay_scale has {len(self.per_relay_scale)} "
                             f"entries for {n_relays} relays")
        return np.array(self.per_relay_scale)

    def rho(self, n_relays: int) -> np.ndarray:
        return np.sqrt(self.er * self.scales(n_relays) / (1.0 + self.es))


def repetition_power_profile(code: DistributedCode) -> tuple[float, ...]:
    """Per-use power multipliers that give repetition relays the code's average power.

    Relay ``k`` of the code is active in ``c_k`` of ``T`` slots at per-use
    power ``er``; in the repetition scheme it is active in ``N`` of ``N K``
    slots, so equal per-slot average power needs ``scale_k = K c_k / T``.
    """
    counts = code.transmissions_per_relay()
    return tuple(float(code.n_relays * c / code.length) for c in counts)


def relay_encode(pair: RelayMatrixPair, y_k, rho_k: float) -> np.ndarray:
    """``rho_k (y_k A_k + conj(y_k) B_k)`` for one relay."""
    y_k = np.asarray(y_k, dtype=complex)
    if y_k.shape != (pair.shape[0],):
        raise ValueError(f"expected {pair.shape[0]} received samples, got {y_k.shape}")
    return rho_k * (y_k @ pair.a + y_k.conj() @ pair.b)


@dataclass(frozen=True, eq=False)
class FrameBatch:
    """``F`` destination observations ``y`` (``F x T``) with their channels."""

    y: np.ndarray
    h: np.ndarray
    f: np.ndarray
    rho: np.ndarray
    scheme: str                       # "dostbc" or "repetition"
    n_symbols: int
    relay_signals: np.ndarray | None = None   # (F, K, T) when requested

    def __len__(self):
        return self.y.shape[0]

    def frame(self, i: int, code: DistributedCode | None = None) -> "ReceivedFrame":
        draw = ChannelDraw(self.h[i], self.f[i])
        if self.scheme == "dostbc":
            r = noise_covariance(code, draw.f, self.rho)
        else:
            r = _repetition_covariance(draw.f, self.rho, self.n_symbols)
        return ReceivedFrame(self.y[i], draw, r, self.scheme, self.rho, self.n_symbols)


@dataclass(frozen=True, eq=False)
class ReceivedFrame:
    """One destination observation with the noise covariance of its draw."""

    y_d: np.ndarray
    draw: ChannelDraw
    r: np.ndarray
    scheme: str
    rho: np.ndarray
    n_symbols: int

    def as_batch(self) -> FrameBatch:
        return FrameBatch(self.y_d[None], self.draw.h[None], self.draw.f[None],
                          self.rho, self.scheme, self.n_symbols)


def _repetition_covariance(f, rho, n_symbols):
    return np.diag(np.repeat(np.abs(rho * f) ** 2 + 1.0, n_symbols)).astype(complex)


def _check_symbols(s, n_symbols):
    s = np.asarray(s, dtype=complex)
    if s.ndim != 2 or s.shape[1] != n_symbols:
        raise ValueError(f"expected symbols of shape (F, {n_symbols}), got {s.shape}")
    return s


def simulate_dostbc_batch(code: DistributedCode, s, power: PowerConfig,
                          rng: np.random.Generator, noise_enabled: bool = True,
                          return_relay_signals: bool = False,
                          draw: ChannelDraw | None = None) -> FrameBatch:
    """Simulate ``F`` independent frames; ``s`` has shape ``(F, N)``.

    A ``draw`` with ``h`` and ``f`` of shape ``(K,)`` holds the channel fixed
    over the batch; otherwise every frame gets fresh gains.
    """
    s = _check_symbols(s, code.n_symbols)
    F, K, N = s.shape[0], code.n_relays, code.n_symbols
    rho = power.rho(K)
    if draw is None:
        draw = draw_channels(rng, K, F)
    else:
        h, f = np.asarray(draw.h, complex), np.asarray(draw.f, complex)
        if h.shape != (K,) or f.shape != (K,):
            raise ValueError(f"fixed draw needs h and f of shape ({K},)")
        draw = ChannelDraw(np.broadcast_to(h, (F, K)), np.broadcast_to(f, (F, K)))
    y_rel = draw.h[:, :, None] * s[:, None, :]
    if noise_enabled:
        y_rel = y_rel + cn(rng, (F, K, N))
    x = rho[None, :, None] * (np.einsum("fkn,knt->fkt", y_rel, code.a_stack)
                              + np.einsum("fkn,knt->fkt", y_rel.conj(), code.b_stack))
    y = np.einsum("fk,fkt->ft", draw.f, x)
    if noise_enabled:
        y = y + cn(rng, (F, code.length))
    return FrameBatch(y, draw.h, draw.f, rho, "dostbc", N,
                      x if return_relay_signals else None)


def simulate_repetition_batch(n_relays: int, s, power: PowerConfig,
                              rng: np.random.Generator, noise_enabled: bool = True,
                              return_relay_signals: bool = False) -> FrameBatch:
    """Repetition baseline: relay ``k`` forwards in slots ``k N .. k N + N - 1``."""
    s = np.asarray(s, dtype=complex)
    if s.ndim != 2:
        raise ValueError(f"expected symbols of shape (F, N), got {s.shape}")
    F, N = s.shape
    K = n_relays
    rho = power.rho(K)
    draw = draw_channels(rng, K, F)
    y_rel = draw.h[:, :, None] * s[:, None, :]
    if noise_enabled:
        y_rel = y_rel + cn(rng, (F, K, N))
    x = rho[None, :, None] * y_rel                    # (F, K, N)
    y = (draw.f[:, :, None] * x).reshape(F, K * N)
    if noise_enabled:
        y = y + cn(rng, (F, K * N))
    sig = None
    if return_relay_signals:
        sig = np.zeros((F, K, K * N), complex)
        for k in range(K):
            sig[:, k, k * N:(k + 1) * N] = x[:, k]
    return FrameBatch(y, draw.h, draw.f, rho, "repetition", N, sig)


def simulate_dostbc_frame(code: DistributedCode, s, power: PowerConfig,
                          rng: np.random.Generator, noise_enabled: bool = True
                          ) -> ReceivedFrame:
    batch = simulate_dostbc_batch(code, np.asarray(s)[None], power, rng, noise_enabled)
    return batch.frame(0, code)


def simulate_repetition_frame(n_relays: int, s, power: PowerConfig,
                              rng: np.random.Generator, noise_enabled: bool = True
                              ) -> ReceivedFrame:
    batch = simulate_repetition_batch(n_relays, np.asarray(s)[None], power, rng,
                                      noise_enabled)
    return batch.frame(0)
