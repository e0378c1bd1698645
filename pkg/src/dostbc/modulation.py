"""Gray-labelled PSK and QAM constellations.

Point ``i`` of a :class:`Constellation` carries the bit label ``i`` (MSB
first), so symbol indices and bit labels are the same integers.

Layouts
-------
* ``M``-PSK: point at phase ``2 pi p / M`` (plus ``pi / M`` offset for QPSK
  so it coincides with 4-QAM) with label ``gray(p)``.
* square ``M``-QAM (``log2 M`` even): ``I`` and ``Q`` are independent Gray
  PAM with ``sqrt(M)`` levels; the label is ``I bits || Q bits``.
* cross ``M``-QAM (``log2 M = b`` odd, ``b >= 5``): start from a Gray
  rectangle with ``2**((b+1)/2)`` ``I``-levels and ``2**((b-1)/2)``
  ``Q``-levels (label ``I bits || Q bits``) and move the outer ``I`` columns
  onto the top and bottom.  With ``L = 2**((b-1)/2)`` levels in ``Q``, a point
  ``(I, Q)`` with ``|I| > 3L/2`` is moved to
  ``(sign(I) (L - |Q|), sign(Q) (|I| - L/2))``.  For 32-QAM this is the
  usual 6x6-minus-corners cross; labels are Gray inside the rectangle and
  quasi-Gray across the fold.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["Constellation", "make_constellation", "gray", "constellation_name"]


def gray(x):
    return x ^ (x >> 1)


def _gray_pam(levels: int) -> np.ndarray:
    """Amplitude of each Gray label for a ``levels``-point PAM."""
    amp = np.empty(levels)
    for p in range(levels):
        amp[gray(p)] = 2 * p - levels + 1
    return amp


def _psk(m: int) -> np.ndarray:
    offset = np.pi / 4 if m == 4 else 0.0
    pts = np.empty(m, complex)
    for p in range(m):
        pts[gray(p)] = np.exp(1j * (2 * np.pi * p / m + offset))
    return pts


def _rect_qam(bits_i: int, bits_q: int) -> np.ndarray:
    ai, aq = _gray_pam(2 ** bits_i), _gray_pam(2 ** bits_q)
    labels = np.arange(2 ** (bits_i + bits_q))
    return ai[labels >> bits_q] + 1j * aq[labels & (2 ** bits_q - 1)]


def _cross_qam(bits: int) -> np.ndarray:
    pts = _rect_qam((bits + 1) // 2, (bits - 1) // 2)
    levels_q = 2 ** ((bits - 1) // 2)
    i, q = pts.real, pts.imag
    outer = np.abs(i) > 3 * levels_q / 2
    new_i = np.sign(i) * (levels_q - np.abs(q))
    new_q = np.sign(q) * (np.abs(i) - levels_q / 2)
    return np.where(outer, new_i + 1j * new_q, pts)


@dataclass(frozen=True, eq=False)
class Constellation:
    """Points scaled so that the mean symbol energy equals ``es``."""

    name: str
    points: np.ndarray
    es: float = 1.0

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.size))

    def scaled(self, es: float) -> "Constellation":
        return make_constellation(self.name, es)

    def indices_to_bits(self, idx) -> np.ndarray:
        """``(..., )`` symbol indices -> ``(..., bits_per_symbol)`` bits, MSB first."""
        idx = np.asarray(idx)
        shifts = np.arange(self.bits_per_symbol - 1, -1, -1)
        return (idx[..., None] >> shifts) & 1

    def bits_to_indices(self, bits) -> np.ndarray:
        bits = np.asarray(bits)
        weights = 1 << np.arange(self.bits_per_symbol - 1, -1, -1)
        return (bits * weights).sum(axis=-1)

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "bits", "real", "imag"])
            for i, p in enumerate(self.points):
                w.writerow([i, format(i, f"0{self.bits_per_symbol}b"),
                            repr(float(p.real)), repr(float(p.imag))])


_ALIASES = {"bpsk": "2psk", "qpsk": "4qam", "4psk": "4qam"}


def constellation_name(bits: int) -> str:
    """Canonical constellation for ``bits`` bits per symbol."""
    if bits < 1:
        raise ValueError("need at least one bit per symbol")
    if bits == 1:
        return "bpsk"
    if bits == 2:
        return "qpsk"
    if bits == 3:
        return "8psk"
    return f"{2 ** bits}qam"


def make_constellation(name: str, es: float = 1.0) -> Constellation:
    """Build ``qpsk``, ``8psk``, ``16qam``, ``32qam``, ... scaled to energy ``es``."""
    if es <= 0:
        raise ValueError("symbol energy must be positive")
    key = name.lower().replace("-", "")
    key = _ALIASES.get(key, key)
    match = re.fullmatch(r"(\d+)(psk|qam)", key)
    if not match:
        raise ValueError(f"unknown constellation {name!r}")
    m, kind = int(match.group(1)), match.group(2)
    bits = int(np.log2(m)) if m > 1 else 0
    if m < 2 or 2 ** bits != m:
        raise ValueError(f"constellation size must be a power of two, got {m}")
    if kind == "psk":
        pts = _psk(m)
    elif bits % 2 == 0:
        pts = _rect_qam(bits // 2, bits // 2)
    elif bits >= 5:
        pts = _cross_qam(bits)
    else:
        raise ValueError(f"no QAM layout for {m} points; use PSK")
    pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2)) * np.sqrt(es)
    pts.setflags(write=False)
    return Constellation(name.lower(), pts, float(es))
