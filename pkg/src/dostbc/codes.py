"""Value types for distributed space-time codes and the JSON code file.

A relay ``k`` transmits ``rho * (y_k @ A_k + conj(y_k) @ B_k)``, so a code is
fully described by the ``K`` pairs ``(A_k, B_k)`` of ``N x T`` matrices whose
entries come from ``{0, +1, -1, +j, -j}``.

Symbols and relays are 0-based everywhere in this package; the documentation
of individual constructions uses the same 0-based indices unless it says
otherwise.  The JSON code file is 0-based as well (rows are symbols, columns
are time slots)::

    {"n": 2, "k": 2, "t": 2,
     "relays": [{"a": [["1", "0"], ["0", "-1"]],
                 "b": [["0", "0"], ["0", "0"]]}, ...]}
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

__all__ = [
    "UNIT_ALPHABET",
    "RelayMatrixPair",
    "DistributedCode",
    "encode_unit",
    "decode_unit",
    "is_unit_alphabet",
    "code_to_dict",
    "code_from_dict",
    "save_code",
    "load_code",
]

#: Textual encoding used by the code file.
UNIT_ALPHABET = {"0": 0j, "1": 1 + 0j, "-1": -1 + 0j, "j": 1j, "-j": -1j}


def encode_unit(value: complex) -> str:
    """Return the code-file string for one of the five admissible entries."""
    for key, unit in UNIT_ALPHABET.items():
        if value == unit:
            return key
    raise ValueError(f"{value!r} is not one of 0, +-1, +-j")


def decode_unit(text: str) -> complex:
    try:
        return UNIT_ALPHABET[text.strip()]
    except KeyError:
        raise ValueError(f"unknown code entry {text!r}; expected one of "
                         f"{sorted(UNIT_ALPHABET)}") from None


def is_unit_alphabet(m: np.ndarray) -> bool:
    """True when every entry of ``m`` is exactly 0, +-1 or +-j."""
    m = np.asarray(m)
    re, im = m.real, m.imag
    in_set = ((re == 0) & np.isin(im, (-1, 0, 1))) | ((im == 0) & np.isin(re, (-1, 1)))
    return bool(np.all(in_set))


@dataclass(frozen=True, eq=False)
class RelayMatrixPair:
    """Encoding matrices ``(A_k, B_k)`` of one relay.

    Only the shapes are validated here.  Alphabet membership, disjoint
    support and the monomial conditions are properties a candidate code may
    violate, and :func:`dostbc.verifier.check_structural` reports them.
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=complex)
        b = np.array(self.b, dtype=complex)
        if a.ndim != 2 or a.shape != b.shape:
            raise ValueError(f"A and B must be 2-D with equal shapes, got "
                             f"{a.shape} and {b.shape}")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape


@dataclass(frozen=True, eq=False)
class DistributedCode:
    """A code for ``n_relays`` relays carrying ``n_symbols`` over ``length`` slots."""

    n_symbols: int
    n_relays: int
    length: int
    relays: tuple[RelayMatrixPair, ...]

    def __post_init__(self):
        relays = tuple(self.relays)
        object.__setattr__(self, "relays", relays)
        if self.n_symbols < 1 or self.n_relays < 1 or self.length < 1:
            raise ValueError("N, K and T must be positive")
        if len(relays) != self.n_relays:
            raise ValueError(f"expected {self.n_relays} relay pairs, got {len(relays)}")
        for k, pair in enumerate(relays):
            if pair.shape != (self.n_symbols, self.length):
                raise ValueError(f"relay {k}: matrices are {pair.shape}, "
                                 f"expected {(self.n_symbols, self.length)}")

    @classmethod
    def from_arrays(cls, a, b) -> "DistributedCode":
        """Build a code from stacked ``(K, N, T)`` arrays."""
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        if a.ndim != 3 or a.shape != b.shape:
            raise ValueError("expected two (K, N, T) arrays of equal shape")
        k, n, t = a.shape
        return cls(n, k, t, tuple(RelayMatrixPair(a[i], b[i]) for i in range(k)))

    @property
    def rate(self) -> Fraction:
        return Fraction(self.n_symbols, self.length)

    @property
    def a_stack(self) -> np.ndarray:
        return np.stack([p.a for p in self.relays])

    @property
    def b_stack(self) -> np.ndarray:
        return np.stack([p.b for p in self.relays])

    def fingerprint(self) -> str:
        h = hashlib.sha1(f"{self.n_symbols},{self.n_relays},{self.length}".encode())
        h.update(np.ascontiguousarray(self.a_stack).tobytes())
        h.update(np.ascontiguousarray(self.b_stack).tobytes())
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, DistributedCode):
            return NotImplemented
        return (
            (self.n_symbols, self.n_relays, self.length)
            == (other.n_symbols, other.n_relays, other.length)
            and np.array_equal(self.a_stack, other.a_stack)
            and np.array_equal(self.b_stack, other.b_stack)
        )

    __hash__ = None

    def replace_entry(self, relay: int, which: str, n: int, t: int,
                      value: complex) -> "DistributedCode":
        """Return a copy with one entry of ``A_relay`` or ``B_relay`` changed."""
        a, b = self.a_stack.copy(), self.b_stack.copy()
        target = {"a": a, "b": b}[which]
        target[relay, n, t] = value
        return DistributedCode.from_arrays(a, b)

    def transmissions_per_relay(self) -> np.ndarray:
        """Number of slots in which each relay sends a non-zero signal."""
        active = (self.a_stack != 0) | (self.b_stack != 0)
        return active.any(axis=1).sum(axis=1)


def code_to_dict(code: DistributedCode) -> dict:
    return {
        "n": code.n_symbols,
        "k": code.n_relays,
        "t": code.length,
        "relays": [
            {
                "a": [[encode_unit(x) for x in row] for row in pair.a],
                "b": [[encode_unit(x) for x in row] for row in pair.b],
            }
            for pair in code.relays
        ],
    }


def code_from_dict(data: dict) -> DistributedCode:
    try:
        n, k, t = int(data["n"]), int(data["k"]), int(data["t"])
        relays = data["relays"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed code file: {exc}") from None
    pairs = []
    for entry in relays:
        mats = []
        for key in ("a", "b"):
            m = np.array([[decode_unit(x) for x in row] for row in entry[key]],
                         dtype=complex)
            if m.shape != (n, t):
                raise ValueError(f"relay matrix {key!r} has shape {m.shape}, "
                                 f"expected {(n, t)}")
            mats.append(m)
        pairs.append(RelayMatrixPair(*mats))
    return DistributedCode(n, k, t, tuple(pairs))


def save_code(code: DistributedCode, path) -> None:
    Path(path).write_text(json.dumps(code_to_dict(code), indent=1) + "\n")


def load_code(path) -> DistributedCode:
    return code_from_dict(json.loads(Path(path).read_text()))
