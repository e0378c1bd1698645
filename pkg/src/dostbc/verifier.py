"""Decide whether a candidate code is a (row-monomial) DOSTBC.

Two kinds of checks live here:

* channel-free conditions, evaluated exactly on Gaussian integers (entries of
  ``A_k`` and ``B_k`` are ``0, +-1, +-j`` so every product stays integral);
* conditions weighted by the inverse noise covariance ``R^-1``, which depends
  on the relay-destination gains ``f``.  These are sampled on random channel
  draws.  Both sides of each identity are polynomials in ``f``, so a generic
  draw passing means the identity holds with probability one; several draws
  guard against floating point flukes.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import linalg

from .codes import DistributedCode, is_unit_alphabet

__all__ = [
    "StructuralReport",
    "ChannelFreeResult",
    "WeightedResult",
    "DiagonalRResult",
    "ColumnClassification",
    "VerificationReport",
    "check_structural",
    "assemble_code_matrix",
    "noise_covariance",
    "check_channel_free_orthogonality",
    "check_weighted_orthogonality",
    "check_diagonal_R",
    "classify_columns",
    "verify",
]

DEFAULT_DRAWS = 8
DEFAULT_TOL = 1e-9

STRUCTURAL_CHECKS = ("alphabet", "disjoint_support", "column_monomial",
                     "row_monomial", "column_disjoint_across_relays")
ALGEBRAIC_CHECKS = ("channel_free_orthogonality", "positive_E",
                    "weighted_orthogonality", "diagonal_R")


# -- exact Gaussian-integer helpers ------------------------------------------

def _gi(m):
    m = np.asarray(m)
    return np.rint(m.real).astype(np.int64), np.rint(m.imag).astype(np.int64)



# -- structure ------------------------------------------------------------------

@dataclass
class StructuralReport:
    alphabet: bool
    disjoint_support: bool
    column_monomial: bool
    row_monomial: bool
    column_disjoint_across_relays: bool
    violations: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(getattr(self, name) for name in STRUCTURAL_CHECKS)

    @property
    def necessary(self) -> bool:
        """Conditions every DOSTBC satisfies, row-monomial or not."""
        return self.alphabet and self.disjoint_support and self.column_monomial


def _column_monomial(m) -> bool:
    return bool(((m != 0).sum(axis=0) <= 1).all())


def _row_monomial(m) -> bool:
    return bool(((m != 0).sum(axis=1) <= 1).all())


def check_structural(code: DistributedCode) -> StructuralReport:
    """Exact inspection of the support pattern of every ``(A_k, B_k)``."""
    violations = []
    alphabet = disjoint = colmono = rowmono = coldisjoint = True
    for k, pair in enumerate(code.relays):
        a, b = pair.a, pair.b
        if not (is_unit_alphabet(a) and is_unit_alphabet(b)):
            alphabet = False
            violations.append(f"relay {k}: entry outside {{0, +-1, +-j}}")
        if ((a != 0) & (b != 0)).any():
            disjoint = False
            violations.append(f"relay {k}: A and B share a non-zero position")
        for name, m in (("A", a), ("B", b), ("A+B", (a != 0) | (b != 0))):
            if not _column_monomial(m):
                colmono = False
                violations.append(f"relay {k}: {name} is not column-monomial")
        for name, m in (("A", a), ("B", b)):
            if not _row_monomial(m):
                rowmono = False
                violations.append(f"relay {k}: {name} is not row-monomial")
    a_cols = (code.a_stack != 0).any(axis=1)  # (K, T)
    b_cols = (code.b_stack != 0).any(axis=1)
    for name, cols in (("A", a_cols), ("B", b_cols)):
        shared = cols.sum(axis=0) > 1
        if shared.any():
            coldisjoint = False
            violations.append(f"{name} matrices of different relays share "
                              f"columns {np.flatnonzero(shared).tolist()}")
    return StructuralReport(alphabet, disjoint, colmono, rowmono, coldisjoint,
                            violations)


# -- code matrix and noise covariance ------------------------------------------

def assemble_code_matrix(code: DistributedCode, h, s) -> np.ndarray:
    """Return the ``K x T`` matrix whose row ``k`` is ``h_k s A_k + h_k^* s^* B_k``."""
    h = np.asarray(h, dtype=complex)
    s = np.asarray(s, dtype=complex)
    if h.shape != (code.n_relays,) or s.shape != (code.n_symbols,):
        raise ValueError(f"expected h of length {code.n_relays} and s of length "
                         f"{code.n_symbols}, got {h.shape} and {s.shape}")
    a, b = code.a_stack, code.b_stack
    return h[:, None] * (s @ a) + h.conj()[:, None] * (s.conj() @ b)


def relay_gram(code: DistributedCode) -> np.ndarray:
    """``A_k^H A_k + B_k^H B_k`` for every relay, shape ``(K, T, T)``."""
    a, b = code.a_stack, code.b_stack
    return (np.conj(np.swapaxes(a, 1, 2)) @ a + np.conj(np.swapaxes(b, 1, 2)) @ b)


def noise_covariance(code: DistributedCode, f, rho) -> np.ndarray:
    """Covariance of the destination noise for relay gains ``f``.

    ``rho`` is either one amplification factor or one per relay.
    """
    f = np.asarray(f, dtype=complex)
    if f.shape != (code.n_relays,):
        raise ValueError(f"expected {code.n_relays} relay gains, got {f.shape}")
    rho = np.broadcast_to(np.asarray(rho, dtype=float), f.shape)
    if (rho <= 0).any():
        raise ValueError("rho must be positive")
    weights = np.abs(rho * f) ** 2
    return np.einsum("k,kij->ij", weights, relay_gram(code)) + np.eye(code.length)


# -- channel-free orthogonality ---------------------------------------------------

@dataclass
class ChannelFreeResult:
    orthogonal: bool
    positive: bool
    E: np.ndarray  # (K, N) integers
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.orthogonal and self.positive


def _pair_products(x, y):
    """All ``x[k1] @ y[k2]^H`` for Gaussian-integer stacks, shape ``(K, K, N, N)``."""
    (xr, xi), (yr, yi) = x, y
    ein = lambda u, v: np.einsum("int,jmt->ijnm", u, v)
    return ein(xr, yr) + ein(xi, yi), ein(xi, yr) - ein(xr, yi)


def _pairs(mask):
    return [tuple(int(v) for v in ij) for ij in np.argwhere(mask)]


def check_channel_free_orthogonality(code: DistributedCode) -> ChannelFreeResult:
    """Check ``X X^H = sum_n |s_n|^2 E_n`` through its conditions on ``A_k, B_k``.

    Evaluated in exact integer arithmetic.  ``E[k, n]`` is the diagonal of
    ``A_k A_k^H + B_k^* B_k^T``; every entry must be strictly positive.
    """
    A, B = _gi(code.a_stack), _gi(code.b_stack)
    K, N = code.n_relays, code.n_symbols
    cross = ~np.eye(K, dtype=bool)
    swap = lambda m: np.swapaxes(m, 2, 3)
    failures = []

    def nonzero(m):
        return (m[0] != 0).any(axis=(2, 3)) | (m[1] != 0).any(axis=(2, 3))

    aa = _pair_products(A, A)
    bb = _pair_products(B, B)
    ab = _pair_products(A, B)   # A_k1 B_k2^H
    ba = _pair_products(B, A)   # B_k1 A_k2^H
    for k1, k2 in _pairs(nonzero(aa) & cross):
        failures.append(f"A{k1} A{k2}^H != 0")
    for k1, k2 in _pairs(nonzero(bb) & cross):
        failures.append(f"B{k1} B{k2}^H != 0")
    # B_k2^* A_k1^T is the transpose of A_k1 B_k2^H (and likewise for the B-A term)
    for k1, k2 in _pairs(nonzero((ab[0] + swap(ab[0]), ab[1] + swap(ab[1])))):
        failures.append(f"A{k1} B{k2}^H + B{k2}^* A{k1}^T != 0")
    for k1, k2 in _pairs(nonzero((ba[0] + swap(ba[0]), ba[1] + swap(ba[1])))):
        failures.append(f"B{k1} A{k2}^H + A{k2}^* B{k1}^T != 0")
    idx = np.arange(K)
    # B_k^* B_k^T is the conjugate of B_k B_k^H
    gr = aa[0][idx, idx] + bb[0][idx, idx]
    gi = aa[1][idx, idx] - bb[1][idx, idx]
    off = ~np.eye(N, dtype=bool)
    for k in range(K):
        if gr[k][off].any() or gi[k].any():
            failures.append(f"A{k} A{k}^H + B{k}^* B{k}^T is not diagonal")
    E = np.diagonal(gr, axis1=1, axis2=2).copy()
    orthogonal = not failures
    positive = bool((E > 0).all())
    if not positive:
        failures.append(f"E[k, n] not strictly positive at (k, n) = "
                        f"{np.argwhere(E <= 0).tolist()}")
    return ChannelFreeResult(orthogonal, positive, E, failures)


# -- R-weighted orthogonality -----------------------------------------------------

def _generic_gains(rng, size) -> np.ndarray:
    """Complex Gaussian gains with distinct, non-zero magnitudes."""
    while True:
        f = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2)
        mags = np.abs(f)
        if (mags > 1e-6).all() and len(np.unique(np.round(mags, 12))) == size:
            return f


@dataclass
class WeightedResult:
    passed: bool
    D: np.ndarray  # (draws, K, N) sampled diagonal terms
    max_residual: float
    failures: list[str] = field(default_factory=list)


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def check_weighted_orthogonality(code: DistributedCode, draws: int = DEFAULT_DRAWS,
                                 tol: float = DEFAULT_TOL, seed=0,
                                 rho: float = 1.0) -> WeightedResult:
    """Check the ``R^-1``-weighted conditions on sampled relay gains.

    For each draw, ``R`` is factorised (Cholesky) and the five matrix
    identities equivalent to ``X R^-1 X^H = sum_n |s_n|^2 D_n`` are tested
    with relative tolerance ``tol``.  ``D[d, k, n]`` must also satisfy
    ``|D| > tol``.
    """
    rng = _rng(seed)
    K, N = code.n_relays, code.n_symbols
    a, b = code.a_stack, code.b_stack
    D = np.zeros((draws, K, N))
    failures = []
    worst = 0.0
    for d in range(draws):
        f = _generic_gains(rng, K)
        R = noise_covariance(code, f, rho)
        try:
            factor = linalg.cho_factor(R, lower=True)
        except linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(
                f"draw {d}: noise covariance is not positive definite; "
                f"check tol/rho settings") from exc
        Ri = linalg.cho_solve(factor, np.eye(code.length))
        scale = max(1.0, np.abs(Ri).max())
        aR, bR = a @ Ri, b @ Ri
        bcR, acR = b.conj() @ Ri, a.conj() @ Ri
        ein = lambda u, v: np.einsum("int,jmt->ijnm", u, v)
        checks = (
            ("A{0} R^-1 A{1}^H", ein(aR, a.conj()), True),
            ("B{0} R^-1 B{1}^H", ein(bR, b.conj()), True),
            ("A{0} R^-1 B{1}^H + B{1}^* R^-1 A{0}^T",
             ein(aR, b.conj()) + np.einsum("jnt,imt->ijnm", bcR, a), False),
            ("B{0} R^-1 A{1}^H + A{1}^* R^-1 B{0}^T",
             ein(bR, a.conj()) + np.einsum("jnt,imt->ijnm", acR, b), False),
        )
        for name, m, cross_only in checks:
            r = np.abs(m).max(axis=(2, 3)) / scale
            if cross_only:
                r[np.arange(K), np.arange(K)] = 0.0
            worst = max(worst, float(r.max()))
            for k1, k2 in _pairs(r > tol):
                failures.append(f"draw {d}: {name.format(k1, k2)} != 0 "
                                f"(residual {r[k1, k2]:.3g})")
        gram = np.einsum("knt,kmt->knm", aR, a.conj()) + np.einsum("knt,kmt->knm", bcR, b)
        diag = np.diagonal(gram, axis1=1, axis2=2)
        r = np.abs(gram - diag.real[:, :, None] * np.eye(N)).max(axis=(1, 2)) / scale
        worst = max(worst, float(r.max()))
        for k in np.flatnonzero(r > tol):
            failures.append(f"draw {d}: relay {k} weighted Gram not real diagonal "
                            f"(residual {r[k]:.3g})")
        D[d] = diag.real
        for k, n in _pairs(np.abs(diag.real) <= tol):
            failures.append(f"draw {d}: D[{k}, {n}] = 0")
    return WeightedResult(not failures, D, worst, failures)


@dataclass
class DiagonalRResult:
    passed: bool              # R diagonal on every generic draw
    row_monomial: bool        # structural flag it is compared with
    consistent: bool          # False signals a toolkit bug
    max_offdiag: list[float] = field(default_factory=list)


def check_diagonal_R(code: DistributedCode, draws: int = DEFAULT_DRAWS,
                     tol: float = DEFAULT_TOL, seed=0, rho: float = 1.0,
                     structural: StructuralReport | None = None) -> DiagonalRResult:
    """Test diagonality of ``R`` on generic draws against the row-monomial flag."""
    rng = _rng(seed)
    structural = structural or check_structural(code)
    row_monomial = structural.row_monomial
    off = ~np.eye(code.length, dtype=bool)
    diagonal, consistent, offdiag = True, True, []
    for _ in range(draws):
        R = noise_covariance(code, _generic_gains(rng, code.n_relays), rho)
        worst = float(np.abs(R[off]).max()) if code.length > 1 else 0.0
        offdiag.append(worst)
        is_diag = worst <= tol * np.trace(R).real / code.length
        diagonal &= is_diag
        consistent &= is_diag == row_monomial
    return DiagonalRResult(diagonal, row_monomial, consistent, offdiag)


# -- column classification --------------------------------------------------------

@dataclass
class ColumnClassification:
    tags: list[str]                 # zero / type_I / type_II / invalid
    type_ii_symbol_counts: list[int]  # entries with s_n or s_n^* inside type-II columns

    @property
    def type_i(self) -> int:
        return self.tags.count("type_I")

    @property
    def type_ii(self) -> int:
        return self.tags.count("type_II")

    @property
    def invalid(self) -> int:
        return self.tags.count("invalid")

    @property
    def parity_ok(self) -> bool:
        return self.type_ii % 2 == 0 and all(c % 2 == 0 for c in self.type_ii_symbol_counts)


def classify_columns(code: DistributedCode) -> ColumnClassification:
    """Tag each column of the symbolic ``X`` by its entry pattern."""
    a, b = code.a_stack != 0, code.b_stack != 0
    counts = np.zeros(code.n_symbols, dtype=int)
    tags = []
    for t in range(code.length):
        plain = np.argwhere(a[:, :, t])      # (k, n) of non-conjugate entries
        conj = np.argwhere(b[:, :, t])
        relays = np.concatenate([plain[:, 0], conj[:, 0]])
        total = len(plain) + len(conj)
        if total == 0:
            tags.append("zero")
        elif len(np.unique(relays)) != total:
            tags.append("invalid")      # one relay contributes two entries
        elif total == 1:
            tags.append("type_I")
        elif len(plain) == 1 and len(conj) == 1:
            tags.append("type_II")
            counts[plain[0, 1]] += 1
            counts[conj[0, 1]] += 1
        else:
            tags.append("invalid")
    return ColumnClassification(tags, counts.tolist())


# -- full report ------------------------------------------------------------------

@dataclass
class VerificationReport:
    structural: dict[str, bool]
    algebraic: dict[str, bool]
    column_classes: ColumnClassification
    verdict: str
    E: np.ndarray
    D_min_abs: float
    messages: list[str] = field(default_factory=list)

    @property
    def is_dostbc(self) -> bool:
        return self.verdict in ("dostbc", "row_monomial_dostbc")

    def to_dict(self) -> dict:
        cc = self.column_classes
        return {
            "structural": dict(self.structural),
            "algebraic": dict(self.algebraic),
            "column_classes": {
                **asdict(cc),
                "type_I": cc.type_i,
                "type_II": cc.type_ii,
                "invalid": cc.invalid,
                "parity_ok": cc.parity_ok,
            },
            "verdict": self.verdict,
            "E": self.E.tolist(),
            "D_min_abs": self.D_min_abs,
            "messages": list(self.messages),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        for group, checks in (("structural", self.structural),
                              ("algebraic", self.algebraic)):
            for name, ok in checks.items():
                lines.append(f"  {group:<10} {name:<30} {'pass' if ok else 'FAIL'}")
        cc = self.column_classes
        lines.append(f"  columns: {cc.type_i} type-I, {cc.type_ii} type-II, "
                     f"{cc.invalid} invalid, {cc.tags.count('zero')} zero")
        lines.extend(f"  - {m}" for m in self.messages)
        return "\n".join(lines)


def verify(code: DistributedCode, draws: int = DEFAULT_DRAWS,
           tol: float = DEFAULT_TOL, seed=0) -> VerificationReport:
    """Run every check and classify the code."""
    rng = _rng(seed)
    st = check_structural(code)
    cf = check_channel_free_orthogonality(code)
    wo = check_weighted_orthogonality(code, draws, tol, rng)
    dr = check_diagonal_R(code, draws, tol, rng, structural=st)
    structural = {name: bool(getattr(st, name)) for name in STRUCTURAL_CHECKS}
    algebraic = {
        "channel_free_orthogonality": bool(cf.orthogonal),
        "positive_E": bool(cf.positive),
        "weighted_orthogonality": bool(wo.passed),
        "diagonal_R": bool(dr.passed),
    }
    messages = st.violations + cf.failures + wo.failures[:20]
    if not dr.consistent:
        messages.append("diagonal R disagrees with the row-monomial flag on a "
                        "generic draw (toolkit bug)")
    if st.necessary and cf.passed and wo.passed:
        verdict = "row_monomial_dostbc" if (st.passed and dr.passed) else "dostbc"
    else:
        verdict = "not_dostbc"
    d_min = float(np.abs(wo.D).min()) if wo.D.size else 0.0
    return VerificationReport(structural, algebraic, classify_columns(code), verdict,
                              cf.E, d_min, messages)
