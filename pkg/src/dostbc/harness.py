"""Experiment driver: BER sweeps, diversity estimates and rate tables.

Reproducibility
---------------
Frame batch ``b`` of SNR point ``i`` draws everything (bits, channels,
noise) from ``default_rng(SeedSequence([seed, i, b]))``.  Results therefore
depend only on the configuration, never on scheduling, and the CSV output
of two runs with the same configuration is byte-identical.

Confidence intervals
--------------------
Each BER point carries a two-sided 95% Clopper-Pearson interval for the
bit error probability, treating the ``trials * bits_per_frame`` bits as
independent Bernoulli trials.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import sympy as sp
from scipy import stats

from .channel import (PowerConfig, repetition_power_profile, simulate_dostbc_batch,
                      simulate_repetition_batch)
from .codebook import (CodeVerificationError, construct, rate_bound_dostbc,
                       rate_bound_row_monomial)
from .codes import DistributedCode, load_code
from .decoder import repetition_ml_decode, single_symbol_ml_decode
from .modulation import constellation_name, make_constellation
from .verifier import verify

__all__ = [
    "InfeasibleConfigError",
    "InsufficientDataError",
    "Pairing",
    "pair_constellations",
    "parse_snr_grid",
    "ExperimentConfig",
    "load_config",
    "BerPoint",
    "BerCurve",
    "run_ber",
    "read_ber_csv",
    "DiversityEstimate",
    "estimate_diversity",
    "RateTable",
    "emit_rate_table",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("snr_db", "trials", "bit_errors", "ber", "ci_low", "ci_high")


class InfeasibleConfigError(ValueError):
    """The configuration cannot be realised (e.g. fractional bits per symbol)."""


class InsufficientDataError(ValueError):
    """Too few qualifying BER points for a slope fit."""


# -- constellation pairing ----------------------------------------------------------

def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x))


@dataclass(frozen=True)
class Pairing:
    dostbc: str
    repetition: str
    dostbc_rate: Fraction
    repetition_rate: Fraction
    bps: Fraction


def _bits_for(rate: Fraction, bps: Fraction, who: str) -> int:
    bits = bps / rate
    if bits.denominator != 1:
        raise InfeasibleConfigError(
            f"{who} at rate {rate} needs 2^{{{bits.numerator}/{bits.denominator}}} "
            f"constellation points for {bps} bps/Hz; no such constellation exists")
    return int(bits)


def pair_constellations(N: int, K: int, target_bps) -> Pairing:
    """Constellations giving both schemes the same bandwidth efficiency.

    The DOSTBC runs at the rate of :func:`dostbc.codebook.construct`; the
    repetition scheme sends ``N`` symbols in ``N K`` slots.
    """
    bps = _as_fraction(target_bps)
    if bps <= 0:
        raise ValueError("target bps/Hz must be positive")
    r_code = construct(N, K).rate
    r_rep = Fraction(1, K)
    b_code = _bits_for(r_code, bps, f"the DOSTBC for N={N}, K={K}")
    b_rep = _bits_for(r_rep, bps, f"the repetition scheme for K={K}")
    return Pairing(constellation_name(b_code), constellation_name(b_rep),
                   r_code, r_rep, bps)


# -- configuration ------------------------------------------------------------------

def parse_snr_grid(text) -> tuple[float, ...]:
    """``"0:2:24"`` (inclusive), ``"8,12,16"`` or a list of numbers."""
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    text = str(text).strip()
    if ":" in text:
        start, step, stop = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ValueError("SNR step must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 10) for i in range(max(n, 0)))
    return tuple(float(x) for x in text.split(",") if x.strip())


@dataclass(frozen=True)
class ExperimentConfig:
    """One BER sweep.

    ``constellation`` may be omitted when ``bps`` is given; the pairing rule
    then picks it.  ``power_profile`` is ``"matched"`` (repetition relays get
    the DOSTBC's per-slot average power, DOSTBC relays get ``er`` per use),
    ``"unit"`` (every relay ``er`` per use) or an explicit list of per-relay
    multipliers.  ``trials`` caps the frames per SNR point; ``target_errors``
    (if set) stops a point early once that many bit errors are counted.
    """

    scheme: str
    n_symbols: int
    n_relays: int
    snr_db: tuple[float, ...] = parse_snr_grid("0:2:24")
    constellation: str | None = None
    bps: float | None = None
    trials: int = 100_000
    target_errors: int | None = 200
    seed: int = 0
    power_profile: object = "matched"
    code_path: str | None = None
    batch_size: int = 10_000
    force: bool = False

    def __post_init__(self):
        if self.scheme not in ("dostbc", "repetition"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        object.__setattr__(self, "snr_db", parse_snr_grid(self.snr_db))
        if isinstance(self.power_profile, list):
            object.__setattr__(self, "power_profile", tuple(self.power_profile))
        if self.trials < 0 or self.batch_size < 1:
            raise ValueError("trials must be >= 0 and batch_size >= 1")

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha1(blob.encode()).hexdigest()[:16]


_CONFIG_KEYS = {"scheme": "scheme", "n": "n_symbols", "k": "n_relays",
                "snr": "snr_db", "snr_db": "snr_db", "constellation": "constellation",
                "bps": "bps", "trials": "trials", "target_errors": "target_errors",
                "seed": "seed", "power_profile": "power_profile",
                "per_relay_scale": "power_profile", "code": "code_path",
                "code_path": "code_path", "batch_size": "batch_size", "force": "force"}


def load_config(path) -> ExperimentConfig:
    """Read a JSON config; keys follow :data:`_CONFIG_KEYS`."""
    raw = json.loads(Path(path).read_text())
    unknown = set(raw) - set(_CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    kw = {_CONFIG_KEYS[k]: v for k, v in raw.items()}
    if "code_path" in kw and kw["code_path"] is not None:
        kw["code_path"] = str(Path(path).parent / kw["code_path"])
    if kw.get("trials") is not None:
        kw["trials"] = int(float(kw["trials"]))
    return ExperimentConfig(**kw)


@dataclass(frozen=True, eq=False)
class _Plan:
    code: DistributedCode | None
    constellation: object
    scales: tuple | None
    bits_per_frame: int


def _plan(config: ExperimentConfig, code: DistributedCode | None) -> _Plan:
    N, K = config.n_symbols, config.n_relays
    if code is None and config.code_path:
        code = load_code(config.code_path)
    if code is None and (config.scheme == "dostbc" or config.power_profile == "matched"):
        code = construct(N, K)
    if code is not None and (code.n_symbols, code.n_relays) != (N, K):
        raise InfeasibleConfigError(f"code is for N={code.n_symbols}, K={code.n_relays}, "
                                    f"config asks for N={N}, K={K}")
    if config.scheme == "dostbc":
        report = verify(code)
        if not report.is_dostbc:
            raise CodeVerificationError("code failed verification: "
                                        + "; ".join(report.messages[:3]), report)
    rate = code.rate if config.scheme == "dostbc" else Fraction(1, K)
    name = config.constellation
    if name is None:
        if config.bps is None:
            raise InfeasibleConfigError("give a constellation or a bps/Hz target")
        bits = _bits_for(rate, _as_fraction(config.bps), f"the {config.scheme} scheme")
        name = constellation_name(bits)
    con = make_constellation(name)
    if config.bps is not None and not config.force:
        if rate * con.bits_per_symbol != _as_fraction(config.bps):
            raise InfeasibleConfigError(
                f"{name} at rate {rate} gives {rate * con.bits_per_symbol} bps/Hz, "
                f"not {config.bps}; pass force to run anyway")
    profile = config.power_profile
    if profile == "unit":
        scales = None
    elif profile == "matched":
        scales = None if config.scheme == "dostbc" else repetition_power_profile(code)
    else:
        scales = tuple(float(x) for x in profile)
    return _Plan(code, con, scales, N * con.bits_per_symbol)


# -- BER ----------------------------------------------------------------------------

def clopper_pearson(errors: int, n: int, level: float = 0.95) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    a = (1 - level) / 2
    lo = 0.0 if errors == 0 else float(stats.beta.ppf(a, errors, n - errors + 1))
    hi = 1.0 if errors == n else float(stats.beta.ppf(1 - a, errors + 1, n - errors))
    return lo, hi


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    trials: int
    bit_errors: int
    ber: float
    ci_low: float
    ci_high: float


@dataclass(eq=False)
class BerCurve:
    points: list[BerPoint]
    bits_per_frame: int = 0
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(p, name) for p in self.points])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for p in self.points:
            w.writerow([f"{p.snr_db:g}", p.trials, p.bit_errors,
                        f"{p.ber:.9e}", f"{p.ci_low:.9e}", f"{p.ci_high:.9e}"])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())


def read_ber_csv(path) -> BerCurve:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"expected columns {CSV_COLUMNS}, got {tuple(rows[0])}")
    pts = [BerPoint(float(r["snr_db"]), int(r["trials"]), int(r["bit_errors"]),
                    float(r["ber"]), float(r["ci_low"]), float(r["ci_high"]))
           for r in rows]
    return BerCurve(pts)


def _popcount(x: np.ndarray) -> int:
    return int(np.unpackbits(np.ascontiguousarray(x, dtype=">u4").view(np.uint8)).sum())


def _run_batch(config, plan, con, power, rng, frames):
    N, K = config.n_symbols, config.n_relays
    idx = rng.integers(0, con.size, size=(frames, N))
    s = con.points[idx]
    if config.scheme == "dostbc":
        batch = simulate_dostbc_batch(plan.code, s, power, rng)
        dec = single_symbol_ml_decode(batch, plan.code, con).symbols
    else:
        batch = simulate_repetition_batch(K, s, power, rng)
        dec = repetition_ml_decode(batch, K, con).symbols
    return _popcount(idx ^ dec)


def run_ber(config: ExperimentConfig, code: DistributedCode | None = None) -> BerCurve:
    """Monte-Carlo BER at every SNR of ``config``; deterministic given the seed."""
    t0 = time.perf_counter()
    plan = _plan(config, code)
    pts = []
    for i, snr in enumerate(config.snr_db):
        power = PowerConfig.from_snr_db(snr, plan.scales)
        con = plan.constellation.scaled(power.es)     # mean symbol energy E_s
        frames = errors = 0
        b = 0
        while frames < config.trials:
            if config.target_errors and errors >= config.target_errors:
                break
            n = min(config.batch_size, config.trials - frames)
            rng = np.random.default_rng(np.random.SeedSequence([config.seed, i, b]))
            errors += _run_batch(config, plan, con, power, rng, n)
            frames += n
            b += 1
        nbits = frames * plan.bits_per_frame
        ber = errors / nbits if nbits else 0.0
        pts.append(BerPoint(float(snr), frames, errors, ber,
                            *clopper_pearson(errors, nbits)))
    meta = {"config_hash": config.digest(), "seed": config.seed,
            "scheme": config.scheme, "n": config.n_symbols, "k": config.n_relays,
            "constellation": plan.constellation.name,
            "per_relay_scale": plan.scales,
            "runtime_s": round(time.perf_counter() - t0, 3)}
    return BerCurve(pts, plan.bits_per_frame, meta)


# -- diversity ----------------------------------------------------------------------

@dataclass(frozen=True)
class DiversityEstimate:
    slope: float
    window: tuple[float, float]
    r2: float
    used: tuple[float, ...]       # SNRs that entered the fit
    flagged: tuple[float, ...]    # SNRs in the window skipped for too few errors


def estimate_diversity(curve: BerCurve, window: tuple[float, float] | None = None,
                       min_errors: int = 20) -> DiversityEstimate:
    """Slope of ``-log10 BER`` against ``log10 SNR`` over ``window`` (dB, inclusive)."""
    lo, hi = window if window is not None else (-np.inf, np.inf)
    used, flagged = [], []
    for p in curve.points:
        if not lo <= p.snr_db <= hi:
            continue
        (used if p.bit_errors >= min_errors and p.ber > 0 else flagged).append(p)
    if len(used) < 3:
        raise InsufficientDataError(
            f"need at least 3 points with >= {min_errors} errors in the window, "
            f"got {len(used)}")
    x = np.array([p.snr_db for p in used]) / 10.0
    y = np.log10([p.ber for p in used])
    fit = stats.linregress(x, y)
    win = (float(min(p.snr_db for p in used)), float(max(p.snr_db for p in used)))
    return DiversityEstimate(-float(fit.slope), win, float(fit.rvalue ** 2),
                             tuple(p.snr_db for p in used),
                             tuple(p.snr_db for p in flagged))


# -- rate tables --------------------------------------------------------------------

_l, _m = sp.symbols("l m", positive=True, integer=True)


def _symbolic_rows():
    l, m = _l, _m
    d_oo = (2 * l + 1) / (2 * l * m + l + m + 1)
    r_a = (2 * l + 1) / (2 * l * m + 2 * m + l + 1)
    r_b = (2 * l + 1) / (2 * l * m + 2 * l + m + 1)
    rows = [
        ("N=2l, K=2m", 1 / m, 1 / m),
        ("N=2l+1, K=2m", 1 / m, (2 * l + 1) / (2 * l * m + 2 * m)),
        ("N=2l, K=2m+1", 2 / (2 * m + 1), 1 / (m + 1)),
        ("N=2l+1, K=2m+1", d_oo, sp.Min(r_a, r_b)),
    ]
    out = []
    for case, d, r in rows:
        if isinstance(r, sp.Min):
            diff = sp.Max(*(sp.factor(sp.simplify(d - a)) for a in r.args))
        else:
            diff = sp.factor(sp.simplify(d - r))
        out.append((case, sp.simplify(d), r, diff))
    return out


@dataclass(frozen=True)
class RateTable:
    symbolic: list          # (case, dostbc, row_monomial, difference) sympy rows
    numeric: list           # (N, K, case, dostbc, row_monomial, difference) Fractions
    curves: dict            # N -> list of (K, dostbc, row_monomial)

    def numeric_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "k", "case", "dostbc", "row_monomial", "difference"])
        for n, k, case, d, r, diff in self.numeric:
            w.writerow([n, k, case, d, r, diff])
        return buf.getvalue()

    def curves_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "k", "dostbc", "row_monomial", "dostbc_float", "row_monomial_float"])
        for n, series in self.curves.items():
            for k, d, r in series:
                w.writerow([n, k, d, r, f"{float(d):.6f}", f"{float(r):.6f}"])
        return buf.getvalue()

    def symbolic_text(self) -> str:
        lines = []
        for case, d, r, diff in self.symbolic:
            lines.append(f"{case}: dostbc = {d}; row_monomial = {r}; difference = {diff}")
        return "\n".join(lines)


def _case(N, K):
    return ("N=2l" if N % 2 == 0 else "N=2l+1") + ", " + ("K=2m" if K % 2 == 0 else "K=2m+1")


def emit_rate_table(max_n: int, max_k: int, curve_max_k: int | None = None) -> RateTable:
    """Both bounds for ``2 <= N <= max_n``, ``2 <= K <= max_k``, plus curves for N = 2, 3."""
    if max_n < 2 or max_k < 2:
        raise ValueError("max_n and max_k must be at least 2")
    numeric = []
    for n in range(2, max_n + 1):
        for k in range(2, max_k + 1):
            d = rate_bound_dostbc(n, k).value
            r = rate_bound_row_monomial(n, k).value
            numeric.append((n, k, _case(n, k), d, r, d - r))
    curves = {}
    for n in (2, 3):
        curves[n] = [(k, rate_bound_dostbc(n, k).value, rate_bound_row_monomial(n, k).value)
                     for k in range(2, (curve_max_k or max_k) + 1)]
    return RateTable(_symbolic_rows(), numeric, curves)
