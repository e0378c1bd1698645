"""Command-line interface: ``dostbc <command> ...``.

Exit codes: 0 success, 1 other errors (bad input files, too little data),
2 infeasible configuration, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import codebook, harness
from .codes import load_code, save_code, code_to_dict
from .modulation import make_constellation
from .search import SearchBudgetError, min_length_search
from .verifier import DEFAULT_DRAWS, DEFAULT_TOL, verify

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_VERIFY = 0, 1, 2, 3


def _window(text):
    lo, hi = (float(x) for x in text.split(":"))
    return lo, hi


def _cmd_construct(args):
    code = codebook.construct(args.n, args.k)
    if args.out:
        save_code(code, args.out)
        print(f"wrote N={code.n_symbols} K={code.n_relays} T={code.length} "
              f"(rate {code.rate}) to {args.out}")
    else:
        print(json.dumps(code_to_dict(code)))
    return EXIT_OK


def _cmd_rate_bound(args):
    fn = (codebook.rate_bound_dostbc if args.family == "dostbc"
          else codebook.rate_bound_row_monomial)
    b = fn(args.n, args.k)
    print(f"{b.value} = {float(b):.6f} (N/T = {b})")
    return EXIT_OK


def _cmd_search(args):
    res = min_length_search(args.n, args.k, args.max_t, budget=int(args.budget))
    if not res.found:
        print(f"none: no row-monomial DOSTBC with T <= {args.max_t}")
        return EXIT_OK
    print(f"T = {res.length} (rate {res.witness.rate})")
    if args.out:
        save_code(res.witness, args.out)
        print(f"witness written to {args.out}")
    else:
        print(json.dumps(code_to_dict(res.witness)))
    return EXIT_OK


def _cmd_verify(args):
    code = load_code(args.code)
    rep = verify(code, draws=args.draws, tol=args.tol, seed=args.seed)
    print(rep.to_json() if args.report == "json" else rep.to_text())
    return EXIT_OK if rep.is_dostbc else EXIT_VERIFY


def _cmd_simulate(args):
    if args.config:
        config = harness.load_config(args.config)
    else:
        if args.n is None or args.k is None:
            raise SystemExit("simulate needs --config or both --n and --k")
        config = harness.ExperimentConfig(
            scheme=args.scheme, n_symbols=args.n, n_relays=args.k,
            snr_db=args.snr, constellation=args.constellation, bps=args.bps,
            trials=int(float(args.trials)),
            target_errors=args.target_errors or None, seed=args.seed,
            code_path=args.code, force=args.force)
    curve = harness.run_ber(config)
    if args.out:
        curve.write_csv(args.out)
    else:
        sys.stdout.write(curve.to_csv())
    if args.meta:
        with open(args.meta, "w") as fh:
            json.dump(curve.metadata, fh, indent=1, default=str)
    return EXIT_OK


def _cmd_diversity(args):
    curve = harness.read_ber_csv(args.input)
    est = harness.estimate_diversity(curve, _window(args.window) if args.window else None,
                                     min_errors=args.min_errors)
    print(f"slope {est.slope:.3f} over {est.window[0]:g}..{est.window[1]:g} dB "
          f"(r^2 {est.r2:.4f}, {len(est.used)} points)")
    if est.flagged:
        print("skipped (too few errors): " + ", ".join(f"{x:g}" for x in est.flagged))
    return EXIT_OK


def _cmd_rate_table(args):
    table = harness.emit_rate_table(args.max_n, args.max_k)
    text = table.numeric_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.curves:
        with open(args.curves, "w") as fh:
            fh.write(table.curves_csv())
    if args.symbolic:
        print(table.symbolic_text())
    return EXIT_OK


def _cmd_constellation(args):
    con = make_constellation(args.name, args.es)
    con.to_csv(args.out)
    print(f"wrote {con.size} points of {con.name} to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dostbc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build the rate-optimal row-monomial code")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--out")
    c.set_defaults(func=_cmd_construct)

    c = sub.add_parser("rate-bound", help="print a data-rate upper bound")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--family", choices=("dostbc", "row-monomial"), default="row-monomial")
    c.set_defaults(func=_cmd_rate_bound)

    c = sub.add_parser("search", help="exhaustive minimum-length search")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--max-t", type=int, required=True)
    c.add_argument("--budget", type=float, default=1e9)
    c.add_argument("--out")
    c.set_defaults(func=_cmd_search)

    c = sub.add_parser("verify", help="check a code file")
    c.add_argument("code")
    c.add_argument("--draws", type=int, default=DEFAULT_DRAWS)
    c.add_argument("--tol", type=float, default=DEFAULT_TOL)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--report", choices=("json", "text"), default="text")
    c.set_defaults(func=_cmd_verify)

    c = sub.add_parser("simulate", help="Monte-Carlo BER sweep")
    c.add_argument("--config")
    c.add_argument("--n", type=int)
    c.add_argument("--k", type=int)
    c.add_argument("--scheme", choices=("dostbc", "repetition"), default="dostbc")
    c.add_argument("--bps", type=float)
    c.add_argument("--constellation")
    c.add_argument("--snr", default="0:2:24")
    c.add_argument("--trials", default="1e5")
    c.add_argument("--target-errors", type=int, default=200,
                   help="stop a point after this many bit errors (0: never)")
    c.add_argument("--seed", type=int, default=42)
    c.add_argument("--code")
    c.add_argument("--force", action="store_true")
    c.add_argument("--out")
    c.add_argument("--meta")
    c.set_defaults(func=_cmd_simulate)

    c = sub.add_parser("diversity", help="slope of a BER curve")
    c.add_argument("--in", dest="input", required=True)
    c.add_argument("--window")
    c.add_argument("--min-errors", type=int, default=20)
    c.set_defaults(func=_cmd_diversity)

    c = sub.add_parser("rate-table", help="both bounds over a grid of (N, K)")
    c.add_argument("--max-n", type=int, default=9)
    c.add_argument("--max-k", type=int, default=9)
    c.add_argument("--out")
    c.add_argument("--curves", help="CSV of both bounds against K for N = 2, 3")
    c.add_argument("--symbolic", action="store_true")
    c.set_defaults(func=_cmd_rate_table)

    c = sub.add_parser("constellation", help="export a constellation table as CSV")
    c.add_argument("--name", required=True)
    c.add_argument("--es", type=float, default=1.0)
    c.add_argument("--out", required=True)
    c.set_defaults(func=_cmd_constellation)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (harness.InfeasibleConfigError, codebook.ConstructionError,
            SearchBudgetError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except codebook.CodeVerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
