"""Time the compiled kernels against the pure Python fallback.

Run with ``python3 benchmarks/bench_kernels.py``.  Both backends get the same
inputs and their outputs are compared before any timing is reported.
"""

import argparse
import timeit

import numpy as np

from dostbc import construct
from dostbc.channel import PowerConfig, simulate_dostbc_batch
from dostbc.decoder import whitened_model
from dostbc.kernels import available_backends
from dostbc.modulation import make_constellation
from dostbc.search import column_types


def _decoder_inputs(n, k, name, frames, seed=0):
    code = construct(n, k)
    con = make_constellation(name, 10.0)
    rng = np.random.default_rng(seed)
    s = con.points[rng.integers(0, con.size, (frames, n))]
    batch = simulate_dostbc_batch(code, s, PowerConfig(10.0, 10.0), rng)
    y, u, v = whitened_model(batch, code)
    return y, u, v, con.points


def cases(frames):
    single = _decoder_inputs(5, 5, "16qam", frames)
    joint = _decoder_inputs(4, 4, "qpsk", max(frames // 10, 1))
    yield ("single_symbol_argmin X(5,5) 16qam", "single_symbol_argmin", single,
           lambda r: r[0])
    yield ("joint_argmin X(4,4) qpsk", "joint_argmin", joint, lambda r: r)
    yield ("search_dfs N=3 K=3 T=5", "search_dfs", (column_types(3, 3), 3, 3, 5),
           lambda r: (r[0], r[1]))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--frames", type=int, default=20_000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the fallback is available")
    print(f"{'kernel':40s}" + "".join(f"{b:>12s}" for b in backends) + "     speed-up")
    for label, fn, inputs, key in cases(args.frames):
        outs = {b: key(getattr(ns, fn)(*inputs)) for b, ns in backends.items()}
        ref = outs["python"]
        for b, out in outs.items():
            same = (np.array_equal(out, ref) if not isinstance(out, tuple)
                    else str(out) == str(ref))
            if not same:
                raise SystemExit(f"{label}: {b} disagrees with the fallback")
        times = {b: min(timeit.repeat(lambda: getattr(ns, fn)(*inputs), number=1,
                                      repeat=args.repeat))
                 for b, ns in backends.items()}
        line = f"{label:40s}" + "".join(f"{times[b] * 1e3:10.1f}ms" for b in backends)
        if "cython" in times:
            line += f"  {times['python'] / times['cython']:8.1f}x"
        print(line)


if __name__ == "__main__":
    main()
