"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from quasilab.kernels import implementations


def cases(rng):
    X = rng.standard_normal((20_000, 64))
    X[::3, 32:] = 0.0
    return {
        "pnorm_rows p=1.5": lambda m: m.pnorm_rows(X, 1.5),
        "ribe_rows": lambda m: m.ribe_rows(X),
        "kp_rows cap=inf": lambda m: m.kp_rows(X, 1.0, np.inf, False),
        "kp_rows nonhom cap=3": lambda m: m.kp_rows(X, 1.0, 3.0, True),
        "lemma_w_grid 4001^2": lambda m: m.lemma_w_grid(-2.0, 1e-3, 4001),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = implementations()
    names = sorted(impls)
    print(f"{'kernel':24s}" + "".join(f"{n:>12s}" for n in names) +
          ("     speedup" if len(names) > 1 else ""))
    for label, fn in cases(np.random.default_rng(0)).items():
        best = {n: min(timeit.repeat(lambda: fn(impls[n]), number=1, repeat=args.repeat))
                for n in names}
        row = f"{label:24s}" + "".join(f"{best[n] * 1e3:10.2f}ms" for n in names)
        if "cython" in best:
            row += f"{best['numpy'] / best['cython']:11.1f}x"
        print(row)
    if "cython" not in impls:
        print("compiled extension not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
