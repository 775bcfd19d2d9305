"""Time the numba kernels against their numpy fallbacks on realistic inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--end-to-end]

Inputs come from the default synthetic context (360 objects, 192 literals)
and a rule set mined from it, so the shapes match what the miner and the
fixpoint engine see. Each kernel's outputs are compared before timing.
"""

import argparse
import os
import statistics
import subprocess
import sys
import time

import numpy as np

from pfca import _kernels as K
from pfca.config import RunConfig
from pfca.context import object_intent
from pfca.miner import mine_mscr
from pfca.synthetic import SyntheticSpec, generate_synthetic


def timed(fn, args, repeat, inner):
    fn(*args)  # warm-up (and JIT compile for numba)
    runs = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn(*args)
        runs.append((time.perf_counter() - t0) / inner)
    return statistics.median(runs)


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=1e-12, atol=1e-9)


MINE_SCRIPT = """
import time
from pfca.synthetic import SyntheticSpec, generate_synthetic
from pfca.miner import mine_mscr
ctx, _, _ = generate_synthetic(SyntheticSpec(n_classes=6, copies_per_class=20, n_attributes=12), seed=1)
mine_mscr(ctx, None)  # compile
t0 = time.perf_counter()
rules = mine_mscr(ctx, None)
print(len(rules), time.perf_counter() - t0)
"""


def end_to_end():
    """Fisher-mode mining of a 120-object context on each path (fresh interpreters)."""
    for flag, name in (("1", "numpy"), ("0", "numba")):
        env = dict(os.environ, PFCA_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", MINE_SCRIPT], env=env, capture_output=True, text=True, check=True)
        n, secs = out.stdout.split()
        print(f"mine_mscr ({name:5}): {n} rules in {float(secs):.2f}s")


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true", help="also time a full mining run on both paths")
    args = ap.parse_args(argv)
    if args.end_to_end:
        end_to_end()
    if not K.HAVE_NUMBA:
        print("numba unavailable (or PFCA_DISABLE_NUMBA set); nothing to compare")
        return 0

    ctx, _, _ = generate_synthetic(SyntheticSpec(n_attributes=12), seed=3)
    cols = ctx.literal_bitsets
    ext = K.full_bitset(ctx.n_objects) & cols[0]
    concl = cols[5]
    blocked = (np.arange(ctx.n_literals) >> 1) == 2
    n_p = K.popcount_np(ext)
    n_b = K.popcount_np(ext & concl)
    rng = np.random.default_rng(0)
    n11 = rng.integers(0, 40, 2000)
    n10 = rng.integers(0, 300, 2000)
    n01 = rng.integers(0, 40, 2000)
    n00 = rng.integers(0, 300, 2000)

    rules = mine_mscr(ctx, None, RunConfig(max_premise_len=2))
    ptr, lits, cc = rules.compiled
    gam = rules.gammas()
    in_l = np.zeros(ctx.n_literals, dtype=bool)
    in_l[list(object_intent(ctx, 0))] = True

    cases = [
        ("extension_counts", K.extension_counts_np, K.extension_counts_nb, (ext, ext & concl, cols), 200),
        ("fisher_log_greater_batch", K.fisher_log_greater_batch_np, K.fisher_log_greater_batch_nb, (n11, n10, n01, n00), 5),
        ("fisher_expand", K.fisher_expand_np, K.fisher_expand_nb, (ext, ext & concl, cols, blocked, n_p, n_b, np.log(0.01)), 50),
        ("upsilon_scores", K.upsilon_scores_np, K.upsilon_scores_nb, (in_l, ptr, lits, cc, gam), 50),
    ]
    print(f"{len(rules)} rules, {ctx.n_objects} objects, {ctx.n_literals} literals")
    print(f"{'kernel':<26}{'numpy ms':>11}{'numba ms':>11}{'speedup':>9}  match")
    ok = True
    for name, f_np, f_nb, fargs, inner in cases:
        match = same(f_np(*fargs), f_nb(*fargs))
        ok &= match
        t_np = timed(f_np, fargs, args.repeat, inner)
        t_nb = timed(f_nb, fargs, args.repeat, inner)
        print(f"{name:<26}{t_np * 1e3:>11.3f}{t_nb * 1e3:>11.3f}{t_np / t_nb:>8.1f}x  {'yes' if match else 'NO'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
