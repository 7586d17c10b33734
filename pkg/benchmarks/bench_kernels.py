"""Times the compiled search kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--seed S]

Each workload is run through both backends; results must agree exactly
before timings are reported.
"""

from __future__ import annotations

import argparse
import random
import sys
import timeit

from lsfix import _kernel_py

try:
    from lsfix import _kernel
except ImportError:
    sys.exit("compiled kernel not built; run `pip install -e . --no-build-isolation` first")

MAX_NODES = 10**8


def assignment_workload(rng, variables, candidates, nogood_count):
    # narrow cost range: many ties, so the search cannot prune on cost alone
    costs = [sorted(rng.randint(0, 2) for _ in range(candidates)) for _ in range(variables)]
    nogoods = []
    for _ in range(nogood_count):
        vs = rng.sample(range(variables), rng.randint(2, 3))
        nogoods.append([(v, rng.sample(range(candidates), rng.randint(1, 2))) for v in vs])
    return costs, nogoods


def cover_workload(rng, elements, sets):
    masks = []
    for _ in range(sets):
        mask = 0
        for e in rng.sample(range(elements), rng.randint(1, max(1, elements // 4))):
            mask |= 1 << e
        masks.append(mask)
    for e in range(elements):  # every element has at least one holder
        masks[rng.randrange(sets)] |= 1 << e
    weights = [rng.randint(1, 20) for _ in range(sets)]
    return masks, weights


def workloads(seed):
    rng = random.Random(seed)
    for variables, candidates, nogood_count in [(14, 4, 30), (20, 4, 40), (24, 4, 50)]:
        costs, nogoods = assignment_workload(rng, variables, candidates, nogood_count)
        label = f"assignments n={variables} c={candidates} g={nogood_count}"
        yield label, "min_cost_assignments", (costs, nogoods, MAX_NODES, 10**6)
    for elements, sets in [(16, 24), (32, 48), (60, 80)]:
        masks, weights = cover_workload(rng, elements, sets)
        yield f"covers e={elements} s={sets}", "optimal_covers", (masks, weights, MAX_NODES)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)

    print(f"{'workload':<36}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for label, name, call_args in workloads(args.seed):
        py_fn, cy_fn = getattr(_kernel_py, name), getattr(_kernel, name)
        py_out, cy_out = py_fn(*call_args), cy_fn(*call_args)
        if py_out[0] != cy_out[0] or sorted(py_out[1]) != sorted(cy_out[1]):
            sys.exit(f"{label}: backends disagree")
        py_t = min(timeit.repeat(lambda: py_fn(*call_args), number=1, repeat=args.repeat))
        cy_t = min(timeit.repeat(lambda: cy_fn(*call_args), number=1, repeat=args.repeat))
        print(f"{label:<36}{py_t * 1e3:>12.2f}{cy_t * 1e3:>12.2f}{py_t / cy_t:>9.1f}x")


if __name__ == "__main__":
    main()
