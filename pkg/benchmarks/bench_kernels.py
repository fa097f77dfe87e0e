"""Time the compiled and pure-Python kernels on the same synthetic pool.

    python3 benchmarks/bench_kernels.py --size 100000 --repeat 3
"""

import argparse
import random
import time

import numpy as np

from morphlex import kernels

ALPHABET = "abcdefghijklmnopqrstuvwxyzäö"


def make_pool(size, seed):
    rng = random.Random(seed)
    # short "affixes" so the lattice has real edges to relax
    affixes = sorted({"".join(rng.choices(ALPHABET, k=rng.randint(2, 4))) for _ in range(300)})
    pool = set(affixes)
    while len(pool) < size:
        if rng.random() < 0.5:
            pool.add("".join(rng.choices(affixes, k=rng.randint(2, 4))))
        else:
            pool.add("".join(rng.choices(ALPHABET, k=max(1, round(rng.gauss(10, 3))))))
    return sorted(pool)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=100_000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    tokens = make_pool(args.size, args.seed)
    index = {t: i for i, t in enumerate(tokens)}
    whitelist = frozenset("a")
    scores = 1.0 / np.array([len(t) for t in tokens], dtype=np.float64)
    lengths = np.array([len(t) for t in tokens], dtype=np.int32)
    print(f"pool: {len(tokens)} tokens, backends: {sorted(kernels.BACKENDS)}")

    results = {}
    for name, mod in sorted(kernels.BACKENDS.items()):
        t_sup, counts = best_of(lambda: mod.substring_counts(tokens, tokens, True), args.repeat)
        t_lat, lat = best_of(lambda: mod.build_lattice(tokens, index, whitelist), args.repeat)
        t_bep, bep = best_of(lambda: mod.bep_all(scores, lengths, *lat), args.repeat)
        results[name] = (counts, lat, bep)
        print(f"{name:>7}  support {t_sup:8.3f}s  lattice {t_lat:8.3f}s  "
              f"bep {t_bep:8.4f}s  ({len(lat[1])} edges)")

    if len(results) > 1:
        (_, a), (_, b) = sorted(results.items())
        same = (np.array_equal(a[0], b[0]) and all(np.array_equal(x, y) for x, y in zip(a[1], b[1]))
                and np.array_equal(a[2][0], b[2][0]) and np.array_equal(a[2][1], b[2][1]))
        print("backends agree:", same)


if __name__ == "__main__":
    main()
