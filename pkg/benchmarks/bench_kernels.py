"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--batch 100000]
"""
import argparse
import timeit

import numpy as np

from packrig import data_path, kernels
from packrig.decoration_search import CornerTable, random_batch
from packrig.surface_complex import load_complex


def cases(sc, batch, rng):
    tri = np.array(sc.vertex_of, dtype=np.int64)
    radii = rng.uniform(0.2, 1.5, sc.n_vertices)
    table = CornerTable.of(sc)
    colors, states = random_batch(sc, batch, rng)
    return {
        "angle_sums": lambda b: b.angle_sums(radii, tri),
        "vertex_weights": lambda b: b.vertex_weights(colors, states, *table.args(), sc.n_vertices),
        "triangle_weights": lambda b: b.triangle_weights(colors, states, *table.args()),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--batch", type=int, default=100_000)
    args = ap.parse_args()
    if kernels.compiled_backend is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    sc = load_complex(data_path("genus2.json"))
    rng = np.random.default_rng(0)
    print(f"{'kernel':18s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}  agree")
    for name, fn in cases(sc, args.batch, rng).items():
        py, cy = kernels.python_backend, kernels.compiled_backend
        agree = np.allclose(fn(py), fn(cy), rtol=1e-12, atol=1e-12)
        n = 200 if name == "angle_sums" else 1
        tp = min(timeit.repeat(lambda: fn(py), number=n, repeat=args.repeat)) / n * 1e3
        tc = min(timeit.repeat(lambda: fn(cy), number=n, repeat=args.repeat)) / n * 1e3
        print(f"{name:18s} {tp:10.3f} {tc:10.3f} {tp / tc:8.1f}  {agree}")


if __name__ == "__main__":
    main()
