"""Time every kernel under both backends on fixed, seeded inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs once untimed so numba compilation (or cache loading) is
excluded. Results are checked for agreement before timing is reported.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from kplexq import kernels
from kplexq.graph import complement, random_gnm
from kplexq.oracle import build_oracle
from kplexq.qubo import build_qubo


def cases():
    g = random_gnm(16, 60, 1)
    yield "plex_table n=16", "plex_table", (g.row_array(), 3), lambda a, b: (a == b).all()

    o = build_oracle(complement(random_gnm(10, 20, 2)), 3, 5)
    states = o.initial_states(np.arange(1 << 10))
    yield (f"run_circuit {len(o.u_check)} gates x 1024", "run_circuit",
           (states, *o.u_check._compiled), lambda a, b: (a == b).all())

    rng = np.random.default_rng(3)
    amps = (np.ones(1 << 18) / 2**9).astype(np.complex128)
    marked = rng.random(1 << 18) < 1e-4
    yield "grover_step 2^18", "grover_step", (amps, marked), None

    qg = random_gnm(12, 20, 4)
    m = build_qubo(qg, 3)
    h, J = m.matrices()
    V = m.num_vars
    init = rng.integers(0, 2, (200, V), dtype=np.uint8)
    uni = rng.random((200, 50, V))
    temps = np.geomspace(100, 0.01, 50)
    crow = np.array(complement(qg).rows, dtype=np.int64)
    yield (f"anneal 200 shots x 50 sweeps, {V} vars", "anneal",
           (h, J, m.offset, init, uni, temps, crow, 2),
           lambda a, b: all(np.allclose(x, y) for x, y in zip(a, b)))

    sm = build_qubo(random_gnm(6, 9, 5), 2)
    sh, sJ = sm.matrices()
    yield (f"qubo_all_costs 2^{sm.num_vars}", "qubo_all_costs", (sh, sJ, sm.offset),
           lambda a, b: np.allclose(a, b))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':48s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for label, key, inputs, agree in cases():
        def call(backend):
            fresh = [x.copy() if isinstance(x, np.ndarray) else x for x in inputs]
            return kernels.BACKENDS[backend][key](*fresh)

        ref = {b: call(b) for b in ("numba", "numpy")}
        if agree is not None and not agree(ref["numba"], ref["numpy"]):
            raise SystemExit(f"{label}: backends disagree")
        t = {b: min(timeit.repeat(lambda: call(b), number=1, repeat=args.repeat)) * 1e3
             for b in ("numba", "numpy")}
        print(f"{label:48s} {t['numba']:10.2f} {t['numpy']:10.2f} {t['numpy'] / t['numba']:7.1f}x")


if __name__ == "__main__":
    main()
