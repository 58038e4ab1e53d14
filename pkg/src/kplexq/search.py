"""qTKP (k-plex of size >= T via Grover search) and qMKP (binary search over T)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .graph import Graph, VertexSet, complement, is_kplex, kplex_table
from .grover import GroverRun, basis_to_mask, grover_run, mask_table_to_basis
from .oracle import build_oracle

RETRIES = 3
DEFAULT_SHOTS = 20000


class SearchFailed(RuntimeError):
    pass


@dataclass
class TkpOutcome:
    result: Optional[VertexSet]
    k: int
    T: int
    M: int
    iterations: int
    shots: int
    success_frequency: float
    attempts: int = 0
    run: Optional[GroverRun] = field(default=None, repr=False)

    @property
    def found(self) -> bool:
        return self.result is not None


@dataclass(frozen=True)
class Probe:
    T: int
    feasible: bool
    witness: Optional[VertexSet]
    outcome: TkpOutcome = field(repr=False, compare=False)


@dataclass
class MkpTrace:
    k: int
    steps: list[Probe]
    first_result: Optional[tuple[int, VertexSet]]
    final: Optional[VertexSet]

    @property
    def size(self) -> int:
        return self.final.size if self.final is not None else 0

    def to_json(self, dataset: str = "", shots: int = 0, seed: int = 0) -> dict:
        first = self.first_result
        return {
            "dataset": dataset,
            "k": self.k,
            "optimum": self.size,
            "witness": self.final.vertices() if self.final else [],
            "first_result_size": first[1].size if first else 0,
            "first_result_probe": first[0] if first else None,
            "probes": [
                {
                    "T": p.T,
                    "feasible": p.feasible,
                    "witness": p.witness.vertices() if p.witness else None,
                    "M": p.outcome.M,
                    "iterations": p.outcome.iterations,
                    "success_frequency": p.outcome.success_frequency,
                }
                for p in self.steps
            ],
            "shots": shots,
            "seed": seed,
        }


def verify_candidate(g: Graph, k: int, T: int, s: VertexSet) -> bool:
    return s.size >= T and is_kplex(g, s, k)


def _probe_seed(seed: int, T: int, attempt: int) -> int:
    return int(np.random.SeedSequence([seed, T, attempt]).generate_state(1, np.uint64)[0])


def qtkp(g: Graph, k: int, T: int, shots: int = DEFAULT_SHOTS, seed: int = 0,
         retries: int = RETRIES, keep_snapshots: bool = False) -> TkpOutcome:
    """Find a k-plex with at least ``T`` vertices, or report that none exists.

    ``M`` comes from classical enumeration. Measured outcomes are checked
    classically in order of frequency; if none verifies the whole Grover run
    is repeated, up to ``retries`` times.
    """
    n = g.n
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not 1 <= T <= n:
        raise ValueError(f"T must lie in [1, {n}], got {T}")
    if shots < 1:
        raise ValueError("shots must be >= 1")

    sizes = np.bitwise_count(np.arange(1 << n, dtype=np.int64))
    M = int((kplex_table(g, k) & (sizes >= T)).sum())
    if M == 0:
        return TkpOutcome(None, k, T, 0, 0, shots, 0.0)

    oracle = build_oracle(complement(g), k, T)
    marks = oracle.evaluate_all()
    if int(marks.sum()) != M:
        raise SearchFailed(f"oracle marks {int(marks.sum())} subsets, enumeration found {M}")
    marked = mask_table_to_basis(marks, n)

    run = None
    for attempt in range(1, retries + 1):
        run = grover_run(n, marked, M, shots, _probe_seed(seed, T, attempt), keep_snapshots)
        for basis in run.ranked_outcomes():
            cand = VertexSet(n, basis_to_mask(basis, n))
            if verify_candidate(g, k, T, cand):
                return TkpOutcome(cand, k, T, M, run.schedule.iterations, shots,
                                  run.success_frequency, attempt, run)
    raise SearchFailed(f"no measured subset verified after {retries} Grover runs (k={k}, T={T})")


def qmkp(g: Graph, k: int, shots: int = DEFAULT_SHOTS, seed: int = 0,
         retries: int = RETRIES) -> MkpTrace:
    """Binary search for the largest feasible ``T``.

    ``lo`` is the largest size known to be feasible (a singleton always is),
    ``hi`` the smallest known infeasible one (``n + 1`` to start).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    n = g.n
    steps: list[Probe] = []
    if n == 0:
        return MkpTrace(k, steps, None, None)

    lo, hi = 1, n + 1
    best: Optional[VertexSet] = None
    first: Optional[tuple[int, VertexSet]] = None

    def probe(T: int) -> Optional[VertexSet]:
        nonlocal first
        out = qtkp(g, k, T, shots, seed, retries)
        steps.append(Probe(T, out.found, out.result, out))
        if out.found and first is None:
            first = (len(steps) - 1, out.result)
        return out.result

    while hi - lo > 1:
        mid = (lo + hi) // 2
        witness = probe(mid)
        if witness is None:
            hi = mid
        else:
            best = witness
            lo = max(mid, witness.size)
    if best is None or best.size < lo:
        best = probe(lo)
    return MkpTrace(k, steps, first, best)
