"""Amplitude-vector simulation of Grover search over the vertex register.

Basis index convention follows the one-hot ket notation: vertex 1 is the
*most* significant bit, so {v1, v4} on six vertices is |100100> = |36>.
Subset masks (graph module) use vertex 1 as the *least* significant bit;
:func:`mask_to_basis` converts between the two.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import kernels

STATE_LIMIT = 24
RNG_ID = "numpy.PCG64+inverse-cdf"

Predicate = Union[Callable[[int], bool], np.ndarray]


@dataclass
class AmplitudeVector:
    n: int
    amps: np.ndarray

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def norm(self) -> float:
        return float(np.sqrt(self.probabilities().sum()))

    def copy(self) -> "AmplitudeVector":
        return AmplitudeVector(self.n, self.amps.copy())


@dataclass(frozen=True)
class GroverSchedule:
    n: int
    M: int
    iterations: int
    theta: float

    @property
    def N(self) -> int:
        return 1 << self.n


@dataclass(frozen=True)
class Snapshot:
    iteration: int
    probs: np.ndarray
    amps: np.ndarray

    def to_json(self) -> dict:
        return {"iter": self.iteration, "probs": [float(p) for p in self.probs]}


@dataclass
class GroverRun:
    schedule: GroverSchedule
    snapshots: list[Snapshot]
    histogram: dict[int, int]
    success_frequency: float
    final: AmplitudeVector
    seed: int
    shots: int
    rng_id: str = RNG_ID

    def ranked_outcomes(self) -> list[int]:
        """Measured basis states, most frequent first (ties by index)."""
        return sorted(self.histogram, key=lambda b: (-self.histogram[b], b))


def mask_to_basis(mask: int, n: int) -> int:
    out = 0
    for i in range(n):
        if mask >> i & 1:
            out |= 1 << (n - 1 - i)
    return out


basis_to_mask = mask_to_basis  # bit reversal is its own inverse


def mask_table_to_basis(table: np.ndarray, n: int) -> np.ndarray:
    """Reindex a table over subset masks into basis-index order."""
    idx = np.arange(1 << n, dtype=np.int64)
    rev = np.zeros_like(idx)
    for i in range(n):
        rev |= ((idx >> i) & 1) << (n - 1 - i)
    out = np.empty_like(table)
    out[rev] = table
    return out


def uniform_state(n: int, limit: int = STATE_LIMIT) -> AmplitudeVector:
    if not 0 <= n <= limit:
        raise ValueError(f"n={n} outside supported range [0, {limit}]")
    N = 1 << n
    return AmplitudeVector(n, np.full(N, 1.0 / math.sqrt(N), dtype=np.complex128))


def marked_table(n: int, predicate: Predicate) -> np.ndarray:
    if callable(predicate):
        return np.fromiter((bool(predicate(b)) for b in range(1 << n)), dtype=bool, count=1 << n)
    table = np.asarray(predicate, dtype=bool)
    if table.shape != (1 << n,):
        raise ValueError(f"predicate table must have length {1 << n}")
    return table


def apply_phase_oracle(state: AmplitudeVector, predicate: Predicate) -> AmplitudeVector:
    marked = marked_table(state.n, predicate)
    amps = state.amps.copy()
    amps[marked] *= -1
    return AmplitudeVector(state.n, amps)


def diffusion(state: AmplitudeVector) -> AmplitudeVector:
    """Inversion about the mean: a -> 2*mean - a."""
    amps = 2.0 * state.amps.mean() - state.amps
    return AmplitudeVector(state.n, amps)


def optimal_iterations(n: int, M: int) -> int:
    N = 1 << n
    if not 0 <= M <= N:
        raise ValueError(f"M={M} outside [0, {N}]")
    if M == 0:
        return 0
    return int(math.floor(math.pi / 4 * math.sqrt(N / M)))


def schedule(n: int, M: int) -> GroverSchedule:
    N = 1 << n
    theta = math.asin(math.sqrt(M / N)) if M else 0.0
    return GroverSchedule(n, M, optimal_iterations(n, M), theta)


def success_probability(state: AmplitudeVector, solutions) -> float:
    probs = state.probabilities()
    if isinstance(solutions, np.ndarray) and solutions.dtype == bool:
        return float(probs[solutions].sum())
    idx = np.fromiter(solutions, dtype=np.int64)
    return float(probs[idx].sum()) if idx.size else 0.0


def sample(probs: np.ndarray, shots: int, seed: int) -> np.ndarray:
    """Inverse-CDF draws from a probability vector with a PCG64 stream."""
    rng = np.random.Generator(np.random.PCG64(seed))
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    draws = np.searchsorted(cdf, rng.random(shots), side="right")
    return np.minimum(draws, probs.shape[0] - 1)


def grover_iterations(state: AmplitudeVector, marked: np.ndarray, rounds: int,
                      keep_snapshots: bool = False) -> tuple[AmplitudeVector, list[Snapshot]]:
    amps = np.ascontiguousarray(state.amps, dtype=np.complex128).copy()
    snaps = []
    if keep_snapshots:
        snaps.append(Snapshot(0, np.abs(amps) ** 2, amps.copy()))
    for j in range(1, rounds + 1):
        kernels.grover_step(amps, marked)
        if keep_snapshots:
            snaps.append(Snapshot(j, np.abs(amps) ** 2, amps.copy()))
    return AmplitudeVector(state.n, amps), snaps


def grover_run(n: int, predicate: Predicate, M: int, shots: int, seed: int,
               keep_snapshots: bool = True) -> GroverRun:
    """Uniform start, ``optimal_iterations(n, M)`` rounds, then ``shots`` measurements."""
    if M < 1:
        raise ValueError("grover_run needs at least one marked state; handle M = 0 upstream")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    marked = marked_table(n, predicate)
    sched = schedule(n, M)
    final, snaps = grover_iterations(uniform_state(n), marked, sched.iterations, keep_snapshots)
    draws = sample(final.probabilities(), shots, seed)
    values, counts = np.unique(draws, return_counts=True)
    histogram = {int(v): int(c) for v, c in zip(values, counts)}
    success = float(marked[draws].mean())
    return GroverRun(sched, snaps, histogram, success, final, seed, shots)


def snapshot_record(run: GroverRun, k: int | None = None, T: int | None = None) -> dict:
    return {
        "n": run.schedule.n,
        "k": k,
        "T": T,
        "M": run.schedule.M,
        "iterations": run.schedule.iterations,
        "snapshots": [s.to_json() for s in run.snapshots],
        "histogram": {str(b): c for b, c in sorted(run.histogram.items())},
        "success_frequency": run.success_frequency,
        "seed": run.seed,
        "rng_id": run.rng_id,
    }
