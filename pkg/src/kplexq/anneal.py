"""Simulated annealing over QUBO assignments (single-bit Metropolis, fixed scan order).

When the source graph is supplied, each shot also keeps an incumbent: the
largest vertex set, visited at any point of the shot, that is a k-plex of
the graph. Feasibility is read from the vertex bits alone, so a state whose
slack bits are still off the optimum can supply the answer.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import kernels
from .graph import Graph, VertexSet, complement
from .qubo import Decoded, QuboModel, decode

DEFAULT_SWEEPS = 2
DEFAULT_T_COLD = 0.01


@dataclass(frozen=True)
class AnnealConfig:
    shots: int = 200
    sweeps: int = DEFAULT_SWEEPS
    t_hot: Optional[float] = None  # None: largest coefficient magnitude
    t_cold: float = DEFAULT_T_COLD
    seed: int = 0

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if not self.t_cold > 0:
            raise ValueError("t_cold must be > 0")
        if self.t_hot is not None and self.t_hot < self.t_cold:
            raise ValueError("t_hot must be >= t_cold")


@dataclass
class AnnealReport:
    config: AnnealConfig
    temperatures: np.ndarray
    shot_costs: np.ndarray
    shot_states: np.ndarray
    best_index: int
    trajectory: list[tuple[int, float]]
    decoded: Optional[Decoded] = None
    shot_decoded: Optional[list[Decoded]] = None
    incumbents: Optional[list[VertexSet]] = None

    @property
    def best_cost(self) -> float:
        return float(self.shot_costs[self.best_index])

    @property
    def best_assignment(self) -> np.ndarray:
        return self.shot_states[self.best_index]

    def best_feasible(self) -> Optional[VertexSet]:
        """Largest k-plex among the per-shot incumbents and decoded best assignments."""
        if self.shot_decoded is None:
            return None
        pool = [d.subset for d in self.shot_decoded if d.feasible] + list(self.incumbents or [])
        return max(pool, key=lambda s: (s.size, -s.mask), default=None)

    def best_cost_feasible(self) -> Optional[Decoded]:
        """Largest feasible subset among the per-shot lowest-cost assignments only."""
        feas = [d for d in self.shot_decoded or [] if d.feasible]
        return max(feas, key=lambda d: d.size) if feas else None

    def trajectory_rows(self) -> list[dict]:
        """Best-so-far per cumulative budget (shots x sweeps)."""
        rows = []
        best_size, best_feasible = 0, False
        running = np.inf
        for s in range(len(self.shot_costs)):
            if self.shot_decoded is not None:
                d = self.shot_decoded[s]
                size = max(d.size if d.feasible else 0, self.incumbents[s].size)
                if size >= best_size:
                    best_size, best_feasible = size, True
            running = min(running, float(self.shot_costs[s]))
            rows.append({
                "budget": (s + 1) * self.config.sweeps,
                "best_cost": running,
                "best_size": best_size,
                "feasible": best_feasible,
            })
        return rows

    def trajectory_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, ["budget", "best_cost", "best_size", "feasible"], lineterminator="\n")
        w.writeheader()
        for row in self.trajectory_rows():
            w.writerow({**row, "best_cost": repr(row["best_cost"]),
                        "feasible": int(row["feasible"])})
        return buf.getvalue()

    def sidecar_json(self) -> str:
        cfg = asdict(self.config)
        cfg["t_hot"] = float(self.temperatures[0])
        return json.dumps({"config": cfg, "backend": kernels.BACKEND,
                           "best_cost": self.best_cost}, indent=2, sort_keys=True) + "\n"


def default_t_hot(model: QuboModel) -> float:
    mags = [abs(c) for c in model.linear.values()] + [abs(c) for c in model.quadratic.values()]
    return max(mags, default=1.0) or 1.0


def temperature_schedule(cfg: AnnealConfig, model: QuboModel) -> np.ndarray:
    hot = cfg.t_hot if cfg.t_hot is not None else max(default_t_hot(model), cfg.t_cold)
    return np.geomspace(hot, cfg.t_cold, cfg.sweeps)


def _shot_draws(seed: int, shot: int, sweeps: int, n_vars: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng([seed, shot])
    init = rng.integers(0, 2, n_vars, dtype=np.uint8)
    return init, rng.random((sweeps, n_vars))


def anneal(model: QuboModel, cfg: AnnealConfig, graph: Optional[Graph] = None,
           k: Optional[int] = None) -> AnnealReport:
    """Run ``cfg.shots`` independent anneals; decode each shot's best when a graph is given."""
    V = model.num_vars
    temps = temperature_schedule(cfg, model)
    init = np.empty((cfg.shots, V), dtype=np.uint8)
    uniforms = np.empty((cfg.shots, cfg.sweeps, V))
    for s in range(cfg.shots):
        init[s], uniforms[s] = _shot_draws(cfg.seed, s, cfg.sweeps, V)
    h, J = model.matrices()
    kk = k if k is not None else model.k
    if graph is not None:
        if kk is None:
            raise ValueError("k is needed to decode against the graph")
        if graph.n > 62 or graph.n > V:
            raise ValueError("graph does not fit the model's vertex variables")
        crow = np.array(complement(graph).rows, dtype=np.int64)
    else:
        crow = np.zeros(0, dtype=np.int64)
    costs, states, inc_sizes, inc_masks = kernels.anneal_shots(
        h, J, float(model.offset), init, uniforms, temps, crow, int(kk or 1) - 1)
    best_index = int(np.argmin(costs))
    trajectory = [(s + 1, float(c)) for s, c in enumerate(np.minimum.accumulate(costs))]
    report = AnnealReport(cfg, temps, costs, states, best_index, trajectory)
    if graph is not None:
        report.shot_decoded = [decode(model, st, graph, kk) for st in states]
        report.decoded = report.shot_decoded[best_index]
        report.incumbents = [VertexSet(graph.n, int(m)) for m in inc_masks]
    return report
