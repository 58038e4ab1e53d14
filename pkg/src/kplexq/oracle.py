"""The subset-checking oracle: is a vertex subset a k-cplex of size at least T.

``build_oracle`` takes the *complement* graph. Stages, in gate order:

* constants ``k - 1`` and ``T`` loaded by NOT gates (tagged compare / size),
* ``encode``: one Toffoli per complement edge, edge wire = both endpoints chosen,
* ``count``: per vertex, a popcount of its incident edge wires, controlled on
  the vertex wire,
* ``compare``: ``d_i = c_i <= k - 1`` and ``cplex = AND(d_1..d_n)``,
* ``size``: popcount of the vertex register, ``size >= T`` flag.

The marking gate ``O ^= cplex & size_ok`` sits between ``u_check`` and its
inverse in :attr:`OracleCircuit.phase_circuit`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .circuit import (
    CircuitBuilder,
    Gate,
    ReversibleCircuit,
    build_leq_comparator,
    build_load_constant,
    build_popcount,
)
from .graph import Graph, VertexSet

STAGES = ("encode", "count", "compare", "size")
_CHUNK = 1 << 12


@dataclass(frozen=True)
class OracleLayout:
    vertex: tuple[int, ...]
    edge: tuple[int, ...]
    edge_pairs: tuple[tuple[int, int], ...]
    counters: tuple[tuple[int, ...], ...]
    d: tuple[int, ...]
    cplex: int
    size: tuple[int, ...]
    k_minus_1: tuple[int, ...]
    threshold: tuple[int, ...]
    size_ok: int
    out: int


@dataclass(frozen=True)
class OracleCircuit:
    graph: Graph
    k: int
    T: int
    layout: OracleLayout
    u_check: ReversibleCircuit
    mark: Gate
    phase_circuit: ReversibleCircuit = field(repr=False)

    @property
    def n(self) -> int:
        return self.graph.n

    def initial_states(self, masks: np.ndarray) -> np.ndarray:
        """Basis states with the vertex register set from subset masks, all else zero."""
        masks = np.asarray(masks, dtype=np.int64)
        states = np.zeros((masks.shape[0], self.u_check.num_wires), dtype=np.uint8)
        for i, w in enumerate(self.layout.vertex):
            states[:, w] = (masks >> i) & 1
        return states

    def evaluate_masks(self, masks: np.ndarray) -> np.ndarray:
        """O-wire value after ``u_check`` + mark for each subset mask."""
        masks = np.asarray(masks, dtype=np.int64)
        out = np.empty(masks.shape[0], dtype=bool)
        mark_only = ReversibleCircuit(self.u_check.num_wires, (self.mark,))
        for start in range(0, masks.shape[0], _CHUNK):
            states = self.initial_states(masks[start : start + _CHUNK])
            states = self.u_check.run_batch(states, inplace=True)
            states = mark_only.run_batch(states, inplace=True)
            out[start : start + states.shape[0]] = states[:, self.layout.out] == 1
        return out

    def evaluate_all(self) -> np.ndarray:
        """Predicate table indexed by subset mask (bit i = vertex i+1)."""
        return self.evaluate_masks(np.arange(1 << self.n, dtype=np.int64))

    def roundtrip_masks(self, masks: np.ndarray) -> np.ndarray:
        masks = np.asarray(masks, dtype=np.int64)
        ok = np.empty(masks.shape[0], dtype=bool)
        manifest = np.array(sorted(self.u_check.ancillas), dtype=np.int64)
        vertex = np.array(self.layout.vertex, dtype=np.int64)
        for start in range(0, masks.shape[0], _CHUNK):
            init = self.initial_states(masks[start : start + _CHUNK])
            final = self.phase_circuit.run_batch(init)
            clean = ~final[:, manifest].any(axis=1) if manifest.size else np.ones(len(final), bool)
            same = (final[:, vertex] == init[:, vertex]).all(axis=1)
            ok[start : start + final.shape[0]] = clean & same
        return ok

    def stats(self) -> dict:
        return oracle_stats(self)


def _width(value: int) -> int:
    return int(value).bit_length()


def build_oracle(gc: Graph, k: int, T: int) -> OracleCircuit:
    """Oracle over the complement graph ``gc`` for "k-cplex with at least T vertices"."""
    n = gc.n
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not 1 <= T <= n:
        raise ValueError(f"T must lie in [1, {n}], got {T}")

    b = CircuitBuilder()
    vertex = b.alloc("vertex", n, ancilla=False)
    k_reg = b.alloc("k-1", _width(k - 1))
    t_reg = b.alloc("T", _width(T))
    edge = b.alloc("edge", gc.m)
    counters = [b.alloc(f"c{i + 1}", _width(gc.rows[i].bit_count())) for i in range(n)]
    d = b.alloc("d", n)
    cplex = b.alloc("cplex", 1)[0]
    size = b.alloc("size", _width(n))
    size_ok = b.alloc("size>=T", 1)[0]
    out = b.alloc("O", 1, ancilla=False)[0]

    with b.stage("compare"):
        build_load_constant(b, k - 1, k_reg)
    with b.stage("size"):
        build_load_constant(b, T, t_reg)

    incident: list[list[int]] = [[] for _ in range(n)]
    with b.stage("encode"):
        for e, (u, v) in zip(edge, gc.edges):
            b.ccx(vertex[u - 1], vertex[v - 1], e)
            incident[u - 1].append(e)
            incident[v - 1].append(e)

    with b.stage("count"):
        for i in range(n):
            with b.controlled(vertex[i]):
                build_popcount(b, incident[i], counters[i], scratch="count-anc")

    with b.stage("compare"):
        for i in range(n):
            a, y = _pad(b, counters[i], k_reg)
            build_leq_comparator(b, a, y, d[i], scratch="cmp-anc")
        b.mcx(d, cplex)

    with b.stage("size"):
        build_popcount(b, vertex, size, scratch="size-anc")
        a, y = _pad(b, t_reg, size)
        build_leq_comparator(b, a, y, size_ok, scratch="cmp-anc")

    u_check = b.build()
    mark = Gate(out, ((cplex, True), (size_ok, True)))
    mark_circ = ReversibleCircuit(u_check.num_wires, (mark,), u_check.registers,
                                  u_check.ancillas, ("size",))
    phase = u_check.then(mark_circ).then(u_check.inverse())

    layout = OracleLayout(
        vertex=tuple(vertex),
        edge=tuple(edge),
        edge_pairs=gc.edges,
        counters=tuple(tuple(c) for c in counters),
        d=tuple(d),
        cplex=cplex,
        size=tuple(size),
        k_minus_1=tuple(k_reg),
        threshold=tuple(t_reg),
        size_ok=size_ok,
        out=out,
    )
    return OracleCircuit(gc, k, T, layout, u_check, mark, phase)


def _pad(b: CircuitBuilder, a: list[int], y: list[int]) -> tuple[list[int], list[int]]:
    """Left-pad the narrower operand with fresh zero wires."""
    width = max(len(a), len(y))
    if len(a) < width:
        a = b.alloc("pad", width - len(a)) + list(a)
    if len(y) < width:
        y = b.alloc("pad", width - len(y)) + list(y)
    return a, y


def evaluate(oracle: OracleCircuit, subset: VertexSet) -> bool:
    if subset.n != oracle.n:
        raise ValueError(f"subset width {subset.n} != oracle width {oracle.n}")
    return bool(oracle.evaluate_masks(np.array([subset.mask]))[0])


def roundtrip_clean(oracle: OracleCircuit, subset: VertexSet) -> bool:
    """``u_check``, mark, ``u_check^-1``: vertex bits intact and every ancilla back at 0."""
    if subset.n != oracle.n:
        raise ValueError(f"subset width {subset.n} != oracle width {oracle.n}")
    return bool(oracle.roundtrip_masks(np.array([subset.mask]))[0])


def oracle_stats(oracle: OracleCircuit) -> dict:
    counts = oracle.u_check.stage_counts()
    counts["size"] = counts.get("size", 0) + 1  # the marking gate
    stages = {s: counts.get(s, 0) for s in STAGES}
    n = oracle.n
    return {
        "n": n,
        "m": n * (n - 1) // 2 - oracle.graph.m,
        "m_complement": oracle.graph.m,
        "k": oracle.k,
        "T": oracle.T,
        "wires": oracle.u_check.num_wires,
        "gates": len(oracle.u_check) + 1,
        "gates_with_uncompute": len(oracle.phase_circuit),
        "ancillas": len(oracle.u_check.ancillas),
        "stages": stages,
    }


def stats_json(oracle: OracleCircuit) -> str:
    return json.dumps(oracle_stats(oracle), indent=2, sort_keys=True) + "\n"


def predicate_states(oracle: OracleCircuit, masks: np.ndarray) -> np.ndarray:
    """Full wire states after ``u_check`` (debugging / register inspection)."""
    states = oracle.initial_states(masks)
    return oracle.u_check.run_batch(states, inplace=True)


__all__ = [
    "OracleCircuit",
    "OracleLayout",
    "build_oracle",
    "evaluate",
    "roundtrip_clean",
    "oracle_stats",
    "stats_json",
    "predicate_states",
]
