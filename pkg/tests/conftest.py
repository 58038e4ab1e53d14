"""Shared fixtures and independent reference implementations.

The reference helpers below work on plain Python sets so they share no code
with the package's bit-mask kernels.
"""
from __future__ import annotations

import functools
import itertools
import re

import numpy as np
import pytest

from kplexq.graph import Graph, parse_graph

G6_TEXT = "6 7\n1 2\n1 3\n1 4\n1 5\n2 4\n4 5\n5 6\n"
G6_COMPLEMENT_EDGES = {(1, 6), (2, 6), (3, 6), (4, 6), (2, 5), (2, 3), (3, 5), (3, 4)}


@pytest.fixture(scope="session")
def g6() -> Graph:
    return parse_graph(G6_TEXT)


def complete(n: int) -> Graph:
    return Graph.from_edges(n, itertools.combinations(range(1, n + 1), 2))


def ref_adj(g: Graph) -> dict[int, set[int]]:
    adj = {v: set() for v in range(1, g.n + 1)}
    for u, v in g.edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def ref_is_kplex(adj: dict[int, set[int]], members: set[int], k: int) -> bool:
    return all(len(adj[v] & members) >= len(members) - k for v in members)


def ref_optimum(g: Graph, k: int) -> int:
    adj = ref_adj(g)
    verts = list(range(1, g.n + 1))
    for size in range(g.n, 0, -1):
        for combo in itertools.combinations(verts, size):
            if ref_is_kplex(adj, set(combo), k):
                return size
    return 0


def seeded_graphs(count: int, n_lo: int, n_hi: int, seed: int):
    """``count`` G(n, m) graphs with n and m drawn uniformly."""
    from kplexq.graph import random_gnm

    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(n_lo, n_hi + 1))
        m = int(rng.integers(0, n * (n - 1) // 2 + 1))
        yield random_gnm(n, m, int(rng.integers(1 << 32)))


def all_graphs(n: int):
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    for bits in range(1 << len(pairs)):
        yield Graph(n, tuple(p for i, p in enumerate(pairs) if bits >> i & 1))


def small_graph_corpus():
    """Every labelled graph on n <= 5 vertices plus seeded samples for n = 6..8."""
    for n in range(1, 6):
        yield from all_graphs(n)
    for n in (6, 7, 8):
        yield from seeded_graphs(200, n, n, 7000 + n)


# ---- independent LP reader: objective plus linearisation constraints

_TERM = re.compile(r"([+-])\s*(\d+(?:\.\d*)?(?:e[+-]?\d+)?)\s*([A-Za-z_]\w*)?")


def lp_objective(text):
    body = text.split("Minimize", 1)[1].split("Subject To", 1)[0]
    expr = body.split(":", 1)[1].strip()
    if not expr.startswith(("+", "-")):
        expr = "+ " + expr
    terms = [(float(c) * (-1 if s == "-" else 1), v) for s, c, v in _TERM.findall(expr)]
    return terms


def lp_products(text):
    """Map each y variable to its two factors, read from the ``_c`` constraint."""
    out = {}
    for line in text.splitlines():
        mt = re.match(r"\s*(\w+)_c: (\w+) - (\w+) - (\w+) >= -1$", line)
        if mt:
            out[mt.group(2)] = (mt.group(3), mt.group(4))
    return out


@functools.lru_cache(maxsize=8)
def _lp_parsed(text):
    return lp_objective(text), lp_products(text)


def lp_value(text, values: dict[str, int]):
    """LP objective at binaries ``values`` with every y set to the product of its factors."""
    terms, prods = _lp_parsed(text)
    total = 0.0
    for c, v in terms:
        if not v:
            total += c
        elif v in prods:
            a, b = prods[v]
            total += c * values[a] * values[b]
        else:
            total += c * values[v]
    return total
