"""Simple undirected graphs, k-plex / k-cplex predicates and the exhaustive solver."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from . import kernels

EXHAUSTIVE_LIMIT = 20


class GraphParseError(ValueError):
    """Raised for malformed graph files; ``lineno`` is 1-based (0 for whole-file problems)."""

    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        where = f"line {lineno}: " if lineno else ""
        super().__init__(where + message)


class LimitExceeded(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Immutable simple graph on vertices 1..n.

    ``edges`` is the canonical, lexicographically sorted tuple of pairs
    ``(u, v)`` with ``u < v``; ``rows[i]`` is the neighbour bitmask of vertex
    ``i + 1``.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    rows: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vertex count must be non-negative")
        rows = [0] * self.n
        prev = None
        for u, v in self.edges:
            if not (1 <= u < v <= self.n):
                raise ValueError(f"edge ({u}, {v}) is not a canonical pair within 1..{self.n}")
            if prev is not None and (u, v) <= prev:
                raise ValueError("edges must be strictly increasing")
            prev = (u, v)
            rows[u - 1] |= 1 << (v - 1)
            rows[v - 1] |= 1 << (u - 1)
        object.__setattr__(self, "rows", tuple(rows))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build from any iterable of pairs; orientation and duplicates are normalised."""
        canon = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"edge ({u}, {v}) outside 1..{n}")
            canon.add((min(u, v), max(u, v)))
        return cls(n, tuple(sorted(canon)))

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u - 1] >> (v - 1) & 1)

    def neighbors(self, v: int) -> list[int]:
        row = self.rows[v - 1]
        return [u + 1 for u in range(self.n) if row >> u & 1]

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=np.uint8)
        for u, v in self.edges:
            adj[u - 1, v - 1] = adj[v - 1, u - 1] = 1
        return adj

    def row_array(self) -> np.ndarray:
        if self.n > 62:
            raise LimitExceeded("bitmask kernels support at most 62 vertices")
        return np.array(self.rows, dtype=np.int64)

    def fingerprint(self) -> str:
        import hashlib

        text = f"{self.n}:" + ";".join(f"{u}-{v}" for u, v in self.edges)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def to_edge_list(self) -> str:
        lines = [f"{self.n} {self.m}"] + [f"{u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class VertexSet:
    """Subset of a graph's vertices; bit ``i - 1`` of ``mask`` marks vertex ``i``."""

    n: int
    mask: int = 0

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.n:
            raise ValueError(f"mask {self.mask:#x} does not fit width {self.n}")

    @classmethod
    def of(cls, n: int, vertices: Iterable[int]) -> "VertexSet":
        mask = 0
        for v in vertices:
            if not 1 <= v <= n:
                raise ValueError(f"vertex {v} outside 1..{n}")
            mask |= 1 << (v - 1)
        return cls(n, mask)

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    def vertices(self) -> list[int]:
        return [i + 1 for i in range(self.n) if self.mask >> i & 1]

    def __iter__(self) -> Iterator[int]:
        return iter(self.vertices())

    def __len__(self) -> int:
        return self.size

    def __contains__(self, v: int) -> bool:
        return 1 <= v <= self.n and bool(self.mask >> (v - 1) & 1)

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.vertices())) + "}"


@dataclass(frozen=True)
class MkpResult:
    n: int
    k: int
    optimum_size: int
    witnesses: tuple[VertexSet, ...]
    solution_count_at: dict[int, int]

    def count_at(self, threshold: int) -> int:
        if threshold > self.n:
            return 0
        return self.solution_count_at[max(threshold, 1)]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "optimum_size": self.optimum_size,
            "witnesses": [w.vertices() for w in self.witnesses],
            "solution_count_at": {str(t): c for t, c in sorted(self.solution_count_at.items())},
        }


# ---------------------------------------------------------------- parsing


def parse_graph(text: str) -> Graph:
    """Parse edge-list (``n m`` header) or DIMACS-col (``p edge n m``) text."""
    lines = [(i + 1, raw.strip()) for i, raw in enumerate(text.splitlines())]
    body = [(i, s) for i, s in lines if s and not s.startswith("#")]
    if not body:
        raise GraphParseError(0, "empty graph file")
    first = body[0][1].split()
    if first[0] in ("c", "p", "e"):
        return _parse_dimacs(body)

    lineno, _ = body[0]
    n, m = _ints(lineno, first, 2)
    if n < 0 or m < 0:
        raise GraphParseError(lineno, "negative count in header")
    edges = []
    for lineno, s in body[1:]:
        u, v = _ints(lineno, s.split(), 2)
        edges.append(_check_edge(lineno, n, u, v))
    if len(edges) != m:
        raise GraphParseError(0, f"header declares {m} edge lines, found {len(edges)}")
    return Graph(n, tuple(sorted(set(edges))))


def _parse_dimacs(body) -> Graph:
    n = None
    declared = 0
    edges = []
    for lineno, s in body:
        tok = s.split()
        if tok[0] == "c":
            continue
        if tok[0] == "p":
            if n is not None:
                raise GraphParseError(lineno, "duplicate problem line")
            if len(tok) != 4 or tok[1] not in ("edge", "col"):
                raise GraphParseError(lineno, "expected 'p edge <n> <m>'")
            n, declared = _ints(lineno, tok[2:], 2)
        elif tok[0] == "e":
            if n is None:
                raise GraphParseError(lineno, "edge before problem line")
            u, v = _ints(lineno, tok[1:], 2)
            edges.append(_check_edge(lineno, n, u, v))
        else:
            raise GraphParseError(lineno, f"unknown DIMACS line type {tok[0]!r}")
    if n is None:
        raise GraphParseError(0, "missing 'p edge' line")
    if declared != len(edges):
        raise GraphParseError(0, f"problem line declares {declared} edges, found {len(edges)}")
    return Graph(n, tuple(sorted(set(edges))))


def _ints(lineno: int, tokens: list[str], count: int) -> list[int]:
    if len(tokens) != count:
        raise GraphParseError(lineno, f"expected {count} integers, got {len(tokens)} fields")
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise GraphParseError(lineno, f"non-integer field in {' '.join(tokens)!r}") from None


def _check_edge(lineno: int, n: int, u: int, v: int) -> tuple[int, int]:
    if u == v:
        raise GraphParseError(lineno, f"self-loop on vertex {u}")
    for x in (u, v):
        if not 1 <= x <= n:
            raise GraphParseError(lineno, f"vertex {x} outside 1..{n}")
    return (min(u, v), max(u, v))


# ---------------------------------------------------------------- structure


def complement(g: Graph) -> Graph:
    edges = tuple(
        (u, v) for u in range(1, g.n + 1) for v in range(u + 1, g.n + 1) if not g.has_edge(u, v)
    )
    return Graph(g.n, edges)


def degree(g: Graph, v: int) -> int:
    if not 1 <= v <= g.n:
        raise ValueError(f"vertex {v} outside 1..{g.n}")
    return g.rows[v - 1].bit_count()


def _check(g: Graph, s: VertexSet, k: int):
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if s.n != g.n:
        raise ValueError(f"vertex set width {s.n} != graph order {g.n}")


def is_kplex(g: Graph, s: VertexSet, k: int) -> bool:
    """Every member has at least ``|s| - k`` neighbours inside ``s``."""
    _check(g, s, k)
    need = s.size - k
    return all((g.rows[v - 1] & s.mask).bit_count() >= need for v in s.vertices())


def is_kcplex(g: Graph, s: VertexSet, k: int) -> bool:
    """Every member has at most ``k - 1`` neighbours inside ``s``."""
    _check(g, s, k)
    return all((g.rows[v - 1] & s.mask).bit_count() <= k - 1 for v in s.vertices())


def kplex_table(g: Graph, k: int) -> np.ndarray:
    """Boolean table over all ``2**n`` masks: is the subset a k-plex of ``g``."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return kernels.plex_table(g.row_array(), k)


def brute_force_mkp(g: Graph, k: int, limit: int = EXHAUSTIVE_LIMIT) -> MkpResult:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if g.n > limit:
        raise LimitExceeded(f"exhaustive search refused: n={g.n} exceeds limit {limit}")
    ok = kplex_table(g, k)
    sizes = np.bitwise_count(np.arange(1 << g.n, dtype=np.int64))
    by_size = np.bincount(sizes[ok], minlength=g.n + 1)
    at_least = np.cumsum(by_size[::-1])[::-1]
    counts = {t: int(at_least[t]) for t in range(1, g.n + 1)}
    feasible_sizes = np.nonzero(by_size)[0]
    opt = int(feasible_sizes.max()) if g.n else 0
    masks = np.nonzero(ok & (sizes == opt))[0] if opt else []
    witnesses = tuple(VertexSet(g.n, int(m)) for m in masks)
    return MkpResult(g.n, k, opt, witnesses, counts)


def random_gnm(n: int, m: int, seed: int) -> Graph:
    """Uniform G(n, m) sample; same seed, same graph."""
    pairs = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)]
    if not 0 <= m <= len(pairs):
        raise ValueError(f"m={m} outside [0, {len(pairs)}] for n={n}")
    rng = np.random.default_rng(seed)
    picked = rng.choice(len(pairs), size=m, replace=False) if m else []
    return Graph(n, tuple(sorted(pairs[i] for i in picked)))
