"""QUBO model of the maximum k-plex problem and its MILP linearisation.

On the complement graph, vertex ``i`` carries the equality constraint

    sum_{j in N(i)} x_j + s_i - (k - 1) - M_i (1 - x_i) = 0,   M_i = d_i - k + 1,

with ``s_i`` expanded into ``L_i`` binary slack bits of weight ``2**r``. The
objective is ``-sum x_i + R * sum_i (constraint residual_i)**2``.

Variable order: ``x_1..x_n`` first, then the slack bits vertex by vertex with
``r`` ascending.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .graph import Graph, VertexSet, complement, is_kplex

DEFAULT_R = 2.0


def big_m(d_comp: int, k: int) -> int:
    return d_comp - k + 1


def slack_bits(d_comp: int, k: int) -> int:
    """Bits needed for every slack value in ``[0, max(d_comp, k - 1)]``."""
    return max(d_comp, k - 1).bit_length()


def slack_bits_ceil_log(d_comp: int, k: int) -> int:
    """``ceil(log2(max(d_comp, k - 1)))``; 0 when the max is 0 or 1. Reported, not used."""
    top = max(d_comp, k - 1)
    return math.ceil(math.log2(top)) if top > 1 else 0


@dataclass(frozen=True)
class VarLayout:
    n: int
    slack: tuple[int, ...]

    @property
    def total(self) -> int:
        return self.n + sum(self.slack)

    def x(self, i: int) -> int:
        """Index of the vertex variable for vertex ``i`` (1-based)."""
        return i - 1

    def s(self, i: int, r: int) -> int:
        if not 0 <= r < self.slack[i - 1]:
            raise IndexError(f"vertex {i} has {self.slack[i - 1]} slack bits")
        return self.n + sum(self.slack[: i - 1]) + r

    def name(self, var: int) -> str:
        if var < self.n:
            return f"x{var + 1}"
        rest = var - self.n
        for i, width in enumerate(self.slack, 1):
            if rest < width:
                return f"s{i}_{rest}"
            rest -= width
        raise IndexError(var)


@dataclass(frozen=True)
class QuboModel:
    num_vars: int
    linear: dict[int, float]
    quadratic: dict[tuple[int, int], float]
    offset: float = 0.0
    layout: Optional[VarLayout] = None
    k: Optional[int] = None
    R: Optional[float] = None
    big_m: tuple[int, ...] = ()
    comp_neighbors: tuple[tuple[int, ...], ...] = field(default=(), repr=False)
    fingerprint: str = ""

    def __post_init__(self):
        for u, v in self.quadratic:
            if not 0 <= u < v < self.num_vars:
                raise ValueError(f"quadratic key ({u}, {v}) must satisfy 0 <= u < v < {self.num_vars}")
        for u in self.linear:
            if not 0 <= u < self.num_vars:
                raise ValueError(f"linear key {u} out of range")

    def matrices(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense ``(linear, coupling)`` with ``coupling`` symmetric and zero-diagonal."""
        h = np.zeros(self.num_vars)
        for u, c in self.linear.items():
            h[u] = c
        J = np.zeros((self.num_vars, self.num_vars))
        for (u, v), c in self.quadratic.items():
            J[u, v] = J[v, u] = c
        return h, J

    def incident(self) -> list[list[tuple[int, float]]]:
        out: list[list[tuple[int, float]]] = [[] for _ in range(self.num_vars)]
        for (u, v), c in self.quadratic.items():
            out[u].append((v, c))
            out[v].append((u, c))
        return out


def build_qubo(g: Graph, k: int, R: float = DEFAULT_R) -> QuboModel:
    """QUBO over the original graph ``g`` (complemented internally)."""
    if not R > 1:
        raise ValueError(f"penalty weight R must satisfy R > 1 (got {R}); "
                         "smaller values let infeasible subsets undercut the optimum")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    gc = complement(g)
    n = g.n
    degs = [gc.rows[i].bit_count() for i in range(n)]
    layout = VarLayout(n, tuple(slack_bits(d, k) for d in degs))
    ms = tuple(big_m(d, k) for d in degs)
    nbrs = tuple(tuple(gc.neighbors(i)) for i in range(1, n + 1))

    linear: dict[int, float] = {}
    quad: dict[tuple[int, int], float] = {}
    offset = 0.0

    def add_lin(u, c):
        linear[u] = linear.get(u, 0.0) + c

    for i in range(1, n + 1):
        add_lin(layout.x(i), -1.0)

    for i in range(1, n + 1):
        # residual = sum_j a_j z_j + const
        terms = [(layout.x(j), 1.0) for j in nbrs[i - 1]]
        terms += [(layout.s(i, r), float(2 ** r)) for r in range(layout.slack[i - 1])]
        if ms[i - 1]:
            terms.append((layout.x(i), float(ms[i - 1])))
        const = -float((k - 1) + ms[i - 1])
        offset += R * const * const
        for a, (u, cu) in enumerate(terms):
            add_lin(u, R * (cu * cu + 2.0 * const * cu))
            for v, cv in terms[a + 1:]:
                key = (u, v) if u < v else (v, u)
                quad[key] = quad.get(key, 0.0) + 2.0 * R * cu * cv

    linear = {u: c for u, c in sorted(linear.items()) if c != 0.0}
    quad = {key: c for key, c in sorted(quad.items()) if c != 0.0}
    return QuboModel(layout.total, linear, quad, offset, layout, k, float(R), ms, nbrs,
                     gc.fingerprint())


def _bits(model: QuboModel, a) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    if a.shape != (model.num_vars,):
        raise ValueError(f"assignment width {a.shape} != {model.num_vars}")
    return a


def cost(model: QuboModel, a) -> float:
    """Offset + linear + quadratic terms from the expanded coefficient maps."""
    a = _bits(model, a)
    total = model.offset
    for u, c in model.linear.items():
        if a[u]:
            total += c
    for (u, v), c in model.quadratic.items():
        if a[u] and a[v]:
            total += c
    return float(total)


def costs_batch(model: QuboModel, A: np.ndarray) -> np.ndarray:
    h, J = model.matrices()
    A = np.asarray(A, dtype=np.float64)
    return model.offset + A @ h + 0.5 * np.einsum("si,ij,sj->s", A, J, A)


def direct_objective(model: QuboModel, a) -> float:
    """The unexpanded penalty objective; needs a model built from a graph."""
    if model.layout is None:
        raise ValueError("direct evaluation needs a graph-built model")
    a = _bits(model, a)
    lay, k = model.layout, model.k
    x = a[: lay.n]
    total = -float(x.sum())
    for i in range(1, lay.n + 1):
        s_i = sum(int(a[lay.s(i, r)]) << r for r in range(lay.slack[i - 1]))
        inner = sum(int(x[j - 1]) for j in model.comp_neighbors[i - 1])
        resid = inner + s_i - (k - 1) - model.big_m[i - 1] * (1 - int(x[i - 1]))
        total += model.R * resid * resid
    return total


def cost_delta(model: QuboModel, a, var: int, incident=None) -> float:
    """``cost(a with var flipped) - cost(a)`` from the variable's own terms."""
    a = _bits(model, a)
    if not 0 <= var < model.num_vars:
        raise IndexError(var)
    incident = incident if incident is not None else model.incident()
    local = model.linear.get(var, 0.0) + sum(c for u, c in incident[var] if a[u])
    return float(local if a[var] == 0 else -local)


def optimal_slack(gc: Graph, k: int, subset: VertexSet) -> Optional[list[int]]:
    """Slack values zeroing every residual for ``subset``, or None if some would be negative."""
    out = []
    for i in range(1, gc.n + 1):
        d = gc.rows[i - 1].bit_count()
        x_i = 1 if i in subset else 0
        inside = (gc.rows[i - 1] & subset.mask).bit_count()
        s = (k - 1) + big_m(d, k) * (1 - x_i) - inside
        if s < 0:
            return None
        out.append(s)
    return out


def assignment_for(model: QuboModel, subset: VertexSet, slacks: Sequence[int]) -> np.ndarray:
    lay = model.layout
    a = np.zeros(model.num_vars, dtype=np.int64)
    for v in subset.vertices():
        a[lay.x(v)] = 1
    for i, s in enumerate(slacks, 1):
        if s >> lay.slack[i - 1]:
            raise ValueError(f"slack {s} for vertex {i} needs more than {lay.slack[i - 1]} bits")
        for r in range(lay.slack[i - 1]):
            a[lay.s(i, r)] = s >> r & 1
    return a


@dataclass(frozen=True)
class Decoded:
    subset: VertexSet
    size: int
    feasible: bool
    penalty: float


def decode(model: QuboModel, a, g: Graph, k: int) -> Decoded:
    """Read the vertex bits; feasibility is checked on the graph, not via the penalty."""
    a = _bits(model, a)
    n = g.n
    mask = 0
    for i in range(n):
        if a[i]:
            mask |= 1 << i
    subset = VertexSet(n, mask)
    c = cost(model, a)
    penalty = (c + subset.size) / model.R if model.R else float("nan")
    return Decoded(subset, subset.size, is_kplex(g, subset, k), penalty)


# ---------------------------------------------------------------- file formats


def _num(c: float) -> str:
    c = float(c)
    return str(int(c)) if c.is_integer() else repr(c)


def export_qubo(model: QuboModel) -> str:
    lines = [f"# vars {model.num_vars}"]
    if model.layout is not None:
        lines.append(f"# layout n={model.layout.n} slack={','.join(map(str, model.layout.slack))}")
        lines.append(f"# params k={model.k} R={_num(model.R)} M={','.join(map(str, model.big_m))}")
        lines.append(f"# complement {model.fingerprint}")
    lines.append(f"# offset {_num(model.offset)}")
    for u, c in sorted(model.linear.items()):
        lines.append(f"{u} {u} {_num(c)}")
    for (u, v), c in sorted(model.quadratic.items()):
        lines.append(f"{u} {v} {_num(c)}")
    return "\n".join(lines) + "\n"


def parse_qubo(text: str) -> QuboModel:
    num_vars = None
    offset = 0.0
    meta: dict[str, str] = {}
    linear: dict[int, float] = {}
    quad: dict[tuple[int, int], float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if not s:
            continue
        if s.startswith("#"):
            tok = s[1:].split(None, 1)
            if not tok:
                continue
            key, rest = tok[0], (tok[1] if len(tok) > 1 else "")
            if key == "vars":
                num_vars = int(rest)
            elif key == "offset":
                offset = float(rest)
            else:
                meta[key] = rest
            continue
        parts = s.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'i j c'")
        u, v, c = int(parts[0]), int(parts[1]), float(parts[2])
        if u > v:
            raise ValueError(f"line {lineno}: entries must have i <= j")
        if u == v:
            linear[u] = linear.get(u, 0.0) + c
        else:
            quad[(u, v)] = quad.get((u, v), 0.0) + c
    if num_vars is None:
        used = [u for u in linear] + [v for _, v in quad]
        num_vars = max(used) + 1 if used else 0

    layout = k = R = None
    ms: tuple[int, ...] = ()
    if "layout" in meta:
        m = re.fullmatch(r"n=(\d+) slack=([\d,]*)", meta["layout"])
        if m:
            slack = tuple(int(t) for t in m.group(2).split(",") if t)
            layout = VarLayout(int(m.group(1)), slack)
    if "params" in meta:
        m = re.fullmatch(r"k=(\d+) R=(\S+) M=(\S*)", meta["params"])
        if m:
            k, R = int(m.group(1)), float(m.group(2))
            ms = tuple(int(t) for t in m.group(3).split(",") if t)
    return QuboModel(num_vars, linear, quad, offset, layout, k, R, ms, (),
                     meta.get("complement", ""))


def export_lp(model: QuboModel) -> str:
    """MILP in LP text form; one continuous ``y`` per quadratic term."""
    name = model.layout.name if model.layout is not None else (lambda v: f"b{v}")
    ys = {key: f"y_{name(key[0])}_{name(key[1])}" for key in sorted(model.quadratic)}
    terms = [(c, name(u)) for u, c in sorted(model.linear.items())]
    terms += [(c, ys[key]) for key, c in sorted(model.quadratic.items())]

    def fmt_expr(items):
        out = []
        for c, var in items:
            sign = "-" if c < 0 else "+"
            out.append(f"{sign} {_num(abs(c))} {var}")
        return " ".join(out) if out else "0"

    lines = [f"\\ QUBO linearisation: {model.num_vars} binaries, {len(ys)} products",
             "Minimize"]
    obj = fmt_expr(terms)
    off = model.offset
    if off:
        obj += f" {'-' if off < 0 else '+'} {_num(abs(off))}"
    lines.append(f" obj: {obj}")
    lines.append("Subject To")
    for (u, v), y in ys.items():
        xu, xv = name(u), name(v)
        lines.append(f" {y}_a: {y} - {xu} <= 0")
        lines.append(f" {y}_b: {y} - {xv} <= 0")
        lines.append(f" {y}_c: {y} - {xu} - {xv} >= -1")
        lines.append(f" {y}_d: {y} >= 0")
    lines.append("Bounds")
    for y in ys.values():
        lines.append(f" 0 <= {y} <= 1")
    lines.append("Binaries")
    for v in range(model.num_vars):
        lines.append(f" {name(v)}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def variable_count_row(g: Graph, k: int) -> dict:
    gc = complement(g)
    degs = [gc.rows[i].bit_count() for i in range(g.n)]
    return {
        "n": g.n,
        "m": g.m,
        "k": k,
        "qubo_vars": g.n + sum(slack_bits(d, k) for d in degs),
        "qubo_vars_ceil_log2": g.n + sum(slack_bits_ceil_log(d, k) for d in degs),
    }
