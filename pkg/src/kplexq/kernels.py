"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names at the bottom of this module resolve to the numba version
unless ``KPLEXQ_DISABLE_NUMBA`` is set. Both flavours are importable under
``BACKENDS`` so tests and benchmarks can compare them directly.

Bit conventions: a subset mask has bit ``v`` set when vertex ``v + 1`` is
included; ``rows[v]`` is the neighbour mask of vertex ``v + 1``.
"""
from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------- numba side


@njit(inline="always")
def _popcount(x):
    x = x - ((x >> 1) & 0x5555555555555555)
    x = (x & 0x3333333333333333) + ((x >> 2) & 0x3333333333333333)
    x = (x + (x >> 4)) & 0x0F0F0F0F0F0F0F0F
    return (x * 0x0101010101010101) >> 56


@njit
def _plex_table_numba(rows, k):
    n = rows.shape[0]
    total = 1 << n
    out = np.empty(total, dtype=np.bool_)
    for mask in range(total):
        m = np.int64(mask)
        need = _popcount(m) - k
        ok = True
        if need > 0:
            for v in range(n):
                if (m >> v) & 1:
                    if _popcount(rows[v] & m) < need:
                        ok = False
                        break
        out[mask] = ok
    return out


@njit
def _cplex_table_numba(rows, k):
    n = rows.shape[0]
    total = 1 << n
    out = np.empty(total, dtype=np.bool_)
    for mask in range(total):
        m = np.int64(mask)
        ok = True
        for v in range(n):
            if (m >> v) & 1:
                if _popcount(rows[v] & m) > k - 1:
                    ok = False
                    break
        out[mask] = ok
    return out


@njit
def _run_circuit_numba(states, targets, ctrl_ptr, ctrl_wires, ctrl_pol):
    n_states = states.shape[0]
    n_gates = targets.shape[0]
    for s in range(n_states):
        row = states[s]
        for g in range(n_gates):
            fire = True
            for c in range(ctrl_ptr[g], ctrl_ptr[g + 1]):
                if row[ctrl_wires[c]] != ctrl_pol[c]:
                    fire = False
                    break
            if fire:
                row[targets[g]] ^= 1
    return states


@njit
def _grover_step_numba(amps, marked):
    n = amps.shape[0]
    total = 0j
    for i in range(n):
        if marked[i]:
            amps[i] = -amps[i]
        total += amps[i]
    twice_mean = 2.0 * total / n
    for i in range(n):
        amps[i] = twice_mean - amps[i]
    return amps


@njit
def _feasible_numba(mask, crow, kmax):
    for j in range(crow.shape[0]):
        if (mask >> j) & 1 and _popcount(crow[j] & mask) > kmax:
            return False
    return True


@njit
def _anneal_numba(linear, coupling, offset, init, uniforms, temps, crow, kmax):
    n_shots, n_vars = init.shape
    n_sweeps = temps.shape[0]
    n_x = crow.shape[0]
    best_costs = np.empty(n_shots)
    best_states = np.empty((n_shots, n_vars), dtype=np.uint8)
    inc_sizes = np.zeros(n_shots, dtype=np.int64)
    inc_masks = np.zeros(n_shots, dtype=np.int64)
    x = np.empty(n_vars, dtype=np.uint8)
    field = np.empty(n_vars)
    for s in range(n_shots):
        for i in range(n_vars):
            x[i] = init[s, i]
        cost = offset
        for i in range(n_vars):
            field[i] = linear[i]
        for i in range(n_vars):
            if x[i]:
                cost += field[i]
                for j in range(n_vars):
                    field[j] += coupling[i, j]
        best = cost
        best_states[s] = x
        mask = 0
        for j in range(n_x):
            if x[j]:
                mask |= 1 << j
        if n_x and _feasible_numba(mask, crow, kmax):
            inc_sizes[s] = _popcount(mask)
            inc_masks[s] = mask
        for t in range(n_sweeps):
            temp = temps[t]
            for i in range(n_vars):
                if x[i]:
                    delta = -field[i]
                else:
                    delta = field[i]
                if delta <= 0.0 or uniforms[s, t, i] < np.exp(-delta / temp):
                    if x[i]:
                        x[i] = 0
                        sign = -1.0
                    else:
                        x[i] = 1
                        sign = 1.0
                    cost += delta
                    for j in range(n_vars):
                        field[j] += sign * coupling[i, j]
                    if cost < best:
                        best = cost
                        best_states[s] = x
                    if i < n_x:
                        mask ^= 1 << i
                        if _popcount(mask) > inc_sizes[s] and _feasible_numba(mask, crow, kmax):
                            inc_sizes[s] = _popcount(mask)
                            inc_masks[s] = mask
        best_costs[s] = best
    return best_costs, best_states, inc_sizes, inc_masks


@njit
def _qubo_all_costs_numba(linear, coupling, offset):
    n_vars = linear.shape[0]
    total = 1 << n_vars
    costs = np.empty(total)
    x = np.zeros(n_vars, dtype=np.uint8)
    field = linear.copy()
    cur = offset
    costs[0] = cur
    for i in range(1, total):
        b = 0
        while not (i >> b) & 1:
            b += 1
        if x[b]:
            cur -= field[b]
            x[b] = 0
            sign = -1.0
        else:
            cur += field[b]
            x[b] = 1
            sign = 1.0
        for j in range(n_vars):
            field[j] += sign * coupling[b, j]
        costs[i ^ (i >> 1)] = cur
    return costs


# ---------------------------------------------------------------- numpy side


def _plex_table_numpy(rows, k):
    n = rows.shape[0]
    masks = np.arange(1 << n, dtype=np.int64)
    sizes = np.bitwise_count(masks).astype(np.int64)
    ok = np.ones(masks.shape, dtype=bool)
    for v in range(n):
        member = ((masks >> v) & 1).astype(bool)
        deg = np.bitwise_count(masks & rows[v]).astype(np.int64)
        ok &= ~member | (deg >= sizes - k)
    return ok


def _cplex_table_numpy(rows, k):
    n = rows.shape[0]
    masks = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(masks.shape, dtype=bool)
    for v in range(n):
        member = ((masks >> v) & 1).astype(bool)
        deg = np.bitwise_count(masks & rows[v]).astype(np.int64)
        ok &= ~member | (deg <= k - 1)
    return ok


def _run_circuit_numpy(states, targets, ctrl_ptr, ctrl_wires, ctrl_pol):
    for g in range(targets.shape[0]):
        lo, hi = ctrl_ptr[g], ctrl_ptr[g + 1]
        if lo == hi:
            states[:, targets[g]] ^= 1
            continue
        fire = np.all(states[:, ctrl_wires[lo:hi]] == ctrl_pol[lo:hi], axis=1)
        states[fire, targets[g]] ^= 1
    return states


def _grover_step_numpy(amps, marked):
    amps[marked] *= -1
    twice_mean = 2.0 * amps.sum() / amps.shape[0]
    np.subtract(twice_mean, amps, out=amps)
    return amps


def _feasible_numpy(masks, crow, kmax):
    ok = np.ones(masks.shape[0], dtype=bool)
    for j in range(crow.shape[0]):
        inside = (masks >> j) & 1 == 1
        ok &= ~inside | (np.bitwise_count(crow[j] & masks) <= kmax)
    return ok


def _anneal_numpy(linear, coupling, offset, init, uniforms, temps, crow, kmax):
    # vectorised across shots; variables are still scanned in order
    n_x = crow.shape[0]
    x = init.astype(np.uint8).copy()
    xf = x.astype(np.float64)
    field = linear[None, :] + xf @ coupling
    cost = offset + xf @ linear + 0.5 * np.einsum("si,ij,sj->s", xf, coupling, xf)
    best = cost.copy()
    best_states = x.copy()
    bits = np.left_shift(np.int64(1), np.arange(n_x, dtype=np.int64))
    masks = (x[:, :n_x].astype(np.int64) * bits).sum(axis=1) if n_x else np.zeros(len(x), np.int64)
    inc_masks = np.zeros(len(x), dtype=np.int64)
    inc_sizes = np.zeros(len(x), dtype=np.int64)
    if n_x:
        ok = _feasible_numpy(masks, crow, kmax)
        inc_masks[ok] = masks[ok]
        inc_sizes[ok] = np.bitwise_count(masks[ok])
    for t in range(temps.shape[0]):
        temp = temps[t]
        for i in range(x.shape[1]):
            on = x[:, i] == 1
            delta = np.where(on, -field[:, i], field[:, i])
            with np.errstate(over="ignore"):
                accept = (delta <= 0.0) | (uniforms[:, t, i] < np.exp(-np.maximum(delta, 0.0) / temp))
            if not accept.any():
                continue
            sign = np.where(on, -1.0, 1.0) * accept
            x[accept, i] ^= 1
            cost = cost + np.where(accept, delta, 0.0)
            field += sign[:, None] * coupling[i][None, :]
            improved = cost < best
            if improved.any():
                best[improved] = cost[improved]
                best_states[improved] = x[improved]
            if i < n_x:
                masks[accept] ^= np.int64(1) << i
                sizes = np.bitwise_count(masks).astype(np.int64)
                cand = accept & (sizes > inc_sizes)
                if cand.any():
                    cand &= _feasible_numpy(masks, crow, kmax)
                    inc_sizes[cand] = sizes[cand]
                    inc_masks[cand] = masks[cand]
    return best, best_states, inc_sizes, inc_masks


def _qubo_all_costs_numpy(linear, coupling, offset, chunk=1 << 15):
    n_vars = linear.shape[0]
    total = 1 << n_vars
    costs = np.empty(total)
    shifts = np.arange(n_vars, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = ((idx[:, None] >> shifts) & 1).astype(np.float64)
        costs[start : start + idx.shape[0]] = (
            offset + bits @ linear + 0.5 * np.einsum("si,ij,sj->s", bits, coupling, bits)
        )
    return costs


BACKENDS = {
    "numba": {
        "plex_table": _plex_table_numba,
        "cplex_table": _cplex_table_numba,
        "run_circuit": _run_circuit_numba,
        "grover_step": _grover_step_numba,
        "anneal": _anneal_numba,
        "qubo_all_costs": _qubo_all_costs_numba,
    },
    "numpy": {
        "plex_table": _plex_table_numpy,
        "cplex_table": _cplex_table_numpy,
        "run_circuit": _run_circuit_numpy,
        "grover_step": _grover_step_numpy,
        "anneal": _anneal_numpy,
        "qubo_all_costs": _qubo_all_costs_numpy,
    },
}

BACKEND = "numba" if USE_NUMBA else "numpy"
_active = BACKENDS[BACKEND]

plex_table = _active["plex_table"]
cplex_table = _active["cplex_table"]
run_circuit = _active["run_circuit"]
grover_step = _active["grover_step"]
anneal_shots = _active["anneal"]
qubo_all_costs = _active["qubo_all_costs"]
