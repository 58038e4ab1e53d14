"""Classical reversible circuits built only from multi-controlled NOT gates.

Registers are stored most-significant bit first, so ``reg[0]`` is the high
bit and ``reg[-1]`` the low bit of the integer a register encodes.

Arithmetic fragments are written against a :class:`CircuitBuilder` and append
gates to it. Scratch wires come from a linear allocator and are never reused;
they are returned to zero only by running the whole circuit backwards.
"""
from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import kernels


@dataclass(frozen=True)
class Gate:
    """NOT on ``target`` when every control matches its polarity (True = filled dot)."""

    target: int
    controls: tuple[tuple[int, bool], ...] = ()

    def __post_init__(self):
        wires = [w for w, _ in self.controls]
        if self.target in wires:
            raise ValueError(f"target {self.target} is also a control")
        if len(set(wires)) != len(wires):
            raise ValueError("control wires must be distinct")

    def wires(self) -> list[int]:
        return [self.target] + [w for w, _ in self.controls]

    def text(self) -> str:
        ctrl = " ".join(("+" if pol else "-") + str(w) for w, pol in self.controls)
        return f"MCX {self.target}" + (f" {ctrl}" if ctrl else "")


def basis_state(width: int, ones: Iterable[int] = ()) -> np.ndarray:
    bits = np.zeros(width, dtype=np.uint8)
    for w in ones:
        bits[w] = 1
    return bits


def apply_gate(state: np.ndarray, gate: Gate) -> np.ndarray:
    for w in gate.wires():
        if not 0 <= w < state.shape[0]:
            raise IndexError(f"wire {w} outside state of width {state.shape[0]}")
    out = state.copy()
    if all(out[w] == int(pol) for w, pol in gate.controls):
        out[gate.target] ^= 1
    return out


def reg_value(bits: np.ndarray, reg: Sequence[int]) -> int:
    value = 0
    for w in reg:
        value = (value << 1) | int(bits[w])
    return value


def reg_values(states: np.ndarray, reg: Sequence[int]) -> np.ndarray:
    """Integer held by ``reg`` in each row of a batch of basis states."""
    out = np.zeros(states.shape[0], dtype=np.int64)
    for w in reg:
        out = (out << 1) | states[:, w]
    return out


def set_reg(states: np.ndarray, reg: Sequence[int], values) -> None:
    values = np.asarray(values, dtype=np.int64)
    width = len(reg)
    for i, w in enumerate(reg):
        states[..., w] = (values >> (width - 1 - i)) & 1


@dataclass(frozen=True)
class ReversibleCircuit:
    num_wires: int
    gates: tuple[Gate, ...]
    registers: tuple[tuple[str, tuple[int, ...]], ...] = ()
    ancillas: frozenset[int] = frozenset()
    stage_tags: tuple[str, ...] = ()

    def __post_init__(self):
        for g in self.gates:
            for w in g.wires():
                if not 0 <= w < self.num_wires:
                    raise ValueError(f"gate {g.text()} references wire {w} >= {self.num_wires}")
        if any(not 0 <= w < self.num_wires for w in self.ancillas):
            raise ValueError("ancilla manifest references unknown wires")
        if self.stage_tags and len(self.stage_tags) != len(self.gates):
            raise ValueError("stage tags must align with gates")

    def __len__(self) -> int:
        return len(self.gates)

    def register(self, name: str) -> tuple[int, ...]:
        for reg_name, wires in self.registers:
            if reg_name == name:
                return wires
        raise KeyError(name)

    @cached_property
    def labels(self) -> dict[int, str]:
        out = {}
        for name, wires in self.registers:
            for i, w in enumerate(wires):
                out[w] = f"{name}[{i}]"
        return out

    def stage_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for tag in self.stage_tags:
            counts[tag] = counts.get(tag, 0) + 1
        return counts

    @cached_property
    def _compiled(self):
        targets = np.array([g.target for g in self.gates], dtype=np.int64)
        ptr = np.zeros(len(self.gates) + 1, dtype=np.int64)
        wires, pols = [], []
        for i, g in enumerate(self.gates):
            for w, pol in g.controls:
                wires.append(w)
                pols.append(1 if pol else 0)
            ptr[i + 1] = len(wires)
        return targets, ptr, np.array(wires, dtype=np.int64), np.array(pols, dtype=np.uint8)

    def run(self, state: np.ndarray) -> np.ndarray:
        state = np.asarray(state, dtype=np.uint8)
        if state.shape != (self.num_wires,):
            raise ValueError(f"state width {state.shape} != circuit width {self.num_wires}")
        return self.run_batch(state[None, :])[0]

    def run_batch(self, states: np.ndarray, inplace: bool = False) -> np.ndarray:
        if states.ndim != 2 or states.shape[1] != self.num_wires:
            raise ValueError(f"expected batch of width {self.num_wires}, got {states.shape}")
        if not inplace or states.dtype != np.uint8 or not states.flags.c_contiguous:
            states = np.ascontiguousarray(states, dtype=np.uint8).copy()
        return kernels.run_circuit(states, *self._compiled)

    def inverse(self) -> "ReversibleCircuit":
        # every MCX is its own inverse
        return ReversibleCircuit(
            self.num_wires,
            self.gates[::-1],
            self.registers,
            self.ancillas,
            self.stage_tags[::-1],
        )

    def then(self, other: "ReversibleCircuit") -> "ReversibleCircuit":
        if other.num_wires != self.num_wires:
            raise ValueError("circuits must share a wire layout")
        tags = self.stage_tags or ("",) * len(self.gates)
        other_tags = other.stage_tags or ("",) * len(other.gates)
        return ReversibleCircuit(
            self.num_wires,
            self.gates + other.gates,
            self.registers,
            self.ancillas | other.ancillas,
            tags + other_tags,
        )

    def dump(self) -> str:
        lines = [f"# wires {self.num_wires}"]
        for name, wires in self.registers:
            lines.append(f"# register {name} " + " ".join(map(str, wires)))
        lines.append("# ancillas " + " ".join(map(str, sorted(self.ancillas))))
        stage = None
        for i, g in enumerate(self.gates):
            if self.stage_tags and self.stage_tags[i] != stage:
                stage = self.stage_tags[i]
                lines.append(f"# stage {stage}")
            lines.append(g.text())
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, text: str) -> "ReversibleCircuit":
        num_wires = 0
        registers, ancillas, gates, tags = [], set(), [], []
        stage = ""
        for lineno, raw in enumerate(text.splitlines(), 1):
            tok = raw.split()
            if not tok:
                continue
            if tok[0] == "#":
                key, rest = tok[1], tok[2:]
                if key == "wires":
                    num_wires = int(rest[0])
                elif key == "register":
                    registers.append((rest[0], tuple(int(w) for w in rest[1:])))
                elif key == "ancillas":
                    ancillas.update(int(w) for w in rest)
                elif key == "stage":
                    stage = rest[0]
                continue
            if tok[0] != "MCX":
                raise ValueError(f"line {lineno}: unknown gate {tok[0]!r}")
            controls = tuple((int(c[1:]), c[0] == "+") for c in tok[2:])
            gates.append(Gate(int(tok[1]), controls))
            tags.append(stage)
        has_tags = any(tags)
        return cls(num_wires, tuple(gates), tuple(registers), frozenset(ancillas),
                   tuple(tags) if has_tags else ())


class CircuitBuilder:
    """Linear wire allocator plus gate recorder.

    ``alloc(name, width)`` extends register ``name`` (creating it on first
    use). Wires are ancillas unless allocated with ``ancilla=False``.
    """

    def __init__(self):
        self.num_wires = 0
        self._registers: dict[str, list[int]] = {}
        self._ancillas: set[int] = set()
        self.gates: list[Gate] = []
        self.tags: list[str] = []
        self._stage = ""
        self._extra: list[tuple[int, bool]] = []

    def alloc(self, name: str, width: int, ancilla: bool = True) -> list[int]:
        wires = list(range(self.num_wires, self.num_wires + width))
        self.num_wires += width
        self._registers.setdefault(name, []).extend(wires)
        if ancilla:
            self._ancillas.update(wires)
        return wires

    def add(self, target: int, controls: Sequence[tuple[int, bool]] = ()) -> None:
        for w, _ in list(controls) + [(target, True)]:
            if not 0 <= w < self.num_wires:
                raise ValueError(f"wire {w} has not been allocated")
        self.gates.append(Gate(target, tuple(self._extra) + tuple(controls)))
        self.tags.append(self._stage)

    def x(self, target: int) -> None:
        self.add(target)

    def cx(self, control: int, target: int, positive: bool = True) -> None:
        self.add(target, [(control, positive)])

    def ccx(self, a: int, b: int, target: int) -> None:
        self.add(target, [(a, True), (b, True)])

    def mcx(self, controls: Sequence[int], target: int) -> None:
        self.add(target, [(c, True) for c in controls])

    @contextmanager
    def stage(self, name: str):
        prev, self._stage = self._stage, name
        try:
            yield
        finally:
            self._stage = prev

    @contextmanager
    def controlled(self, wire: int, positive: bool = True):
        """Every gate added inside the block gains ``wire`` as an extra control."""
        self._extra.append((wire, positive))
        try:
            yield
        finally:
            self._extra.pop()

    def build(self) -> ReversibleCircuit:
        return ReversibleCircuit(
            self.num_wires,
            tuple(self.gates),
            tuple((k, tuple(v)) for k, v in self._registers.items()),
            frozenset(self._ancillas),
            tuple(self.tags),
        )


def _distinct(*wires: int) -> None:
    if len(set(wires)) != len(wires):
        raise ValueError(f"wires must be distinct, got {wires}")


# ---------------------------------------------------------------- fragments


def build_full_adder(b: CircuitBuilder, x: int, y: int, cin: int, anc: Sequence[int]) -> dict:
    """One-bit adder with carry in five gates.

    Afterwards ``cin`` holds ``x ^ y ^ cin``, ``anc[1]`` the carry out,
    ``anc[0]`` the garbage ``x & y`` and ``y`` the garbage ``x ^ y``. ``x``
    is left untouched.
    """
    if len(anc) != 2:
        raise ValueError("full adder needs exactly two ancillas")
    a0, a1 = anc
    _distinct(x, y, cin, a0, a1)
    b.ccx(x, y, a0)
    b.cx(x, y)
    b.ccx(y, cin, a1)
    b.cx(y, cin)
    b.cx(a0, a1)
    return {"sum": cin, "cout": a1, "xor": y}


def build_ripple_adder(
    b: CircuitBuilder, acc: Sequence[int], addend: Sequence[int], scratch: str = "adder"
) -> dict:
    """``acc + addend`` on equal-width registers.

    The sum bits come back in ``out["sum"]`` (MSB first) and the carry out in
    ``out["carry"]``. ``addend`` is preserved; ``acc`` is consumed.
    """
    if len(acc) != len(addend):
        raise ValueError(f"width mismatch: {len(acc)} vs {len(addend)}")
    _distinct(*acc, *addend)
    carry = b.alloc(scratch, 1)[0]
    sums = [0] * len(acc)
    for j in reversed(range(len(acc))):
        anc = b.alloc(scratch, 2)
        out = build_full_adder(b, addend[j], acc[j], carry, anc)
        sums[j] = out["sum"]
        carry = out["cout"]
    return {"sum": sums, "carry": carry}


def build_popcount(
    b: CircuitBuilder, inputs: Sequence[int], counter: Sequence[int], scratch: str = "popcount"
) -> dict:
    """Write the number of set ``inputs`` into the zeroed ``counter``.

    One ripple addition per input with the input as the addend's low bit;
    the running total is copied into ``counter`` at the end.
    """
    need = len(inputs).bit_length()
    if len(counter) < need:
        raise ValueError(f"counter of width {len(counter)} cannot hold {len(inputs)}")
    _distinct(*inputs, *counter)
    width = len(counter)
    if not inputs or not width:
        return {"count": list(counter)}
    total = b.alloc(scratch, width)
    high_zeros = b.alloc(scratch, width - 1)
    for w in inputs:
        total = build_ripple_adder(b, total, high_zeros + [w], scratch)["sum"]
    for src, dst in zip(total, counter):
        b.cx(src, dst)
    return {"count": list(counter)}


def build_leq_comparator(
    b: CircuitBuilder, a: Sequence[int], y: Sequence[int], flag: int, scratch: str = "cmp"
) -> dict:
    """Set ``flag`` iff value(a) <= value(y); both operands MSB first and preserved.

    Per bit: ``lt_i = !a_i & y_i`` and ``eq_i = !a_i ^ y_i`` (computed in place
    on ``y`` and undone at the end). The disjuncts of the MSB-first scan are
    mutually exclusive, so they are OR-ed with a CNOT chain.
    """
    if len(a) != len(y):
        raise ValueError(f"width mismatch: {len(a)} vs {len(y)}")
    _distinct(*a, *y, flag)
    s = len(a)
    lt = b.alloc(scratch, s)
    terms = b.alloc(scratch, s + 1)
    for i in range(s):
        b.add(lt[i], [(a[i], False), (y[i], True)])
    for i in range(s):
        b.cx(a[i], y[i], positive=False)
    for i in range(s):
        b.mcx(list(y[:i]) + [lt[i]], terms[i])
    b.mcx(list(y), terms[s])
    for i in range(s):
        b.cx(terms[i], terms[i + 1])
    b.cx(terms[s], flag)
    for i in range(s):
        b.cx(a[i], y[i], positive=False)
    return {"flag": flag}


def build_load_constant(b: CircuitBuilder, value: int, reg: Sequence[int]) -> dict:
    if value < 0 or value >> len(reg):
        raise ValueError(f"{value} does not fit in {len(reg)} bits")
    for i, w in enumerate(reg):
        if value >> (len(reg) - 1 - i) & 1:
            b.x(w)
    return {"reg": list(reg)}
