import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kplexq.circuit import (
    CircuitBuilder,
    Gate,
    ReversibleCircuit,
    apply_gate,
    basis_state,
    build_full_adder,
    build_leq_comparator,
    build_load_constant,
    build_popcount,
    build_ripple_adder,
    reg_values,
    set_reg,
)


def test_apply_gate_semantics():
    # wire 0 is the control, wire 1 the target
    assert apply_gate(np.array([1, 0], np.uint8), Gate(1, ((0, True),))).tolist() == [1, 1]
    assert apply_gate(np.array([0, 0], np.uint8), Gate(1, ((0, False),))).tolist() == [0, 1]
    assert apply_gate(np.array([1, 1, 0], np.uint8), Gate(2, ((0, True), (1, True)))).tolist() == [1, 1, 1]
    assert apply_gate(np.array([1, 0, 0], np.uint8), Gate(2, ((0, True), (1, True)))).tolist() == [1, 0, 0]
    assert apply_gate(np.array([0], np.uint8), Gate(0)).tolist() == [1]
    with pytest.raises(IndexError):
        apply_gate(np.zeros(2, np.uint8), Gate(5))


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate(1, ((1, True),))
    with pytest.raises(ValueError):
        Gate(0, ((1, True), (1, False)))
    with pytest.raises(ValueError):
        ReversibleCircuit(2, (Gate(3),))


def random_circuit(rng, width, count):
    gates = []
    for _ in range(count):
        wires = rng.permutation(width)[: int(rng.integers(1, min(width, 4) + 1))]
        gates.append(Gate(int(wires[0]), tuple((int(w), bool(rng.integers(2))) for w in wires[1:])))
    return ReversibleCircuit(width, tuple(gates))


def test_run_matches_apply_gate_and_inverse():
    rng = np.random.default_rng(5)
    for _ in range(20):
        c = random_circuit(rng, 7, 25)
        s = rng.integers(0, 2, 7).astype(np.uint8)
        ref = s.copy()
        for g in c.gates:
            ref = apply_gate(ref, g)
        assert (c.run(s) == ref).all()
        assert (c.run(c.inverse().run(s)) == s).all()
        assert c.inverse().inverse().gates == c.gates
    empty = ReversibleCircuit(3, ())
    s = np.array([1, 0, 1], np.uint8)
    assert (empty.run(s) == s).all() and empty.inverse().gates == ()
    single = ReversibleCircuit(2, (Gate(0, ((1, True),)),))
    assert single.inverse().gates == single.gates
    with pytest.raises(ValueError):
        empty.run(np.zeros(4, np.uint8))


def test_permutation_property():
    rng = np.random.default_rng(11)
    for width in (4, 9, 16):
        c = random_circuit(rng, width, 40)
        idx = np.arange(1 << width)
        states = ((idx[:, None] >> np.arange(width)) & 1).astype(np.uint8)
        out = c.run_batch(states)
        packed = (out.astype(np.int64) << np.arange(width)).sum(axis=1)
        assert np.unique(packed).size == 1 << width


def test_dump_load_roundtrip():
    b = CircuitBuilder()
    r = b.alloc("in", 3, ancilla=False)
    a = b.alloc("anc", 2)
    with b.stage("s1"):
        b.ccx(r[0], r[1], a[0])
    with b.stage("s2"):
        b.add(a[1], [(r[2], False), (a[0], True)])
    c = b.build()
    text = c.dump()
    assert "MCX 4 -2 +3" in text and "# register in 0 1 2" in text
    again = ReversibleCircuit.load(text)
    assert again == c and again.dump() == text


def _fa_circuit():
    b = CircuitBuilder()
    x, y, cin = b.alloc("x", 1)[0], b.alloc("y", 1)[0], b.alloc("cin", 1)[0]
    anc = b.alloc("anc", 2)
    out = build_full_adder(b, x, y, cin, anc)
    return b.build(), (x, y, cin), out


def test_full_adder_exhaustive_and_census():
    c, (x, y, cin), out = _fa_circuit()
    assert len(c) == 5 and c.num_wires == 5
    for xv, yv, cv in itertools.product((0, 1), repeat=3):
        s = c.run(basis_state(5, [w for w, v in ((x, xv), (y, yv), (cin, cv)) if v]))
        total = xv + yv + cv
        assert s[out["sum"]] == total & 1 and s[out["cout"]] == total >> 1
        assert s[x] == xv
    with pytest.raises(ValueError):
        build_full_adder(CircuitBuilder(), 0, 0, 1, [2, 3])


def _adder(w):
    b = CircuitBuilder()
    acc = b.alloc("acc", w, ancilla=False)
    add = b.alloc("add", w, ancilla=False)
    out = build_ripple_adder(b, acc, add)
    return b.build(), acc, add, out


@pytest.mark.parametrize("w", [1, 2, 3, 4])
def test_ripple_adder_all_pairs(w):
    c, acc, add, out = _adder(w)
    vals = np.array(list(itertools.product(range(1 << w), repeat=2)))
    states = np.zeros((len(vals), c.num_wires), np.uint8)
    set_reg(states, acc, vals[:, 0])
    set_reg(states, add, vals[:, 1])
    res = c.run_batch(states)
    total = vals[:, 0] + vals[:, 1]
    assert (reg_values(res, out["sum"]) == total % (1 << w)).all()
    assert (res[:, out["carry"]] == total >> w).all()
    assert (reg_values(res, add) == vals[:, 1]).all()
    back = c.inverse().run_batch(res)
    assert (back == states).all()


def test_ripple_adder_examples():
    for w, a, y, s, carry in [(4, 3, 5, 8, 0), (3, 7, 1, 0, 1), (3, 0, 6, 6, 0)]:
        c, acc, add, out = _adder(w)
        st_ = np.zeros((1, c.num_wires), np.uint8)
        set_reg(st_, acc, [a])
        set_reg(st_, add, [y])
        r = c.run_batch(st_)
        assert reg_values(r, out["sum"])[0] == s and r[0, out["carry"]] == carry
    with pytest.raises(ValueError):
        build_ripple_adder(CircuitBuilder(), [0, 1], [2])


def _popcount(L):
    b = CircuitBuilder()
    ins = b.alloc("in", L, ancilla=False)
    ctr = b.alloc("count", max(L.bit_length(), 1))
    build_popcount(b, ins, ctr)
    return b.build(), ins, ctr


@pytest.mark.parametrize("L", range(1, 9))
def test_popcount_exhaustive(L):
    c, ins, ctr = _popcount(L)
    idx = np.arange(1 << L)
    states = np.zeros((1 << L, c.num_wires), np.uint8)
    set_reg(states, ins, idx)
    res = c.run_batch(states)
    assert (reg_values(res, ctr) == np.bitwise_count(idx)).all()
    assert (reg_values(res, ins) == idx).all()
    anc = sorted(c.ancillas)
    assert not c.inverse().run_batch(res)[:, anc].any()


def test_popcount_1110_case_and_errors():
    c, ins, ctr = _popcount(4)
    s = c.run(basis_state(c.num_wires, ins[:3]))  # |1110>
    assert reg_values(s[None, :], ctr)[0] == 3
    zero = c.run(basis_state(c.num_wires))
    assert reg_values(zero[None, :], ctr)[0] == 0
    b = CircuitBuilder()
    with pytest.raises(ValueError, match="cannot hold"):
        build_popcount(b, b.alloc("i", 4), b.alloc("c", 2))


@pytest.mark.parametrize("s", [1, 2, 3, 4, 5])
def test_comparator_all_pairs(s):
    b = CircuitBuilder()
    a = b.alloc("a", s, ancilla=False)
    y = b.alloc("y", s, ancilla=False)
    flag = b.alloc("flag", 1)[0]
    build_leq_comparator(b, a, y, flag)
    c = b.build()
    vals = np.array(list(itertools.product(range(1 << s), repeat=2)))
    states = np.zeros((len(vals), c.num_wires), np.uint8)
    set_reg(states, a, vals[:, 0])
    set_reg(states, y, vals[:, 1])
    res = c.run_batch(states)
    assert (res[:, flag] == (vals[:, 0] <= vals[:, 1])).all()
    assert (reg_values(res, a) == vals[:, 0]).all() and (reg_values(res, y) == vals[:, 1]).all()
    assert (c.inverse().run_batch(res) == states).all()


def test_comparator_examples():
    b = CircuitBuilder()
    a, y, flag = b.alloc("a", 2), b.alloc("y", 2), b.alloc("f", 1)[0]
    build_leq_comparator(b, a, y, flag)
    c = b.build()
    for av, yv, want in [(2, 3, 1), (3, 3, 1), (3, 2, 0)]:
        st_ = np.zeros((1, c.num_wires), np.uint8)
        set_reg(st_, a, [av])
        set_reg(st_, y, [yv])
        assert c.run_batch(st_)[0, flag] == want
    with pytest.raises(ValueError):
        build_leq_comparator(CircuitBuilder(), [0], [1, 2], 3)


def test_load_constant():
    b = CircuitBuilder()
    r = b.alloc("r", 3)
    build_load_constant(b, 0, r)
    assert len(b.gates) == 0
    build_load_constant(b, 5, r)
    c = b.build()
    s = c.run(basis_state(3))
    assert s.tolist() == [1, 0, 1]
    assert not c.inverse().run(s).any()
    with pytest.raises(ValueError):
        build_load_constant(b, 8, r)


def test_controlled_block_adds_control():
    b = CircuitBuilder()
    ctl, t = b.alloc("c", 1)[0], b.alloc("t", 1)[0]
    with b.controlled(ctl):
        b.x(t)
    b.x(t)
    assert b.gates[0].controls == ((ctl, True),) and b.gates[1].controls == ()


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 40), st.integers(0, 2**32 - 1))
def test_inverse_restores_random_states(width, count, seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, width, count)
    states = rng.integers(0, 2, (16, width)).astype(np.uint8)
    assert (c.then(c.inverse()).run_batch(states) == states).all()
