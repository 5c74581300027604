from random import Random

import pytest

from gatelab import model
from gatelab.errors import (
    DuplicateDriver,
    HierarchyCycle,
    MalformedInit,
    UnknownGate,
    UnknownPin,
)

from conftest import tiny_and


def test_add_gate_creates_nets_and_ids():
    nl = model.Netlist("t")
    nl.add_input_port("a")
    nl.add_input_port("b")
    gid = nl.add_gate("g1", "LUT2", "8", {"I0": "a", "I1": "b", "O": "c"})
    assert gid == 1
    net_c = nl.net_named("c")
    assert net_c.driver == (gid, "O")
    gid2 = nl.add_gate("r0", "FF", "0",
                       {"D": "c", "CLK": "clk", "Q": "q0"})
    assert gid2 == 2
    assert nl.clock_net == nl.net_named("clk").id


def test_malformed_init_lengths():
    nl = model.Netlist("t")
    with pytest.raises(MalformedInit):
        nl.add_gate("g", "LUT2", "123", {"I0": "a", "I1": "b", "O": "c"})
    with pytest.raises(MalformedInit):
        nl.add_gate("g", "LUT2", "Z", {"I0": "a", "I1": "b", "O": "c"})
    with pytest.raises(MalformedInit):
        nl.add_gate("g", "FF", "2", {"D": "a", "CLK": "c", "Q": "q"})
    with pytest.raises(MalformedInit):
        nl.add_gate("g", "BUF", "1", {"I": "a", "O": "b"})
    # failed call leaves nothing behind
    assert not nl.gates


def test_unknown_and_missing_pins():
    nl = model.Netlist("t")
    with pytest.raises(UnknownPin):
        nl.add_gate("g", "LUT2", "8", {"I0": "a", "I1": "b", "I2": "x", "O": "c"})
    with pytest.raises(UnknownPin):
        nl.add_gate("g", "LUT2", "8", {"I0": "a", "O": "c"})


def test_duplicate_driver_rejected():
    nl = tiny_and()
    with pytest.raises(DuplicateDriver):
        nl.add_gate("g2", "LUT2", "6", {"I0": "a", "I1": "b", "O": "c"})
    with pytest.raises(DuplicateDriver):
        nl.add_gate("g3", "BUF", None, {"I": "c", "O": "a"})  # input port


def test_init_normalized_uppercase():
    nl = model.Netlist("t")
    nl.add_gate("g", "LUT4", "beef", {"I0": "a", "I1": "b", "I2": "c",
                                      "I3": "d", "O": "o"})
    assert nl.gates[1].init == "BEEF"


def test_neighbors_chain_and_feedback():
    nl = model.Netlist("t")
    nl.add_input_port("a")
    lut = nl.add_gate("l", "LUT1", "2", {"I0": "a", "O": "w"})
    ff = nl.add_gate("f", "FF", "0", {"D": "w", "CLK": "clk", "Q": "q"})
    assert nl.neighbors(ff, "fanin") == {lut}
    assert nl.neighbors(lut, "fanout") == {ff}
    # feedback: FF.Q through a LUT back into FF.D appears on both sides
    nl2 = model.Netlist("fb")
    lut2 = nl2.add_gate("l", "LUT1", "1", {"I0": "q", "O": "d"})
    ff2 = nl2.add_gate("f", "FF", "0", {"D": "d", "CLK": "clk", "Q": "q"})
    assert nl2.neighbors(ff2, "fanout") == {lut2}
    assert nl2.neighbors(ff2, "fanin") == {lut2}


def test_neighbors_isolated_constant():
    nl = model.Netlist("t")
    vcc = nl.add_gate("v", "VCC", None, {"O": "one"})
    assert nl.neighbors(vcc, "fanout") == set()
    with pytest.raises(UnknownGate):
        nl.neighbors(99, "fanin")


def test_submodule_palette_cycle_and_explicit_color():
    nl = model.Netlist("t")
    s1 = nl.create_submodule("fsm")
    s2 = nl.create_submodule("alu")
    assert nl.submodules[s1].color == model.PALETTE[0]
    assert nl.submodules[s2].color == model.PALETTE[1]
    assert s1 != s2
    s3 = nl.create_submodule("red", (255, 0, 0))
    assert nl.submodules[s3].color == (255, 0, 0)


def test_assign_gates_union_and_unknown():
    nl = tiny_and()
    sid = nl.create_submodule("m")
    nl.assign_gates(sid, [1])
    nl.assign_gates(sid, [1])
    assert nl.submodules[sid].gate_ids == {1}
    with pytest.raises(UnknownGate):
        nl.assign_gates(sid, [999])
    assert nl.submodules[sid].gate_ids == {1}


def test_multi_membership():
    nl = tiny_and()
    a = nl.create_submodule("a")
    b = nl.create_submodule("b")
    nl.assign_gates(a, [1])
    nl.assign_gates(b, [1])
    assert nl.submodules_of_gate(1) == [a, b]


def test_hierarchy_cycle_and_root():
    nl = model.Netlist("t")
    a = nl.create_submodule("a")
    b = nl.create_submodule("b")
    nl.set_parent(b, a)
    with pytest.raises(HierarchyCycle):
        nl.set_parent(a, b)
    nl.set_parent(b, None)
    assert nl.submodules[b].parent is None


def test_deepest_submodule_color_wins():
    nl = tiny_and()
    a = nl.create_submodule("a", (1, 1, 1))
    b = nl.create_submodule("b", (2, 2, 2))
    nl.set_parent(b, a)
    nl.assign_gates(a, [1])
    nl.assign_gates(b, [1])
    assert nl.effective_color(1) == (2, 2, 2)


def test_every_mutation_emits_exactly_one_event():
    nl = model.Netlist("t")
    events = []
    nl.listeners.append(lambda op, targets, args: events.append(op))
    nl.add_input_port("a")  # ports are construction-time, not session ops
    nl.add_gate("g", "LUT1", "2", {"I0": "a", "O": "w"})
    sid = nl.create_submodule("m")
    nl.assign_gates(sid, [1])
    nl.set_parent(sid, None)
    assert events == ["add_gate", "create_submodule", "assign_gates",
                      "set_parent"]


def test_lint_flags_dangling_only_as_warning():
    nl = tiny_and()
    nl.add_gate("g2", "LUT2", "6", {"I0": "a", "I1": "b", "O": "unused"})
    report = model.lint(nl)
    assert report.clean
    assert any("no sinks" in w for w in report.warnings)


def test_lint_warns_on_deep_and_cyclic_logic():
    deep = model.Netlist("deep")
    deep.add_input_port("x")
    prev = "x"
    for i in range(70):
        deep.add_gate(f"b{i}", "BUF", None, {"I": prev, "O": f"w{i}"})
        prev = f"w{i}"
    report = model.lint(deep)
    assert any("depth" in w for w in report.warnings)

    loop = model.Netlist("loop")
    loop.add_gate("i1", "INV", None, {"I": "b", "O": "a"})
    loop.add_gate("i2", "INV", None, {"I": "a", "O": "b"})
    report = model.lint(loop)
    assert any("loop" in w for w in report.warnings)


def test_copy_is_structural_and_detached():
    nl = tiny_and()
    nl.create_submodule("m")
    dup = nl.copy()
    events = []
    nl.listeners.append(lambda *a: events.append(a))
    dup.add_gate("g9", "BUF", None, {"I": "a", "O": "z"})
    assert not events
    assert "g9" not in [g.name for g in nl.gates.values()]


def test_single_driver_invariant_random_ops():
    rng = Random(7)
    nl = model.Netlist("rand")
    nl.add_input_port("x0")
    nl.add_input_port("x1")
    pool = ["x0", "x1"]
    created = 0
    for step in range(300):
        a = rng.choice(pool)
        b = rng.choice(pool)
        out = f"n{step}" if rng.random() < 0.6 else rng.choice(pool)
        try:
            nl.add_gate(f"g{step}", "LUT2", format(rng.randrange(16), "X"),
                        {"I0": a, "I1": b, "O": out})
            created += 1
            pool.append(out)
        except DuplicateDriver:
            pass
    drivers = {}
    for g in nl.gates.values():
        out = g.pins["O"]
        assert out not in drivers
        drivers[out] = g.id
    assert created > 50
    assert model.lint(nl).clean
