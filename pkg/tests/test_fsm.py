from random import Random

import pytest

from gatelab import fsm, model
from gatelab.errors import (
    ConfigInvalid,
    InputWidthExceeded,
    NoSinkComponent,
    Unreachable,
    WidthMismatch,
)

from conftest import ring3


def figure_style_stg() -> fsm.StateTransitionGraph:
    """Four states on one input: a chain with a self-loop and a wrap edge."""
    # s0 -> s1 -> s2 (self-loop on 0) -> s3 -> s0
    transitions = {
        (0, 0): 1, (0, 1): 1,
        (1, 0): 2, (1, 1): 2,
        (2, 0): 2, (2, 1): 3,
        (3, 0): 0, (3, 1): 0,
    }
    return fsm.StateTransitionGraph(
        width=2, input_width=1, states=frozenset({0, 1, 2, 3}),
        transitions=transitions, reset_state=0)


def test_extract_ring_counter():
    nl = ring3()
    ffs = [g.id for g in nl.gates.values() if g.gate_type == "FF"]
    stg = fsm.extract_stg(nl, ffs, [])
    assert len(stg.states) == 3
    # single-word alphabet: the trajectory is a 3-cycle
    state = stg.reset_state
    seen = [state]
    for _ in range(3):
        state = stg.step(state, 0)
        seen.append(state)
    assert seen[0] == seen[3]
    assert len(set(seen[:3])) == 3


def test_synthesize_binary_and_onehot_shapes():
    stg = figure_style_stg()
    binary = fsm.synthesize_stg(stg, "binary")
    assert len(fsm.synthesized_state_ffs(binary)) == 2
    onehot = fsm.synthesize_stg(stg, "onehot")
    assert len(fsm.synthesized_state_ffs(onehot)) == 4
    ext = fsm.extract_stg(onehot, fsm.synthesized_state_ffs(onehot),
                          fsm.synthesized_input_nets(onehot))
    assert all(bin(s).count("1") == 1 for s in ext.states)


def test_round_trip_isomorphism_both_encodings():
    for seed in range(30):
        rng = Random(seed)
        stg = fsm.random_stg(seed, rng.randrange(2, 17), rng.randrange(0, 3))
        for encoding in ("binary", "onehot"):
            nl = fsm.synthesize_stg(stg, encoding)
            back = fsm.extract_stg(nl, fsm.synthesized_state_ffs(nl),
                                   fsm.synthesized_input_nets(nl))
            assert stg.is_isomorphic(back), (seed, encoding)


def test_figure_shape_round_trip():
    stg = figure_style_stg()
    nl = fsm.synthesize_stg(stg, "binary")
    back = fsm.extract_stg(nl, fsm.synthesized_state_ffs(nl),
                           fsm.synthesized_input_nets(nl))
    assert stg.is_isomorphic(back)


def test_input_width_cap():
    nl = model.Netlist("wide")
    nl.add_input_port("clk")
    nl.set_clock("clk")
    nl.add_gate("f", "FF", "0", {"D": "q", "CLK": "clk", "Q": "q"})
    fake_inputs = []
    for i in range(17):
        nl.add_input_port(f"w{i}")
        fake_inputs.append(nl.net_named(f"w{i}").id)
    with pytest.raises(InputWidthExceeded):
        fsm.extract_stg(nl, [1], fake_inputs)


def test_harpoon_figure_instance():
    stg = figure_style_stg()
    config = fsm.HarpoonConfig(key=(1, 0, 1), extra_loop_states=3, seed=2)
    locked = fsm.harpoon_obfuscate(stg, config)
    assert len(locked.states) == 4 + 3 + 3
    # the key sequence walks the chain into the original reset in 3 steps
    state = locked.reset_state
    for word in config.key:
        state = locked.step(state, word)
    assert state == stg.reset_state
    # no transition leaves the original part
    added = locked.states - stg.states
    for (s, _w), t in locked.transitions.items():
        if s in stg.states:
            assert t in stg.states
    assert locked.reset_state in added


def test_harpoon_wrong_word_costs_full_loop():
    stg = figure_style_stg()
    config = fsm.HarpoonConfig(key=(1, 1), extra_loop_states=2, seed=0)
    locked = fsm.harpoon_obfuscate(stg, config)
    part = fsm.distinguish_states(locked)
    trapped = locked.step(locked.reset_state, 0)  # wrong first word
    assert trapped not in stg.states
    # trap transitions are forced, so re-entry costs the whole loop + key
    re_entry = fsm.StateTransitionGraph(
        width=locked.width, input_width=locked.input_width,
        states=locked.states, transitions=locked.transitions,
        reset_state=trapped)
    key = fsm.recover_enabling_key(re_entry, part)
    assert len(key) == config.extra_loop_states + len(config.key)
    assert key[-2:] == [1, 1]


def test_harpoon_degenerate_single_word_lock():
    stg = figure_style_stg()
    locked = fsm.harpoon_obfuscate(
        stg, fsm.HarpoonConfig(key=(1,), extra_loop_states=0, seed=0))
    assert len(locked.states) == 5
    o0 = locked.reset_state
    assert locked.step(o0, 0) == o0  # wrong word self-loops
    assert locked.step(o0, 1) == stg.reset_state


def test_harpoon_state_count_across_configs():
    rng = Random(1)
    for trial in range(50):
        n = rng.randrange(2, 17)
        m = rng.randrange(1, 4)
        stg = fsm.random_stg(trial, n, m)
        L = rng.randrange(1, 9)
        a = rng.randrange(0, 9)
        key = tuple(rng.randrange(1 << m) for _ in range(L))
        locked = fsm.harpoon_obfuscate(
            stg, fsm.HarpoonConfig(key=key, extra_loop_states=a, seed=trial))
        nl = fsm.synthesize_stg(locked, "binary")
        ext = fsm.extract_stg(nl, fsm.synthesized_state_ffs(nl),
                              fsm.synthesized_input_nets(nl))
        assert len(ext.states) == n + L + a, trial


def test_config_validation():
    stg = figure_style_stg()
    with pytest.raises(ConfigInvalid):
        fsm.harpoon_obfuscate(stg, fsm.HarpoonConfig(key=()))
    with pytest.raises(ConfigInvalid):
        fsm.harpoon_obfuscate(stg, fsm.HarpoonConfig(key=(2,)))  # 1-bit input
    no_input = fsm.random_stg(3, 4, 0)
    with pytest.raises(ConfigInvalid):
        fsm.harpoon_obfuscate(no_input, fsm.HarpoonConfig(key=(0,)))


def test_distinguish_unobfuscated_single_scc():
    stg = figure_style_stg()
    part = fsm.distinguish_states(stg)
    assert part.original == stg.states
    assert part.obfuscation == frozenset()


def test_distinguish_twin_sinks_includes_both():
    # two disjoint 2-cycles reachable from a fork state
    transitions = {
        (0, 0): 1, (0, 1): 3,
        (1, 0): 2, (1, 1): 2,
        (2, 0): 1, (2, 1): 1,
        (3, 0): 4, (3, 1): 4,
        (4, 0): 3, (4, 1): 3,
    }
    stg = fsm.StateTransitionGraph(
        width=3, input_width=1, states=frozenset(range(5)),
        transitions=transitions, reset_state=0)
    part = fsm.distinguish_states(stg)
    assert part.original == frozenset({1, 2, 3, 4})
    assert part.obfuscation == frozenset({0})


def test_distinguish_no_sink():
    # single state with a self-loop only: no multi-state sink
    stg = fsm.StateTransitionGraph(
        width=1, input_width=1, states=frozenset({0}),
        transitions={(0, 0): 0, (0, 1): 0}, reset_state=0)
    with pytest.raises(NoSinkComponent):
        fsm.distinguish_states(stg)


def test_recover_key_round_trip():
    rng = Random(5)
    for trial in range(40):
        n = rng.randrange(2, 13)
        m = rng.randrange(1, 4)
        stg = fsm.random_stg(trial * 3 + 1, n, m)
        L = rng.randrange(1, 9)
        key = tuple(rng.randrange(1 << m) for _ in range(L))
        locked = fsm.harpoon_obfuscate(
            stg, fsm.HarpoonConfig(key=key, extra_loop_states=rng.randrange(0, 6),
                                   seed=trial))
        part = fsm.distinguish_states(locked)
        assert part.original == stg.states
        assert fsm.recover_enabling_key(locked, part) == list(key)


def test_recover_key_unreachable():
    transitions = {(0, 0): 0, (1, 0): 2, (2, 0): 1}
    stg = fsm.StateTransitionGraph(
        width=2, input_width=0, states=frozenset({0, 1, 2}),
        transitions=transitions, reset_state=0)
    part = fsm.StatePartition(original=frozenset({1, 2}),
                              obfuscation=frozenset({0}))
    with pytest.raises(Unreachable):
        fsm.recover_enabling_key(stg, part)


def test_recover_key_lexicographic_tie_break():
    # two equal-length keys exist; both words 0 and 1 advance identically
    transitions = {
        (0, 0): 1, (0, 1): 1,
        (1, 0): 2, (1, 1): 2,
        (2, 0): 2, (2, 1): 2,
    }
    stg = fsm.StateTransitionGraph(
        width=2, input_width=1, states=frozenset({0, 1, 2}),
        transitions=transitions, reset_state=0)
    part = fsm.StatePartition(original=frozenset({2}),
                              obfuscation=frozenset({0, 1}))
    assert fsm.recover_enabling_key(stg, part) == [0, 0]


def test_patch_initial_state():
    nl = ring3()
    ffs = sorted(g.id for g in nl.gates.values() if g.gate_type == "FF")
    patched = fsm.patch_initial_state(nl, ffs, [0, 1])
    assert patched.gates[ffs[0]].init == "0"
    assert patched.gates[ffs[1]].init == "1"
    # original untouched
    assert nl.gates[ffs[1]].init == "0"
    same = fsm.patch_initial_state(nl, ffs, [0, 0])
    from gatelab import jsonio
    assert jsonio.project_digest(same) == jsonio.project_digest(nl)
    with pytest.raises(WidthMismatch):
        fsm.patch_initial_state(nl, ffs, [1])


def test_stg_exports():
    stg = figure_style_stg()
    dot = stg.to_dot()
    assert "digraph" in dot and '"00" -> "01"' in dot
    obj = stg.to_obj()
    assert obj["reset"] == "00"
    assert len(obj["transitions"]) == 8
