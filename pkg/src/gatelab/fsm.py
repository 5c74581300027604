"""State machines: extraction, synthesis, lock-style obfuscation, attacks.

The obfuscation modeled here prepends a chain of lock states to an existing
state machine. From the new reset state, only the correct sequence of input
words (the enabling key) walks the chain into the original reset state; any
wrong word drops into a trap loop that cycles back to the chain start. The
original transitions are untouched and nothing ever leads from an original
state back to an added one, which is exactly the asymmetry both attacks
exploit:

* distinguishing: the original states are the only multi-state sink component
  of the transition graph (inputs ignored);
* key recovery: the shortest input-word path from reset into the original
  part is the enabling key.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Mapping, Sequence

import numpy as np

from . import boolfn, model
from .errors import (
    ConfigInvalid,
    EncodingOverflow,
    InputWidthExceeded,
    NoSinkComponent,
    SupportOverflow,
    Unreachable,
    UnknownGate,
    WidthMismatch,
)

MAX_INPUT_BITS = 16


@dataclass
class StateTransitionGraph:
    """States as width-bit vectors with input-word labeled transitions."""

    width: int
    input_width: int
    states: frozenset[int]
    transitions: dict[tuple[int, int], int]  # (state, input word) -> state
    reset_state: int
    state_bits: tuple[int, ...] = ()  # FF gate ids when netlist-derived
    input_bits: tuple[int, ...] = ()  # net ids when netlist-derived

    def validate(self) -> None:
        if self.reset_state not in self.states:
            raise ConfigInvalid("reset state is not a member state")
        for s in self.states:
            if s >> self.width:
                raise ConfigInvalid(f"state {s:#x} exceeds width {self.width}")
            for w in range(1 << self.input_width):
                t = self.transitions.get((s, w))
                if t is None:
                    raise ConfigInvalid(
                        f"transition missing for state {s:#x}, input {w:#x}")
                if t not in self.states:
                    raise ConfigInvalid(
                        f"transition target {t:#x} is not a member state")

    def step(self, state: int, word: int) -> int:
        return self.transitions[(state, word)]

    def successors(self, state: int) -> set[int]:
        m = 1 << self.input_width
        return {self.transitions[(state, w)] for w in range(m)}

    def canonical_form(self) -> tuple:
        """BFS renumbering from reset; equal forms mean isomorphic STGs."""
        number = {self.reset_state: 0}
        order = [self.reset_state]
        table: list[tuple[int, ...]] = []
        m = 1 << self.input_width
        cursor = 0
        while cursor < len(order):
            s = order[cursor]
            cursor += 1
            row = []
            for w in range(m):
                t = self.transitions[(s, w)]
                if t not in number:
                    number[t] = len(order)
                    order.append(t)
                row.append(number[t])
            table.append(tuple(row))
        return (self.input_width, tuple(table))

    def is_isomorphic(self, other: "StateTransitionGraph") -> bool:
        if self.input_width != other.input_width:
            return False
        return self.canonical_form() == other.canonical_form()

    def bits_of(self, state: int) -> str:
        return format(state, f"0{self.width}b")

    def to_obj(self) -> dict:
        return {
            "width": self.width,
            "input_width": self.input_width,
            "reset": self.bits_of(self.reset_state),
            "states": [self.bits_of(s) for s in sorted(self.states)],
            "transitions": [
                {"from": self.bits_of(s), "input": format(w, f"0{max(1, self.input_width)}b"),
                 "to": self.bits_of(t)}
                for (s, w), t in sorted(self.transitions.items())
            ],
        }

    def to_dot(self) -> str:
        lines = ["digraph stg {", "  rankdir=LR;",
                 f'  __reset [shape=point]; __reset -> "{self.bits_of(self.reset_state)}";']
        for s in sorted(self.states):
            lines.append(f'  "{self.bits_of(s)}";')
        grouped: dict[tuple[int, int], list[int]] = {}
        for (s, w), t in self.transitions.items():
            grouped.setdefault((s, t), []).append(w)
        for (s, t), words in sorted(grouped.items()):
            label = ",".join(format(w, f"0{max(1, self.input_width)}b")
                             for w in sorted(words))
            lines.append(f'  "{self.bits_of(s)}" -> "{self.bits_of(t)}" '
                         f'[label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass
class HarpoonConfig:
    key: tuple[int, ...]          # input words, applied in order
    extra_loop_states: int = 0    # trap chain length
    seed: int = 0                 # shuffles the codes of the added states

    def validate(self, input_width: int) -> None:
        if len(self.key) < 1:
            raise ConfigInvalid("enabling key needs at least one word")
        if self.extra_loop_states < 0:
            raise ConfigInvalid("trap chain length cannot be negative")
        if input_width < 1:
            raise ConfigInvalid(
                "obfuscation needs at least one input bit to key on")
        for w in self.key:
            if w >> input_width:
                raise ConfigInvalid(
                    f"key word {w:#x} exceeds input width {input_width}")


@dataclass
class StatePartition:
    original: frozenset[int]
    obfuscation: frozenset[int]


# --- extraction -------------------------------------------------------------


def next_state_tables(netlist: model.Netlist, ff_ids: Sequence[int],
                      input_net_ids: Sequence[int]) -> list[np.ndarray]:
    """Per-FF next-state tables indexed by (state | input << n)."""
    ffs = [netlist.gate(f) for f in ff_ids]
    for g in ffs:
        if g.gate_type != "FF":
            raise UnknownGate(f"gate {g.id} is not an FF")
    n = len(ffs)
    m = len(input_net_ids)
    if m > MAX_INPUT_BITS:
        raise InputWidthExceeded(f"{m} input bits exceeds cap of {MAX_INPUT_BITS}")
    if n + m > boolfn.MAX_VARS:
        raise SupportOverflow(
            f"{n} state bits + {m} input bits exceeds {boolfn.MAX_VARS} variables")

    q_nets = [g.pins["Q"] for g in ffs]
    order = q_nets + list(input_net_ids)
    boundary = set(order)
    d_nets = [g.pins["D"] for g in ffs]
    fns = boolfn.net_functions(netlist, d_nets, boundary=boundary)
    return [fns[d].remapped(order).table for d in d_nets]


def extract_stg(netlist: model.Netlist, ff_ids: Sequence[int],
                input_net_ids: Sequence[int]) -> StateTransitionGraph:
    """Breadth-first recovery of the reachable state-transition graph.

    The reset state is the FFs' power-up INIT vector; each discovered state
    is expanded under every input word by evaluating the D-cone functions
    over the {FF outputs} + {input nets} boundary.
    """
    ff_ids = [int(f) for f in ff_ids]
    input_net_ids = [int(i) for i in input_net_ids]
    tables = next_state_tables(netlist, ff_ids, input_net_ids)
    n = len(ff_ids)
    m = len(input_net_ids)

    reset = 0
    for i, f in enumerate(ff_ids):
        reset |= (netlist.gate(f).init_value & 1) << i

    word_offsets = np.arange(1 << m, dtype=np.int64) << n
    states: set[int] = {reset}
    transitions: dict[tuple[int, int], int] = {}
    frontier = [reset]
    while frontier:
        s = frontier.pop(0)
        idx = s + word_offsets
        nxt = np.zeros(1 << m, dtype=np.int64)
        for i, table in enumerate(tables):
            nxt |= table[idx].astype(np.int64) << i
        for w in range(1 << m):
            t = int(nxt[w])
            transitions[(s, w)] = t
            if t not in states:
                states.add(t)
                frontier.append(t)

    return StateTransitionGraph(
        width=n, input_width=m, states=frozenset(states),
        transitions=transitions, reset_state=reset,
        state_bits=tuple(ff_ids), input_bits=tuple(input_net_ids))


# --- synthesis ---------------------------------------------------------------


def _encode_states(stg: StateTransitionGraph, encoding: str,
                   ) -> tuple[dict[int, int], int]:
    ordered = sorted(stg.states)
    count = len(ordered)
    if count == 0:
        raise EncodingOverflow("cannot synthesize an empty state set")
    if encoding == "binary":
        width = max(1, (count - 1).bit_length())
        codes = {s: i for i, s in enumerate(ordered)}
    elif encoding == "onehot":
        width = count
        codes = {s: 1 << i for i, s in enumerate(ordered)}
    else:
        raise ConfigInvalid(f"unknown encoding {encoding!r}")
    if width + stg.input_width > boolfn.MAX_VARS:
        raise EncodingOverflow(
            f"{width} state bits + {stg.input_width} input bits exceeds "
            f"{boolfn.MAX_VARS} variables")
    return codes, width


class _NetNamer:
    def __init__(self, prefix: str):
        self.prefix = prefix
        self.counter = 0

    def fresh(self) -> str:
        self.counter += 1
        return f"{self.prefix}{self.counter}"


# Cofactor-reduce during decomposition only once tables are this small;
# above it, splitting on the top variable is a pair of O(1) slices.
_REDUCE_TABLE_CAP = 4096


def _emit_function(nl: model.Netlist, fn: boolfn.BooleanFunction,
                   out_net: str, namer: _NetNamer,
                   net_names: Mapping[int, str]) -> None:
    """Build a <=6-input LUT/MUX2 network computing `fn` onto `out_net`.

    Functions above six live variables split on their highest variable
    (Shannon) into a MUX2 of the two cofactor networks. Leaf LUTs are always
    support-reduced, so no emitted LUT has a dummy input.
    """
    _emit_table(nl, fn.support_reduced(), out_net, namer, net_names)


def _emit_table(nl: model.Netlist, fn: boolfn.BooleanFunction,
                out_net: str, namer: _NetNamer,
                net_names: Mapping[int, str]) -> None:
    if len(fn.table) <= _REDUCE_TABLE_CAP:
        fn = fn.support_reduced()
    k = len(fn.variables)
    gate_name = namer.fresh()
    if k == 0:
        nl.add_gate(gate_name, "VCC" if fn.table[0] else "GND",
                    None, {"O": out_net})
        return
    if k <= 6:
        digits = ((1 << k) + 3) // 4
        init = format(fn.table_value(), f"0{digits}X")
        pins = {f"I{i}": net_names[v] for i, v in enumerate(fn.variables)}
        pins["O"] = out_net
        nl.add_gate(gate_name, f"LUT{k}", init, pins)
        return
    # the last variable is the highest index bit: cofactors are table halves
    split = fn.variables[-1]
    half = len(fn.table) // 2
    lo = boolfn.BooleanFunction(fn.variables[:-1], fn.table[:half])
    hi = boolfn.BooleanFunction(fn.variables[:-1], fn.table[half:])
    lo_net = namer.fresh()
    hi_net = namer.fresh()
    _emit_table(nl, lo, lo_net, namer, net_names)
    _emit_table(nl, hi, hi_net, namer, net_names)
    nl.add_gate(gate_name, "MUX2", None,
                {"I0": lo_net, "I1": hi_net, "S": net_names[split],
                 "O": out_net})


def synthesize_stg(stg: StateTransitionGraph, encoding: str = "binary",
                   name: str = "fsm") -> model.Netlist:
    """Synthesize an STG into a netlist of FFs and LUT/MUX logic.

    Conventions (relied on by extraction round trips): input bit j is input
    port ``in{j}``, state bit i is the i-th FF in id order with its output on
    net ``q{i}`` (also exported as an output port), and FF INITs encode the
    reset state. Unreachable input combinations of the next-state functions
    are don't-care and synthesize to 0.
    """
    stg.validate()
    codes, width = _encode_states(stg, encoding)
    m = stg.input_width

    nl = model.Netlist(name)
    nl.set_clock("clk")
    nl.add_input_port("clk")
    for j in range(m):
        nl.add_input_port(f"in{j}")

    # Variable ids for function building: the (not yet driven) q/in nets.
    q_nets = [nl.ensure_net(f"q{i}").id for i in range(width)]
    in_nets = [nl.net_named(f"in{j}").id for j in range(m)]
    net_names = {nid: nl.nets[nid].name for nid in q_nets + in_nets}

    namer = _NetNamer("t")
    reset_code = codes[stg.reset_state]
    for i in range(width):
        fn = _next_state_bit(stg, codes, width, i, q_nets, in_nets, encoding)
        _emit_function(nl, fn, f"d{i}", namer, net_names)
    for i in range(width):
        nl.add_gate(f"state{i}", "FF", str((reset_code >> i) & 1),
                    {"D": f"d{i}", "CLK": "clk", "Q": f"q{i}"})
        nl.add_output_port(f"q{i}")
    return nl


def _next_state_bit(stg: StateTransitionGraph, codes: Mapping[int, int],
                    width: int, bit: int, q_nets: Sequence[int],
                    in_nets: Sequence[int], encoding: str,
                    ) -> boolfn.BooleanFunction:
    """Next-state function of one register bit, over just the nets it needs.

    Binary codes are dense, so the bit function ranges over every state bit.
    One-hot codes make states mutually exclusive: the bit for target state T
    is an OR over T's incoming transitions of (source bit AND input minterm),
    which only involves the source-state bits. Unused code points are
    don't-care and synthesize to 0.
    """
    m = len(in_nets)
    if encoding == "binary":
        variables = list(q_nets) + list(in_nets)
        table = np.zeros(1 << (width + m), dtype=np.uint8)
        for (s, w), t in stg.transitions.items():
            if (codes[t] >> bit) & 1:
                table[codes[s] | (w << width)] = 1
        return boolfn.BooleanFunction(variables, table)

    sources = sorted({(codes[s].bit_length() - 1, w)
                      for (s, w), t in stg.transitions.items()
                      if codes[t] == (1 << bit)})
    src_bits = sorted({p for p, _w in sources})
    if len(src_bits) + m > boolfn.MAX_VARS:
        raise SupportOverflow(
            f"one-hot bit {bit} depends on {len(src_bits) + m} nets")
    variables = [q_nets[p] for p in src_bits] + list(in_nets)
    pos = {p: i for i, p in enumerate(src_bits)}
    n_src = len(src_bits)
    table = np.zeros(1 << len(variables), dtype=np.uint8)
    for p, w in sources:
        # every assignment with that source bit high and that input word
        b = pos[p]
        for rest in range(1 << max(0, n_src - 1)):
            low = rest & ((1 << b) - 1)
            high = (rest >> b) << (b + 1)
            table[(1 << b) | low | high | (w << n_src)] = 1
    return boolfn.BooleanFunction(variables, table)


def synthesized_state_ffs(netlist: model.Netlist) -> list[int]:
    """FF ids of a synthesize_stg output, in state-bit order."""
    ffs = [(g.pins["Q"], g.id) for g in netlist.gates.values()
           if g.gate_type == "FF"]
    by_name = {netlist.nets[q].name: gid for q, gid in ffs}
    out = []
    i = 0
    while f"q{i}" in by_name:
        out.append(by_name[f"q{i}"])
        i += 1
    return out


def synthesized_input_nets(netlist: model.Netlist) -> list[int]:
    nets = []
    for port in netlist.input_ports:
        if port.startswith("in") and port[2:].isdigit():
            nets.append(netlist.net_named(port).id)
    return nets


# --- obfuscation --------------------------------------------------------------


def harpoon_obfuscate(stg: StateTransitionGraph,
                      config: HarpoonConfig) -> StateTransitionGraph:
    """Prepend a keyed lock chain plus trap loop to an STG.

    Added states get codes above the original width, so original state codes
    are unchanged (zero-extended). From lock state j the key's j-th word
    advances the chain (the last word lands on the original reset); any other
    word enters the trap loop, which cycles back to the chain start after
    `extra_loop_states` steps, or immediately when the loop is empty.
    """
    stg.validate()
    config.validate(stg.input_width)
    key = tuple(int(w) for w in config.key)
    length = len(key)
    a = config.extra_loop_states

    base = 1 << stg.width
    added = list(range(base, base + length + a))
    Random(config.seed).shuffle(added)
    lock = added[:length]
    trap = added[length:]
    new_width = max(stg.width + 1, (base + length + a - 1).bit_length())

    transitions = dict(stg.transitions)
    m = 1 << stg.input_width
    wrong_target = trap[0] if trap else lock[0]
    for j, state in enumerate(lock):
        advance = lock[j + 1] if j + 1 < length else stg.reset_state
        for w in range(m):
            transitions[(state, w)] = advance if w == key[j] else wrong_target
    for k, state in enumerate(trap):
        nxt = trap[k + 1] if k + 1 < len(trap) else lock[0]
        for w in range(m):
            transitions[(state, w)] = nxt

    return StateTransitionGraph(
        width=new_width,
        input_width=stg.input_width,
        states=frozenset(stg.states) | frozenset(added),
        transitions=transitions,
        reset_state=lock[0],
        input_bits=stg.input_bits,
    )


# --- attacks -------------------------------------------------------------------


def distinguish_states(stg: StateTransitionGraph) -> StatePartition:
    """Split lock/trap states from original ones by sink-component shape.

    The original machine is closed under its own transitions, so its states
    form the sink component(s) of the unlabeled transition graph; everything
    else was added in front of it. Raises NoSinkComponent when no multi-state
    sink exists (the STG is not lock-shaped).
    """
    from . import graph as graphmod

    stg.validate()
    succ = {s: stg.successors(s) for s in stg.states}
    comps, cond = graphmod.scc(succ)
    sinks = [i for i, outs in cond.items() if not outs]
    original: set[int] = set()
    for i in sinks:
        if len(comps[i]) >= 2:
            original.update(comps[i])
    if not original:
        raise NoSinkComponent("no multi-state sink component; not lock-shaped")
    return StatePartition(original=frozenset(original),
                          obfuscation=frozenset(stg.states - original))


def recover_enabling_key(stg: StateTransitionGraph,
                         partition: StatePartition) -> list[int]:
    """Shortest input-word sequence from reset into the original part.

    Ties between equal-length sequences break toward the lexicographically
    smallest one.
    """
    stg.validate()
    if stg.reset_state in partition.original:
        return []

    # distance-to-target over reversed edges
    rev: dict[int, set[int]] = {s: set() for s in stg.states}
    for (s, _w), t in stg.transitions.items():
        rev[t].add(s)
    dist = {s: 0 for s in partition.original}
    frontier = sorted(partition.original)
    while frontier:
        nxt: set[int] = set()
        for t in frontier:
            for s in rev[t]:
                if s not in dist:
                    dist[s] = dist[t] + 1
                    nxt.add(s)
        frontier = sorted(nxt)
    if stg.reset_state not in dist:
        raise Unreachable("no path from reset into the original part")

    words: list[int] = []
    state = stg.reset_state
    while state not in partition.original:
        for w in range(1 << stg.input_width):
            t = stg.transitions[(state, w)]
            if dist.get(t, -1) == dist[state] - 1:
                words.append(w)
                state = t
                break
        else:  # pragma: no cover - dist invariant guarantees progress
            raise Unreachable("distance map inconsistent")
    return words


def patch_initial_state(netlist: model.Netlist, ff_ids: Sequence[int],
                        target_state: Sequence[int]) -> model.Netlist:
    """Return a copy with the FFs' power-up INIT bits set to `target_state`.

    Bit i of the target applies to ff_ids[i]. Nothing else changes.
    """
    ff_ids = [int(f) for f in ff_ids]
    bits = [int(b) & 1 for b in target_state]
    if len(bits) != len(ff_ids):
        raise WidthMismatch(
            f"{len(bits)} bits for {len(ff_ids)} flip-flops")
    for f in ff_ids:
        if netlist.gate(f).gate_type != "FF":
            raise UnknownGate(f"gate {f} is not an FF")
    patched = netlist.copy()
    for f, b in zip(ff_ids, bits):
        patched.gates[f].init = str(b)
    return patched


# --- random STGs (corpus building) ----------------------------------------------


def random_stg(seed: int, n_states: int, input_width: int) -> StateTransitionGraph:
    """Random strongly connected STG: a full cycle plus uniform transitions."""
    if n_states < 1:
        raise ConfigInvalid("need at least one state")
    rng = Random(seed)
    states = list(range(n_states))
    width = max(1, (n_states - 1).bit_length())
    order = states[:]
    rng.shuffle(order)
    m = 1 << input_width
    transitions: dict[tuple[int, int], int] = {}
    for i, s in enumerate(order):
        w = rng.randrange(m)
        transitions[(s, w)] = order[(i + 1) % n_states]
    for s in states:
        for w in range(m):
            if (s, w) not in transitions:
                transitions[(s, w)] = rng.randrange(n_states)
    return StateTransitionGraph(
        width=width, input_width=input_width, states=frozenset(states),
        transitions=transitions, reset_state=order[0])
