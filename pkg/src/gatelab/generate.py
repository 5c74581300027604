"""Deterministic generators for the four study projects.

Every generator is a pure function of (seed, knobs): the same inputs give the
same netlist bytes on any platform. Each emits a ground-truth sidecar (planted
FF ids, state graphs, keys) that analysis code never reads; only tests and
graders do.

Projects:
  spn_cipher       pipelined 3-round substitution-permutation toy cipher
  fsm_sea_of_gates planted FSM + counter decoy buried in random acyclic logic
  harpoon_fsm      the same sea, but the FSM is lock-obfuscated first
  aes_fixed_key    byte-sliced round-based AES-128 with a hard-coded key
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from random import Random
from typing import Optional

from . import aes as aesmod
from . import boolfn, fsm, model
from .errors import SpecInvalid

PROJECT_KINDS = ("spn_cipher", "fsm_sea_of_gates", "harpoon_fsm", "aes_fixed_key")


@dataclass
class ProjectSpec:
    kind: str
    seed: int
    knobs: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.kind not in PROJECT_KINDS:
            raise SpecInvalid(f"unknown project kind {self.kind!r}")
        if not isinstance(self.seed, int):
            raise SpecInvalid("seed must be an integer")
        for key, value in self.knobs.items():
            if not isinstance(value, int):
                raise SpecInvalid(f"knob {key!r} must be an integer")


@dataclass
class GeneratedProject:
    netlist: model.Netlist
    sidecar: dict


def generate_project(spec: ProjectSpec) -> GeneratedProject:
    spec.validate()
    builder = {
        "spn_cipher": spn_cipher,
        "fsm_sea_of_gates": fsm_sea_of_gates,
        "harpoon_fsm": harpoon_fsm,
        "aes_fixed_key": aes_fixed_key,
    }[spec.kind]
    return builder(spec.seed, **spec.knobs)


def write_project(directory, spec: ProjectSpec,
                  emit_verilog: bool = True) -> dict:
    """Generate and write project.json / netlist.v / sidecar.json."""
    from . import jsonio, verilog

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    project = generate_project(spec)
    paths = {"project": directory / "project.json",
             "sidecar": directory / "sidecar.json"}
    jsonio.save_project(paths["project"], project.netlist)
    sidecar = dict(project.sidecar)
    sidecar["spec"] = {"kind": spec.kind, "seed": spec.seed,
                       "knobs": dict(spec.knobs)}
    paths["sidecar"].write_text(
        json.dumps(sidecar, sort_keys=True, separators=(",", ":")) + "\n")
    if emit_verilog:
        paths["verilog"] = directory / "netlist.v"
        paths["verilog"].write_text(
            verilog.write_structural_verilog(project.netlist))
    return {k: str(v) for k, v in paths.items()}


# --- shared building blocks -----------------------------------------------------


class _Namer:
    def __init__(self, prefix: str):
        self.prefix = prefix
        self.counter = 0

    def fresh(self) -> str:
        self.counter += 1
        return f"{self.prefix}{self.counter}"


def graft(dst: model.Netlist, src: model.Netlist,
          net_map: dict[str, str], prefix: str) -> dict[int, int]:
    """Re-instantiate `src`'s gates inside `dst`.

    Nets named in `net_map` connect to existing `dst` nets; every other src
    net is prefixed. Returns src gate id -> dst gate id.
    """
    gate_map: dict[int, int] = {}
    for gid in sorted(src.gates):
        g = src.gates[gid]
        pins = {}
        for pin, nid in g.pins.items():
            name = src.nets[nid].name
            pins[pin] = net_map.get(name, prefix + name)
        gate_map[gid] = dst.add_gate(prefix + g.name, g.gate_type, g.init, pins)
    return gate_map


def _parity_init(k: int) -> str:
    value = 0
    for idx in range(1 << k):
        if bin(idx).count("1") & 1:
            value |= 1 << idx
    return format(value, f"0{((1 << k) + 3) // 4}X")


def _emit_xor(nl: model.Netlist, namer: _Namer,
              inputs: list[str], out: str) -> None:
    """Parity of `inputs` onto net `out` as a tree of parity LUTs."""
    work = list(inputs)
    while len(work) > 6:
        chunk, work = work[:6], work[6:]
        t = namer.fresh()
        nl.add_gate(namer.fresh(), "LUT6", _parity_init(6),
                    {**{f"I{i}": n for i, n in enumerate(chunk)}, "O": t})
        work.insert(0, t)
    k = len(work)
    if k == 1:
        nl.add_gate(namer.fresh(), "BUF", None, {"I": work[0], "O": out})
        return
    nl.add_gate(namer.fresh(), f"LUT{k}", _parity_init(k),
                {**{f"I{i}": n for i, n in enumerate(work)}, "O": out})


def _expose_dangling(nl: model.Netlist) -> None:
    """Promote sink-less driven nets to output ports so corpora lint quiet.

    Unused input ports stay as they are; they are already externally visible.
    """
    skip = set(nl.output_ports) | set(nl.input_ports)
    for nid in sorted(nl.nets):
        net = nl.nets[nid]
        if not net.sinks and net.name not in skip:
            nl.add_output_port(net.name)
            skip.add(net.name)


# --- project 1: SPN cipher --------------------------------------------------------


def _random_bijection(rng: Random, size: int) -> list[int]:
    table = list(range(size))
    rng.shuffle(table)
    return table


def spn_cipher(seed: int, rounds: int = 3, nibbles: int = 4) -> GeneratedProject:
    """Pipelined substitution-permutation network over a 4*nibbles-bit block.

    Each round: 4-bit S-boxes per nibble (round constants folded into the
    INITs), a seeded bit permutation, then a register. Acyclic by design.
    """
    if not 1 <= rounds <= 8 or not 1 <= nibbles <= 8:
        raise SpecInvalid("rounds and nibbles must be in 1..8")
    rng = Random(seed)
    bits = 4 * nibbles
    sboxes = [_random_bijection(rng, 16) for _ in range(rounds)]
    perms = [_random_bijection(rng, bits) for _ in range(rounds)]
    constants = [rng.randrange(1 << bits) for _ in range(rounds)]

    nl = model.Netlist(f"spn_{seed}")
    nl.add_input_port("clk")
    nl.set_clock("clk")
    for b in range(bits):
        nl.add_input_port(f"pt{b}")
    current = [f"pt{b}" for b in range(bits)]
    ff_rounds: list[list[int]] = []

    for r in range(rounds):
        sub_nets = []
        for nib in range(nibbles):
            ins = current[4 * nib:4 * nib + 4]
            for j in range(4):
                # S-box output bit XOR round-constant bit, baked into the LUT
                const_bit = (constants[r] >> (4 * nib + j)) & 1
                value = 0
                for x in range(16):
                    bit = ((sboxes[r][x] >> j) & 1) ^ const_bit
                    if bit:
                        value |= 1 << x
                out = f"r{r}_s{4 * nib + j}"
                nl.add_gate(f"r{r}_sbox{nib}_{j}", "LUT4",
                            format(value, "04X"),
                            {**{f"I{i}": n for i, n in enumerate(ins)},
                             "O": out})
                sub_nets.append(out)
        permuted = [sub_nets[perms[r][b]] for b in range(bits)]
        ffs = []
        for b in range(bits):
            q = f"r{r}_q{b}"
            ffs.append(nl.add_gate(f"r{r}_ff{b}", "FF", "0",
                                   {"D": permuted[b], "CLK": "clk", "Q": q}))
        ff_rounds.append(ffs)
        current = [f"r{r}_q{b}" for b in range(bits)]

    for b in range(bits):
        nl.add_gate(f"ct_buf{b}", "BUF", None,
                    {"I": current[b], "O": f"ct{b}"})
        nl.add_output_port(f"ct{b}")

    sidecar = {
        "kind": "spn_cipher",
        "rounds": rounds,
        "block_bits": bits,
        "sboxes": sboxes,
        "permutations": perms,
        "round_constants": constants,
        "round_ff_ids": ff_rounds,
        "latency": rounds,
    }
    return GeneratedProject(netlist=nl, sidecar=sidecar)


# --- project 2: FSM in a sea of gates ----------------------------------------------


def _plant_counter(nl: model.Netlist, rng: Random, bits: int,
                   enable_net: str) -> list[int]:
    """Free-running up-counter with enable: bit i toggles when the lower
    bits are all ones. Dependence is strictly triangular, the classic FSM
    false positive."""
    ffs = []
    for i in range(bits):
        k = i + 2
        value = 0
        for idx in range(1 << k):
            lower_all = all((idx >> b) & 1 for b in range(i))
            self_b = (idx >> i) & 1
            en = (idx >> (i + 1)) & 1
            nxt = self_b ^ (1 if (en and lower_all) else 0)
            if nxt:
                value |= 1 << idx
        pins = {f"I{b}": f"cnt_q{b}" for b in range(i)}
        pins[f"I{i}"] = f"cnt_q{i}"
        pins[f"I{i + 1}"] = enable_net
        pins["O"] = f"cnt_d{i}"
        nl.add_gate(f"cnt_lut{i}", f"LUT{k}",
                    format(value, f"0{((1 << k) + 3) // 4}X"), pins)
        ffs.append(nl.add_gate(f"cnt_ff{i}", "FF", "0",
                               {"D": f"cnt_d{i}", "CLK": "clk",
                                "Q": f"cnt_q{i}"}))
    return ffs


def _pad_with_logic(nl: model.Netlist, rng: Random, count: int,
                    pool: list[str]) -> None:
    """Random acyclic logic: gates only read nets already in the pool, so no
    feedback loops can form and no planted structure is disturbed."""
    pool = list(pool)
    for i in range(count):
        roll = rng.random()
        out = f"pad_n{i}"
        if roll < 0.55:
            k = rng.randrange(2, 7)
            k = min(k, len(pool))
            ins = rng.sample(pool, k)
            init = rng.randrange(1, (1 << (1 << k)) - 1)
            nl.add_gate(f"pad_g{i}", f"LUT{k}",
                        format(init, f"0{((1 << k) + 3) // 4}X"),
                        {**{f"I{j}": n for j, n in enumerate(ins)}, "O": out})
        elif roll < 0.65:
            a, b, s = rng.sample(pool, 3)
            nl.add_gate(f"pad_g{i}", "MUX2", None,
                        {"I0": a, "I1": b, "S": s, "O": out})
        elif roll < 0.75:
            kind = "INV" if rng.random() < 0.5 else "BUF"
            nl.add_gate(f"pad_g{i}", kind, None,
                        {"I": rng.choice(pool), "O": out})
        else:
            nl.add_gate(f"pad_g{i}", "FF", str(rng.randrange(2)),
                        {"D": rng.choice(pool), "CLK": "clk", "Q": out})
        pool.append(out)


def fsm_sea_of_gates(seed: int, n_states: int = 0, input_bits: int = 0,
                     padding: int = 2000, counter_bits: int = 5,
                     ) -> GeneratedProject:
    """A random strongly connected FSM and a counter decoy, buried in noise."""
    if padding < 0 or not 0 <= counter_bits <= 5:
        raise SpecInvalid("bad padding/counter knobs")
    rng = Random(seed)
    n_states = n_states or rng.randrange(4, 17)
    input_bits = input_bits or rng.randrange(1, 4)
    if not 2 <= n_states <= 64 or not 1 <= input_bits <= 3:
        raise SpecInvalid("n_states must be 2..64, input_bits 1..3")

    stg = fsm.random_stg(rng.randrange(1 << 30), n_states, input_bits)
    fsm_nl = fsm.synthesize_stg(stg, "binary", name="fsm")

    nl = model.Netlist(f"sea_{seed}")
    nl.add_input_port("clk")
    nl.set_clock("clk")
    for j in range(input_bits):
        nl.add_input_port(f"fsm_in{j}")
    nl.add_input_port("en")
    for j in range(4):
        nl.add_input_port(f"pad_in{j}")

    net_map = {"clk": "clk"}
    for j in range(input_bits):
        net_map[f"in{j}"] = f"fsm_in{j}"
    gate_map = graft(nl, fsm_nl, net_map, "fsm_")
    fsm_ffs = [gate_map[g] for g in fsm.synthesized_state_ffs(fsm_nl)]
    width = len(fsm_ffs)

    counter_ffs = _plant_counter(nl, rng, counter_bits, "en")

    pool = [f"fsm_in{j}" for j in range(input_bits)]
    pool += ["en"] + [f"pad_in{j}" for j in range(4)]
    pool += [f"fsm_q{i}" for i in range(width)]
    pool += [f"cnt_q{i}" for i in range(counter_bits)]
    _pad_with_logic(nl, rng, padding, pool)
    _expose_dangling(nl)

    sidecar = {
        "kind": "fsm_sea_of_gates",
        "fsm_ff_ids": fsm_ffs,
        "counter_ff_ids": counter_ffs,
        "fsm_input_nets": [f"fsm_in{j}" for j in range(input_bits)],
        "stg": stg.to_obj(),
        "state_width": width,
        "n_states": n_states,
        "gate_count": len(nl.gates),
    }
    return GeneratedProject(netlist=nl, sidecar=sidecar)


# --- project 3: obfuscated FSM -------------------------------------------------------


def harpoon_fsm(seed: int, key_length: int = 0, extra_states: int = -1,
                n_states: int = 0, input_bits: int = 0,
                padding: int = 1200, counter_bits: int = 4,
                ) -> GeneratedProject:
    """The sea-of-gates project with its FSM locked behind an enabling key."""
    rng = Random(seed)
    key_length = key_length or rng.randrange(1, 9)
    extra_states = extra_states if extra_states >= 0 else rng.randrange(0, 6)
    n_states = n_states or rng.randrange(4, 17)
    input_bits = input_bits or rng.randrange(1, 4)
    if not 1 <= key_length <= 16:
        raise SpecInvalid("key_length must be 1..16")

    stg = fsm.random_stg(rng.randrange(1 << 30), n_states, input_bits)
    key = tuple(rng.randrange(1 << input_bits) for _ in range(key_length))
    config = fsm.HarpoonConfig(key=key, extra_loop_states=extra_states,
                               seed=rng.randrange(1 << 30))
    locked = fsm.harpoon_obfuscate(stg, config)

    plain_nl = fsm.synthesize_stg(stg, "binary", name="fsm")
    locked_nl = fsm.synthesize_stg(locked, "binary", name="fsm")

    nl = model.Netlist(f"locked_sea_{seed}")
    nl.add_input_port("clk")
    nl.set_clock("clk")
    for j in range(input_bits):
        nl.add_input_port(f"fsm_in{j}")
    nl.add_input_port("en")
    for j in range(4):
        nl.add_input_port(f"pad_in{j}")

    net_map = {"clk": "clk"}
    for j in range(input_bits):
        net_map[f"in{j}"] = f"fsm_in{j}"
    gate_map = graft(nl, locked_nl, net_map, "fsm_")
    fsm_ffs = [gate_map[g] for g in fsm.synthesized_state_ffs(locked_nl)]

    counter_ffs = _plant_counter(nl, rng, counter_bits, "en")
    pool = [f"fsm_in{j}" for j in range(input_bits)]
    pool += ["en"] + [f"pad_in{j}" for j in range(4)]
    pool += [f"fsm_q{i}" for i in range(len(fsm_ffs))]
    pool += [f"cnt_q{i}" for i in range(counter_bits)]
    _pad_with_logic(nl, rng, padding, pool)
    _expose_dangling(nl)

    # binary codes are indices into the sorted state list, so original states
    # keep their plain-FSM codes and the lock only adds high codes
    locked_codes = {s: i for i, s in enumerate(sorted(locked.states))}
    from . import jsonio
    sidecar = {
        "kind": "harpoon_fsm",
        "key": list(key),
        "extra_loop_states": extra_states,
        "fsm_ff_ids": fsm_ffs,
        "counter_ff_ids": counter_ffs,
        "fsm_input_nets": [f"fsm_in{j}" for j in range(input_bits)],
        "original_stg": stg.to_obj(),
        "locked_stg": locked.to_obj(),
        "original_reset_code": locked_codes[stg.reset_state],
        "original_state_codes": sorted(locked_codes[s] for s in stg.states),
        "plain_width": len(fsm.synthesized_state_ffs(plain_nl)),
        "locked_width": len(fsm_ffs),
        "pre_obfuscation_netlist": jsonio.write_json_netlist(plain_nl),
    }
    return GeneratedProject(netlist=nl, sidecar=sidecar)


# --- project 4: AES with a fixed key ---------------------------------------------------


def _emit_sbox_slice(nl: model.Netlist, namer: _Namer, input_nets: list[str],
                     output_nets: list[str],
                     in_perm: Optional[list[int]] = None,
                     out_perm: Optional[list[int]] = None) -> None:
    """Shannon-decomposed S-box over 8 nets; optional bit shufflings."""
    in_perm = in_perm or list(range(8))
    out_perm = out_perm or list(range(8))
    var_ids = [nl.ensure_net(n).id for n in input_nets]
    net_names = {nl.ensure_net(n).id: n for n in input_nets}
    for q in range(8):
        j = out_perm[q]
        table = [0] * 256
        for x in range(256):
            # physical input bit p carries S-box input bit in_perm[p]
            logical = 0
            for p in range(8):
                if (x >> p) & 1:
                    logical |= 1 << in_perm[p]
            table[x] = (aesmod.SBOX[logical] >> j) & 1
        fn = boolfn.BooleanFunction(var_ids, table)
        fsm._emit_function(nl, fn, output_nets[q], namer, net_names)


def aes_fixed_key(seed: int, key_hex: str = "") -> GeneratedProject:
    """Round-based AES-128 encrypt datapath with the key baked in.

    One registered round per cycle: 16 byte-sliced S-box instances feed the
    ShiftRows wiring and a MixColumns XOR network; round keys (constants,
    since the key is fixed) enter through per-bit LUTs of the round counter.
    The ciphertext sits in the state register 11 edges after power-up.
    """
    rng = Random(seed)
    if key_hex:
        key = bytes.fromhex(key_hex)
        if len(key) != 16:
            raise SpecInvalid("key_hex must encode 16 bytes")
    else:
        key = bytes(rng.randrange(256) for _ in range(16))
    round_keys = aesmod.expand_key(key)

    nl = model.Netlist(f"aes_{seed}")
    nl.add_input_port("clk")
    nl.set_clock("clk")
    for b in range(128):
        nl.add_input_port(f"pt{b}")
    state = [f"sq{b}" for b in range(128)]
    for name in state:
        nl.ensure_net(name)
    namer = _Namer("w")

    # round counter: 4 bits, free-running
    for i in range(4):
        nl.ensure_net(f"cq{i}")
    for i in range(4):
        value = 0
        for t in range(16):
            if (((t + 1) % 16) >> i) & 1:
                value |= 1 << t
        nl.add_gate(f"cnt_lut{i}", "LUT4", format(value, "04X"),
                    {"I0": "cq0", "I1": "cq1", "I2": "cq2", "I3": "cq3",
                     "O": f"cd{i}"})
    for i in range(4):
        nl.add_gate(f"cnt_ff{i}", "FF", "0",
                    {"D": f"cd{i}", "CLK": "clk", "Q": f"cq{i}"})

    def counter_lut(name: str, truth_by_t) -> str:
        value = 0
        for t in range(16):
            if truth_by_t(t):
                value |= 1 << t
        out = name
        nl.add_gate(f"g_{name}", "LUT4", format(value, "04X"),
                    {"I0": "cq0", "I1": "cq1", "I2": "cq2", "I3": "cq3",
                     "O": out})
        return out

    counter_lut("is_first", lambda t: t == 0)
    counter_lut("is_last", lambda t: t == 10)

    # SubBytes: 16 byte-sliced S-box instances
    sbox_io = []
    for byte in range(16):
        ins = [state[8 * byte + j] for j in range(8)]
        outs = [f"so{8 * byte + j}" for j in range(8)]
        _emit_sbox_slice(nl, namer, ins, outs)
        sbox_io.append({"inputs": ins, "outputs": outs})

    # ShiftRows is wiring: sr bit i reads S-box output byte SHIFT_ROWS_SRC[i//8]
    def sr_net(i: int) -> str:
        return f"so{8 * aesmod._SHIFT_ROWS_SRC[i // 8] + (i % 8)}"

    # MixColumns: per-column GF(2)-linear masks derived from the oracle
    masks = aesmod.mix_columns_bit_masks()
    for c in range(4):
        for k in range(32):
            sources = [sr_net(32 * c + b) for b in range(32)
                       if (masks[k] >> b) & 1]
            _emit_xor(nl, namer, sources, f"mc{32 * c + k}")

    # per-bit round-key LUTs over the counter, then the three data paths
    for i in range(128):
        counter_lut(f"rk{i}",
                    lambda t, i=i: t <= 10 and
                    (round_keys[t][i // 8] >> (i % 8)) & 1)
        nl.add_gate(f"xn{i}", "LUT2", "6",
                    {"I0": f"mc{i}", "I1": f"rk{i}", "O": f"normal{i}"})
        nl.add_gate(f"xl{i}", "LUT2", "6",
                    {"I0": sr_net(i), "I1": f"rk{i}", "O": f"last{i}"})
        nl.add_gate(f"xf{i}", "LUT2", "6",
                    {"I0": f"pt{i}", "I1": f"rk{i}", "O": f"first{i}"})
        nl.add_gate(f"m1_{i}", "MUX2", None,
                    {"I0": f"normal{i}", "I1": f"last{i}", "S": "is_last",
                     "O": f"mid{i}"})
        nl.add_gate(f"m2_{i}", "MUX2", None,
                    {"I0": f"mid{i}", "I1": f"first{i}", "S": "is_first",
                     "O": f"sd{i}"})

    for i in range(128):
        nl.add_gate(f"s_ff{i}", "FF", "0",
                    {"D": f"sd{i}", "CLK": "clk", "Q": state[i]})
    for i in range(128):
        nl.add_gate(f"ct_buf{i}", "BUF", None,
                    {"I": state[i], "O": f"ct{i}"})
        nl.add_output_port(f"ct{i}")

    sidecar = {
        "kind": "aes_fixed_key",
        "key": key.hex(),
        "latency": 11,
        "sbox_instances": sbox_io,
        "plaintext_ports": [f"pt{b}" for b in range(128)],
        "ciphertext_ports": [f"ct{b}" for b in range(128)],
    }
    return GeneratedProject(netlist=nl, sidecar=sidecar)


def sbox_fixture(seed: int, shuffled: bool = False) -> GeneratedProject:
    """A single S-box instance on port nets, optionally with shuffled bits."""
    rng = Random(seed)
    in_perm = list(range(8))
    out_perm = list(range(8))
    if shuffled:
        rng.shuffle(in_perm)
        rng.shuffle(out_perm)
    nl = model.Netlist(f"sbox_{seed}")
    ins = [f"a{p}" for p in range(8)]
    outs = [f"y{q}" for q in range(8)]
    for n in ins:
        nl.add_input_port(n)
    _emit_sbox_slice(nl, _Namer("w"), ins, outs, in_perm, out_perm)
    for n in outs:
        nl.add_output_port(n)
    sidecar = {"kind": "sbox_fixture", "input_perm": in_perm,
               "output_perm": out_perm,
               "inputs": ins, "outputs": outs}
    return GeneratedProject(netlist=nl, sidecar=sidecar)


# --- randomized netlists (format and oracle fodder) -----------------------------------


def random_combinational_netlist(seed: int, n_gates: int = 60,
                                 n_inputs: int = 8) -> model.Netlist:
    """Random acyclic LUT/MUX/BUF/INV logic over a few input ports."""
    rng = Random(seed)
    nl = model.Netlist(f"comb_{seed}")
    pool = []
    for i in range(n_inputs):
        nl.add_input_port(f"x{i}")
        pool.append(f"x{i}")
    for i in range(n_gates):
        roll = rng.random()
        out = f"n{i}"
        if roll < 0.70:
            k = min(rng.randrange(1, 5), len(pool))
            ins = rng.sample(pool, k)
            init = rng.randrange(1 << (1 << k))
            nl.add_gate(f"g{i}", f"LUT{k}",
                        format(init, f"0{((1 << k) + 3) // 4}X"),
                        {**{f"I{j}": n for j, n in enumerate(ins)}, "O": out})
        elif roll < 0.80 and len(pool) >= 3:
            a, b, s = rng.sample(pool, 3)
            nl.add_gate(f"g{i}", "MUX2", None,
                        {"I0": a, "I1": b, "S": s, "O": out})
        elif roll < 0.90:
            kind = "INV" if rng.random() < 0.5 else "BUF"
            nl.add_gate(f"g{i}", kind, None, {"I": rng.choice(pool), "O": out})
        else:
            kind = "VCC" if rng.random() < 0.5 else "GND"
            nl.add_gate(f"g{i}", kind, None, {"O": out})
        pool.append(out)
    _expose_dangling(nl)
    return nl


def random_netlist(seed: int, n_gates: int = 40, n_inputs: int = 6,
                   with_ffs: bool = True) -> model.Netlist:
    """Mixed random netlist (some FFs) for round-trip and session tests."""
    rng = Random(seed)
    nl = model.Netlist(f"rand_{seed}")
    pool = []
    if with_ffs:
        # the first FF added fixes the clock; a zero-FF draw leaves none
        nl.add_input_port("clk")
    for i in range(n_inputs):
        nl.add_input_port(f"x{i}")
        pool.append(f"x{i}")
    for i in range(n_gates):
        roll = rng.random()
        out = f"n{i}"
        if with_ffs and roll < 0.25:
            nl.add_gate(f"g{i}", "FF", str(rng.randrange(2)),
                        {"D": rng.choice(pool), "CLK": "clk", "Q": out})
        else:
            k = min(rng.randrange(1, 5), len(pool))
            ins = rng.sample(pool, k)
            init = rng.randrange(1 << (1 << k))
            nl.add_gate(f"g{i}", f"LUT{k}",
                        format(init, f"0{((1 << k) + 3) // 4}X"),
                        {**{f"I{j}": n for j, n in enumerate(ins)}, "O": out})
        pool.append(out)
    _expose_dangling(nl)
    return nl
