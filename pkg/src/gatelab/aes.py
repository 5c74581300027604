"""AES fixed-key extraction: locate S-boxes, patch them, read the key out.

Location works purely on function shape: candidate nets are grouped by an
identical 8-net true support, and each group of eight outputs is matched
against the S-box table under input/output bit reorderings (influence
signatures narrow the search; an exact 256-point check confirms every match,
so false positives cannot survive).

Extraction replaces every located S-box with a byte-wide identity, drives the
plaintext with all zeros, and probes the S-box inputs on the first cycle they
move: the state entering the first substitution is plaintext XOR whitening
key, so with zero plaintext the probed bytes are the key itself. A second run
with marker plaintext bytes 0..15 orders the instances into state-array
positions, and an independent software AES re-encryption of random plaintexts
is compared against the unmodified netlist to confirm the recovered key.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from random import Random
from typing import Optional, Sequence

import numpy as np

from . import boolfn, graph, model, sim
from .errors import (
    InstanceStale,
    NotEnoughInstances,
    VerificationFailed,
    WorkbenchError,
)

# Rijndael S-box (FIPS-197 figure 7).
SBOX: tuple[int, ...] = (
    0x63, 0x7C, 0x77, 0x7B, 0xF2, 0x6B, 0x6F, 0xC5, 0x30, 0x01, 0x67, 0x2B, 0xFE, 0xD7, 0xAB, 0x76,
    0xCA, 0x82, 0xC9, 0x7D, 0xFA, 0x59, 0x47, 0xF0, 0xAD, 0xD4, 0xA2, 0xAF, 0x9C, 0xA4, 0x72, 0xC0,
    0xB7, 0xFD, 0x93, 0x26, 0x36, 0x3F, 0xF7, 0xCC, 0x34, 0xA5, 0xE5, 0xF1, 0x71, 0xD8, 0x31, 0x15,
    0x04, 0xC7, 0x23, 0xC3, 0x18, 0x96, 0x05, 0x9A, 0x07, 0x12, 0x80, 0xE2, 0xEB, 0x27, 0xB2, 0x75,
    0x09, 0x83, 0x2C, 0x1A, 0x1B, 0x6E, 0x5A, 0xA0, 0x52, 0x3B, 0xD6, 0xB3, 0x29, 0xE3, 0x2F, 0x84,
    0x53, 0xD1, 0x00, 0xED, 0x20, 0xFC, 0xB1, 0x5B, 0x6A, 0xCB, 0xBE, 0x39, 0x4A, 0x4C, 0x58, 0xCF,
    0xD0, 0xEF, 0xAA, 0xFB, 0x43, 0x4D, 0x33, 0x85, 0x45, 0xF9, 0x02, 0x7F, 0x50, 0x3C, 0x9F, 0xA8,
    0x51, 0xA3, 0x40, 0x8F, 0x92, 0x9D, 0x38, 0xF5, 0xBC, 0xB6, 0xDA, 0x21, 0x10, 0xFF, 0xF3, 0xD2,
    0xCD, 0x0C, 0x13, 0xEC, 0x5F, 0x97, 0x44, 0x17, 0xC4, 0xA7, 0x7E, 0x3D, 0x64, 0x5D, 0x19, 0x73,
    0x60, 0x81, 0x4F, 0xDC, 0x22, 0x2A, 0x90, 0x88, 0x46, 0xEE, 0xB8, 0x14, 0xDE, 0x5E, 0x0B, 0xDB,
    0xE0, 0x32, 0x3A, 0x0A, 0x49, 0x06, 0x24, 0x5C, 0xC2, 0xD3, 0xAC, 0x62, 0x91, 0x95, 0xE4, 0x79,
    0xE7, 0xC8, 0x37, 0x6D, 0x8D, 0xD5, 0x4E, 0xA9, 0x6C, 0x56, 0xF4, 0xEA, 0x65, 0x7A, 0xAE, 0x08,
    0xBA, 0x78, 0x25, 0x2E, 0x1C, 0xA6, 0xB4, 0xC6, 0xE8, 0xDD, 0x74, 0x1F, 0x4B, 0xBD, 0x8B, 0x8A,
    0x70, 0x3E, 0xB5, 0x66, 0x48, 0x03, 0xF6, 0x0E, 0x61, 0x35, 0x57, 0xB9, 0x86, 0xC1, 0x1D, 0x9E,
    0xE1, 0xF8, 0x98, 0x11, 0x69, 0xD9, 0x8E, 0x94, 0x9B, 0x1E, 0x87, 0xE9, 0xCE, 0x55, 0x28, 0xDF,
    0x8C, 0xA1, 0x89, 0x0D, 0xBF, 0xE6, 0x42, 0x68, 0x41, 0x99, 0x2D, 0x0F, 0xB0, 0x54, 0xBB, 0x16,
)


def aes_sbox_table() -> tuple[int, ...]:
    """The S-box constant; self-checks that it is a permutation with S(0)=0x63."""
    assert len(SBOX) == 256 and len(set(SBOX)) == 256 and SBOX[0] == 0x63
    return SBOX


@lru_cache(maxsize=1)
def aes_inverse_sbox() -> tuple[int, ...]:
    inv = [0] * 256
    for x, y in enumerate(SBOX):
        inv[y] = x
    return tuple(inv)


# --- reference AES-128 (software oracle) -------------------------------------

_SHIFT_ROWS_SRC: tuple[int, ...] = tuple(
    (i % 4) + 4 * (((i // 4) + (i % 4)) % 4) for i in range(16)
)


def _xtime(b: int) -> int:
    b <<= 1
    return (b ^ 0x1B) & 0xFF if b & 0x100 else b


def expand_key(key: bytes) -> list[bytes]:
    """AES-128 key schedule: eleven 16-byte round keys."""
    if len(key) != 16:
        raise ValueError("AES-128 key must be 16 bytes")
    words = [list(key[4 * i:4 * i + 4]) for i in range(4)]
    rcon = 1
    for i in range(4, 44):
        temp = list(words[i - 1])
        if i % 4 == 0:
            temp = temp[1:] + temp[:1]
            temp = [SBOX[b] for b in temp]
            temp[0] ^= rcon
            rcon = _xtime(rcon)
        words.append([a ^ b for a, b in zip(words[i - 4], temp)])
    return [bytes(sum(words[4 * r:4 * r + 4], [])) for r in range(11)]


def _sub_bytes(state: list[int]) -> list[int]:
    return [SBOX[b] for b in state]


def _shift_rows(state: list[int]) -> list[int]:
    return [state[_SHIFT_ROWS_SRC[i]] for i in range(16)]


def _mix_columns(state: list[int]) -> list[int]:
    out = [0] * 16
    for c in range(4):
        s = state[4 * c:4 * c + 4]
        out[4 * c + 0] = _xtime(s[0]) ^ _xtime(s[1]) ^ s[1] ^ s[2] ^ s[3]
        out[4 * c + 1] = s[0] ^ _xtime(s[1]) ^ _xtime(s[2]) ^ s[2] ^ s[3]
        out[4 * c + 2] = s[0] ^ s[1] ^ _xtime(s[2]) ^ _xtime(s[3]) ^ s[3]
        out[4 * c + 3] = _xtime(s[0]) ^ s[0] ^ s[1] ^ s[2] ^ _xtime(s[3])
    return out


def encrypt_block(key: bytes, plaintext: bytes) -> bytes:
    """Reference AES-128 ECB encryption of one block."""
    if len(plaintext) != 16:
        raise ValueError("plaintext block must be 16 bytes")
    rks = expand_key(key)
    state = [b ^ k for b, k in zip(plaintext, rks[0])]
    for r in range(1, 10):
        state = _mix_columns(_shift_rows(_sub_bytes(state)))
        state = [b ^ k for b, k in zip(state, rks[r])]
    state = _shift_rows(_sub_bytes(state))
    return bytes(b ^ k for b, k in zip(state, rks[10]))


def mix_columns_bit_masks() -> list[int]:
    """GF(2)-linear masks: output bit i of one MixColumns column = XOR of the
    32 input bits selected by mask i. Derived from the reference by pushing
    basis vectors through, so netlist synthesis cannot drift from the oracle.
    """
    masks = [0] * 32
    for bit in range(32):
        col = [0, 0, 0, 0]
        col[bit // 8] = 1 << (bit % 8)
        mixed = _mix_columns(col + [0] * 12)[:4]
        for out_bit in range(32):
            if (mixed[out_bit // 8] >> (out_bit % 8)) & 1:
                masks[out_bit] |= 1 << bit
    return masks


# --- influence signatures -----------------------------------------------------


def _influence_matrix(tables: Sequence[Sequence[int]]) -> list[list[int]]:
    """entry [i][j]: how many inputs x have bit j of f(x) flip with input bit i."""
    matrix = [[0] * len(tables) for _ in range(8)]
    for i in range(8):
        for x in range(256):
            y = x ^ (1 << i)
            if x > y:
                continue
            for j, tab in enumerate(tables):
                if tab[x] != tab[y]:
                    matrix[i][j] += 2
    return matrix


@lru_cache(maxsize=1)
def _sbox_bit_tables() -> tuple[tuple[int, ...], ...]:
    return tuple(tuple((SBOX[x] >> j) & 1 for x in range(256)) for j in range(8))


@lru_cache(maxsize=1)
def _sbox_influence() -> list[list[int]]:
    return _influence_matrix(_sbox_bit_tables())


# --- location -------------------------------------------------------------------


@dataclass
class SboxInstance:
    """One byte-sliced S-box: nets ordered so index = semantic bit (LSB=0)."""

    input_nets: tuple[int, ...]
    output_nets: tuple[int, ...]
    gate_ids: frozenset[int]
    bit_mapping: dict = field(default_factory=dict)

    def to_obj(self, netlist: Optional[model.Netlist] = None) -> dict:
        def names(nids):
            if netlist is None:
                return list(nids)
            return [netlist.nets[n].name for n in nids]
        return {
            "inputs": names(self.input_nets),
            "outputs": names(self.output_nets),
            "gates": sorted(self.gate_ids),
            "bit_mapping": self.bit_mapping,
        }


def _structural_supports(netlist: model.Netlist, cap: int = 12,
                         ) -> dict[int, frozenset[int]]:
    """Boundary-net support of every combinationally driven net, bottom-up.

    Supports larger than `cap` are dropped; the S-box hunt only cares about
    width-8 cones and wide datapath nets would otherwise dominate the cost.
    """
    try:
        plan = sim.compile(netlist)
    except Exception:
        return {}
    boundary = boolfn.default_boundary(netlist)
    supports: dict[int, Optional[frozenset[int]]] = {}

    def of(nid: int) -> Optional[frozenset[int]]:
        if nid in boundary:
            return frozenset((nid,))
        got = supports.get(nid)
        if got is not None:
            return got
        if nid in supports:  # stored None: oversized
            return None
        return frozenset((nid,)) if netlist.nets[nid].driver is None else None

    for out, ins, _table in plan.ops:
        acc: set[int] = set()
        dead = False
        for nid in ins:
            s = of(nid)
            if s is None:
                dead = True
                break
            acc |= s
            if len(acc) > cap:
                dead = True
                break
        supports[out] = None if dead else frozenset(acc)
    return {nid: s for nid, s in supports.items() if s is not None}


def _match_sbox(tables: list[np.ndarray]) -> Optional[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Match 8 candidate bit tables (over a fixed input order) to the S-box.

    Returns (input_perm, output_perm): input_perm[p] is the S-box input bit
    carried by candidate input position p, output_perm[q] the S-box output
    bit computed by candidate output q. None if no bijection reproduces the
    table at all 256 points.
    """
    ref_bits = _sbox_bit_tables()

    def check(perm: Sequence[int]) -> Optional[tuple[int, ...]]:
        # remap candidate input positions onto S-box input bits
        remap = [0] * 256
        for x in range(256):
            y = 0
            for p in range(8):
                if (x >> perm[p]) & 1:
                    y |= 1 << p
            remap[x] = y  # candidate index for S-box input x
        out_perm: list[int] = []
        used: set[int] = set()
        for q in range(8):
            cand = tuple(int(tables[q][remap[x]]) for x in range(256))
            for j in range(8):
                if j not in used and cand == ref_bits[j]:
                    used.add(j)
                    out_perm.append(j)
                    break
            else:
                return None
        return tuple(out_perm)

    identity = tuple(range(8))
    got = check(identity)
    if got is not None:
        return identity, got

    cand_matrix = _influence_matrix([t.tolist() for t in tables])
    ref_matrix = _sbox_influence()
    ref_sig = {i: tuple(sorted(ref_matrix[i])) for i in range(8)}
    cand_sig = {p: tuple(sorted(cand_matrix[p])) for p in range(8)}

    # choices[p]: reference input bits with the same unordered influence row
    choices = []
    for p in range(8):
        opts = [i for i in range(8) if ref_sig[i] == cand_sig[p]]
        if not opts:
            return None
        choices.append(opts)

    # Iterate consistent bijections; signature classes keep this tiny for the
    # real S-box, and the cap bounds adversarial inputs.
    tried = 0
    for assignment in itertools.product(*choices):
        if len(set(assignment)) != 8:
            continue
        tried += 1
        if tried > 40320:  # 8!, the exhaustive-fallback budget
            return None
        got = check(assignment)
        if got is not None:
            return tuple(assignment), got
    return None


def locate_sbox(netlist: model.Netlist) -> list[SboxInstance]:
    """Find every byte-sliced S-box by support grouping + table matching."""
    supports = _structural_supports(netlist)
    out_ports = set(netlist.output_ports)
    groups: dict[frozenset[int], list[int]] = {}
    for nid, sup in supports.items():
        if len(sup) != 8:
            continue
        net = netlist.nets[nid]
        if not net.sinks and net.name not in out_ports:
            continue  # dead cone (e.g. a patched-out instance), not live logic
        groups.setdefault(sup, []).append(nid)

    instances: list[SboxInstance] = []
    for sup, nets in sorted(groups.items(), key=lambda kv: min(kv[1])):
        if len(nets) != 8:
            continue
        inputs = sorted(sup)
        outputs = sorted(nets)
        try:
            fns = boolfn.net_functions(netlist, outputs, boundary=set(sup))
        except WorkbenchError:
            continue
        tables = []
        ok = True
        for o in outputs:
            fn = fns[o]
            if set(fn.support()) != set(inputs):
                ok = False
                break
            tables.append(fn.remapped(inputs).table)
        if not ok:
            continue
        match = _match_sbox(tables)
        if match is None:
            continue
        input_perm, output_perm = match
        ordered_inputs = [0] * 8
        for p in range(8):
            ordered_inputs[input_perm[p]] = inputs[p]
        ordered_outputs = [0] * 8
        for q in range(8):
            ordered_outputs[output_perm[q]] = outputs[q]
        gate_ids: set[int] = set()
        for o in outputs:
            cone_gates, _frontier = graph.combinational_cone(netlist, o)
            gate_ids |= cone_gates
        instances.append(SboxInstance(
            input_nets=tuple(ordered_inputs),
            output_nets=tuple(ordered_outputs),
            gate_ids=frozenset(gate_ids),
            bit_mapping={
                "input_perm": list(input_perm),
                "output_perm": list(output_perm),
                "identity": input_perm == tuple(range(8))
                            and output_perm == tuple(range(8)),
            },
        ))
    instances.sort(key=lambda inst: min(inst.input_nets))
    return instances


def patch_sbox_identity(netlist: model.Netlist,
                        instance: SboxInstance) -> model.Netlist:
    """Rewire an instance's outputs to BUFs of the matching inputs.

    The original S-box gates stay but their outputs move onto fresh dangling
    nets, so the patched netlist still lints clean (warnings only).
    """
    for nid in instance.input_nets + instance.output_nets:
        if nid not in netlist.nets:
            raise InstanceStale(f"net {nid} no longer exists")
    for nid in instance.output_nets:
        drv = netlist.nets[nid].driver
        if drv is None or drv[0] not in instance.gate_ids:
            raise InstanceStale(
                f"net {nid} is no longer driven by the located S-box")

    patched = netlist.copy()
    for bit, out_net_id in enumerate(instance.output_nets):
        out_net = patched.nets[out_net_id]
        gid, pin = out_net.driver
        stub = patched.ensure_net(f"{out_net.name}__cut")
        stub.driver = (gid, pin)
        patched.gates[gid].pins[pin] = stub.id
        out_net.driver = None
        patched.add_gate(
            f"sbox_bypass_{out_net.name}", "BUF", None,
            {"I": patched.nets[instance.input_nets[bit]].name,
             "O": out_net.name})
    return patched


# --- key extraction ---------------------------------------------------------------


@dataclass
class AesClocking:
    """How to drive and read the datapath: port order and round latency."""

    plaintext_ports: tuple[str, ...]  # 128 ports, index = 8*byte + bit
    ciphertext_ports: tuple[str, ...]
    latency: int = 11  # clock edges until the ciphertext sits in the state FFs

    @classmethod
    def from_netlist(cls, netlist: model.Netlist, latency: int = 11) -> "AesClocking":
        def ordered(prefix: str) -> tuple[str, ...]:
            found = [p for p in netlist.input_ports + netlist.output_ports
                     if p.startswith(prefix) and p[len(prefix):].isdigit()]
            return tuple(sorted(set(found), key=lambda p: int(p[len(prefix):])))
        return cls(plaintext_ports=ordered("pt"), ciphertext_ports=ordered("ct"),
                   latency=latency)


@dataclass
class KeyExtraction:
    key: bytes
    probe_row: int
    positions: tuple[int, ...]  # state-array byte index per instance
    verified: bool
    evidence: dict = field(default_factory=dict)

    @property
    def key_hex(self) -> str:
        return self.key.hex()


def _plaintext_stimulus(clocking: AesClocking, block: bytes,
                        cycles: int) -> sim.Stimulus:
    values = {}
    for i, port in enumerate(clocking.plaintext_ports):
        values[port] = (block[i // 8] >> (i % 8)) & 1
    return sim.Stimulus.constant(cycles, values)


def _instance_bytes(trace: sim.Trace, n_instances: int) -> list[list[int]]:
    """Per instance, per row, the probed byte (probes are 8 bits LSB-first)."""
    out = []
    for i in range(n_instances):
        rows = []
        for row in trace.rows:
            byte = 0
            for j in range(8):
                byte |= row[8 * i + j] << j
            rows.append(byte)
        out.append(rows)
    return out


def extract_key(netlist: model.Netlist, instances: Sequence[SboxInstance],
                clocking: Optional[AesClocking] = None,
                verify_blocks: int = 10, verify_seed: int = 1) -> KeyExtraction:
    """Recover the hard-coded whitening key of an AES-128 encrypt datapath."""
    if len(instances) != 16:
        raise NotEnoughInstances(
            f"need all 16 S-box instances, got {len(instances)}")
    if clocking is None:
        clocking = AesClocking.from_netlist(netlist)
    if len(clocking.plaintext_ports) != 128:
        raise VerificationFailed(
            f"expected 128 plaintext ports, found {len(clocking.plaintext_ports)}")

    patched = netlist
    for inst in instances:
        patched = patch_sbox_identity(patched, inst)
    plan = sim.compile(patched)
    probes: list[int] = []
    for inst in instances:
        probes.extend(inst.input_nets)

    cycles = clocking.latency
    zero_trace = sim.run(plan, _plaintext_stimulus(clocking, bytes(16), cycles),
                         probes)
    marker_block = bytes(range(16))
    marker_trace = sim.run(plan, _plaintext_stimulus(clocking, marker_block, cycles),
                           probes)
    zero_bytes = _instance_bytes(zero_trace, 16)
    marker_bytes = _instance_bytes(marker_trace, 16)

    # First row on which any probed byte moves: that is when the substitution
    # first sees key-dependent state. All-zero keys never move under zero
    # plaintext, hence the marker run doubles as the detector.
    probe_row = 1
    for row in range(1, cycles + 1):
        moved = any(zb[row] != zb[0] for zb in zero_bytes) or \
                any(mb[row] != mb[0] for mb in marker_bytes)
        if moved:
            probe_row = row
            break

    positions = [zb[probe_row] ^ mb[probe_row]
                 for zb, mb in zip(zero_bytes, marker_bytes)]
    if sorted(positions) != list(range(16)):
        raise VerificationFailed(
            f"marker run did not order the instances: {positions}")
    key = bytearray(16)
    for inst_idx, pos in enumerate(positions):
        key[pos] = zero_bytes[inst_idx][probe_row]
    key = bytes(key)

    # Confirm against the untouched netlist with an independent software AES.
    rng = Random(verify_seed)
    original_plan = sim.compile(netlist)
    ct_ports = list(clocking.ciphertext_ports)
    matched = 0
    for _ in range(verify_blocks):
        block = bytes(rng.randrange(256) for _ in range(16))
        expected = encrypt_block(key, block)
        trace = sim.run(original_plan,
                        _plaintext_stimulus(clocking, block, clocking.latency),
                        ct_ports)
        row = trace.rows[clocking.latency]
        got = bytearray(16)
        for i, _port in enumerate(ct_ports):
            got[i // 8] |= row[i] << (i % 8)
        if bytes(got) != expected:
            raise VerificationFailed(
                f"recovered key {key.hex()} does not reproduce the netlist's "
                f"ciphertext for plaintext {block.hex()}")
        matched += 1

    return KeyExtraction(
        key=key, probe_row=probe_row, positions=tuple(positions),
        verified=True,
        evidence={
            "probe_row": probe_row,
            "positions": positions,
            "instances": [inst.to_obj(netlist) for inst in instances],
            "verification": {"blocks": verify_blocks, "matched": matched,
                             "seed": verify_seed},
        })
