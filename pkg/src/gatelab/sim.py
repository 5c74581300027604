"""Cycle-accurate two-valued netlist simulation.

A netlist compiles once into an evaluation plan: combinational gates in
topological order, each reduced to a truth-table lookup, with FFs as the
sequential boundary. Runs over one plan are independent, so a compiled plan
can be shared.

Timing model: one global clock, synchronous FFs, no X/Z. Trace row 0 is the
post-power-up state (FFs at their INIT bits) settled with cycle-0 inputs; row
t is the state after t clock edges. The final row settles with the last
cycle's inputs held. Undriven nets read as constant 0.
"""

from __future__ import annotations

import heapq
import io
from dataclasses import dataclass, field
from random import Random
from typing import Optional, Sequence, Union

from . import model
from .errors import CombinationalCycle, UnknownProbe


@dataclass
class Stimulus:
    """Per-cycle input bits; ports left out are driven 0 (and recorded so)."""

    cycles: int
    inputs: dict[str, list[int]] = field(default_factory=dict)
    reset_cycles: int = 0
    reset_port: Optional[str] = None

    @classmethod
    def constant(cls, cycles: int, values: dict[str, int]) -> "Stimulus":
        return cls(cycles=cycles,
                   inputs={p: [b & 1] * cycles for p, b in values.items()})

    @classmethod
    def random(cls, ports: Sequence[str], cycles: int, seed: int) -> "Stimulus":
        rng = Random(seed)
        return cls(cycles=cycles,
                   inputs={p: [rng.randrange(2) for _ in range(cycles)]
                           for p in ports})

    def bit(self, port: str, cycle: int) -> int:
        if self.reset_port == port and cycle < self.reset_cycles:
            return 1
        seq = self.inputs.get(port)
        if not seq:
            return 0
        return seq[min(cycle, len(seq) - 1)] & 1


@dataclass(frozen=True)
class Plan:
    netlist_name: str
    net_count: int
    net_names: dict[str, int]
    input_nets: tuple[tuple[str, int], ...]
    clock_nets: tuple[int, ...]
    ops: tuple[tuple[int, tuple[int, ...], int], ...]  # (out, ins, table)
    ffs: tuple[tuple[int, int, Optional[int], int], ...]  # (q, d, r, init)
    max_net_id: int


# Pin-order truth tables for the fixed-function kinds.
_FIXED_TABLES = {"MUX2": 0xCA, "BUF": 0b10, "INV": 0b01, "VCC": 1, "GND": 0}


def _gate_table(gate: model.Gate) -> int:
    """Truth table over the gate's raw input-pin order (I0 = LSB)."""
    if model.is_lut(gate.gate_type):
        return gate.init_value
    return _FIXED_TABLES[gate.gate_type]


def compile(netlist: model.Netlist) -> Plan:
    """Topologically order the combinational gates into table lookups.

    Raises CombinationalCycle naming the gates of one loop if the non-FF
    subgraph is cyclic.
    """
    comb = [g for g in netlist.gates.values() if g.gate_type != "FF"]
    producers: dict[int, int] = {}
    for g in comb:
        producers[g.pins[model.output_pin(g.gate_type)]] = g.id

    deps: dict[int, set[int]] = {}
    rdeps: dict[int, set[int]] = {}
    for g in comb:
        ds = {producers[nid] for nid in netlist.gate_input_nets(g.id)
              if nid in producers}
        deps[g.id] = set(ds)
        for d in ds:
            rdeps.setdefault(d, set()).add(g.id)

    order: list[int] = []
    pending = {gid: len(ds) for gid, ds in deps.items()}
    heap = [gid for gid, ds in deps.items() if not ds]
    heapq.heapify(heap)
    while heap:
        gid = heapq.heappop(heap)
        order.append(gid)
        for succ in rdeps.get(gid, ()):
            pending[succ] -= 1
            if pending[succ] == 0:
                heapq.heappush(heap, succ)
    if len(order) < len(comb):
        leftover = {gid for gid in deps if pending[gid] > 0}
        cycle = _find_cycle(deps, leftover)
        raise CombinationalCycle(
            f"combinational loop through gates {sorted(cycle)}",
            members=tuple(sorted(cycle)))

    ops = []
    for gid in order:
        g = netlist.gates[gid]
        pin_nets = tuple(g.pins[p] for p in model.input_pins(g.gate_type))
        ops.append((g.pins[model.output_pin(g.gate_type)], pin_nets,
                    _gate_table(g)))

    ffs = []
    for gid in sorted(netlist.gates):
        g = netlist.gates[gid]
        if g.gate_type == "FF":
            ffs.append((g.pins["Q"], g.pins["D"], g.pins.get("R"),
                        g.init_value & 1))

    clock_nets = tuple(sorted({g.pins["CLK"] for g in netlist.gates.values()
                               if g.gate_type == "FF"}))
    max_net = max(netlist.nets) if netlist.nets else 0
    return Plan(
        netlist_name=netlist.name,
        net_count=len(netlist.nets),
        net_names={n.name: n.id for n in netlist.nets.values()},
        input_nets=tuple((p, netlist.nets[netlist._net_by_name[p]].id)
                         for p in netlist.input_ports),
        clock_nets=clock_nets,
        ops=tuple(ops),
        ffs=tuple(ffs),
        max_net_id=max_net,
    )


def _find_cycle(deps: dict[int, set[int]], leftover: set[int]) -> list[int]:
    start = min(leftover)
    path: list[int] = []
    seen: dict[int, int] = {}
    node = start
    while node not in seen:
        seen[node] = len(path)
        path.append(node)
        node = min(d for d in deps[node] if d in leftover)
    return path[seen[node]:]


@dataclass
class Trace:
    probe_names: tuple[str, ...]
    rows: list[tuple[int, ...]]  # per cycle, probe values
    ff_ids: tuple[int, ...]
    ff_rows: list[tuple[int, ...]]  # per cycle, FF Q values

    def column(self, probe: str) -> list[int]:
        i = self.probe_names.index(probe)
        return [row[i] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("cycle," + ",".join(self.probe_names) + "\n")
        for t, row in enumerate(self.rows):
            buf.write(f"{t}," + ",".join(str(b) for b in row) + "\n")
        return buf.getvalue()

    def to_wave_text(self) -> str:
        """VCD-flavored rendering: one line per probe, one char per cycle."""
        width = max((len(p) for p in self.probe_names), default=0)
        lines = []
        for i, p in enumerate(self.probe_names):
            bits = "".join(str(row[i]) for row in self.rows)
            lines.append(f"{p.rjust(width)} {bits}")
        return "\n".join(lines) + ("\n" if lines else "")


def run(plan: Plan, stimulus: Stimulus,
        probes: Sequence[Union[str, int]] = ()) -> Trace:
    """Simulate `stimulus.cycles` clock edges; returns cycles+1 trace rows."""
    probe_ids: list[int] = []
    probe_names: list[str] = []
    id_to_name = {nid: name for name, nid in plan.net_names.items()}
    for probe in probes:
        if isinstance(probe, int):
            if probe not in id_to_name:
                raise UnknownProbe(f"no net with id {probe}")
            probe_ids.append(probe)
            probe_names.append(id_to_name[probe])
        else:
            nid = plan.net_names.get(str(probe))
            if nid is None:
                raise UnknownProbe(f"no net named {probe!r}")
            probe_ids.append(nid)
            probe_names.append(str(probe))

    values = [0] * (plan.max_net_id + 1)
    for q, _d, _r, init in plan.ffs:
        values[q] = init

    ops = plan.ops
    ffs = plan.ffs
    rows: list[tuple[int, ...]] = []
    ff_rows: list[tuple[int, ...]] = []
    n_cycles = stimulus.cycles

    for t in range(n_cycles + 1):
        in_cycle = min(t, n_cycles - 1) if n_cycles else 0
        for port, nid in plan.input_nets:
            values[nid] = stimulus.bit(port, in_cycle)
        for out, ins, table in ops:
            idx = 0
            for p, nid in enumerate(ins):
                idx |= values[nid] << p
            values[out] = (table >> idx) & 1
        rows.append(tuple(values[nid] for nid in probe_ids))
        ff_rows.append(tuple(values[q] for q, _d, _r, _i in ffs))
        if t < n_cycles:
            loaded = [init if (r is not None and values[r]) else values[d]
                      for _q, d, r, init in ffs]
            for (q, _d, _r, _i), bit in zip(ffs, loaded):
                values[q] = bit

    return Trace(probe_names=tuple(probe_names), rows=rows,
                 ff_ids=tuple(q for q, _d, _r, _i in ffs), ff_rows=ff_rows)


def settle(netlist: model.Netlist, assignment: dict[str, int],
           probes: Sequence[str]) -> dict[str, int]:
    """One combinational settle; convenience wrapper for oracle tests."""
    plan = compile(netlist)
    stim = Stimulus.constant(1, assignment)
    trace = run(plan, stim, probes)
    return dict(zip(trace.probe_names, trace.rows[0]))
