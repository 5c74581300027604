"""In-memory gate-level netlist: gates, nets, ports, submodules, events.

The gate library is a small FPGA-style set: LUT1..LUT6 (truth table in the
INIT string), positive-edge FF with optional synchronous active-high reset,
MUX2, constant drivers VCC/GND, and BUF/INV. Nets are single-driver and are
identified by unique names; gates are identified by dense integer ids assigned
in creation order (names carry no meaning and need not be unique).

Every mutating operation emits exactly one event through the netlist's
listener list, carrying enough arguments to re-apply the operation on a fresh
copy. Session logging (see gatelab.session) builds on this hook.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .errors import (
    DuplicateDriver,
    HierarchyCycle,
    MalformedInit,
    UnknownGate,
    UnknownNet,
    UnknownPin,
    UnknownPrimitive,
    UnknownSubmodule,
)

LUT_KINDS = {f"LUT{k}": k for k in range(1, 7)}
GATE_KINDS = tuple(LUT_KINDS) + ("FF", "MUX2", "VCC", "GND", "BUF", "INV")

# Fixed 12-color palette cycled by create_submodule for reproducible renders.
PALETTE: tuple[tuple[int, int, int], ...] = (
    (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200),
    (245, 130, 48), (145, 30, 180), (70, 240, 240), (240, 50, 230),
    (210, 245, 60), (250, 190, 212), (0, 128, 128), (220, 190, 255),
)


def lut_arity(kind: str) -> Optional[int]:
    return LUT_KINDS.get(kind)


def is_lut(kind: str) -> bool:
    return kind in LUT_KINDS


def is_combinational(kind: str) -> bool:
    return kind != "FF"


def input_pins(kind: str) -> tuple[str, ...]:
    """Required input pin roles of a gate kind, in positional order."""
    k = lut_arity(kind)
    if k is not None:
        return tuple(f"I{i}" for i in range(k))
    if kind == "FF":
        return ("D", "CLK")
    if kind == "MUX2":
        return ("I0", "I1", "S")
    if kind in ("VCC", "GND"):
        return ()
    if kind in ("BUF", "INV"):
        return ("I",)
    raise UnknownPrimitive(f"unknown gate kind {kind!r}")


def optional_pins(kind: str) -> tuple[str, ...]:
    return ("R",) if kind == "FF" else ()


def output_pin(kind: str) -> str:
    return "Q" if kind == "FF" else "O"


def init_bit_count(kind: str) -> Optional[int]:
    """Number of INIT bits the kind carries, or None if it takes no INIT."""
    k = lut_arity(kind)
    if k is not None:
        return 1 << k
    if kind == "FF":
        return 1
    return None


def init_hex_digits(kind: str) -> Optional[int]:
    bits = init_bit_count(kind)
    if bits is None:
        return None
    return (bits + 3) // 4


def normalize_init(kind: str, init: Optional[str]) -> Optional[str]:
    """Validate an INIT string for `kind` and return its canonical form.

    Canonical form is uppercase hex of the exact digit count for the kind;
    bits above the kind's INIT width must be zero.
    """
    bits = init_bit_count(kind)
    if bits is None:
        if init not in (None, ""):
            raise MalformedInit(f"{kind} takes no INIT, got {init!r}")
        return None
    if init is None:
        raise MalformedInit(f"{kind} requires a {bits}-bit INIT")
    digits = (bits + 3) // 4
    if len(init) != digits:
        raise MalformedInit(
            f"{kind} INIT must be {digits} hex digit(s), got {init!r}"
        )
    try:
        value = int(init, 16)
    except ValueError:
        raise MalformedInit(f"INIT {init!r} is not hexadecimal") from None
    if value >> bits:
        raise MalformedInit(f"INIT {init!r} sets bits beyond {bits}")
    return init.upper()


@dataclass
class Gate:
    id: int
    name: str
    gate_type: str
    init: Optional[str]
    pins: dict[str, int]  # pin role -> net id

    @property
    def init_value(self) -> int:
        return int(self.init, 16) if self.init else 0


@dataclass
class Net:
    id: int
    name: str
    driver: Optional[tuple[int, str]] = None  # (gate id, output pin)
    sinks: set[tuple[int, str]] = field(default_factory=set)


@dataclass
class Submodule:
    id: int
    name: str
    color: tuple[int, int, int]
    gate_ids: set[int] = field(default_factory=set)
    parent: Optional[int] = None


# Listener signature: (op name, target ids, canonical args).
EventListener = Callable[[str, list, dict], None]


class Netlist:
    """The single mutable project artifact: gates, nets, ports, submodules."""

    def __init__(self, name: str = "netlist"):
        self.name = name
        self.gates: dict[int, Gate] = {}
        self.nets: dict[int, Net] = {}
        self.input_ports: list[str] = []
        self.output_ports: list[str] = []
        self.clock_net: Optional[int] = None
        self.submodules: dict[int, Submodule] = {}
        self.listeners: list[EventListener] = []
        self._net_by_name: dict[str, int] = {}
        self._next_gate_id = 1
        self._next_net_id = 1
        self._next_submodule_id = 1
        self._palette_cursor = 0

    # -- events --------------------------------------------------------

    def _emit(self, op: str, targets: list, args: dict) -> None:
        for cb in self.listeners:
            cb(op, targets, args)

    # -- net helpers ----------------------------------------------------

    def net_named(self, name: str) -> Optional[Net]:
        nid = self._net_by_name.get(name)
        return self.nets[nid] if nid is not None else None

    def net(self, net_id: int) -> Net:
        try:
            return self.nets[net_id]
        except KeyError:
            raise UnknownNet(f"no net with id {net_id}") from None

    def ensure_net(self, name: str) -> Net:
        """Return the net called `name`, creating it if absent."""
        nid = self._net_by_name.get(name)
        if nid is not None:
            return self.nets[nid]
        net = Net(id=self._next_net_id, name=name)
        self._next_net_id += 1
        self.nets[net.id] = net
        self._net_by_name[name] = net.id
        return net

    def resolve_net(self, ref) -> Net:
        """Accept a net id or name and return the Net."""
        if isinstance(ref, int):
            return self.net(ref)
        net = self.net_named(str(ref))
        if net is None:
            raise UnknownNet(f"no net named {ref!r}")
        return net

    @property
    def input_port_net_ids(self) -> set[int]:
        return {self._net_by_name[p] for p in self.input_ports if p in self._net_by_name}

    @property
    def output_port_net_ids(self) -> set[int]:
        return {self._net_by_name[p] for p in self.output_ports if p in self._net_by_name}

    def add_input_port(self, name: str) -> Net:
        net = self.ensure_net(name)
        if net.driver is not None:
            raise DuplicateDriver(f"net {name!r} is gate-driven, cannot be an input port")
        if name not in self.input_ports:
            self.input_ports.append(name)
        return net

    def add_output_port(self, name: str) -> Net:
        net = self.ensure_net(name)
        if name not in self.output_ports:
            self.output_ports.append(name)
        return net

    def set_clock(self, name: str) -> Net:
        net = self.ensure_net(name)
        self.clock_net = net.id
        return net

    # -- gates -----------------------------------------------------------

    def gate(self, gate_id: int) -> Gate:
        try:
            return self.gates[gate_id]
        except KeyError:
            raise UnknownGate(f"no gate with id {gate_id}") from None

    def add_gate(self, name: str, gate_type: str, init: Optional[str] = None,
                 pins: Optional[dict[str, str]] = None) -> int:
        """Insert a gate; nets referenced in `pins` are created by name.

        All validation happens before any mutation, so a failed call leaves
        the netlist untouched.
        """
        if gate_type not in GATE_KINDS:
            raise UnknownPrimitive(f"unknown gate type {gate_type!r}")
        init_norm = normalize_init(gate_type, init)
        pins = dict(pins or {})

        required = input_pins(gate_type) + (output_pin(gate_type),)
        allowed = set(required) | set(optional_pins(gate_type))
        for pin in pins:
            if pin not in allowed:
                raise UnknownPin(f"{gate_type} has no pin {pin!r}")
        for pin in required:
            if pin not in pins:
                raise UnknownPin(f"{gate_type} pin {pin!r} must be connected")

        out_pin = output_pin(gate_type)
        out_name = pins[out_pin]
        existing_out = self.net_named(out_name)
        if existing_out is not None:
            if existing_out.driver is not None:
                raise DuplicateDriver(
                    f"net {out_name!r} already driven by gate {existing_out.driver[0]}"
                )
            if out_name in self.input_ports:
                raise DuplicateDriver(f"net {out_name!r} is an input port")

        gate = Gate(id=self._next_gate_id, name=name, gate_type=gate_type,
                    init=init_norm, pins={})
        self._next_gate_id += 1
        for pin, net_name in pins.items():
            net = self.ensure_net(net_name)
            gate.pins[pin] = net.id
            if pin == out_pin:
                net.driver = (gate.id, pin)
            else:
                net.sinks.add((gate.id, pin))
        self.gates[gate.id] = gate

        # First FF fixes the clock domain; the library has a single clock.
        if gate_type == "FF" and self.clock_net is None:
            self.clock_net = gate.pins["CLK"]

        self._emit("add_gate", [gate.id], {
            "name": name, "type": gate_type, "init": init_norm,
            "pins": {p: self.nets[n].name for p, n in sorted(gate.pins.items())},
        })
        return gate.id

    def gate_output_net(self, gate_id: int) -> int:
        g = self.gate(gate_id)
        return g.pins[output_pin(g.gate_type)]

    def gate_input_nets(self, gate_id: int) -> list[int]:
        g = self.gate(gate_id)
        return [g.pins[p] for p in input_pins(g.gate_type) if p in g.pins]

    def neighbors(self, gate_id: int, direction: str) -> set[int]:
        """Adjacent gates through nets: drivers (fanin) or sinks (fanout)."""
        g = self.gate(gate_id)
        if direction == "fanin":
            out: set[int] = set()
            for pin in input_pins(g.gate_type) + optional_pins(g.gate_type):
                nid = g.pins.get(pin)
                if nid is None:
                    continue
                drv = self.nets[nid].driver
                if drv is not None:
                    out.add(drv[0])
            return out
        if direction == "fanout":
            net = self.nets[g.pins[output_pin(g.gate_type)]]
            return {gid for gid, _pin in net.sinks}
        raise ValueError(f"direction must be 'fanin' or 'fanout', got {direction!r}")

    # -- submodules -------------------------------------------------------

    def submodule(self, sid: int) -> Submodule:
        try:
            return self.submodules[sid]
        except KeyError:
            raise UnknownSubmodule(f"no submodule with id {sid}") from None

    def create_submodule(self, name: str,
                         color: Optional[tuple[int, int, int]] = None) -> int:
        if color is None:
            color = PALETTE[self._palette_cursor % len(PALETTE)]
            self._palette_cursor += 1
        color = (int(color[0]), int(color[1]), int(color[2]))
        sub = Submodule(id=self._next_submodule_id, name=name, color=color)
        self._next_submodule_id += 1
        self.submodules[sub.id] = sub
        self._emit("create_submodule", [sub.id],
                   {"name": name, "color": list(color)})
        return sub.id

    def assign_gates(self, sid: int, gate_ids: Iterable[int]) -> set[int]:
        """Add gates to a submodule's membership set (idempotent union)."""
        sub = self.submodule(sid)
        ids = list(gate_ids)
        for gid in ids:
            if gid not in self.gates:
                raise UnknownGate(f"no gate with id {gid}")
        sub.gate_ids.update(ids)
        self._emit("assign_gates", [sid] + sorted(ids),
                   {"submodule": sid, "gates": sorted(ids)})
        return set(sub.gate_ids)

    def set_parent(self, sid: int, parent: Optional[int]) -> None:
        sub = self.submodule(sid)
        if parent is not None:
            self.submodule(parent)
            cursor: Optional[int] = parent
            while cursor is not None:
                if cursor == sid:
                    raise HierarchyCycle(
                        f"submodule {parent} is a descendant of {sid}")
                cursor = self.submodules[cursor].parent
        sub.parent = parent
        self._emit("set_parent", [sid], {"submodule": sid, "parent": parent})

    def submodule_depth(self, sid: int) -> int:
        depth = 0
        cursor = self.submodule(sid).parent
        while cursor is not None:
            depth += 1
            cursor = self.submodules[cursor].parent
        return depth

    def submodules_of_gate(self, gate_id: int) -> list[int]:
        self.gate(gate_id)
        return sorted(s.id for s in self.submodules.values()
                      if gate_id in s.gate_ids)

    def effective_color(self, gate_id: int) -> Optional[tuple[int, int, int]]:
        """Display color: the deepest submodule the gate belongs to wins."""
        members = self.submodules_of_gate(gate_id)
        if not members:
            return None
        best = max(members, key=lambda s: (self.submodule_depth(s), -s))
        return self.submodules[best].color

    # -- copies -----------------------------------------------------------

    def copy(self) -> "Netlist":
        """Structural copy; listeners are not carried over."""
        dup = Netlist(self.name)
        dup.input_ports = list(self.input_ports)
        dup.output_ports = list(self.output_ports)
        dup.clock_net = self.clock_net
        dup._net_by_name = dict(self._net_by_name)
        dup._next_gate_id = self._next_gate_id
        dup._next_net_id = self._next_net_id
        dup._next_submodule_id = self._next_submodule_id
        dup._palette_cursor = self._palette_cursor
        for nid, net in self.nets.items():
            dup.nets[nid] = Net(id=net.id, name=net.name, driver=net.driver,
                                sinks=set(net.sinks))
        for gid, g in self.gates.items():
            dup.gates[gid] = Gate(id=g.id, name=g.name, gate_type=g.gate_type,
                                  init=g.init, pins=dict(g.pins))
        for sid, sub in self.submodules.items():
            dup.submodules[sid] = Submodule(id=sub.id, name=sub.name,
                                            color=sub.color,
                                            gate_ids=set(sub.gate_ids),
                                            parent=sub.parent)
        return dup

    def __repr__(self) -> str:
        return (f"Netlist({self.name!r}, gates={len(self.gates)}, "
                f"nets={len(self.nets)})")


@dataclass
class LintReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.errors


def lint(netlist: Netlist) -> LintReport:
    """Referential-integrity errors plus dangling/hygiene warnings."""
    report = LintReport()
    for g in netlist.gates.values():
        for pin, nid in g.pins.items():
            if nid not in netlist.nets:
                report.errors.append(
                    f"gate {g.id} pin {pin} references missing net {nid}")
    for sub in netlist.submodules.values():
        for gid in sub.gate_ids:
            if gid not in netlist.gates:
                report.errors.append(
                    f"submodule {sub.id} references missing gate {gid}")
        if sub.parent is not None and sub.parent not in netlist.submodules:
            report.errors.append(
                f"submodule {sub.id} has missing parent {sub.parent}")

    drivers: dict[int, list[int]] = {}
    for g in netlist.gates.values():
        out = g.pins.get(output_pin(g.gate_type))
        if out is not None:
            drivers.setdefault(out, []).append(g.id)
    for name in netlist.input_ports:
        net = netlist.net_named(name)
        if net is not None and net.id in drivers:
            report.errors.append(
                f"input port {name!r} also driven by gate {drivers[net.id][0]}")
    for nid, who in drivers.items():
        if len(who) > 1:
            report.errors.append(f"net {nid} has multiple drivers: {who}")

    out_ports = set(netlist.output_ports)
    for net in netlist.nets.values():
        if not net.sinks and net.name not in out_ports:
            report.warnings.append(f"net {net.id} ({net.name!r}) has no sinks")
        if net.driver is None and net.name not in netlist.input_ports and net.sinks:
            report.warnings.append(
                f"net {net.id} ({net.name!r}) is read but undriven; simulates as 0")

    _lint_combinational_depth(netlist, report)
    return report


# Path-search bound shared with the graph analyses; cones deeper than this
# are flagged because bounded algorithms stop walking them.
MAX_COMB_DEPTH = 64


def _lint_combinational_depth(netlist: Netlist, report: LintReport) -> None:
    comb = [g for g in netlist.gates.values() if g.gate_type != "FF"]
    producers = {g.pins[output_pin(g.gate_type)]: g.id for g in comb}
    deps: dict[int, list[int]] = {}
    indeg: dict[int, int] = {g.id: 0 for g in comb}
    for g in comb:
        for nid in netlist.gate_input_nets(g.id):
            drv = producers.get(nid)
            if drv is not None:
                deps.setdefault(drv, []).append(g.id)
                indeg[g.id] += 1
    depth = {gid: 1 for gid in indeg}
    ready = [gid for gid, d in indeg.items() if d == 0]
    done = 0
    while ready:
        gid = ready.pop()
        done += 1
        for succ in deps.get(gid, ()):
            depth[succ] = max(depth[succ], depth[gid] + 1)
            indeg[succ] -= 1
            if indeg[succ] == 0:
                ready.append(succ)
    if done < len(comb):
        loop = sorted(gid for gid, d in indeg.items() if d > 0)[:8]
        report.warnings.append(
            f"combinational loop through gates {loop}; simulation will reject it")
    elif depth and max(depth.values()) > MAX_COMB_DEPTH:
        worst = max(depth, key=lambda g: depth[g])
        report.warnings.append(
            f"combinational depth {depth[worst]} exceeds {MAX_COMB_DEPTH} "
            f"(gate {worst}); bounded path searches stop early")
