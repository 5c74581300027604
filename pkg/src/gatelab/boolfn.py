"""Boolean functions of netlist logic as complete truth tables.

A function is an ordered, duplicate-free tuple of net-id variables plus a
2^n-entry table (numpy uint8, frozen after construction). Variable 0 is the
least significant index bit. Tables are capped at 20 variables (1 Mbit), which
keeps every operation exact and cheap to test; cone recovery refuses larger
supports rather than approximating.

LUT INIT encoding: table bit i is the output when the inputs spell i in
binary with I0 as the least significant bit.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import model
from .errors import (
    ArityMismatch,
    CombinationalCycle,
    ConeEscape,
    MappingMismatch,
    MissingAssignment,
    SupportOverflow,
    UnknownVariable,
)

MAX_VARS = 20

# Pin-order truth tables for the non-LUT combinational kinds.
# MUX2 variables are (I0, I1, S): output = S ? I1 : I0.
_MUX2_TABLE = 0xCA
_BUF_TABLE = 0b10
_INV_TABLE = 0b01


class BooleanFunction:
    """Immutable truth table over an ordered list of net-id variables."""

    __slots__ = ("variables", "table")

    def __init__(self, variables: Sequence[int], table: np.ndarray):
        variables = tuple(int(v) for v in variables)
        if len(set(variables)) != len(variables):
            raise ArityMismatch(f"duplicate variables in {variables}")
        if len(variables) > MAX_VARS:
            raise SupportOverflow(
                f"{len(variables)} variables exceeds the cap of {MAX_VARS}")
        table = np.asarray(table, dtype=np.uint8)
        if table.shape != (1 << len(variables),):
            raise ArityMismatch(
                f"table length {table.shape} does not match {len(variables)} variables")
        table = table & 1
        table.flags.writeable = False
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "table", table)

    def __setattr__(self, name, value):  # immutability guard
        raise AttributeError("BooleanFunction is immutable")

    # -- constructors ---------------------------------------------------

    @classmethod
    def constant(cls, bit: int) -> "BooleanFunction":
        return cls((), np.array([bit & 1], dtype=np.uint8))

    @classmethod
    def variable(cls, net_id: int) -> "BooleanFunction":
        return cls((net_id,), np.array([0, 1], dtype=np.uint8))

    @classmethod
    def from_table_value(cls, variables: Sequence[int], value: int) -> "BooleanFunction":
        n = len(variables)
        nbits = 1 << n
        raw = value.to_bytes((nbits + 7) // 8, "little")
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8),
                             bitorder="little")[:nbits]
        return cls(variables, bits)

    def table_value(self) -> int:
        """The table packed into an int (bit i = entry i)."""
        value = 0
        for i in np.flatnonzero(self.table):
            value |= 1 << int(i)
        return value

    def __eq__(self, other) -> bool:
        return (isinstance(other, BooleanFunction)
                and self.variables == other.variables
                and np.array_equal(self.table, other.table))

    def __hash__(self):
        return hash((self.variables, self.table.tobytes()))

    def __repr__(self) -> str:
        return f"BooleanFunction(vars={self.variables}, table=0x{self.table_value():X})"

    # -- pointwise ------------------------------------------------------

    def index_of(self, assignment: Mapping[int, int]) -> int:
        idx = 0
        for pos, v in enumerate(self.variables):
            if v not in assignment:
                raise MissingAssignment(f"no value for variable net {v}")
            idx |= (assignment[v] & 1) << pos
        return idx

    def evaluate(self, assignment: Mapping[int, int]) -> int:
        return int(self.table[self.index_of(assignment)])

    # -- algebra ----------------------------------------------------------

    def compose(self, var: int, g: "BooleanFunction") -> "BooleanFunction":
        """Substitute function `g` for variable `var`.

        Result variables: self's variables minus `var` in order, then g's
        variables not already present appended in g's order.
        """
        if var not in self.variables:
            raise UnknownVariable(f"net {var} is not a variable of this function")
        kept = [v for v in self.variables if v != var]
        new_vars = kept + [u for u in g.variables if u not in kept]
        if len(new_vars) > MAX_VARS:
            raise SupportOverflow(
                f"composition needs {len(new_vars)} variables (cap {MAX_VARS})")
        n = len(new_vars)
        idx = np.arange(1 << n, dtype=np.int64)
        pos = {v: p for p, v in enumerate(new_vars)}
        bit = [(idx >> p) & 1 for p in range(n)]

        if g.variables:
            g_idx = np.zeros(1 << n, dtype=np.int64)
            for q, u in enumerate(g.variables):
                g_idx |= bit[pos[u]] << q
            g_val = g.table[g_idx].astype(np.int64)
        else:
            g_val = np.full(1 << n, int(g.table[0]), dtype=np.int64)

        f_idx = np.zeros(1 << n, dtype=np.int64)
        for q, w in enumerate(self.variables):
            f_idx |= (g_val if w == var else bit[pos[w]]) << q
        return BooleanFunction(new_vars, self.table[f_idx])

    def restricted(self, var: int, value: int) -> "BooleanFunction":
        """Cofactor: fix `var` to `value` and drop it from the variables."""
        if var not in self.variables:
            raise UnknownVariable(f"net {var} is not a variable of this function")
        p = self.variables.index(var)
        rest = self.variables[:p] + self.variables[p + 1:]
        idx = np.arange(1 << len(rest), dtype=np.int64)
        low = idx & ((1 << p) - 1)
        high = (idx >> p) << (p + 1)
        src = high | ((value & 1) << p) | low
        return BooleanFunction(rest, self.table[src])

    def depends_on(self, var: int) -> bool:
        if var not in self.variables:
            return False
        p = self.variables.index(var)
        idx = np.arange(1 << len(self.variables), dtype=np.int64)
        return not np.array_equal(self.table[idx & ~(1 << p)],
                                  self.table[idx | (1 << p)])

    def support(self) -> frozenset[int]:
        """Variables the function truly depends on (cofactor difference)."""
        return frozenset(v for v in self.variables if self.depends_on(v))

    def support_reduced(self) -> "BooleanFunction":
        """Drop dummy variables; remaining variables sorted by net id."""
        sup = sorted(self.support())
        return self.remapped(sup)

    def remapped(self, order: Sequence[int]) -> "BooleanFunction":
        """Re-express over `order`, which must cover the true support.

        Dummy variables of self that are absent from `order` are dropped;
        members of `order` the function ignores become dummies.
        """
        order = [int(v) for v in order]
        f = self
        for v in self.variables:
            if v not in order and f.depends_on(v):
                raise UnknownVariable(
                    f"target order drops live variable net {v}")
        if len(order) > MAX_VARS:
            raise SupportOverflow(f"{len(order)} variables (cap {MAX_VARS})")
        n = len(order)
        idx = np.arange(1 << n, dtype=np.int64)
        pos = {v: p for p, v in enumerate(order)}
        src = np.zeros(1 << n, dtype=np.int64)
        for q, w in enumerate(f.variables):
            if w in pos:
                src |= ((idx >> pos[w]) & 1) << q
            # absent dummies read as 0
        return BooleanFunction(order, f.table[src])

    def renamed(self, mapping: Mapping[int, int]) -> "BooleanFunction":
        new_vars = [mapping.get(v, v) for v in self.variables]
        return BooleanFunction(new_vars, self.table.copy())

    def equivalent(self, other: "BooleanFunction",
                   mapping: Optional[Mapping[int, int]] = None) -> bool:
        """Pointwise equality after dummy-variable reduction.

        With no mapping, variables pair up by net id; the true supports must
        then coincide. With a mapping, it must restrict to a bijection from
        this function's support onto the other's.
        """
        f = self.support_reduced()
        g = other.support_reduced()
        if mapping is not None:
            img = {}
            for v in f.variables:
                if v not in mapping:
                    raise MappingMismatch(f"mapping misses support net {v}")
                if mapping[v] in img:
                    raise MappingMismatch(f"mapping not injective at {mapping[v]}")
                img[mapping[v]] = v
            if set(img) != set(g.variables):
                raise MappingMismatch(
                    "mapping image does not equal the other function's support")
            f = f.renamed({v: mapping[v] for v in f.variables}).support_reduced()
        if set(f.variables) != set(g.variables):
            return False
        g = g.remapped(f.variables)
        return np.array_equal(f.table, g.table)

    # -- rendering ---------------------------------------------------------

    def to_sop_text(self, names: Optional[Mapping[int, str]] = None) -> str:
        """Sum-of-products over net names; summarized above 8 variables."""
        f = self.support_reduced()
        names = names or {}

        def nm(v: int) -> str:
            return names.get(v, f"n{v}")

        if not f.variables:
            return "1" if f.table[0] else "0"
        if len(f.variables) > 8:
            return (f"<{len(f.variables)}-input function of "
                    + ", ".join(nm(v) for v in f.variables) + ">")
        ones = np.flatnonzero(f.table)
        if len(ones) == 0:
            return "0"
        if len(ones) == len(f.table):
            return "1"
        terms = []
        for m in ones:
            lits = []
            for p, v in enumerate(f.variables):
                lits.append(nm(v) if (int(m) >> p) & 1 else "~" + nm(v))
            terms.append(" & ".join(lits))
        return " | ".join(terms)


def from_lut_init(k: int, init: str, input_nets: Sequence[int]) -> BooleanFunction:
    """Decode a LUT INIT string into the function over `input_nets`."""
    if not 1 <= k <= 6:
        raise ArityMismatch(f"LUT arity {k} outside 1..6")
    if len(input_nets) != k:
        raise ArityMismatch(f"LUT{k} needs {k} input nets, got {len(input_nets)}")
    init_norm = model.normalize_init(f"LUT{k}", init)
    return BooleanFunction.from_table_value(input_nets, int(init_norm, 16))


def _gate_output_function(netlist: model.Netlist, gate: model.Gate) -> BooleanFunction:
    """Function of a combinational gate's output over its input nets.

    Pins wired to the same net are collapsed into one variable.
    """
    kind = gate.gate_type
    pin_nets = [gate.pins[p] for p in model.input_pins(kind)]
    if kind in ("VCC", "GND"):
        return BooleanFunction.constant(1 if kind == "VCC" else 0)
    if kind == "BUF":
        value = _BUF_TABLE
    elif kind == "INV":
        value = _INV_TABLE
    elif kind == "MUX2":
        value = _MUX2_TABLE
    else:
        value = gate.init_value
    distinct = list(dict.fromkeys(pin_nets))
    if len(distinct) == len(pin_nets):
        return BooleanFunction.from_table_value(pin_nets, value)
    # collapse duplicated pins
    full = BooleanFunction.from_table_value(range(len(pin_nets)), value)
    pos = {v: p for p, v in enumerate(distinct)}
    n = len(distinct)
    idx = np.arange(1 << n, dtype=np.int64)
    src = np.zeros(1 << n, dtype=np.int64)
    for q, w in enumerate(pin_nets):
        src |= ((idx >> pos[w]) & 1) << q
    return BooleanFunction(distinct, full.table[src])


def default_boundary(netlist: model.Netlist) -> set[int]:
    """FF outputs plus primary-input nets: the standard cone frontier."""
    cut = set(netlist.input_port_net_ids)
    for g in netlist.gates.values():
        if g.gate_type == "FF":
            cut.add(g.pins["Q"])
    return cut


def net_functions(netlist: model.Netlist, net_ids: Iterable[int],
                  boundary: Optional[set[int]] = None) -> dict[int, BooleanFunction]:
    """Back-trace each requested net into a function over boundary nets.

    With `boundary=None` the default frontier applies and undriven nets fold
    to constant 0 (matching the simulator). With an explicit boundary any
    net that is neither boundary nor combinationally driven raises ConeEscape.
    Cycles of combinational gates not cut by the boundary raise
    CombinationalCycle. Results are reordered to ascending net id.
    """
    strict = boundary is not None
    cut = set(boundary) if strict else default_boundary(netlist)
    memo: dict[int, BooleanFunction] = {}

    for root in net_ids:
        if root in memo:
            continue
        # Iterative post-order: (net, expanded flag).
        stack: list[tuple[int, bool]] = [(root, False)]
        visiting: set[int] = set()
        while stack:
            nid, expanded = stack.pop()
            if nid in memo:
                continue
            if not expanded:
                if nid in cut:
                    memo[nid] = BooleanFunction.variable(nid)
                    continue
                net = netlist.net(nid)
                drv = net.driver
                if drv is None or netlist.gates[drv[0]].gate_type == "FF":
                    if strict:
                        raise ConeEscape(
                            f"net {nid} ({net.name!r}) lies outside the boundary",
                            nets=(nid,))
                    # default mode: FF outputs are in the cut, so this is an
                    # undriven net; it simulates as constant 0
                    memo[nid] = BooleanFunction.constant(0)
                    continue
                if nid in visiting:
                    raise CombinationalCycle(
                        f"combinational loop through net {nid} ({net.name!r})",
                        members=(drv[0],))
                visiting.add(nid)
                stack.append((nid, True))
                gate = netlist.gates[drv[0]]
                for dep in netlist.gate_input_nets(gate.id):
                    if dep not in memo:
                        stack.append((dep, False))
            else:
                visiting.discard(nid)
                gate = netlist.gates[netlist.net(nid).driver[0]]
                fn = _gate_output_function(netlist, gate)
                for dep in dict.fromkeys(netlist.gate_input_nets(gate.id)):
                    if dep in fn.variables:
                        fn = fn.compose(dep, memo[dep])
                memo[nid] = fn.remapped(sorted(set(fn.variables)))
    return {nid: memo[nid] for nid in net_ids}


def net_function(netlist: model.Netlist, net_id: int,
                 boundary: Optional[set[int]] = None) -> BooleanFunction:
    """Function computed by the combinational cone driving one net."""
    return net_functions(netlist, [net_id], boundary)[net_id]
