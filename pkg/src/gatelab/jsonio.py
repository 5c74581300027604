"""Bit-exact JSON serialization of netlists and projects.

The writer is canonical: keys sorted, gates and submodules ordered by id,
compact separators, trailing newline. Identical models therefore serialize to
identical bytes, which makes the sha256 of the project text a well-defined
state digest (used by the session log for replay verification).

Nets exist implicitly by name; a net referenced by no port and no pin is not
representable and is dropped on write (lint flags such orphans).
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Union

from . import model
from .errors import (
    DuplicateDriver,
    LinkError,
    MalformedInit,
    SchemaError,
    UnknownPin,
    UnknownPrimitive,
    VersionError,
)

FORMAT_VERSION = 1

_NETLIST_KEYS = {"format_version", "name", "inputs", "outputs", "clock", "gates"}
_PROJECT_KEYS = _NETLIST_KEYS | {"submodules"}
_GATE_KEYS = {"id", "name", "type", "init", "pins"}
_SUB_KEYS = {"id", "name", "color", "parent", "gates"}


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def netlist_to_obj(netlist: model.Netlist) -> dict:
    gates = []
    for gid in sorted(netlist.gates):
        g = netlist.gates[gid]
        entry: dict = {
            "id": g.id,
            "name": g.name,
            "type": g.gate_type,
            "pins": {pin: netlist.nets[nid].name
                     for pin, nid in sorted(g.pins.items())},
        }
        if g.init is not None:
            entry["init"] = g.init
        gates.append(entry)
    doc: dict = {
        "format_version": FORMAT_VERSION,
        "name": netlist.name,
        "inputs": list(netlist.input_ports),
        "outputs": list(netlist.output_ports),
        "gates": gates,
    }
    if netlist.clock_net is not None:
        doc["clock"] = netlist.nets[netlist.clock_net].name
    return doc


def submodules_to_obj(netlist: model.Netlist) -> list:
    subs = []
    for sid in sorted(netlist.submodules):
        s = netlist.submodules[sid]
        entry: dict = {
            "id": s.id,
            "name": s.name,
            "color": list(s.color),
            "gates": sorted(s.gate_ids),
        }
        if s.parent is not None:
            entry["parent"] = s.parent
        subs.append(entry)
    return subs


def write_json_netlist(netlist: model.Netlist) -> str:
    """Canonical netlist document (no submodules)."""
    return _canonical(netlist_to_obj(netlist))


def write_json_project(netlist: model.Netlist) -> str:
    """Canonical project document: netlist plus submodules."""
    doc = netlist_to_obj(netlist)
    doc["submodules"] = submodules_to_obj(netlist)
    return _canonical(doc)


def project_digest(netlist: model.Netlist) -> str:
    """sha256 over the canonical project serialization."""
    return hashlib.sha256(write_json_project(netlist).encode()).hexdigest()


def _expect(doc: dict, key: str, types, where: str):
    if key not in doc:
        raise SchemaError(f"{where}: missing field {key!r}")
    if not isinstance(doc[key], types):
        raise SchemaError(f"{where}: field {key!r} has wrong type")
    return doc[key]


def _load_netlist_obj(doc: dict, allowed_keys: set) -> model.Netlist:
    if not isinstance(doc, dict):
        raise SchemaError("document is not a JSON object")
    unknown = set(doc) - allowed_keys
    if unknown:
        raise SchemaError(f"unknown fields: {sorted(unknown)}")
    version = _expect(doc, "format_version", int, "document")
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported format_version {version}")
    name = _expect(doc, "name", str, "document")
    inputs = _expect(doc, "inputs", list, "document")
    outputs = _expect(doc, "outputs", list, "document")
    gates = _expect(doc, "gates", list, "document")
    clock = doc.get("clock")
    if clock is not None and not isinstance(clock, str):
        raise SchemaError("field 'clock' must be a string")

    nl = model.Netlist(name)
    for port in inputs:
        if not isinstance(port, str):
            raise SchemaError("input port names must be strings")
        nl.add_input_port(port)
    for port in outputs:
        if not isinstance(port, str):
            raise SchemaError("output port names must be strings")
        nl.add_output_port(port)

    seen_ids: set[int] = set()
    for entry in gates:
        if not isinstance(entry, dict):
            raise SchemaError("gate entries must be objects")
        unknown = set(entry) - _GATE_KEYS
        if unknown:
            raise SchemaError(f"gate entry has unknown fields: {sorted(unknown)}")
        gid = _expect(entry, "id", int, "gate")
        if gid in seen_ids:
            raise SchemaError(f"duplicate gate id {gid}")
        seen_ids.add(gid)
        gname = _expect(entry, "name", str, f"gate {gid}")
        gtype = _expect(entry, "type", str, f"gate {gid}")
        pins = _expect(entry, "pins", dict, f"gate {gid}")
        init = entry.get("init")
        if init is not None and not isinstance(init, str):
            raise SchemaError(f"gate {gid}: init must be a string")
        for pin, netname in pins.items():
            if not isinstance(pin, str) or not isinstance(netname, str):
                raise SchemaError(f"gate {gid}: pins must map strings to strings")
        try:
            new_id = nl.add_gate(gname, gtype, init, pins)
        except (UnknownPrimitive, UnknownPin, DuplicateDriver) as exc:
            raise LinkError(f"gate {gid}: {exc}") from exc
        except MalformedInit:
            raise
        # preserve the file's explicit id
        if new_id != gid:
            gate = nl.gates.pop(new_id)
            gate.id = gid
            nl.gates[gid] = gate
            out_pin = model.output_pin(gate.gate_type)
            for pin, nid in gate.pins.items():
                net = nl.nets[nid]
                if pin == out_pin:
                    net.driver = (gid, pin)
                else:
                    net.sinks.discard((new_id, pin))
                    net.sinks.add((gid, pin))
            nl._next_gate_id = max(nl._next_gate_id, gid + 1)

    if clock is not None:
        nl.set_clock(clock)
    return nl


def read_json_netlist(text: str) -> model.Netlist:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return _load_netlist_obj(doc, _NETLIST_KEYS)


def read_json_project(text: str) -> model.Netlist:
    """Project document: netlist plus persisted submodules."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("document is not a JSON object")
    subs = doc.pop("submodules", [])
    nl = _load_netlist_obj(doc, _NETLIST_KEYS)
    if not isinstance(subs, list):
        raise SchemaError("field 'submodules' must be a list")

    by_id: dict[int, dict] = {}
    for entry in subs:
        if not isinstance(entry, dict):
            raise SchemaError("submodule entries must be objects")
        unknown = set(entry) - _SUB_KEYS
        if unknown:
            raise SchemaError(f"submodule entry has unknown fields: {sorted(unknown)}")
        sid = _expect(entry, "id", int, "submodule")
        if sid in by_id:
            raise SchemaError(f"duplicate submodule id {sid}")
        by_id[sid] = entry

    for sid in sorted(by_id):
        entry = by_id[sid]
        sname = _expect(entry, "name", str, f"submodule {sid}")
        color = _expect(entry, "color", list, f"submodule {sid}")
        if len(color) != 3 or not all(isinstance(c, int) for c in color):
            raise SchemaError(f"submodule {sid}: color must be [r,g,b]")
        gate_ids = _expect(entry, "gates", list, f"submodule {sid}")
        for gid in gate_ids:
            if not isinstance(gid, int) or gid not in nl.gates:
                raise SchemaError(
                    f"submodule {sid} references missing gate id {gid}")
        new_sid = nl.create_submodule(sname, tuple(color))
        if new_sid != sid:
            sub = nl.submodules.pop(new_sid)
            sub.id = sid
            nl.submodules[sid] = sub
            nl._next_submodule_id = max(nl._next_submodule_id, sid + 1)
        nl.assign_gates(sid, gate_ids)

    for sid in sorted(by_id):
        parent = by_id[sid].get("parent")
        if parent is not None:
            if not isinstance(parent, int) or parent not in nl.submodules:
                raise SchemaError(f"submodule {sid}: missing parent {parent}")
            nl.set_parent(sid, parent)
    return nl


def save_project(path: Union[str, Path], netlist: model.Netlist) -> None:
    Path(path).write_text(write_json_project(netlist))


def load_project(path: Union[str, Path]) -> model.Netlist:
    return read_json_project(Path(path).read_text())


def save_netlist(path: Union[str, Path], netlist: model.Netlist) -> None:
    Path(path).write_text(write_json_netlist(netlist))


def load_netlist(path: Union[str, Path]) -> model.Netlist:
    return read_json_netlist(Path(path).read_text())


def structurally_equal(a: model.Netlist, b: model.Netlist) -> bool:
    """Equality of everything the interchange format can express."""
    return write_json_project(a) == write_json_project(b)
