"""One-line command vocabulary over a live session.

The same verbs drive the CLI, the HTTP service's /command endpoint, and the
explorer console, all through Session.run_op — there is exactly one
implementation of every operation. Failed commands log an `error` event
(feeding the recovery-time metric) and then raise.
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass, field
from typing import Callable

from .errors import ArgumentError, UnknownCommand, WorkbenchError
from .session import Session


@dataclass
class CommandResult:
    verb: str
    data: object
    text: str
    events: list[int] = field(default_factory=list)


_HANDLERS: dict[str, Callable[[Session, list[str]], tuple[object, str]]] = {}


def command(verb: str):
    def deco(fn):
        _HANDLERS[verb] = fn
        return fn
    return deco


def vocabulary() -> list[str]:
    return sorted(_HANDLERS)


def run_command(session: Session, line: str,
                actor: str = "script") -> CommandResult:
    """Parse and execute one command line against the session."""
    try:
        parts = shlex.split(line)
    except ValueError as exc:
        raise ArgumentError(f"unparsable command line: {exc}") from exc
    if not parts:
        raise UnknownCommand("empty command")
    verb, args = parts[0], parts[1:]
    handler = _HANDLERS.get(verb)
    if handler is None:
        raise UnknownCommand(f"unknown command {verb!r}; "
                             f"try one of: {', '.join(vocabulary())}")
    seq_before = session.log.last_seq if session.log else -1
    try:
        with session.as_actor(actor):
            data, text = handler(session, args)
    except WorkbenchError as exc:
        session.log_error(exc.code, str(exc), verb.replace("-", "_"))
        raise
    seq_after = session.log.last_seq if session.log else -1
    events = list(range(seq_before + 1, seq_after + 1))
    return CommandResult(verb=verb, data=data, text=text, events=events)


# --- argument helpers -----------------------------------------------------------


def _int_list(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise ArgumentError(f"{what} must be a comma-separated id list, "
                            f"got {text!r}") from None


def _net_ids(session: Session, text: str) -> list[int]:
    ids = []
    for token in text.split(","):
        if not token:
            continue
        if token.isdigit():
            ids.append(session.netlist.net(int(token)).id)
        else:
            ids.append(session.netlist.resolve_net(token).id)
    return ids


def _submodule_ref(session: Session, token: str) -> int:
    if token.isdigit():
        return session.netlist.submodule(int(token)).id
    matches = [s.id for s in session.netlist.submodules.values()
               if s.name == token]
    if len(matches) != 1:
        raise ArgumentError(
            f"submodule name {token!r} matches {len(matches)} submodules; "
            f"use the id")
    return matches[0]


def _need(args: list[str], n: int, usage: str) -> None:
    if len(args) < n:
        raise ArgumentError(f"usage: {usage}")


def _render_rows(rows: list[dict], columns: list[str]) -> str:
    if not rows:
        return "(none)"
    widths = {c: max(len(c), *(len(str(r.get(c, ""))) for r in rows))
              for c in columns}
    head = "  ".join(c.ljust(widths[c]) for c in columns)
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append("  ".join(str(r.get(c, "")).ljust(widths[c])
                               for c in columns))
    return "\n".join(lines)


# --- navigation / analysis ------------------------------------------------------


@command("summary")
def _cmd_summary(session: Session, args: list[str]):
    data = session.run_op("summary", {})
    text = "\n".join(f"{k}: {v}" for k, v in data.items())
    return data, text


@command("lint")
def _cmd_lint(session: Session, args: list[str]):
    data = session.run_op("lint", {})
    lines = [f"errors: {len(data['errors'])}, warnings: {len(data['warnings'])}"]
    lines += [f"  error: {e}" for e in data["errors"]]
    lines += [f"  warning: {w}" for w in data["warnings"][:20]]
    if len(data["warnings"]) > 20:
        lines.append(f"  ... {len(data['warnings']) - 20} more warnings")
    return data, "\n".join(lines)


@command("neighbors")
def _cmd_neighbors(session: Session, args: list[str]):
    _need(args, 2, "neighbors <gate id> <fanin|fanout>")
    if args[1] not in ("fanin", "fanout"):
        raise ArgumentError("direction must be fanin or fanout")
    data = session.run_op("neighbors",
                          {"gate": int(args[0]), "direction": args[1]})
    return data, " ".join(str(g) for g in data) or "(none)"


@command("select")
def _cmd_select(session: Session, args: list[str]):
    ids = [int(a) for a in args] if args else []
    data = session.run_op("select", {"ids": ids})
    return data, f"selected {len(data)} gate(s)"


@command("net-function")
def _cmd_net_function(session: Session, args: list[str]):
    _need(args, 1, "net-function <net name or id>")
    ref = int(args[0]) if args[0].isdigit() else args[0]
    data = session.run_op("net_function", {"net": ref})
    return data, f"{data['net']} = {data['function']}"


@command("fsm-candidates")
def _cmd_fsm_candidates(session: Session, args: list[str]):
    limit = int(args[0]) if args else 10
    data = session.run_op("fsm_candidates", {"limit": limit})
    rows = [{"rank": i + 1, "score": c["score"],
             "ffs": ",".join(str(f) for f in c["ff_ids"]),
             "coupling": c["evidence"]["cross_coupling"],
             "sharing": c["evidence"]["cone_sharing"]}
            for i, c in enumerate(data)]
    return data, _render_rows(rows, ["rank", "score", "ffs", "coupling", "sharing"])


@command("extract-stg")
def _cmd_extract_stg(session: Session, args: list[str]):
    _need(args, 2, "extract-stg <ff ids csv> <input nets csv>")
    data = session.run_op("extract_stg", {
        "ff_ids": _int_list(args[0], "ff ids"),
        "input_nets": _net_ids(session, args[1]),
    })
    text = (f"{len(data['states'])} states, reset {data['reset']}, "
            f"{len(data['transitions'])} transitions")
    return data, text


@command("attack-harpoon")
def _cmd_attack_harpoon(session: Session, args: list[str]):
    _need(args, 2, "attack-harpoon <ff ids csv> <input nets csv>")
    data = session.run_op("attack_harpoon", {
        "ff_ids": _int_list(args[0], "ff ids"),
        "input_nets": _net_ids(session, args[1]),
    })
    text = (f"original states: {len(data['original_states'])}, "
            f"added states: {len(data['obfuscation_states'])}\n"
            f"enabling key: {','.join(str(w) for w in data['key'])}\n"
            f"original reset: {data['original_reset']}")
    return data, text


@command("metrics")
def _cmd_metrics(session: Session, args: list[str]):
    data = session.run_op("metrics", {})
    from .trace import SessionMetrics
    text = SessionMetrics(
        total_duration_ms=data["total_duration_ms"],
        action_counts=data["action_counts"],
        longest_idle_gap_ms=data["longest_idle_gap_ms"],
        idle_gap_count=data["idle_gap_count"],
        error_count=data["error_count"],
        recovery_times_ms=data["recovery_times_ms"],
    ).to_table()
    return data, text


@command("sim")
def _cmd_sim(session: Session, args: list[str]):
    _need(args, 1, "sim <cycles> [seed=<n>] [probe=<net> ...]")
    payload: dict = {"cycles": int(args[0])}
    probes = []
    for token in args[1:]:
        if token.startswith("seed="):
            payload["seed"] = int(token[5:])
        elif token.startswith("probe="):
            probes.append(token[6:])
        else:
            raise ArgumentError(f"unknown sim argument {token!r}")
    if probes:
        payload["probes"] = probes
    data = session.run_op("sim", payload)
    return data, data["csv"]


# --- mutations --------------------------------------------------------------------


@command("gate-add")
def _cmd_gate_add(session: Session, args: list[str]):
    _need(args, 3, "gate-add <name> <type> [init=<hex>] <PIN>=<net> ...")
    name, gtype = args[0], args[1]
    init = None
    pins: dict[str, str] = {}
    for token in args[2:]:
        if "=" not in token:
            raise ArgumentError(f"expected PIN=net, got {token!r}")
        key, value = token.split("=", 1)
        if key == "init":
            init = value
        else:
            pins[key] = value
    gid = session.run_op("add_gate",
                         {"name": name, "type": gtype, "init": init,
                          "pins": pins})
    return {"id": gid}, f"gate {gid} added"


@command("submodule")
def _cmd_submodule(session: Session, args: list[str]):
    _need(args, 1, "submodule <new|add|parent|list> ...")
    sub = args[0]
    if sub == "new":
        _need(args, 2, "submodule new <name> [r,g,b]")
        color = None
        if len(args) > 2:
            color = _int_list(args[2], "color")
            if len(color) != 3:
                raise ArgumentError("color must be r,g,b")
        sid = session.run_op("create_submodule",
                             {"name": args[1], "color": color})
        return {"id": sid}, f"submodule {sid} created"
    if sub == "add":
        _need(args, 3, "submodule add <id|name> <gate id> ...")
        sid = _submodule_ref(session, args[1])
        gids = [int(a) for a in args[2:]]
        members = session.run_op("assign_gates",
                                 {"submodule": sid, "gates": gids})
        return ({"id": sid, "gates": members},
                f"submodule {sid} now has {len(members)} gate(s)")
    if sub == "parent":
        _need(args, 3, "submodule parent <id|name> <id|name|none>")
        sid = _submodule_ref(session, args[1])
        parent = None if args[2] == "none" else _submodule_ref(session, args[2])
        session.run_op("set_parent", {"submodule": sid, "parent": parent})
        return {"id": sid, "parent": parent}, "parent updated"
    if sub == "list":
        data = [{"id": s.id, "name": s.name,
                 "color": "#%02x%02x%02x" % s.color,
                 "parent": s.parent if s.parent is not None else "",
                 "gates": len(s.gate_ids)}
                for s in sorted(session.netlist.submodules.values(),
                                key=lambda s: s.id)]
        session.run_op("submodules", {})
        return data, _render_rows(data, ["id", "name", "color", "parent", "gates"])
    raise ArgumentError(f"unknown submodule action {sub!r}")


@command("patch-init")
def _cmd_patch_init(session: Session, args: list[str]):
    _need(args, 2, "patch-init <ff ids csv> <bit string>")
    ff_ids = _int_list(args[0], "ff ids")
    bits_text = args[1]
    if not all(c in "01" for c in bits_text):
        raise ArgumentError("bits must be a 0/1 string, position i = i-th FF")
    bits = [int(c) for c in bits_text]
    session.run_op("patch_init", {"ff_ids": ff_ids, "bits": bits})
    return {"ff_ids": ff_ids, "bits": bits}, "initial state patched"


@command("obfuscate")
def _cmd_obfuscate(session: Session, args: list[str]):
    _need(args, 3, "obfuscate <ff ids csv> <input nets csv> <key words csv> "
                   "[extra] [seed]")
    payload = {
        "ff_ids": _int_list(args[0], "ff ids"),
        "input_nets": _net_ids(session, args[1]),
        "key": _int_list(args[2], "key words"),
        "extra": int(args[3]) if len(args) > 3 else 0,
        "seed": int(args[4]) if len(args) > 4 else 0,
    }
    data = session.run_op("obfuscate", payload)
    return data, (f"netlist replaced by locked machine: {data['states']} "
                  f"states over {data['width']} bits")


@command("locate-aes")
def _cmd_locate_aes(session: Session, args: list[str]):
    data = session.run_op("locate_aes", {})
    rows = [{"index": i, "inputs": ",".join(inst["inputs"][:2]) + ",...",
             "identity": inst["bit_mapping"]["identity"]}
            for i, inst in enumerate(data)]
    return data, (f"{len(data)} S-box instance(s)\n"
                  + _render_rows(rows, ["index", "inputs", "identity"]))


@command("patch-sbox")
def _cmd_patch_sbox(session: Session, args: list[str]):
    _need(args, 1, "patch-sbox <instance index from locate-aes>")
    idx = int(args[0])
    located = session.located_instances
    if not located:
        raise ArgumentError("run locate-aes first")
    if not 0 <= idx < len(located):
        raise ArgumentError(f"instance index {idx} out of range "
                            f"(0..{len(located) - 1})")
    inst = located[idx]
    payload = {"instance": {
        "inputs": list(inst.input_nets),
        "outputs": list(inst.output_nets),
        "gates": sorted(inst.gate_ids),
        "bit_mapping": inst.bit_mapping,
    }}
    session.run_op("patch_sbox", payload)
    session.located_instances = []
    return payload, f"instance {idx} replaced by identity bypass"


@command("extract-key")
def _cmd_extract_key(session: Session, args: list[str]):
    payload = {}
    if args:
        payload["latency"] = int(args[0])
    data = session.run_op("extract_key", payload)
    return data, (f"key: {data['key']} (probed at row {data['probe_row']}, "
                  f"verified: {data['verified']})")
