"""Live analysis sessions: every action logged, every log replayable.

A Session owns one netlist and (optionally) one event log. Model mutations
emit through the netlist's listener hook and become records automatically;
composite operations (initial-state patching, S-box patching, obfuscation)
record one event apiece with fully self-contained arguments, so replaying a
log against the recorded base project reconstructs the exact final state.
Analysis operations are logged too (they are actions worth studying) but do
not advance the state digest.
"""

from __future__ import annotations

import contextlib
import time
import uuid
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from . import aes as aesmod
from . import boolfn, fsm, graph, jsonio, model, sim
from .errors import DigestMismatch, SequenceGap, UnknownOp, WorkbenchError
from .trace import EventLog, EventRecord, canonical_args


@dataclass(frozen=True)
class OpSpec:
    name: str
    mutating: bool
    via_model: bool  # the model itself emits the record
    apply: Callable[["Session", dict], object]


OPS: dict[str, OpSpec] = {}


def register_op(name: str, mutating: bool, via_model: bool = False):
    def deco(fn):
        OPS[name] = OpSpec(name, mutating, via_model, fn)
        return fn
    return deco


class Session:
    """One netlist plus its append-only action log."""

    def __init__(self, netlist: model.Netlist,
                 log: Optional[EventLog] = None,
                 clock: Optional[Callable[[], int]] = None,
                 session_id: Optional[str] = None):
        self.netlist = netlist
        self.log = log
        self.session_id = session_id or (log.session_id if log else uuid.uuid4().hex[:12])
        self._start = time.monotonic()
        self._clock = clock
        self._actor = "script"
        self._digest_cache: Optional[str] = None
        self._suppress = False
        self.located_instances: list = []
        self._attach(netlist)
        if log is not None and not log.records:
            self._record("session_start", [], {
                "base_digest": self.digest(),
                "t0_epoch_ms": int(time.time() * 1000),
            }, actor="system")

    # -- plumbing --------------------------------------------------------

    def _attach(self, netlist: model.Netlist) -> None:
        netlist.listeners.append(self._on_model_event)

    def _detach(self, netlist: model.Netlist) -> None:
        with contextlib.suppress(ValueError):
            netlist.listeners.remove(self._on_model_event)

    def replace_netlist(self, new: model.Netlist) -> None:
        self._detach(self.netlist)
        self.netlist = new
        self._digest_cache = None
        self._attach(new)

    def now_ms(self) -> int:
        if self._clock is not None:
            return self._clock()
        return int((time.monotonic() - self._start) * 1000)

    @contextlib.contextmanager
    def as_actor(self, actor: str):
        prev = self._actor
        self._actor = actor
        try:
            yield self
        finally:
            self._actor = prev

    def digest(self) -> str:
        if self._digest_cache is None:
            self._digest_cache = jsonio.project_digest(self.netlist)
        return self._digest_cache

    def _on_model_event(self, op: str, targets: list, args: dict) -> None:
        self._digest_cache = None
        if not self._suppress:
            self._record(op, targets, args)

    def _record(self, op: str, targets: Sequence[int], args: dict,
                actor: Optional[str] = None) -> Optional[EventRecord]:
        if self.log is None:
            return None
        rec = EventRecord(
            seq=self.log.last_seq + 1,
            t_ms=self.now_ms(),
            session=self.session_id,
            actor=actor or self._actor,
            op=op,
            targets=tuple(int(t) for t in targets),
            args=canonical_args(args),
            digest=self.digest(),
        )
        return self.log.record(rec)

    def log_error(self, code: str, message: str, op: str,
                  targets: Sequence[int] = ()) -> None:
        self._record("error", targets,
                     {"code": code, "message": message, "op": op})

    # -- operations ---------------------------------------------------------

    def run_op(self, name: str, args: dict,
               actor: Optional[str] = None) -> object:
        spec = OPS.get(name)
        if spec is None:
            raise UnknownOp(f"operation {name!r} is not registered")
        if actor is None:
            return self._run_spec(spec, args)
        with self.as_actor(actor):
            return self._run_spec(spec, args)

    def _run_spec(self, spec: OpSpec, args: dict) -> object:
        if spec.via_model:
            # the model emits the single record itself
            return spec.apply(self, args)
        result = spec.apply(self, args)
        targets = _op_targets(spec.name, args, result)
        self._record(spec.name, targets, args)
        return result


def _op_targets(name: str, args: dict, result: object) -> list[int]:
    for key in ("ff_ids", "ids", "gates"):
        if key in args and isinstance(args[key], (list, tuple)):
            return [int(x) for x in args[key]]
    if "gate" in args:
        return [int(args["gate"])]
    if "instance" in args and isinstance(args["instance"], dict):
        return [int(x) for x in args["instance"].get("outputs", [])]
    return []


# --- registered operations ----------------------------------------------------


@register_op("add_gate", mutating=True, via_model=True)
def _op_add_gate(session: Session, args: dict):
    return session.netlist.add_gate(
        args["name"], args["type"], args.get("init"), args["pins"])


@register_op("create_submodule", mutating=True, via_model=True)
def _op_create_submodule(session: Session, args: dict):
    color = args.get("color")
    return session.netlist.create_submodule(
        args["name"], tuple(color) if color else None)


@register_op("assign_gates", mutating=True, via_model=True)
def _op_assign_gates(session: Session, args: dict):
    return sorted(session.netlist.assign_gates(
        int(args["submodule"]), [int(g) for g in args["gates"]]))


@register_op("set_parent", mutating=True, via_model=True)
def _op_set_parent(session: Session, args: dict):
    parent = args.get("parent")
    session.netlist.set_parent(int(args["submodule"]),
                               int(parent) if parent is not None else None)
    return parent


@register_op("patch_init", mutating=True)
def _op_patch_init(session: Session, args: dict):
    patched = fsm.patch_initial_state(
        session.netlist, [int(f) for f in args["ff_ids"]],
        [int(b) for b in args["bits"]])
    session.replace_netlist(patched)
    return {"ff_ids": args["ff_ids"], "bits": args["bits"]}


@register_op("patch_sbox", mutating=True)
def _op_patch_sbox(session: Session, args: dict):
    inst = args["instance"]
    instance = aesmod.SboxInstance(
        input_nets=tuple(int(n) for n in inst["inputs"]),
        output_nets=tuple(int(n) for n in inst["outputs"]),
        gate_ids=frozenset(int(g) for g in inst["gates"]),
        bit_mapping=inst.get("bit_mapping", {}),
    )
    session.replace_netlist(
        aesmod.patch_sbox_identity(session.netlist, instance))
    return {"outputs": inst["outputs"]}


@register_op("obfuscate", mutating=True)
def _op_obfuscate(session: Session, args: dict):
    stg = fsm.extract_stg(session.netlist,
                          [int(f) for f in args["ff_ids"]],
                          [int(n) for n in args["input_nets"]])
    config = fsm.HarpoonConfig(
        key=tuple(int(w) for w in args["key"]),
        extra_loop_states=int(args.get("extra", 0)),
        seed=int(args.get("seed", 0)))
    locked = fsm.harpoon_obfuscate(stg, config)
    session.replace_netlist(
        fsm.synthesize_stg(locked, args.get("encoding", "binary"),
                           name=session.netlist.name + "_locked"))
    return {"states": len(locked.states), "width": locked.width}


@register_op("select", mutating=False)
def _op_select(session: Session, args: dict):
    ids = [int(x) for x in args.get("ids", [])]
    for gid in ids:
        session.netlist.gate(gid)
    return ids


@register_op("summary", mutating=False)
def _op_summary(session: Session, args: dict):
    nl = session.netlist
    kinds: dict[str, int] = {}
    for g in nl.gates.values():
        kinds[g.gate_type] = kinds.get(g.gate_type, 0) + 1
    return {
        "name": nl.name,
        "gates": len(nl.gates),
        "nets": len(nl.nets),
        "inputs": list(nl.input_ports),
        "outputs": list(nl.output_ports),
        "clock": nl.nets[nl.clock_net].name if nl.clock_net else None,
        "submodules": len(nl.submodules),
        "kinds": dict(sorted(kinds.items())),
        "digest": session.digest(),
    }


@register_op("neighbors", mutating=False)
def _op_neighbors(session: Session, args: dict):
    return sorted(session.netlist.neighbors(int(args["gate"]),
                                            args["direction"]))


@register_op("lint", mutating=False)
def _op_lint(session: Session, args: dict):
    report = model.lint(session.netlist)
    return {"errors": report.errors, "warnings": report.warnings}


@register_op("net_function", mutating=False)
def _op_net_function(session: Session, args: dict):
    nl = session.netlist
    net = nl.resolve_net(args["net"])
    fn = boolfn.net_function(nl, net.id)
    names = {n.id: n.name for n in nl.nets.values()}
    return {"net": net.name, "function": fn.to_sop_text(names),
            "support": sorted(names[v] for v in fn.support())}


@register_op("fsm_candidates", mutating=False)
def _op_fsm_candidates(session: Session, args: dict):
    limit = int(args.get("limit", 10))
    cands = graph.fsm_candidates(session.netlist)
    return graph.candidate_report(cands[:limit])


@register_op("extract_stg", mutating=False)
def _op_extract_stg(session: Session, args: dict):
    stg = fsm.extract_stg(session.netlist,
                          [int(f) for f in args["ff_ids"]],
                          [int(n) for n in args["input_nets"]])
    return stg.to_obj()


@register_op("attack_harpoon", mutating=False)
def _op_attack_harpoon(session: Session, args: dict):
    stg = fsm.extract_stg(session.netlist,
                          [int(f) for f in args["ff_ids"]],
                          [int(n) for n in args["input_nets"]])
    partition = fsm.distinguish_states(stg)
    key = fsm.recover_enabling_key(stg, partition)
    return {
        "states": len(stg.states),
        "original_states": [stg.bits_of(s) for s in sorted(partition.original)],
        "obfuscation_states": [stg.bits_of(s) for s in sorted(partition.obfuscation)],
        "key": key,
        "original_reset": stg.bits_of(_walk_key(stg, key)),
    }


def _walk_key(stg: fsm.StateTransitionGraph, key: list[int]) -> int:
    state = stg.reset_state
    for w in key:
        state = stg.step(state, w)
    return state


@register_op("submodules", mutating=False)
def _op_submodules(session: Session, args: dict):
    return [{"id": s.id, "name": s.name, "color": list(s.color),
             "parent": s.parent, "gates": sorted(s.gate_ids)}
            for s in sorted(session.netlist.submodules.values(),
                            key=lambda s: s.id)]


@register_op("locate_aes", mutating=False)
def _op_locate_aes(session: Session, args: dict):
    instances = aesmod.locate_sbox(session.netlist)
    session.located_instances = instances  # cached for patch-sbox by index
    return [inst.to_obj(session.netlist) for inst in instances]


@register_op("extract_key", mutating=False)
def _op_extract_key(session: Session, args: dict):
    instances = aesmod.locate_sbox(session.netlist)
    clocking = aesmod.AesClocking.from_netlist(
        session.netlist, latency=int(args.get("latency", 11)))
    result = aesmod.extract_key(session.netlist, instances, clocking)
    return {"key": result.key_hex, "probe_row": result.probe_row,
            "verified": result.verified}


@register_op("sim", mutating=False)
def _op_sim(session: Session, args: dict):
    nl = session.netlist
    cycles = int(args["cycles"])
    probes = args.get("probes") or list(nl.output_ports)
    seed = args.get("seed")
    ports = [p for p in nl.input_ports
             if nl.clock_net is None or p != nl.nets[nl.clock_net].name]
    if seed is None:
        stim = sim.Stimulus.constant(cycles, {p: 0 for p in ports})
    else:
        stim = sim.Stimulus.random(ports, cycles, int(seed))
    plan = sim.compile(nl)
    trace = sim.run(plan, stim, probes)
    return {"probes": list(trace.probe_names), "csv": trace.to_csv()}


@register_op("metrics", mutating=False)
def _op_metrics(session: Session, args: dict):
    from .trace import metrics as compute
    records = session.log.records if session.log else []
    return compute(records,
                   idle_threshold_ms=int(args.get("idle_threshold_ms", 60_000))
                   ).to_obj()


# --- replay ---------------------------------------------------------------------


def replay(records: Iterable[EventRecord],
           base: model.Netlist) -> model.Netlist:
    """Re-apply a log to a copy of `base`; verify every recorded digest.

    Raises DigestMismatch at the first divergent record, UnknownOp for
    unregistered operations, SequenceGap for non-contiguous records.
    """
    records = list(records)
    work = Session(base.copy(), log=None)
    if not records:
        return work.netlist

    start_seq = records[0].seq
    for i, rec in enumerate(records):
        if rec.seq != start_seq + i:
            raise SequenceGap(f"records jump from {start_seq + i - 1} to {rec.seq}")

    for rec in records:
        if rec.op == "session_start":
            base_digest = rec.parsed_args().get("base_digest")
            if base_digest and base_digest != work.digest():
                raise DigestMismatch(
                    f"base project does not match the log (seq {rec.seq})",
                    seq=rec.seq)
            continue
        if rec.op == "error":
            pass  # state unchanged
        else:
            spec = OPS.get(rec.op)
            if spec is None:
                raise UnknownOp(f"log contains unregistered op {rec.op!r}")
            if spec.mutating:
                try:
                    work.run_op(rec.op, rec.parsed_args())
                except WorkbenchError as exc:
                    raise DigestMismatch(
                        f"op {rec.op!r} failed on replay at seq {rec.seq}: {exc}",
                        seq=rec.seq) from exc
        if rec.digest is not None and rec.digest != work.digest():
            raise DigestMismatch(
                f"state diverged from the log at seq {rec.seq}", seq=rec.seq)
    return work.netlist
