"""Append-only action log: timestamped, replayable, and measurable.

One JSON object per line, UTF-8, flushed per record. Sequence numbers are
strictly increasing within a session; timestamps are milliseconds relative to
session start, so replay and metrics never depend on wall clock. Mutating
records carry the post-operation state digest, which lets replay pinpoint the
first divergent record of a tampered or stale log.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Optional, Union

from .errors import SchemaError, SequenceGap

ACTORS = ("user", "script", "system")


def canonical_args(args: dict) -> str:
    return json.dumps(args, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class EventRecord:
    seq: int
    t_ms: int
    session: str
    actor: str
    op: str
    targets: tuple[int, ...]
    args: str  # canonical JSON encoding of the operation arguments
    digest: Optional[str] = None  # post-op state digest on mutating records

    def parsed_args(self) -> dict:
        return json.loads(self.args) if self.args else {}

    def to_json(self) -> str:
        obj = {
            "seq": self.seq,
            "t_ms": self.t_ms,
            "session": self.session,
            "actor": self.actor,
            "op": self.op,
            "targets": list(self.targets),
            "args": self.args,
        }
        if self.digest is not None:
            obj["digest"] = self.digest
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "EventRecord":
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"bad event record: {exc}") from exc
        try:
            return cls(
                seq=int(obj["seq"]),
                t_ms=int(obj["t_ms"]),
                session=str(obj["session"]),
                actor=str(obj["actor"]),
                op=str(obj["op"]),
                targets=tuple(int(t) for t in obj["targets"]),
                args=str(obj["args"]),
                digest=obj.get("digest"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad event record fields: {exc}") from exc


class EventLog:
    """Durable, seq-checked append log for one session."""

    def __init__(self, path: Optional[Union[str, Path]] = None,
                 session_id: str = "session"):
        self.path = Path(path) if path is not None else None
        self.session_id = session_id
        self.records: list[EventRecord] = []
        self._fh: Optional[IO[str]] = None
        if self.path is not None:
            if self.path.exists() and self.path.stat().st_size:
                self.records = self.read(self.path)
                self.session_id = self.records[0].session
            self._fh = open(self.path, "a", encoding="utf-8")

    @property
    def last_seq(self) -> int:
        return self.records[-1].seq if self.records else -1

    def record(self, event: EventRecord) -> EventRecord:
        expected = self.last_seq + 1
        if event.seq != expected:
            raise SequenceGap(
                f"expected seq {expected}, got {event.seq}")
        self.records.append(event)
        if self._fh is not None:
            self._fh.write(event.to_json() + "\n")
            self._fh.flush()
        return event

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    @classmethod
    def read(cls, path: Union[str, Path]) -> list[EventRecord]:
        records = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                records.append(EventRecord.from_json(line))
        return records


# Category per operation name; anything unlisted counts as "other".
OP_CATEGORIES: dict[str, str] = {
    "session_start": "system",
    "error": "error",
    "add_gate": "model",
    "create_submodule": "submodule",
    "assign_gates": "submodule",
    "set_parent": "submodule",
    "patch_init": "model",
    "patch_sbox": "aes",
    "obfuscate": "fsm",
    "select": "navigation",
    "neighbors": "navigation",
    "summary": "navigation",
    "lint": "analysis",
    "net_function": "analysis",
    "fsm_candidates": "analysis",
    "extract_stg": "fsm",
    "attack_harpoon": "fsm",
    "locate_aes": "aes",
    "extract_key": "aes",
    "sim": "sim",
    "metrics": "analysis",
    "submodules": "navigation",
}


@dataclass
class SessionMetrics:
    total_duration_ms: int
    action_counts: dict[str, int]
    longest_idle_gap_ms: int
    idle_gap_count: int
    error_count: int
    recovery_times_ms: list[int] = field(default_factory=list)

    def to_obj(self) -> dict:
        return {
            "total_duration_ms": self.total_duration_ms,
            "action_counts": dict(sorted(self.action_counts.items())),
            "longest_idle_gap_ms": self.longest_idle_gap_ms,
            "idle_gap_count": self.idle_gap_count,
            "error_count": self.error_count,
            "recovery_times_ms": list(self.recovery_times_ms),
        }

    def to_table(self) -> str:
        lines = [
            f"duration        {self.total_duration_ms} ms",
            f"errors          {self.error_count}",
            f"longest idle    {self.longest_idle_gap_ms} ms "
            f"({self.idle_gap_count} gap(s))",
        ]
        if self.recovery_times_ms:
            avg = sum(self.recovery_times_ms) / len(self.recovery_times_ms)
            lines.append(f"mean recovery   {avg:.0f} ms over "
                         f"{len(self.recovery_times_ms)} error(s)")
        lines.append("actions by category:")
        for cat, n in sorted(self.action_counts.items()):
            lines.append(f"  {cat:<14}{n}")
        return "\n".join(lines)


def metrics(records: Iterable[EventRecord],
            idle_threshold_ms: int = 60_000) -> SessionMetrics:
    """Deterministic aggregates over one session's records.

    Idle gaps are inter-event gaps exceeding the threshold. A recovery time
    is the delay from an error record to the next non-error record sharing a
    target with it. Everything is relative, so shifting all timestamps by a
    constant changes nothing.
    """
    records = list(records)
    counts: dict[str, int] = {}
    for rec in records:
        cat = OP_CATEGORIES.get(rec.op, "other")
        counts[cat] = counts.get(cat, 0) + 1

    total = records[-1].t_ms - records[0].t_ms if records else 0
    longest_gap = 0
    gap_count = 0
    for prev, cur in zip(records, records[1:]):
        gap = cur.t_ms - prev.t_ms
        if gap > idle_threshold_ms:
            gap_count += 1
            longest_gap = max(longest_gap, gap)

    errors = [r for r in records if r.op == "error"]
    recoveries: list[int] = []
    for err in errors:
        err_targets = set(err.targets)
        for rec in records:
            if rec.seq <= err.seq or rec.op == "error":
                continue
            if not err_targets or err_targets & set(rec.targets):
                recoveries.append(rec.t_ms - err.t_ms)
                break

    return SessionMetrics(
        total_duration_ms=total,
        action_counts=counts,
        longest_idle_gap_ms=longest_gap,
        idle_gap_count=gap_count,
        error_count=len(errors),
        recovery_times_ms=recoveries,
    )
