"""Command-line surface: project generation, analyses, attacks, service.

Analysis and mutation verbs run through the same command channel as the HTTP
service (no behavior fork). Mutating verbs write the project back (or to
--out) and append to the `<project>.events.jsonl` sidecar, so a whole CLI
workflow stays replayable.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import uuid
from pathlib import Path

from . import commands, generate, jsonio, session as sessionmod, trace
from .errors import WorkbenchError

MUTATING_VERBS = {"patch-init", "obfuscate", "patch-sbox", "gate-add",
                  "submodule"}


def _events_path(project_path: Path) -> Path:
    return project_path.with_suffix(project_path.suffix + ".events.jsonl")


def _open_session(project_path: Path, with_log: bool = True) -> sessionmod.Session:
    netlist = jsonio.load_project(project_path)
    if not with_log:
        return sessionmod.Session(netlist, None)
    # resumed logs keep their recorded session id; fresh ones get a new one
    log = trace.EventLog(_events_path(project_path),
                         session_id=uuid.uuid4().hex[:12])
    base = log.records[-1].t_ms + 1 if log.records else 0
    start = time.monotonic()
    clock = lambda: base + int((time.monotonic() - start) * 1000)
    return sessionmod.Session(netlist, log, clock=clock)


def _forward(args: argparse.Namespace, line: str) -> int:
    """Run one command line against the project, saving if it mutated."""
    project_path = Path(args.project)
    sess = _open_session(project_path, with_log=not args.no_log)
    try:
        result = commands.run_command(sess, line, actor="script")
    except WorkbenchError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    print(result.text)
    verb = line.split()[0]
    if verb in MUTATING_VERBS:
        out = Path(args.out) if getattr(args, "out", None) else project_path
        jsonio.save_project(out, sess.netlist)
        print(f"project written to {out}", file=sys.stderr)
    if getattr(args, "json_out", None):
        Path(args.json_out).write_text(
            json.dumps(result.data, indent=2, sort_keys=True) + "\n")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gatelab",
        description="gate-level netlist reverse-engineering workbench")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen", help="generate a study project")
    p.add_argument("kind", choices=generate.PROJECT_KINDS)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--knob", action="append", default=[],
                   metavar="NAME=INT", help="generator knob override")
    p.add_argument("--no-verilog", action="store_true")

    for verb, extra in [
        ("lint", []),
        ("fsm-candidates", [("--limit", int, 10)]),
        ("metrics", []),
        ("locate-aes", []),
        ("extract-key", [("--latency", int, None)]),
    ]:
        p = sub.add_parser(verb)
        p.add_argument("project")
        p.add_argument("--no-log", action="store_true")
        p.add_argument("--json-out")
        for flag, typ, default in extra:
            p.add_argument(flag, type=typ, default=default)

    p = sub.add_parser("extract-stg", help="recover a state graph")
    p.add_argument("project")
    p.add_argument("--ffs", required=True, help="FF gate ids, comma separated")
    p.add_argument("--inputs", required=True, help="input nets (names or ids)")
    p.add_argument("--dot", help="write DOT text here")
    p.add_argument("--no-log", action="store_true")
    p.add_argument("--json-out")

    p = sub.add_parser("attack-harpoon",
                       help="distinguish lock states and recover the key")
    p.add_argument("project")
    p.add_argument("--ffs", required=True)
    p.add_argument("--inputs", required=True)
    p.add_argument("--no-log", action="store_true")
    p.add_argument("--json-out")

    p = sub.add_parser("obfuscate", help="lock the selected FSM in place")
    p.add_argument("project")
    p.add_argument("--ffs", required=True)
    p.add_argument("--inputs", required=True)
    p.add_argument("--key", required=True, help="key words, comma separated")
    p.add_argument("--extra", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--no-log", action="store_true")
    p.add_argument("--json-out")

    p = sub.add_parser("patch-init", help="overwrite FF power-up values")
    p.add_argument("project")
    p.add_argument("--ffs", required=True)
    p.add_argument("--bits", required=True, help="bit string, position i = i-th FF")
    p.add_argument("--out")
    p.add_argument("--no-log", action="store_true")
    p.add_argument("--json-out")

    p = sub.add_parser("sim", help="simulate with random or zero stimulus")
    p.add_argument("project")
    p.add_argument("--cycles", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--probe", action="append", default=[])
    p.add_argument("--no-log", action="store_true")
    p.add_argument("--json-out")

    p = sub.add_parser("replay", help="verify a session log against a base project")
    p.add_argument("base_project")
    p.add_argument("events")

    p = sub.add_parser("serve", help="serve the explorer API")
    p.add_argument("project")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--frontend", help="directory with a built explorer UI")

    args = parser.parse_args(argv)

    if args.verb == "gen":
        knobs = {}
        for item in args.knob:
            name, _, value = item.partition("=")
            knobs[name] = int(value)
        spec = generate.ProjectSpec(kind=args.kind, seed=args.seed, knobs=knobs)
        paths = generate.write_project(args.out, spec,
                                       emit_verilog=not args.no_verilog)
        for label, path in sorted(paths.items()):
            print(f"{label}: {path}")
        return 0

    if args.verb == "replay":
        base = jsonio.load_project(args.base_project)
        records = trace.EventLog.read(args.events)
        try:
            final = sessionmod.replay(records, base)
        except WorkbenchError as exc:
            print(f"replay failed [{exc.code}]: {exc}", file=sys.stderr)
            return 2
        print(f"replay ok: {len(records)} record(s), final digest "
              f"{jsonio.project_digest(final)}")
        return 0

    if args.verb == "serve":
        from . import service
        sess = _open_session(Path(args.project))
        frontend = Path(args.frontend) if args.frontend else None
        print(f"serving {args.project} on http://{args.host}:{args.port}")
        service.serve(sess, host=args.host, port=args.port,
                      frontend_dir=frontend)
        return 0

    line = {
        "lint": "lint",
        "fsm-candidates": f"fsm-candidates {args.limit}"
                          if args.verb == "fsm-candidates" else "",
        "metrics": "metrics",
        "locate-aes": "locate-aes",
        "extract-key": "extract-key" + (f" {args.latency}"
                                        if getattr(args, "latency", None) else ""),
        "extract-stg": f"extract-stg {getattr(args, 'ffs', '')} "
                       f"{getattr(args, 'inputs', '')}",
        "attack-harpoon": f"attack-harpoon {getattr(args, 'ffs', '')} "
                          f"{getattr(args, 'inputs', '')}",
        "obfuscate": (f"obfuscate {getattr(args, 'ffs', '')} "
                      f"{getattr(args, 'inputs', '')} {getattr(args, 'key', '')} "
                      f"{args.extra} {args.seed}")
                     if args.verb == "obfuscate" else "",
        "patch-init": f"patch-init {getattr(args, 'ffs', '')} "
                      f"{getattr(args, 'bits', '')}",
        "sim": (f"sim {args.cycles}"
                + (f" seed={args.seed}" if args.seed is not None else "")
                + "".join(f" probe={p}" for p in args.probe))
               if args.verb == "sim" else "",
    }.get(args.verb, "")
    line = line or args.verb

    code = _forward(args, line)
    if code == 0 and args.verb == "extract-stg" and getattr(args, "dot", None):
        sess = _open_session(Path(args.project), with_log=False)
        from . import fsm as fsmmod
        stg = fsmmod.extract_stg(
            sess.netlist,
            [int(x) for x in args.ffs.split(",")],
            [sess.netlist.resolve_net(tok if not tok.isdigit() else int(tok)).id
             for tok in args.inputs.split(",")])
        Path(args.dot).write_text(stg.to_dot())
        print(f"dot written to {args.dot}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
