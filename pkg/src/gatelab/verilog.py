"""Structural Verilog subset: primitive instantiations with named ports.

Accepted grammar, one module per file:

    module <name> (<port>, ...);
      input <ident>; output <ident>; wire <ident>;   // scalar only
      <PRIM> #(.INIT(<width>'h<hex>))? <inst> (.<PIN>(<net>), ...);
    endmodule

Anything behavioral (always, assign, initial, reg) and any bus range is
rejected. Nets referenced before declaration are created with a warning,
matching common structural-netlist practice. The writer emits the same
subset canonically so a model can round-trip through either this format or
the JSON one.
"""

from __future__ import annotations

import re
from typing import Callable, Mapping, Optional

from . import model
from .errors import MalformedInit, ParseError, UnknownPort, UnknownPrimitive

_BEHAVIORAL = {"always", "assign", "initial", "reg", "if", "else", "begin", "end"}

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<lcomment>//[^\n]*)
    | (?P<bcomment>/\*.*?\*/)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_$]*)
    | (?P<literal>\d+'[hbdo][0-9a-fA-F_]+)
    | (?P<number>\d+)
    | (?P<sym>[(),;.\#=\[\]])
    """,
    re.VERBOSE | re.DOTALL,
)

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_$]*$")


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind: str, text: str, line: int, col: int):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup or ""
        tok_text = m.group()
        if kind not in ("ws", "lcomment", "bcomment"):
            tokens.append(_Token(kind, tok_text, line, pos - line_start + 1))
        newlines = tok_text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + tok_text.rindex("\n") + 1
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token],
                 gate_map: Mapping[str, str],
                 on_warning: Optional[Callable[[str], None]]):
        self.tokens = tokens
        self.i = 0
        self.gate_map = gate_map
        self.warnings: list[str] = []
        self._warn_cb = on_warning

    def warn(self, message: str) -> None:
        self.warnings.append(message)
        if self._warn_cb:
            self._warn_cb(message)

    def peek(self) -> Optional[_Token]:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self) -> _Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", "", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.col)
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.take()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, got {tok.text!r}",
                             tok.line, tok.col)
        return tok

    def expect_ident(self) -> _Token:
        tok = self.take()
        if tok.kind != "ident":
            raise ParseError(f"expected identifier, got {tok.text!r}",
                             tok.line, tok.col)
        if tok.text in _BEHAVIORAL:
            raise ParseError(
                f"behavioral construct {tok.text!r} is outside the structural subset",
                tok.line, tok.col)
        return tok

    def parse(self) -> model.Netlist:
        self.expect("module")
        name_tok = self.expect_ident()
        nl = model.Netlist(name_tok.text)
        header_ports: list[str] = []
        self.expect("(")
        while True:
            tok = self.take()
            if tok.text == ")":
                break
            if tok.kind == "ident":
                header_ports.append(tok.text)
            elif tok.text != ",":
                raise ParseError(f"bad port list near {tok.text!r}",
                                 tok.line, tok.col)
        self.expect(";")

        declared: set[str] = set()
        while True:
            tok = self.peek()
            if tok is None:
                raise ParseError("missing endmodule", 0, 0)
            if tok.text == "endmodule":
                self.take()
                break
            if tok.text in ("input", "output", "wire"):
                self._parse_decl(nl, declared)
            elif tok.kind == "ident":
                if tok.text in _BEHAVIORAL:
                    raise ParseError(
                        f"behavioral construct {tok.text!r} is outside the structural subset",
                        tok.line, tok.col)
                self._parse_instance(nl, declared)
            else:
                raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col)

        missing = [p for p in header_ports if p not in declared]
        for p in missing:
            self.warn(f"port {p!r} listed in header but never declared")
        self._infer_clock(nl)
        return nl

    def _parse_decl(self, nl: model.Netlist, declared: set[str]) -> None:
        kind = self.take().text
        while True:
            tok = self.take()
            if tok.text == "[":
                raise ParseError("bus ranges are outside the structural subset",
                                 tok.line, tok.col)
            if tok.kind != "ident":
                raise ParseError(f"expected net name, got {tok.text!r}",
                                 tok.line, tok.col)
            name = tok.text
            declared.add(name)
            if kind == "input":
                nl.add_input_port(name)
            elif kind == "output":
                nl.add_output_port(name)
            else:
                nl.ensure_net(name)
            tok = self.take()
            if tok.text == ";":
                return
            if tok.text != ",":
                raise ParseError(f"expected ',' or ';', got {tok.text!r}",
                                 tok.line, tok.col)

    def _parse_init(self, prim: str, tok: _Token) -> str:
        m = re.match(r"^(\d+)'h([0-9a-fA-F]+)$", tok.text)
        if m is None:
            raise ParseError(f"INIT literal {tok.text!r} must be <width>'h<hex>",
                             tok.line, tok.col)
        width = int(m.group(1))
        expected = model.init_bit_count(prim)
        if expected is None or width != expected:
            raise ParseError(
                f"{prim} INIT width {width} does not match the primitive",
                tok.line, tok.col)
        return m.group(2)

    def _parse_instance(self, nl: model.Netlist, declared: set[str]) -> None:
        type_tok = self.expect_ident()
        prim = self.gate_map.get(type_tok.text)
        if prim is None:
            raise UnknownPrimitive(f"unknown primitive {type_tok.text!r}",
                                   type_tok.line, type_tok.col)
        init: Optional[str] = None
        if self.peek() is not None and self.peek().text == "#":
            self.take()
            self.expect("(")
            self.expect(".")
            key = self.expect_ident()
            if key.text != "INIT":
                raise ParseError(f"only INIT parameters are supported, got {key.text!r}",
                                 key.line, key.col)
            self.expect("(")
            init = self._parse_init(prim, self.take())
            self.expect(")")
            self.expect(")")
        inst_tok = self.expect_ident()

        pins: dict[str, str] = {}
        self.expect("(")
        while True:
            tok = self.take()
            if tok.text == ")":
                break
            if tok.text == ",":
                continue
            if tok.text != ".":
                raise ParseError("connections must be named (.PIN(net))",
                                 tok.line, tok.col)
            pin_tok = self.expect_ident()
            self.expect("(")
            net_tok = self.expect_ident()
            self.expect(")")
            allowed = (set(model.input_pins(prim))
                       | set(model.optional_pins(prim))
                       | {model.output_pin(prim)})
            if pin_tok.text not in allowed:
                raise UnknownPort(f"{prim} has no port {pin_tok.text!r}",
                                  pin_tok.line, pin_tok.col)
            if net_tok.text not in declared:
                declared.add(net_tok.text)
                self.warn(f"implicit wire {net_tok.text!r} created at "
                          f"line {net_tok.line}")
            pins[pin_tok.text] = net_tok.text
        self.expect(";")

        try:
            nl.add_gate(inst_tok.text, prim, init, pins)
        except MalformedInit as exc:
            raise ParseError(str(exc), type_tok.line, type_tok.col) from exc
        except UnknownPort:
            raise
        except Exception as exc:
            from .errors import WorkbenchError
            if isinstance(exc, WorkbenchError):
                raise ParseError(str(exc), inst_tok.line, inst_tok.col) from exc
            raise

    def _infer_clock(self, nl: model.Netlist) -> None:
        counts: dict[int, int] = {}
        for g in nl.gates.values():
            if g.gate_type == "FF":
                nid = g.pins["CLK"]
                counts[nid] = counts.get(nid, 0) + 1
        if not counts:
            return
        best = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        if len(best) > 1:
            self.warn("multiple clock nets in use; picking the most common")
        nl.clock_net = best[0][0]


DEFAULT_GATE_MAP: dict[str, str] = {kind: kind for kind in model.GATE_KINDS}


def parse_structural_verilog(text: str,
                             gate_map: Optional[Mapping[str, str]] = None,
                             on_warning: Optional[Callable[[str], None]] = None,
                             ) -> model.Netlist:
    """Parse one structural module into a netlist.

    `gate_map` maps source primitive names onto the model's gate kinds
    (defaults to the identity map over the built-in library).
    """
    parser = _Parser(_tokenize(text), gate_map or DEFAULT_GATE_MAP, on_warning)
    return parser.parse()


def _check_identifier(name: str, what: str) -> str:
    if not _IDENT_RE.match(name) or name in _BEHAVIORAL:
        raise ValueError(f"{what} {name!r} is not a legal identifier for Verilog export")
    return name


def write_structural_verilog(netlist: model.Netlist) -> str:
    """Canonical structural-subset text for the netlist.

    Requires identifier-safe net, gate, and module names (generated corpora
    comply). Instances and wires are ordered by id, so identical models
    produce identical bytes.
    """
    lines: list[str] = []
    ports = list(netlist.input_ports) + [p for p in netlist.output_ports
                                         if p not in netlist.input_ports]
    for p in ports:
        _check_identifier(p, "port")
    lines.append(f"module {_check_identifier(netlist.name, 'module')} "
                 f"({', '.join(ports)});")
    for p in netlist.input_ports:
        lines.append(f"  input {p};")
    for p in netlist.output_ports:
        if p not in netlist.input_ports:
            lines.append(f"  output {p};")
    port_names = set(ports)
    for nid in sorted(netlist.nets):
        net = netlist.nets[nid]
        if net.name not in port_names:
            lines.append(f"  wire {_check_identifier(net.name, 'net')};")
    for gid in sorted(netlist.gates):
        g = netlist.gates[gid]
        param = ""
        bits = model.init_bit_count(g.gate_type)
        if bits is not None:
            param = f" #(.INIT({bits}'h{g.init}))"
        conns = ", ".join(
            f".{pin}({netlist.nets[nid].name})"
            for pin, nid in sorted(g.pins.items()))
        lines.append(f"  {g.gate_type}{param} "
                     f"{_check_identifier(g.name, 'gate name')} ({conns});")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"
