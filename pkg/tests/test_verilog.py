import pytest

from gatelab import generate, jsonio, verilog
from gatelab.errors import ParseError, UnknownPort, UnknownPrimitive

from conftest import tiny_and

GOOD = """
// a two-input module
module top (a, b, c);
  input a, b;
  output c;
  LUT2 #(.INIT(4'h8)) g1 (.I0(a), .I1(b), .O(c));
endmodule
"""


def test_parse_minimal_and():
    nl = verilog.parse_structural_verilog(GOOD)
    assert len(nl.gates) == 1
    g = nl.gates[1]
    assert g.gate_type == "LUT2" and g.init == "8"
    assert nl.input_ports == ["a", "b"]
    assert nl.output_ports == ["c"]


def test_behavioral_rejected():
    text = GOOD.replace("endmodule",
                        "always @(posedge clk) q <= d;\nendmodule")
    with pytest.raises(ParseError):
        verilog.parse_structural_verilog(text)
    with pytest.raises(ParseError):
        verilog.parse_structural_verilog(
            "module m (a);\n  input [3:0] a;\nendmodule")


def test_implicit_wire_warns():
    text = """
module top (a, c);
  input a;
  output c;
  BUF b1 (.I(a), .O(w1));
  BUF b2 (.I(w1), .O(c));
endmodule
"""
    warnings = []
    nl = verilog.parse_structural_verilog(text, on_warning=warnings.append)
    assert nl.net_named("w1") is not None
    assert any("implicit wire 'w1'" in w for w in warnings)


def test_unknown_primitive_and_port():
    with pytest.raises(UnknownPrimitive):
        verilog.parse_structural_verilog(
            "module m (a);\n input a;\n NAND2 g (.A(a));\nendmodule")
    with pytest.raises(UnknownPort):
        verilog.parse_structural_verilog(
            "module m (a);\n input a;\n BUF g (.X(a), .O(b));\nendmodule")


def test_parse_error_carries_location():
    bad = "module m (a);\n  input a;\n  LUT2 #(.INIT(3'h8)) g (.I0(a));\nendmodule"
    with pytest.raises(ParseError) as err:
        verilog.parse_structural_verilog(bad)
    assert err.value.line == 3


def test_custom_gate_map():
    text = "module m (d, q);\n input d;\n output q;\n" \
           " FDRE #(.INIT(1'h0)) r (.D(d), .CLK(ck), .Q(q));\nendmodule"
    gate_map = dict(verilog.DEFAULT_GATE_MAP, FDRE="FF")
    nl = verilog.parse_structural_verilog(text, gate_map=gate_map)
    assert nl.gates[1].gate_type == "FF"
    assert nl.clock_net == nl.net_named("ck").id


def test_writer_round_trip():
    nl = tiny_and()
    text = verilog.write_structural_verilog(nl)
    back = verilog.parse_structural_verilog(text)
    assert jsonio.write_json_netlist(back) == jsonio.write_json_netlist(nl)
    assert verilog.write_structural_verilog(back) == text


def test_verilog_and_json_emissions_agree():
    for seed in range(20):
        nl = generate.random_netlist(seed)
        via_json = jsonio.read_json_netlist(jsonio.write_json_netlist(nl))
        via_verilog = verilog.parse_structural_verilog(
            verilog.write_structural_verilog(nl))
        assert jsonio.structurally_equal(via_json, via_verilog)


def test_dangling_declared_wire_preserved():
    text = "module m (a);\n input a;\n wire unused;\n" \
           " BUF g (.I(a), .O(b));\nendmodule"
    nl = verilog.parse_structural_verilog(text)
    assert nl.net_named("unused") is not None
