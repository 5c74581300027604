"""Shared builders for the test suite."""

from __future__ import annotations

from random import Random

import pytest

from gatelab import model
from gatelab.session import Session


def tiny_and() -> model.Netlist:
    nl = model.Netlist("tiny_and")
    nl.add_input_port("a")
    nl.add_input_port("b")
    nl.add_gate("g1", "LUT2", "8", {"I0": "a", "I1": "b", "O": "c"})
    nl.add_output_port("c")
    return nl


def toggler() -> model.Netlist:
    """One FF whose D is the inversion of its own Q."""
    nl = model.Netlist("toggler")
    nl.add_input_port("clk")
    nl.set_clock("clk")
    nl.add_gate("inv", "INV", None, {"I": "q", "O": "d"})
    nl.add_gate("ff", "FF", "0", {"D": "d", "CLK": "clk", "Q": "q"})
    nl.add_output_port("q")
    return nl


def ring3() -> model.Netlist:
    """Two FFs cycling 00 -> 01 -> 10 -> 00 (no inputs)."""
    nl = model.Netlist("ring3")
    nl.add_input_port("clk")
    nl.set_clock("clk")
    # d0 = ~q0 & ~q1 ; d1 = q0
    nl.add_gate("n0", "LUT2", "1", {"I0": "q0", "I1": "q1", "O": "d0"})
    nl.add_gate("n1", "BUF", None, {"I": "q0", "O": "d1"})
    nl.add_gate("f0", "FF", "0", {"D": "d0", "CLK": "clk", "Q": "q0"})
    nl.add_gate("f1", "FF", "0", {"D": "d1", "CLK": "clk", "Q": "q1"})
    nl.add_output_port("q0")
    nl.add_output_port("q1")
    return nl


def drive_random_session(session: Session, rng: Random, n_ops: int) -> None:
    """Apply a deterministic mix of mutating and analysis operations."""
    for step in range(n_ops):
        roll = rng.random()
        nl = session.netlist
        nets = [n.name for n in nl.nets.values()]
        gates = sorted(nl.gates)
        if roll < 0.35 and len(nets) >= 2:
            a, b = rng.sample(nets, 2)
            session.run_op("add_gate", {
                "name": f"s{step}", "type": "LUT2",
                "init": format(rng.randrange(16), "X"),
                "pins": {"I0": a, "I1": b, "O": f"sn{step}"}})
        elif roll < 0.5:
            session.run_op("create_submodule", {"name": f"m{step}",
                                                "color": None})
        elif roll < 0.65 and nl.submodules and gates:
            sid = rng.choice(sorted(nl.submodules))
            session.run_op("assign_gates", {
                "submodule": sid,
                "gates": rng.sample(gates, min(3, len(gates)))})
        elif roll < 0.72 and len(nl.submodules) >= 2:
            sids = sorted(nl.submodules)
            child, parent = rng.sample(sids, 2)
            try:
                session.run_op("set_parent",
                               {"submodule": child, "parent": parent})
            except Exception:
                session.run_op("set_parent",
                               {"submodule": child, "parent": None})
        elif roll < 0.85 and gates:
            session.run_op("select", {"ids": rng.sample(
                gates, min(2, len(gates)))})
        else:
            session.run_op("summary", {})


@pytest.fixture
def and_netlist():
    return tiny_and()
