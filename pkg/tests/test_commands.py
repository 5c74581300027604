import pytest

from gatelab import commands, fsm, generate
from gatelab.commands import run_command
from gatelab.errors import ArgumentError, UnknownCommand, UnknownGate
from gatelab.session import Session
from gatelab.trace import EventLog

from conftest import tiny_and


def _session(netlist, tmp_path=None):
    log = EventLog(tmp_path / "log.jsonl" if tmp_path else None,
                   session_id="t")
    return Session(netlist, log)


def test_unknown_command():
    sess = _session(tiny_and())
    with pytest.raises(UnknownCommand):
        run_command(sess, "frobnicate")


def test_submodule_flow_by_name(tmp_path):
    sess = _session(tiny_and(), tmp_path)
    run_command(sess, "submodule new fsm")
    result = run_command(sess, "submodule add fsm 1")
    assert result.data["gates"] == [1]
    listing = run_command(sess, "submodule list")
    assert listing.data[0]["name"] == "fsm"
    assert listing.data[0]["gates"] == 1


def test_submodule_membership_query_after_adds():
    proj = generate.fsm_sea_of_gates(seed=2, padding=60)
    sess = _session(proj.netlist)
    run_command(sess, "submodule new fsm")
    ffs = proj.sidecar["fsm_ff_ids"][:3]
    run_command(sess, f"submodule add fsm {' '.join(str(f) for f in ffs)}")
    got = sess.netlist.submodules[1].gate_ids
    assert got == set(ffs)


def test_failed_command_logs_error_event(tmp_path):
    sess = _session(tiny_and(), tmp_path)
    with pytest.raises(UnknownGate):
        run_command(sess, "neighbors 99 fanin")
    err = sess.log.records[-1]
    assert err.op == "error"
    assert err.parsed_args()["code"] == "UnknownGate"
    # next successful op on the same target would close the recovery window
    with pytest.raises(ArgumentError):
        run_command(sess, "neighbors 1 sideways")


def test_gate_add_and_net_function(tmp_path):
    sess = _session(tiny_and(), tmp_path)
    result = run_command(sess, "gate-add g2 LUT2 init=6 I0=a I1=b O=x")
    assert result.data["id"] == 2
    fn = run_command(sess, "net-function x")
    assert fn.data["function"] in ("a & ~b | ~a & b", "~a & b | a & ~b")


def test_events_reported_per_command(tmp_path):
    sess = _session(tiny_and(), tmp_path)
    r1 = run_command(sess, "submodule new top")
    assert len(r1.events) == 1
    r2 = run_command(sess, "lint")
    assert len(r2.events) == 1


def test_obfuscate_then_attack_round_trip(tmp_path):
    stg = fsm.random_stg(3, 6, 2)
    nl = fsm.synthesize_stg(stg, "binary")
    ffs = fsm.synthesized_state_ffs(nl)
    sess = _session(nl, tmp_path)
    ffs_arg = ",".join(str(f) for f in ffs)
    run_command(sess, f"obfuscate {ffs_arg} in0,in1 2,0,3 2 5")
    new_ffs = fsm.synthesized_state_ffs(sess.netlist)
    ins = fsm.synthesized_input_nets(sess.netlist)
    result = run_command(
        sess, f"attack-harpoon {','.join(str(f) for f in new_ffs)} "
              f"{','.join(str(n) for n in ins)}")
    assert result.data["key"] == [2, 0, 3]
    assert len(result.data["obfuscation_states"]) == 5


def test_patch_init_command(tmp_path):
    proj = generate.fsm_sea_of_gates(seed=4, padding=50)
    sess = _session(proj.netlist, tmp_path)
    ffs = proj.sidecar["fsm_ff_ids"]
    bits = "1" * len(ffs)
    run_command(sess, f"patch-init {','.join(str(f) for f in ffs)} {bits}")
    for f in ffs:
        assert sess.netlist.gates[f].init == "1"


def test_sim_command_produces_csv():
    sess = _session(tiny_and())
    result = run_command(sess, "sim 2 probe=c")
    assert result.data["csv"].splitlines()[0] == "cycle,c"


def test_vocabulary_lists_all_verbs():
    vocab = commands.vocabulary()
    for verb in ["lint", "fsm-candidates", "extract-stg", "obfuscate",
                 "attack-harpoon", "patch-init", "locate-aes", "extract-key",
                 "sim", "metrics", "summary", "select"]:
        assert verb in vocab


def test_metrics_command(tmp_path):
    sess = _session(tiny_and(), tmp_path)
    run_command(sess, "summary")
    result = run_command(sess, "metrics")
    assert result.data["action_counts"]["navigation"] >= 1
