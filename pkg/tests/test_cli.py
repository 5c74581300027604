import json
from pathlib import Path

from gatelab import jsonio
from gatelab.cli import main


def _gen(tmp_path, kind, seed, *knobs) -> Path:
    out = tmp_path / f"{kind}_{seed}"
    argv = ["gen", kind, "--seed", str(seed), "--out", str(out)]
    for knob in knobs:
        argv += ["--knob", knob]
    assert main(argv) == 0
    return out / "project.json"


def test_gen_and_lint(tmp_path, capsys):
    project = _gen(tmp_path, "spn_cipher", 3)
    assert project.exists()
    assert main(["lint", str(project)]) == 0
    out = capsys.readouterr().out
    assert "errors: 0" in out


def test_fsm_candidates_cli(tmp_path, capsys):
    project = _gen(tmp_path, "fsm_sea_of_gates", 4, "padding=120")
    sidecar = json.loads((project.parent / "sidecar.json").read_text())
    capsys.readouterr()  # drop the gen output
    assert main(["fsm-candidates", str(project)]) == 0
    out = capsys.readouterr().out
    top_ffs = out.splitlines()[2].split()[2]
    assert top_ffs == ",".join(str(f) for f in sidecar["fsm_ff_ids"])


def test_extract_stg_and_attack(tmp_path, capsys):
    project = _gen(tmp_path, "harpoon_fsm", 6,
                   "key_length=2", "padding=80")
    sidecar = json.loads((project.parent / "sidecar.json").read_text())
    ffs = ",".join(str(f) for f in sidecar["fsm_ff_ids"])
    inputs = ",".join(sidecar["fsm_input_nets"])
    dot = tmp_path / "stg.dot"
    assert main(["extract-stg", str(project), "--ffs", ffs,
                 "--inputs", inputs, "--dot", str(dot)]) == 0
    assert "digraph" in dot.read_text()
    assert main(["attack-harpoon", str(project), "--ffs", ffs,
                 "--inputs", inputs]) == 0
    out = capsys.readouterr().out
    want = ",".join(str(w) for w in sidecar["key"])
    assert f"enabling key: {want}" in out


def test_patch_init_writes_project_and_events(tmp_path, capsys):
    project = _gen(tmp_path, "fsm_sea_of_gates", 5, "padding=60")
    sidecar = json.loads((project.parent / "sidecar.json").read_text())
    ffs = sidecar["fsm_ff_ids"]
    bits = "1" * len(ffs)
    assert main(["patch-init", str(project),
                 "--ffs", ",".join(str(f) for f in ffs),
                 "--bits", bits]) == 0
    patched = jsonio.load_project(project)
    assert all(patched.gates[f].init == "1" for f in ffs)
    events = project.parent / "project.json.events.jsonl"
    assert events.exists()
    lines = events.read_text().splitlines()
    assert any('"op":"patch_init"' in line for line in lines)


def test_replay_verb_round_trip(tmp_path, capsys):
    project = _gen(tmp_path, "spn_cipher", 8)
    base = jsonio.load_project(project)  # frozen before mutations
    base_path = tmp_path / "base.json"
    jsonio.save_project(base_path, base)

    # mutate through the CLI so events accumulate
    assert main(["patch-init", str(project), "--ffs", "17", "--bits", "1"]) == 0
    events = project.parent / "project.json.events.jsonl"
    assert main(["replay", str(base_path), str(events)]) == 0
    out = capsys.readouterr().out
    assert "replay ok" in out
    assert jsonio.project_digest(jsonio.load_project(project)) in out


def test_sim_cli(tmp_path, capsys):
    project = _gen(tmp_path, "spn_cipher", 9)
    capsys.readouterr()
    assert main(["sim", str(project), "--cycles", "4",
                 "--probe", "ct0", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "cycle,ct0"


def test_cli_error_paths(tmp_path, capsys):
    project = _gen(tmp_path, "spn_cipher", 10)
    code = main(["extract-stg", str(project), "--ffs", "99999",
                 "--inputs", "pt0"])
    assert code == 2
    err = capsys.readouterr().err
    assert "UnknownGate" in err
