"""CLI: command dispatch, file formats, exit codes, determinism."""

from __future__ import annotations

import json

import pytest

from stabkit import cli
from stabkit.gf2 import WeylLabel, span_and_classify, format_subspace
from stabkit.state import generate_state, state_to_json_dict


def run_to_file(tmp_path, name, argv):
    out = tmp_path / name
    code = cli.main(argv + ["--out", str(out)])
    return code, out.read_bytes()


def test_gamma_exact_payload(tmp_path):
    code, payload = run_to_file(
        tmp_path, "g.json", ["gamma", "--kind", "t_tensor", "--n", "1", "--exact"]
    )
    assert code == 0
    doc = json.loads(payload)
    assert doc["command"] == "gamma"
    assert abs(doc["results"]["gamma"] - 0.625) < 1e-9
    # 17-significant-digit float contract.
    assert b"0.62499999999999933" in payload


def test_tester_on_stabilizer_close(tmp_path):
    code, payload = run_to_file(
        tmp_path,
        "t.json",
        ["test", "--kind", "stabilizer", "--n", "3", "--eps1", "0.9",
         "--eps2", "1e-40", "--C", "1", "--delta", "0.333", "--seed", "7"],
    )
    assert code == 0
    doc = json.loads(payload)
    assert doc["results"]["decision"] == "Close"
    assert doc["results"]["gamma_bar"] == 1


def test_theta_pauli_graph(tmp_path):
    code, payload = run_to_file(
        tmp_path, "th.json", ["theta", "--pauli-graph", "2", "--tol", "1e-6"]
    )
    assert code == 0
    doc = json.loads(payload)
    assert abs(doc["results"]["value"] - 4.0) < 1e-5


def test_state_file_input(tmp_path):
    psi = generate_state("haar", 2, seed=5)
    state_path = tmp_path / "state.json"
    state_path.write_text(json.dumps(state_to_json_dict(psi)))
    code, payload = run_to_file(
        tmp_path, "gf.json", ["gamma", "--state-file", str(state_path), "--exact"]
    )
    assert code == 0
    from stabkit.state import gamma_exact

    assert json.loads(payload)["results"]["gamma"] == pytest.approx(gamma_exact(psi))


def test_subspace_file_cover(tmp_path):
    V = span_and_classify(
        [WeylLabel.from_string("100100"), WeylLabel.from_string("010010")]
    )
    sub_path = tmp_path / "v.txt"
    sub_path.write_text(format_subspace(V))
    code, payload = run_to_file(
        tmp_path, "c.json", ["cover", "--subspace-file", str(sub_path)]
    )
    assert code == 0
    doc = json.loads(payload)
    assert doc["results"]["union_exact"] is True
    assert doc["results"]["part_count"] <= doc["results"]["bound"]


def test_sandwich_sweep_csv_columns(tmp_path):
    code, payload = run_to_file(
        tmp_path,
        "s.csv",
        ["sandwich-sweep", "--per-class", "2", "--n-values", "1,2",
         "--seed", "3", "--format", "csv"],
    )
    assert code == 0
    lines = payload.decode().splitlines()
    assert lines[0] == "state_id,n,gamma,f_s,gamma_to_sixth,ratio_f_over_g112"
    assert len(lines) == 1 + 6  # three classes, two states each


def test_uncertainty_command(tmp_path):
    code, payload = run_to_file(
        tmp_path,
        "u.json",
        ["uncertainty", "--kind", "haar", "--n", "2", "--random-labels", "6",
         "--seed", "11", "--theta-tol", "1e-5"],
    )
    assert code == 0
    doc = json.loads(payload)["results"]
    assert doc["lhs"] <= doc["psi0_lb"] + 1e-8
    assert doc["psi0_lb"] <= doc["theta_ub"] + 1e-4


def test_extract_and_bsg_commands(tmp_path):
    code, payload = run_to_file(
        tmp_path,
        "e.json",
        ["extract", "--kind", "stabilizer", "--n", "3", "--seed", "13"],
    )
    assert code == 0
    doc = json.loads(payload)["results"]
    assert doc["succeeded"] is True and doc["size"] == 8

    code, payload = run_to_file(
        tmp_path,
        "b.json",
        ["bsg", "--n", "3", "--subspace-dim", "3", "--junk", "2", "--seed", "17",
         "--pfr-search"],
    )
    assert code == 0
    doc = json.loads(payload)["results"]
    assert doc["succeeded"] is True
    assert doc["pfr_search"]["translate_count"] >= 1


def test_config_file_merging(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kind": "t_tensor", "n": 1, "exact": True}))
    code, payload = run_to_file(
        tmp_path, "m.json", ["--config", str(cfg), "gamma", "--n", "2"]
    )
    assert code == 0
    doc = json.loads(payload)
    assert doc["config"]["n"] == 2  # explicit flag wins
    assert doc["config"]["kind"] == "t_tensor"  # file fills the rest
    assert doc["results"]["gamma"] == pytest.approx(0.625**2)


def test_exit_codes(tmp_path, capsys):
    assert cli.main(["gamma", "--kind", "haar", "--n", "2"]) == 2  # missing seed
    assert cli.main(["fidelity", "--kind", "haar", "--n", "9", "--seed", "1"]) == 4
    assert (
        cli.main(
            ["test", "--kind", "haar", "--n", "2", "--eps1", "0.5",
             "--eps2", "0.9", "--seed", "1"]
        )
        == 2
    )
    capsys.readouterr()


def test_deterministic_reports(tmp_path):
    for name, argv in {
        "gamma": ["gamma", "--kind", "haar", "--n", "3", "--m", "2000", "--seed", "5"],
        "sweep": ["sandwich-sweep", "--per-class", "2", "--seed", "9"],
        "extract": ["extract", "--kind", "t_tensor", "--n", "3", "--seed", "2"],
    }.items():
        _, first = run_to_file(tmp_path, f"{name}-1.json", argv)
        _, second = run_to_file(tmp_path, f"{name}-2.json", argv)
        assert first == second


def test_wall_clock_not_in_payload(tmp_path):
    _, payload = run_to_file(
        tmp_path, "w.json", ["gamma", "--kind", "t_tensor", "--n", "1", "--exact"]
    )
    assert b"wall_clock" not in payload


def test_empty_sweep_emits_header_only_csv(tmp_path):
    code, payload = run_to_file(
        tmp_path,
        "empty.csv",
        ["sandwich-sweep", "--per-class", "0", "--seed", "1", "--format", "csv"],
    )
    assert code == 0
    assert payload.decode() == "state_id,n,gamma,f_s,gamma_to_sixth,ratio_f_over_g112\n"


def test_thread_env_var_validation(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("STABKIT_THREADS", "four")
    assert cli.main(["gamma", "--kind", "t_tensor", "--n", "1", "--exact"]) == 2
    monkeypatch.setenv("STABKIT_THREADS", "4")
    code, _ = run_to_file(
        tmp_path, "thr.json", ["gamma", "--kind", "t_tensor", "--n", "1", "--exact"]
    )
    assert code == 0
    capsys.readouterr()


def test_uncertainty_labels_file(tmp_path):
    labels_path = tmp_path / "labels.txt"
    labels_path.write_text("1000\n0010\n1010\n")  # X1, Z1, Y1 at n=2
    code, payload = run_to_file(
        tmp_path,
        "ulf.json",
        ["uncertainty", "--kind", "stabilizer", "--n", "2", "--seed", "19",
         "--labels-file", str(labels_path)],
    )
    assert code == 0
    doc = json.loads(payload)["results"]
    assert doc["m"] == 3
    assert doc["lhs"] <= 1.0 + 1e-9  # mutually anticommuting triple


def test_theta_graph_file(tmp_path):
    from stabkit.graphs import cycle_graph, format_graph

    graph_path = tmp_path / "c5.txt"
    graph_path.write_text(format_graph(cycle_graph(5)))
    code, payload = run_to_file(
        tmp_path, "gf5.json", ["theta", "--graph-file", str(graph_path)]
    )
    assert code == 0
    assert json.loads(payload)["results"]["value"] == pytest.approx(5**0.5, abs=1e-5)


def test_theta_csv_format(tmp_path):
    code, payload = run_to_file(
        tmp_path, "th.csv", ["theta", "--cycle", "5", "--format", "csv"]
    )
    assert code == 0
    lines = payload.decode().splitlines()
    assert lines[0].startswith("value,order,iterations,residuals")
    assert len(lines) == 2


def test_m_override(tmp_path):
    code, payload = run_to_file(
        tmp_path,
        "mo.json",
        ["test", "--kind", "stabilizer", "--n", "2", "--eps1", "0.9",
         "--eps2", "1e-40", "--seed", "3", "--m-override", "25"],
    )
    assert code == 0
    assert json.loads(payload)["results"]["m_used"] == 25
