import json
import subprocess
import sys

import numpy as np
import pytest

from cubiceq.cli import COMMANDS, run
from cubiceq.tensor_core import dense_to_json


def invoke(tmp_path, command, config=None, *extra):
    argv = [command, "--report", str(tmp_path / "out.json"), "--deterministic", *extra]
    if config is not None:
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        argv += ["--config", str(path)]
    code = run(argv)
    report = json.loads((tmp_path / "out.json").read_text()) if code in (0, 1) else None
    return code, report


def test_verify_kitaev_passes(tmp_path):
    code, report = invoke(tmp_path, "verify-kitaev")
    assert code == 0 and report["passed"]
    assert report["results"]["symbolic"]["exact_zero"]
    assert report["results"]["other_assignment"]["exact_zero"] is False
    assert report["conventions"]["uv_assignment"] == "R1(u) R2(v)"
    assert report["conventions"]["index_order"] == "M[out, in]"


def test_verify_kitaev_swapped_assignment_fails(tmp_path):
    code, report = invoke(tmp_path, "verify-kitaev", {"d": 2, "swap_uv_assignment": True, "grid_points": 2})
    assert code == 1 and report["conventions"]["uv_assignment"] == "R1(v) R2(u)"


def test_verify_cubic_with_pauli_and_dense_entries(tmp_path):
    (tmp_path / "r4.txt").write_text("1 IIII\n-u XXXX\n")
    a = np.eye(16) + 0.5 * np.kron(np.kron([[0, 1], [1, 0]], [[0, 1], [1, 0]]), np.kron([[0, 1], [1, 0]], [[0, 1], [1, 0]]))
    config = {
        "d": 2,
        "R1": {"kitaev": "A", "parameter": "u"},
        "R2": {"pauli": "1 IIII\nv ZZZZ"},
        "R3": {"kitaev": "B", "parameter": "v"},
        "R4": {"pauli_file": "r4.txt"},
        "uv": [[0.3, 0.7], [-1.2, 0.4]],
    }
    code, report = invoke(tmp_path, "verify-cubic", config)
    assert code == 0 and report["results"]["backend_used"] == "exact"
    config["R1"] = {"dense": dense_to_json(a)}
    code, report = invoke(tmp_path, "verify-cubic", config)
    assert report["results"]["backend_used"] == "dense"
    assert code == 1  # R1 fixed at u=0.5 does not match R4(u)


def test_railway_reports_failure_honestly(tmp_path):
    code, report = invoke(tmp_path, "railway")
    assert code == 1
    assert report["results"]["extra"]["passing_readings"] == []


def test_transfer_commute_both_backends(tmp_path):
    assert invoke(tmp_path, "transfer-commute")[0] == 0
    assert invoke(tmp_path, "transfer-commute", None, "--backend", "dense")[0] == 0
    assert invoke(tmp_path, "transfer-commute", {"d": 2, "geometry": "corner"})[0] == 1


def test_extract_hamiltonian(tmp_path):
    code, report = invoke(tmp_path, "extract-hamiltonian")
    assert code == 0 and report["results"]["extra"]["terms"] == 8
    assert report["results"]["hamiltonian"].count("\n") == 8


def test_partition(tmp_path):
    code, report = invoke(tmp_path, "partition", {"d": 2, "transfer": "A", "N": 2})
    assert code == 0
    assert report["results"]["trace"] == "65536 + 262144*u^2 + 393216*u^4 + 262144*u^6 + 65536*u^8"


def test_yb_presets(tmp_path):
    assert invoke(tmp_path, "yb-check")[0] == 0
    assert invoke(tmp_path, "yb-check", {"d": 3, "backend": "dense", "preset": "identity"})[0] == 0
    code, report = invoke(tmp_path, "yb-check", {"d": 2, "preset": "random", "samples": 3})
    assert code == 1 and all(r > 1e-6 for r in report["results"]["residuals"].values())


def test_yb_with_matrix(tmp_path):
    config = {"d": 2, "r": dense_to_json(np.eye(4)[[0, 2, 1, 3]])}
    assert invoke(tmp_path, "yb-check", config)[0] == 0


def test_search_intertwiner(tmp_path):
    code, report = invoke(tmp_path, "search-intertwiner", {"d": 2, "seed": 3, "export_pair": True})
    assert code == 0 and report["results"]["converged"] and report["results"]["R3"]["shape"] == [16, 16]


def test_deterministic_reports_are_identical(tmp_path):
    run(["yb-check", "--deterministic", "--report", str(tmp_path / "a.json")])
    run(["yb-check", "--deterministic", "--report", str(tmp_path / "b.json")])
    a = (tmp_path / "a.json").read_text()
    assert a == (tmp_path / "b.json").read_text()
    assert "timestamp" not in a and "wall_time_ms" not in a


def test_timed_report_has_timestamp(tmp_path):
    run(["yb-check", "--report", str(tmp_path / "a.json")])
    report = json.loads((tmp_path / "a.json").read_text())
    assert "timestamp" in report and report["schema"] == 1


@pytest.mark.parametrize(
    "config,key",
    [
        ({}, "d"),
        ({"d": 1}, "d"),
        ({"d": 3}, "d"),
        ({"d": 2, "backend": "gpu"}, "backend"),
        ({"d": 2, "tolerance": -1}, "tolerance"),
        ({"d": 2, "grid_range": [0]}, "grid_range"),
        ({"d": 2, "leg_order": [1, 1, 2, 3]}, "leg_order"),
        ({"d": 2, "grid_points": "many"}, "grid_points"),
        ({"d": 2, "R1": {"kitaev": "C"}, "R2": {}, "R3": {}, "R4": {}}, "R1.kitaev"),
        ({"d": 2, "R1": {"kitaev": "A"}}, "R2"),
    ],
)
def test_config_errors_name_the_key(tmp_path, capsys, config, key):
    command = "verify-cubic"
    code, _ = invoke(tmp_path, command, config)
    assert code == 2
    assert f"key {key!r}" in capsys.readouterr().err


def test_unreadable_config(tmp_path, capsys):
    (tmp_path / "bad.json").write_text("{not json")
    assert run(["yb-check", "--config", str(tmp_path / "bad.json")]) == 2
    assert "'--config'" in capsys.readouterr().err


def test_stdout_output(capsys):
    assert run(["yb-check", "--deterministic"]) == 0
    assert json.loads(capsys.readouterr().out)["command"] == "yb-check"


def test_every_command_is_wired():
    from cubiceq.cli import HANDLERS

    assert set(HANDLERS) == set(COMMANDS)


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "cubiceq.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "cubiceq" in out.stdout


def test_verify_cubic_random_dense_fails(tmp_path, rng):
    from conftest import random_complex

    config = {"d": 2, "grid_points": 2}
    for k in range(1, 5):
        config[f"R{k}"] = {"dense": dense_to_json(random_complex(rng, (16, 16)))}
    code, report = invoke(tmp_path, "verify-cubic", config)
    assert code == 1 and report["results"]["numeric"]["max_relative"] > 1e-3
