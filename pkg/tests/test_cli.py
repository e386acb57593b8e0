import json
import subprocess
import sys

import numpy as np
import pytest

from eventclock import build_spin_example, zeno_sweep
from eventclock.cli import main


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = [[float(cell) for cell in line.split(",")] for line in lines[1:]]
    return header, np.array(rows)


ZENO_CONFIG = {
    "a": 0.0,
    "b": 1.0,
    "total_time": 1.0,
    "g_convention": "paper",
    "tau": 1.0,
    "k_values": [10, 100, 1000],
}


def test_zeno_sweep_values(tmp_path):
    cfg = write_config(tmp_path, "zeno.json", ZENO_CONFIG)
    out = tmp_path / "zeno.csv"
    assert main(["zeno-sweep", "--config", cfg, "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["k", "delta", "survival_at_tau", "delta_e", "resolvability"]
    assert np.allclose(rows[:, 0], [10, 100, 1000])
    assert np.allclose(rows[:, 2], [0.0144, 0.6737, 0.9613], atol=1e-3)
    assert np.allclose(rows[:, 3], 2 * np.pi, atol=1e-10)


def test_byte_identical_reruns(tmp_path):
    cfg = write_config(tmp_path, "zeno.json", ZENO_CONFIG)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["zeno-sweep", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["zeno-sweep", "--config", cfg, "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_csv_round_trip_matches_memory(tmp_path):
    cfg = write_config(tmp_path, "zeno.json", ZENO_CONFIG)
    out = tmp_path / "zeno.csv"
    main(["zeno-sweep", "--config", cfg, "--out", str(out)])
    _, rows = read_csv(out)
    model = build_spin_example()
    expected = zeno_sweep(
        model.correlation, model.hamiltonian, model.psi0, 1.0, [10, 100, 1000]
    )
    for row, exp in zip(rows, expected):
        assert row[1] == pytest.approx(exp.delta, rel=1e-11)
        assert row[2] == pytest.approx(exp.survival_at_tau, rel=1e-11)
        assert row[3] == pytest.approx(exp.delta_e, rel=1e-11)
        assert row[4] == pytest.approx(exp.resolvability, rel=1e-11)


def test_detect_halving_column(tmp_path):
    cfg = write_config(tmp_path, "detect.json", {"delta": 0.125, "k_max": 5})
    out = tmp_path / "detect.csv"
    assert main(["detect", "--config", cfg, "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["k", "t", "p_detect", "survival"]
    assert np.max(np.abs(rows[:, 2] - [0.5, 0.25, 0.125, 0.0625, 0.03125])) <= 1e-10


def test_malformed_config_exits_2_without_output(tmp_path, capsys):
    cfg = write_config(tmp_path, "bad.json", {"delta": -0.125, "k_max": 5})
    out = tmp_path / "bad.csv"
    assert main(["detect", "--config", cfg, "--out", str(out)]) == 2
    assert "delta" in capsys.readouterr().err
    assert not out.exists()


def test_unknown_key_exits_2(tmp_path, capsys):
    cfg = write_config(tmp_path, "bad.json", {"delta": 0.125, "k_max": 5, "zeta": 1})
    assert main(["detect", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 2
    assert "zeta" in capsys.readouterr().err


def test_sampling_requires_seed(tmp_path, capsys):
    cfg = write_config(tmp_path, "s.json", {"delta": 0.125, "k_max": 5, "samples": 100})
    assert main(["detect", "--config", cfg, "--out", str(tmp_path / "s.csv")]) == 2
    assert "seed" in capsys.readouterr().err


def test_sampling_deterministic_with_seed(tmp_path):
    cfg = write_config(
        tmp_path, "s.json",
        {"delta": 0.125, "k_max": 5, "samples": 2000, "seed": 7},
    )
    out1, out2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
    assert main(["detect", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["detect", "--config", cfg, "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    _, rows = read_csv(out1)
    assert abs(rows[0, 2] - 0.5) < 0.05  # empirical first-step detection


def test_wrap_guard_exits_3(tmp_path, capsys):
    cfg = write_config(
        tmp_path, "wrap.json",
        {"x0": -4.0, "sigma": 0.5, "p0": 1.0, "t_max": 12.0, "dt": 0.5,
         "grid_n": 256, "grid_x_min": -8.0},
    )
    out = tmp_path / "wrap.csv"
    assert main(["arrival-evolve", "--config", cfg, "--out", str(out)]) == 3
    assert "wrap-around" in capsys.readouterr().err
    assert not out.exists()


def test_arrival_evolve_output(tmp_path):
    cfg = write_config(
        tmp_path, "arr.json", {"t_max": 30.0, "dt": 5.0}
    )
    out = tmp_path / "arr.csv"
    assert main(["arrival-evolve", "--config", cfg, "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["t", "p_plus", "j_origin"]
    assert rows.shape == (7, 3)
    assert rows[-1, 1] == pytest.approx(0.9011803, abs=1e-5)


def test_commutators_output(tmp_path):
    cfg = write_config(tmp_path, "comm.json", {"t1": 0.125, "t2": 0.25})
    out = tmp_path / "comm.csv"
    assert main(["commutators", "--config", cfg, "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["t1", "t2", "same_time_norm", "two_time_norm"]
    assert rows[0, 2] <= 1e-12
    assert rows[0, 3] == pytest.approx(0.5, abs=1e-10)


def test_backflow_output(tmp_path):
    cfg = write_config(
        tmp_path, "bf.json",
        {"w_values": [0.4], "phi_values": [np.pi], "t_min": -1.0, "t_max": 1.0,
         "t_step": 0.05},
    )
    out = tmp_path / "bf.csv"
    assert main(["arrival-backflow", "--config", cfg, "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["p1", "p2", "s1", "s2", "w", "phi", "t_star", "j_min"]
    assert rows[0, 7] < -1e-4


def test_spin_run_matches_closed_form(tmp_path):
    cfg = write_config(tmp_path, "spin.json", {"samples": 101})
    out = tmp_path / "spin.csv"
    assert main(["spin-run", "--config", cfg, "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["t", "p_m", "m"]
    assert np.max(np.abs(rows[:, 1] - np.sin(2 * np.pi * rows[:, 0]) ** 2)) <= 1e-10


def test_json_format(tmp_path):
    cfg = write_config(tmp_path, "zeno.json", ZENO_CONFIG)
    out = tmp_path / "zeno.json.out"
    assert main(["zeno-sweep", "--config", cfg, "--out", str(out), "--format", "json"]) == 0
    payload = json.loads(out.read_text())
    assert payload["experiment"] == "zeno-sweep"
    assert payload["columns"] == ["k", "delta", "survival_at_tau", "delta_e", "resolvability"]
    assert payload["rows"][1][2] == pytest.approx(0.6737, abs=1e-3)


@pytest.mark.parametrize(
    "name",
    ["zeno_sweep", "detect", "detect_sampled", "spin_run", "commutators",
     "arrival_evolve", "arrival_backflow"],
)
def test_shipped_configs_run(tmp_path, name):
    from pathlib import Path

    config = Path(__file__).resolve().parent.parent / "configs" / f"{name}.json"
    experiment = name.replace("_", "-").replace("detect-sampled", "detect")
    out = tmp_path / f"{name}.csv"
    assert main([experiment, "--config", str(config), "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert rows.size > 0


def test_console_entry_point(tmp_path):
    cfg = write_config(tmp_path, "detect.json", {"delta": 0.125, "k_max": 3})
    out = tmp_path / "d.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "eventclock", "detect", "--config", cfg,
         "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert out.exists()
