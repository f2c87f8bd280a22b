import subprocess
import sys

import numpy as np
import pytest

from qramsim.analysis import analytic_t1
from qramsim.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, load_settings, main
from qramsim.output import config_hash, format_number, read_csv, write_csv


def write_config(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


def run(tmp_path, *args, out="out"):
    return main([*args, "--out", str(tmp_path / out)])


def column(rows, columns, name):
    return [r[columns.index(name)] for r in rows]


def test_format_number():
    assert format_number(0.1) == "0.1"
    assert format_number(1 / 3) == "0.333333333333"
    assert format_number(2.0 / 3e7) == "0.0000000666666666667"
    assert format_number(123456789012345.0) == "123456789012000"
    assert format_number(np.inf) == "inf" and format_number(np.nan) == "nan"
    assert format_number(True) == "true"
    assert format_number(1 - 2j) == "1-2j"


def test_config_hash_ignores_key_order():
    assert config_hash({"a": {"x": "1", "y": "2"}}) == config_hash({"a": {"y": "2", "x": "1"}})
    assert len(config_hash(load_settings())) == 16


def test_write_csv_refuses_overwrite(tmp_path):
    path = tmp_path / "x.csv"
    write_csv(path, ["a"], [[1.0]])
    with pytest.raises(FileExistsError):
        write_csv(path, ["a"], [[2.0]])
    write_csv(path, ["a"], [[2.0]], comments=["note"], force=True)
    assert read_csv(path) == (["note"], ["a"], [["2"]])


def test_squid_command(tmp_path, capsys):
    assert run(tmp_path, "squid") == EXIT_OK
    assert "gap closed" in capsys.readouterr().out
    comments, columns, rows = read_csv(tmp_path / "out" / "squid.csv")
    assert comments[1].startswith("config_hash ")
    assert column(rows, columns, "convention") == ["cyclic", "angular"]
    assert 100 <= float(rows[0][columns.index("coupling_gain")]) <= 150
    assert (tmp_path / "out" / "squid_report.txt").exists()


def test_squid_close_cloud_closes_gap(tmp_path):
    cfg = write_config(tmp_path, "[squid]\nseparation = 10e-6\n")
    assert run(tmp_path, "squid", "--config", str(cfg)) == EXIT_OK
    _, columns, rows = read_csv(tmp_path / "out" / "squid.csv")
    assert "true" in column(rows, columns, "gap_closed")


def test_decohere_command(tmp_path):
    cfg = write_config(tmp_path, "[experiments]\neta_list = 5e-4\n")
    assert run(tmp_path, "decohere", "--config", str(cfg)) == EXIT_OK
    comments, columns, rows = read_csv(tmp_path / "out" / "decoherence.csv")
    assert columns[:6] == ["eta", "t1", "t1_over_half_rabi", "t2", "t2_over_half_rabi", "t1_analytic"]
    assert float(rows[0][columns.index("t1_analytic")]) == float(format_number(analytic_t1(5e-4, 1.0, 100.0)))
    assert float(rows[0][columns.index("t1_over_half_rabi")]) == pytest.approx(1.02, rel=0.1)
    assert rows[0][-1] == "ok"


def test_transfer_outputs_and_rerun_identical(tmp_path):
    cfg = write_config(tmp_path, "[experiments]\neta = 1e-4\nstate = direct\n")
    assert run(tmp_path, "transfer", "--config", str(cfg)) == EXIT_OK
    out = tmp_path / "out"
    _, columns, rows = read_csv(out / "transfer_trace.csv")
    window = [float(w) for w in column(rows, columns, "window_value")]
    assert window[0] == window[-1] == 0.5
    assert max(window) == 1.0
    _, scol, srows = read_csv(out / "transfer_summary.csv")
    assert scol == ["eta", "t1_over_half_rabi", "final_fidelity"]
    assert 0.85 < float(srows[0][2]) < 0.95
    _, tcol, trows = read_csv(out / "trajectory.csv")
    assert len(tcol) == 35 and len(trows) == len(rows)

    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert run(tmp_path, "transfer", "--config", str(cfg)) == EXIT_CONFIG  # no --force
    assert run(tmp_path, "transfer", "--config", str(cfg), "--force") == EXIT_OK
    assert {p.name: p.read_bytes() for p in out.iterdir()} == first


def test_sweep_marks_failed_point(tmp_path):
    cfg = write_config(tmp_path, "[experiments]\nsweep_eta_list = 0, 1e-3\n")
    assert run(tmp_path, "sweep", "--config", str(cfg)) == EXIT_NUMERICAL
    _, columns, rows = read_csv(tmp_path / "out" / "transfer_sweep.csv")
    status = dict(((r[0], r[1]), r[-1]) for r in rows)
    assert status[("0", "direct")] == "ok"
    assert status[("0.001", "superposition")].startswith("failed: PhysicalityError")


@pytest.mark.parametrize("text", [
    "[experiments]\neta_list =\n",
    "[nonsense]\nx = 1\n",
    "[model]\nrabi_phase = 1\n",
    "[model]\nrabi = fast\n",
    "[window]\nshape = square\n",
    "[experiments]\ncalibration = sometimes\n",
    "not an ini file",
])
def test_bad_config_exits_2(tmp_path, text, capsys):
    cfg = write_config(tmp_path, text)
    assert run(tmp_path, "decohere", "--config", str(cfg)) == EXIT_CONFIG
    assert "error" in capsys.readouterr().err


def test_bad_transfer_state(tmp_path):
    cfg = write_config(tmp_path, "[experiments]\nalpha = 1\nbeta_amp = 1\n")
    assert run(tmp_path, "transfer", "--config", str(cfg)) == EXIT_CONFIG


def test_missing_config_file(tmp_path):
    assert run(tmp_path, "squid", "--config", str(tmp_path / "absent.ini")) == EXIT_CONFIG


def test_console_script_usage_error():
    proc = subprocess.run([sys.executable, "-m", "qramsim.cli", "frobnicate"],
                          capture_output=True, text=True)
    assert proc.returncode == 2


def test_empty_config_matches_library_defaults():
    from qramsim.cli import simulation_config, squid_params
    from qramsim.model import SimulationConfig
    from qramsim.squid import SquidBecParams
    settings = load_settings()
    assert squid_params(settings) == SquidBecParams()
    cfg = simulation_config(settings)
    ref = SimulationConfig()
    assert (cfg.omega_m, cfg.rabi, cfg.omega_c, cfg.beta, cfg.dt) == (
        ref.omega_m, ref.rabi, ref.omega_c, ref.beta, ref.dt)
