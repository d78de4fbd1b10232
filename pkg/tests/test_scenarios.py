import json
from dataclasses import replace

import numpy as np
import pytest

from phonon_qst import cli
from phonon_qst.dynamics import DissipationParams
from phonon_qst.errors import ConfigValidationError, SimulationError, TruncationOverflowError
from phonon_qst.scenarios import (
    ScenarioConfig,
    config_from_file,
    convergence_report,
    run_scenario,
    run_single,
    validate_grid_csv,
    validate_timeseries_csv,
)

FIG4_FAST = ScenarioConfig(scenario="fig4", v_list=(2.0,), engine="schrodinger",
                           tqd=True, diagonal=False)


def write_config(tmp_path, text, name="case.conf"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_config_file_roundtrip(tmp_path):
    path = write_config(tmp_path, """
# comment line
scenario = fig5
pulse.v = 0.25, 0.75   # inline comment
pulse.gamma = 20.0
dissipation.kappa = 0.005
dissipation.n_th = 50
truncation.n_m = 6
run.dt = 0.001
output.dir = out/somewhere
""")
    config = config_from_file(path)
    assert config.scenario == "fig5"
    assert config.v_list == (0.25, 0.75)
    assert config.engine == "lindblad"  # preset
    assert config.tqd is True
    assert config.dissipation.kappa == 0.005
    assert config.dissipation.gamma_q == 0.005  # preset default survives
    assert config.dissipation.n_th == 50.0
    assert config.n_m == 6
    assert config.out_dir == "out/somewhere"


def test_config_overrides_win(tmp_path):
    path = write_config(tmp_path, "scenario = fig4\npulse.v = 0.25\n")
    config = config_from_file(path, v_list=[1.5], out_dir=str(tmp_path / "o"))
    assert config.v_list == (1.5,)
    assert config.out_dir == str(tmp_path / "o")


def test_unknown_key_rejected(tmp_path):
    path = write_config(tmp_path, "scenario = fig4\npulse.speed = 1\n")
    with pytest.raises(ConfigValidationError):
        config_from_file(path)


def test_missing_scenario_rejected(tmp_path):
    path = write_config(tmp_path, "pulse.v = 1.0\n")
    with pytest.raises(ConfigValidationError):
        config_from_file(path)


def test_validation_lists_all_violations():
    config = ScenarioConfig(scenario="fig6", engine="schrodinger", tqd=False,
                            sweep_resolution=1, dt=-1.0)
    bad = config.violations()
    assert len(bad) >= 4
    with pytest.raises(ConfigValidationError) as err:
        config.validate()
    assert len(err.value.violations) == len(bad)


def test_scenario_invariants():
    assert ScenarioConfig(scenario="fig2", tqd=True).violations()
    assert ScenarioConfig(scenario="fig4", tqd=False).violations()
    assert ScenarioConfig(scenario="fig5", engine="schrodinger", tqd=True).violations()
    assert not ScenarioConfig(scenario="fig4", tqd=True).violations()
    assert ScenarioConfig(scenario="fig2", omega_q=2.0).violations()
    assert not ScenarioConfig(scenario="custom", omega_q=2.0, tqd=True).violations()


def test_run_scenario_fig4_fast(tmp_path):
    config = replace(FIG4_FAST, out_dir=str(tmp_path))
    summary = run_scenario(config)
    run = summary["runs"]["2"]
    assert run["peak_p_phi3"] >= 0.999
    assert run["max_p_phi2"] <= 1e-3
    assert run["max_abs_drift"] <= 1e-8

    csv_path = tmp_path / "fig4_v2.csv"
    assert csv_path.exists()
    header = csv_path.read_text().splitlines()[0]
    assert header == "t,p_phi1,p_phi2,p_phi3,norm_or_trace"
    validate_timeseries_csv(csv_path)

    summary_path = tmp_path / "fig4_summary.json"
    loaded = json.loads(summary_path.read_text())
    assert loaded["config"]["scenario"] == "fig4"
    assert loaded["runs"]["2"]["csv"] == "fig4_v2.csv"


def test_run_scenario_is_deterministic(tmp_path):
    config = replace(FIG4_FAST, out_dir=str(tmp_path))
    run_scenario(config)
    first = (tmp_path / "fig4_v2.csv").read_bytes()
    first_summary = (tmp_path / "fig4_summary.json").read_bytes()
    run_scenario(config)
    assert (tmp_path / "fig4_v2.csv").read_bytes() == first
    assert (tmp_path / "fig4_summary.json").read_bytes() == first_summary


def test_lindblad_csv_has_fidelity_column(tmp_path):
    config = ScenarioConfig(scenario="fig5", v_list=(2.0,), engine="lindblad",
                            tqd=True, dissipation=DissipationParams(0.005, 0.005, 5e-5, 50.0),
                            dt=2e-3, out_dir=str(tmp_path))
    summary = run_scenario(config)
    header = (tmp_path / "fig5_v2.csv").read_text().splitlines()[0]
    assert header == "t,p_phi1,p_phi2,p_phi3,fidelity,norm_or_trace"
    assert 0.0 < summary["runs"]["2"]["peak_fidelity"] <= 1.0
    assert summary["runs"]["2"]["max_top_phonon"] < 1e-4


def test_csv_validation_rejects_corruption(tmp_path):
    good = tmp_path / "ok.csv"
    good.write_text("t,p_phi1,p_phi2,p_phi3,norm_or_trace\n0,1,0,0,1\n1,0.5,0.5,0,1\n")
    validate_timeseries_csv(good)

    bad_time = tmp_path / "bad_time.csv"
    bad_time.write_text("t,p_phi1,p_phi2,p_phi3,norm_or_trace\n1,1,0,0,1\n0,0.5,0.5,0,1\n")
    with pytest.raises(SimulationError):
        validate_timeseries_csv(bad_time)

    bad_pop = tmp_path / "bad_pop.csv"
    bad_pop.write_text("t,p_phi1,p_phi2,p_phi3,norm_or_trace\n0,1.5,0,0,1\n1,0.5,0.5,0,1\n")
    with pytest.raises(SimulationError):
        validate_timeseries_csv(bad_pop)

    bad_header = tmp_path / "bad_header.csv"
    bad_header.write_text("time,p1,p2,p3,norm\n0,1,0,0,1\n")
    with pytest.raises(SimulationError):
        validate_timeseries_csv(bad_header)

    empty = tmp_path / "empty.csv"
    empty.write_text("t,p_phi1,p_phi2,p_phi3,norm_or_trace\n")
    with pytest.raises(SimulationError):
        validate_timeseries_csv(empty)


def sweep_config(tmp_path):
    return ScenarioConfig(
        scenario="fig6", v_list=(0.75,), engine="lindblad", tqd=True,
        dissipation=DissipationParams(0.005, 0.005, 5e-5, 50.0),
        sweep_kappa=(0.005, 0.05), sweep_gamma_q=(0.005, 0.05),
        sweep_resolution=2, dt=4e-3, out_dir=str(tmp_path),
    )


def test_fig6_grid_and_concurrency(tmp_path):
    serial_dir = tmp_path / "serial"
    parallel_dir = tmp_path / "parallel"
    summary = run_scenario(replace(sweep_config(tmp_path), out_dir=str(serial_dir)))
    grid_path = serial_dir / "fig6_grid.csv"
    validate_grid_csv(grid_path)
    rows = grid_path.read_text().splitlines()[1:]
    assert len(rows) == 4  # resolution^2
    assert summary["grid"]["rows"] == 4

    table = {tuple(float(x) for x in row.split(",")[:2]): float(row.split(",")[2])
             for row in rows}
    assert table[(0.005, 0.005)] > table[(0.05, 0.05)]  # more decay, less fidelity
    assert sorted(table) == list(table)

    run_scenario(replace(sweep_config(tmp_path), out_dir=str(parallel_dir)), jobs=2)
    assert (parallel_dir / "fig6_grid.csv").read_bytes() == grid_path.read_bytes()


def test_truncation_overflow_aborts():
    config = ScenarioConfig(scenario="custom", v_list=(2.0,), engine="lindblad",
                            tqd=True, n_m=2,
                            dissipation=DissipationParams(0.0, 0.0, 0.05, 50.0))
    with pytest.raises(TruncationOverflowError):
        run_single(config, 2.0)


def test_run_scenario_rejects_invalid_config(tmp_path):
    config = ScenarioConfig(scenario="fig5", engine="schrodinger", tqd=True,
                            out_dir=str(tmp_path))
    with pytest.raises(ConfigValidationError):
        run_scenario(config)


def test_convergence_report():
    config = replace(FIG4_FAST, t_end_factor=6.0, dt=2e-3)
    report = convergence_report(config)
    assert report["v"] == 2.0
    assert np.isfinite(report["diff_dt_vs_half"])
    assert report["diff_dt_vs_half"] >= 0.0


def test_cli_simulate_and_validate(tmp_path, capsys):
    conf = write_config(tmp_path, "scenario = fig4\npulse.v = 2.0\n")
    out = tmp_path / "out"
    assert cli.main(["simulate", "--config", str(conf), "--out", str(out)]) == 0
    assert (out / "fig4_v2.csv").exists()
    assert (out / "fig4_summary.json").exists()
    capsys.readouterr()

    assert cli.main(["validate", "--config", str(conf)]) == 0
    assert "configuration OK" in capsys.readouterr().out


def test_cli_v_override(tmp_path):
    conf = write_config(tmp_path, "scenario = fig4\npulse.v = 0.25\nrun.t_end_factor = 6.0\n")
    out = tmp_path / "out"
    code = cli.main(["simulate", "--config", str(conf), "--v", "2.0", "--out", str(out)])
    assert code == 0
    assert (out / "fig4_v2.csv").exists()
    assert not (out / "fig4_v0.25.csv").exists()


def test_cli_invalid_config_exits_2(tmp_path, capsys):
    conf = write_config(tmp_path, "scenario = fig2\ntqd = true\n")
    assert cli.main(["validate", "--config", str(conf)]) == 2
    assert "config error" in capsys.readouterr().err


def test_cli_runtime_breach_exits_3(tmp_path, capsys):
    conf = write_config(tmp_path, """
scenario = custom
pulse.v = 2.0
engine = lindblad
tqd = true
truncation.n_m = 2
dissipation.gamma_m = 0.05
dissipation.n_th = 50.0
""")
    code = cli.main(["simulate", "--config", str(conf), "--out", str(tmp_path / "out")])
    assert code == 3
    assert "run aborted" in capsys.readouterr().err


def test_cli_convergence(tmp_path, capsys):
    conf = write_config(tmp_path,
                        "scenario = fig4\npulse.v = 2.0\nrun.t_end_factor = 6.0\nrun.dt = 0.002\n")
    assert cli.main(["convergence", "--config", str(conf)]) == 0
    assert "observed ratio" in capsys.readouterr().out
