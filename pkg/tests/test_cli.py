import re

import pytest

from sefdtd import cli, scenarios
from sefdtd.fdtd import NumericalInstability
from sefdtd.scenarios import REGISTRY, list_scenarios, read_summary, run_scenario, scenario_config


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_has_seven_scenarios_with_both_couplings(capsys):
    code, out, _ = run(["list"], capsys)
    assert code == 0
    assert len(REGISTRY) >= 7
    for name in REGISTRY:
        assert re.search(rf"^{re.escape(name)}$", out, re.M)
    assert out.count("couplings: eq3, eq4") == len(REGISTRY)
    assert list_scenarios() == out.rstrip("\n")


def test_every_scenario_config_valid_under_both_couplings():
    for name in REGISTRY:
        for coupling in ("eq3", "eq4"):
            cfg = scenario_config(name, {"coupling": coupling})
            assert cfg.scenario == name
            assert scenarios.build_grid(cfg) is not None


def test_unknown_scenario_suggests(capsys):
    code, _, err = run(["run", "fre-space-1d"], capsys)
    assert code == 2
    assert "did you mean 'free-space-1d'" in err


def test_config_error_exit_code(capsys):
    code, _, err = run(["run", "pec-cavity-1d", "--set", "courant=1.2"], capsys)
    assert code == 2 and "courant" in err
    code, _, err = run(["run", "--config", "/nonexistent.cfg"], capsys)
    assert code == 2


def test_run_free_space_1d(tmp_path, capsys):
    code, out, _ = run(["run", "free-space-1d", "--out", str(tmp_path)], capsys)
    assert code == 0 and "PASS lifetime" in out
    s = read_summary(tmp_path / "summary.txt")
    tau, unit = s["fit.tau"].split()
    assert unit == "s" and float(tau) == pytest.approx(0.267e-12, rel=0.05)
    assert (tmp_path / "trace.csv").read_text().startswith("t_s,Re_P,Im_P,abs_P_sq\n")


def test_summary_quantities_carry_units(tmp_path, capsys):
    run(["run", "pec-cavity-1d", "--out", str(tmp_path)], capsys)
    for line in (tmp_path / "summary.txt").read_text().splitlines():
        key, value = line.split(" = ", 1)
        if key in ("exit_code", "code_version") or key.endswith(".note"):
            continue
        first = value.split()[0]
        try:
            float(first.split(",")[0])
        except ValueError:
            continue
        assert len(value.split()) == 2, line


def test_reruns_byte_identical(tmp_path, capsys):
    for sub in ("a", "b"):
        assert run(["run", "pec-cavity-1d", "--out", str(tmp_path / sub)], capsys)[0] == 0
    assert (tmp_path / "a" / "trace.csv").read_bytes() == (tmp_path / "b" / "trace.csv").read_bytes()


def test_config_file_run(tmp_path, capsys):
    cfg = tmp_path / "cav.cfg"
    cfg.write_text(
        "scenario = my-cavity\ngeometry = pec-cavity-1d\ngeometry.l_x = 7.5e-7\nlambda0 = 1.5e-6\n"
        "d_eg = -1.342e-28\nduration = 4e-13\nresolution = 60\ncoupling = eq3\n"
    )
    code, out, _ = run(["run", "--config", str(cfg), "--out", str(tmp_path / "o")], capsys)
    assert code == 0, out
    s = read_summary(tmp_path / "o" / "summary.txt")
    assert s["config.coupling"] == "IntegralSource"
    assert (tmp_path / "o" / "oracle_trace.csv").exists()


def test_square_cavity_l2_reports_oracle_and_closed_form(tmp_path, capsys):
    code, out, _ = run(["run", "square-cavity", "--l", "l2", "--out", str(tmp_path)], capsys)
    assert code == 0, out
    s = read_summary(tmp_path / "summary.txt")
    for key in ("fit.omega", "oracle.omega", "closed_form.omega"):
        assert s[key].endswith("rad/s")
    assert "pair" in s["check.omega_vs_closed_form.note"]


def test_bragg_5_is_exponential(tmp_path, capsys):
    code, _, _ = run(["run", "bragg", "--mirror-cells", "5", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert read_summary(tmp_path / "summary.txt")["fit.non_exponential"] == "false"


def test_failed_check_exit_code_and_trace_kept(tmp_path, capsys):
    code, out, _ = run(["run", "bragg", "--duration", "2e-13", "--out", str(tmp_path)], capsys)
    assert code == 1 and "FAIL revivals" in out
    assert (tmp_path / "trace.csv").exists()


def test_numerical_failure_exit_code(tmp_path, monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise NumericalInstability(17)

    monkeypatch.setattr(scenarios, "simulate", boom)
    code, out, _ = run(["run", "free-space-1d", "--out", str(tmp_path)], capsys)
    assert code == 3 and "step 17" in out
    assert read_summary(tmp_path / "summary.txt")["exit_code"] == "3"


def test_sweep(tmp_path, capsys):
    code, out, _ = run(["sweep", "bragg", "--param", "geometry.N=5,25", "--duration", "1.5e-12",
                        "--workers", "2", "--out", str(tmp_path)], capsys)
    assert code == 0, out
    assert (tmp_path / "geometry.N=5" / "trace.csv").exists()
    assert (tmp_path / "geometry.N=25" / "summary.txt").exists()


def test_run_scenario_api(tmp_path):
    s = run_scenario("microdisk-vacuum", {"duration": 5e-14}, out_dir=tmp_path)
    assert s.passed
    assert s.quantities["free_space.Linf_rel"][0] <= 1e-10
