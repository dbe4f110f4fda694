import math
from pathlib import Path

import numpy as np
import pytest

from atomwalk import cli, scenarios
from atomwalk.config import builtin, load_config, load_config_text, parse_frequency
from atomwalk.errors import ConfigError, NumericalValidationError
from atomwalk.output import read_csv
from atomwalk.scenarios import list_scenarios, load_sweep, reduce, run_scenario, run_sweep, sweep_from_dict

GOLDEN = Path(__file__).parent / "golden"
BUILTIN_NAMES = ["fig2", "fig3c", "fig3f", "fig5", "fig6", "bands", "lambda-table"]


# built-ins

def test_exactly_seven_builtins():
    names = [n for n, _ in list_scenarios()]
    assert sorted(names) == sorted(BUILTIN_NAMES)
    assert all(desc for _, desc in list_scenarios())


def test_unknown_scenario_lists_valid_names():
    with pytest.raises(ConfigError) as err:
        run_scenario("fig99")
    for name in BUILTIN_NAMES:
        assert name in str(err.value)


def test_lambda_table_row(tmp_path):
    res = run_scenario("lambda-table", out_dir=tmp_path)
    t = res.table
    row = int(np.argmin(np.abs(t["rabi[2pi*MHz]"] - 0.1)))
    assert t["Lambda[nm]"][row] == pytest.approx(19.85, rel=0.01)
    assert (tmp_path / "lambda-table.csv").exists()


def test_fig3c_displacement_matches_closed_form():
    tr = run_scenario("fig3c").trajectory
    assert tr.times[-1] == pytest.approx(3 * 2 * math.pi / tr.rabi)
    err = np.max(np.abs(tr.x_mean - tr.x_closed))
    assert err <= 0.02 * np.max(np.abs(tr.x_closed))


def test_fig6_negative_drift():
    res = run_scenario("fig6", workers=2)
    c = res.density.centroids()
    assert c[-1] < c[0]
    assert res.validation["max_parseval_error"] < 1e-8


def test_empty_time_list(tmp_path):
    cfg = builtin("fig3c").with_overrides(**{"time.times": []})
    res = run_scenario(cfg, out_dir=tmp_path)
    text = (tmp_path / "fig3c.csv").read_text()
    assert text.count("\n") == 1 and text.startswith("t[1/omega_B],")
    assert len(res.trajectory) == 0


def test_explicit_times_in_periods():
    cfg = builtin("fig3c").with_overrides(**{"time.times": [0, 0.5, 1.0]})
    tr = run_scenario(cfg).trajectory
    assert tr.pop1[1] >= 0.99
    assert tr.pop0[2] >= 0.99


def test_nonuniform_times_leave_force_undefined():
    cfg = builtin("fig3c").with_overrides(**{"time.times": [0, 0.25, 1.0, 1.1]})
    tr = run_scenario(cfg).trajectory
    assert np.all(np.isnan(tr.force))


def test_bands_scenario():
    t = run_scenario("bands").table
    gap = t["e_upper[epsilon_B]"] - t["e_lower[epsilon_B]"]
    assert t["p_x[hbar_k]"][np.argmin(gap)] == pytest.approx(0.0, abs=1e-12)
    assert gap.min() == pytest.approx(5.0, abs=1e-12)


# outputs

def test_output_files_and_units(tmp_path):
    res = run_scenario("fig3c", out_dir=tmp_path, formats=("csv", "json"))
    names = sorted(p.name for p in res.paths)
    assert names == ["fig3c.csv", "fig3c.data.json", "fig3c.meta.json"]
    header = (tmp_path / "fig3c.csv").read_text().splitlines()[0].split(",")
    assert all("[" in h and h.endswith("]") for h in header)
    import json
    meta = json.loads((tmp_path / "fig3c.meta.json").read_text())
    assert meta["regime"]["verdict"] == "Strong"
    assert meta["columns"] == header


def test_density_outputs(tmp_path):
    cfg = builtin("fig5").with_overrides(**{"time.periods": 1, "grid.n_points": 8192})
    res = run_scenario(cfg, out_dir=tmp_path)
    names = {p.name for p in res.paths}
    assert {"fig5.density.csv", "fig5.density.json", "fig5.density_summary.csv"} <= names
    cols = read_csv(tmp_path / "fig5.density.csv")
    assert list(cols) == ["t[1/omega_B]", "x[1/k]", "density0[k]", "density1[k]"]
    assert np.all(np.abs(cols["x[1/k]"]) <= 40)


def test_determinism_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        run_scenario("fig3f", out_dir=out, formats=("csv", "json"))
    for name in ("fig3f.csv", "fig3f.data.json", "fig3f.meta.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def _compare_golden(fresh: Path, golden: Path):
    new, old = read_csv(fresh), read_csv(golden)
    assert list(new) == list(old)
    for col in old:
        o, n = old[col], new[col]
        assert o.shape == n.shape, col
        finite = np.isfinite(o)
        assert np.array_equal(finite, np.isfinite(n)), col
        if not finite.any():
            continue
        scale = float(np.max(np.abs(o[finite]))) or 1.0
        assert np.allclose(n[finite], o[finite], rtol=1e-9, atol=1e-11 * scale), col


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_golden(tmp_path, name):
    run_scenario(name, out_dir=tmp_path, formats=("csv",), workers=2)
    goldens = sorted(GOLDEN.glob(f"{name}.*csv"))
    assert goldens, f"no golden file for {name}"
    for g in goldens:
        _compare_golden(tmp_path / g.name, g)


def test_norm_validation_failure(monkeypatch):
    monkeypatch.setattr(scenarios, "NORM_TOLERANCE", -1.0)
    with pytest.raises(NumericalValidationError, match="norm"):
        run_scenario("fig3c")


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ConfigError, match="cannot write"):
        run_scenario("lambda-table", out_dir=blocker / "sub")


# config parsing

@pytest.mark.parametrize("text, value", [
    (3.5, 3.5), ("2pi*1MHz", 2 * math.pi * 1e6), ("2pi*2kHz", 2 * math.pi * 2e3),
    ("2pi*3Hz", 6 * math.pi), ("2pi*1GHz", 2 * math.pi * 1e9),
])
def test_parse_frequency_si(text, value, scales):
    f = parse_frequency(text)
    assert not f.recoil and f.si(scales) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("text, value", [("omega_B*5", 5.0), ("5*omega_B", 5.0),
                                         ("-omega_B", -1.0), ("omega_B", 1.0)])
def test_parse_frequency_recoil(text, value, scales):
    f = parse_frequency(text)
    assert f.recoil and f.si(scales) == pytest.approx(value * scales.omega_B, rel=1e-15)


@pytest.mark.parametrize("text", ["banana", "2pi*5THz", "", "omega_B*x"])
def test_parse_frequency_rejects(text):
    with pytest.raises(ConfigError):
        parse_frequency(text, "drive.rabi")


def test_config_error_reports_field_and_line():
    text = "name: demo\ndrive:\n  detuning: 0\n  rabi: banana\n"
    with pytest.raises(ConfigError) as err:
        load_config_text(text)
    assert err.value.field == "drive.rabi"
    assert err.value.line == 4
    assert "line 4" in str(err.value)


def test_config_unknown_key():
    with pytest.raises(ConfigError) as err:
        load_config_text("drive:\n  rabbi: 3\n")
    assert "rabbi" in str(err.value)


@pytest.mark.parametrize("text, field", [
    ("initial:\n  c0: 1\n  c1: 1\n", "initial"),
    ("initial:\n  width: -1\n", "initial.width"),
    ("grid:\n  n_points: 3\n", "grid.n_points"),
    ("time:\n  times: [1, 0]\n", "time.times"),
    ("outputs:\n  formats: [xml]\n", "outputs.formats"),
])
def test_config_invalid_fields(text, field):
    with pytest.raises(ConfigError) as err:
        load_config_text(text)
    assert err.value.field.startswith(field)


def test_config_yaml_syntax_error():
    with pytest.raises(ConfigError, match="YAML"):
        load_config_text("drive: [1,\n")


def test_load_config_file_name(tmp_path):
    p = tmp_path / "mine.yaml"
    p.write_text("drive:\n  rabi: 2pi*1MHz\ntime:\n  periods: 1\n")
    cfg = load_config(p)
    assert cfg.name == "mine"
    assert cfg.drive_si().rabi == pytest.approx(2 * math.pi * 1e6)


def test_overrides_revalidate():
    cfg = builtin("fig3c")
    assert cfg.with_overrides(**{"grid.n_points": 1024}).grid().n_points == 1024
    with pytest.raises(ConfigError):
        cfg.with_overrides(**{"initial.c1": 0.5})


# sweeps

def _rabi_values(*mult):
    return [f"omega_B*{m}" for m in mult]


def test_gap_sweep_minimal_on_resonance_line(tmp_path):
    p_vals = list(np.round(np.linspace(-3, 2, 21), 10))
    spec, base = sweep_from_dict({
        "name": "gap", "base": "fig3c", "reduction": "gap",
        "axis1": {"field": "drive.rabi", "values": _rabi_values(0.5, 2, 5)},
        "axis2": {"field": "initial.p_center", "values": p_vals}})
    res = run_sweep(spec, base, out_dir=tmp_path)
    for i, omega in enumerate((0.5, 2, 5)):
        j = int(np.argmin(res.table[i]))
        assert p_vals[j] == pytest.approx(-0.5)  # delta = 2p + 1 = 0
        assert res.table[i, j] == pytest.approx(omega, rel=1e-12)
    cols = read_csv(tmp_path / "gap.sweep.csv")
    assert list(cols)[-1] == "gap" and cols["gap"].size == 63


def test_epsilon_sweep_monotone():
    spec, base = sweep_from_dict({
        "base": {"drive": {"rabi": "2pi*1MHz", "detuning": "-omega_B"}},
        "reduction": "epsilon_effective",
        "axis1": {"field": "drive.rabi", "start": "2pi*0.01MHz", "stop": "2pi*10MHz",
                  "count": 7, "scale": "log"},
        "axis2": {"field": "initial.width", "start": 0.5, "stop": 20, "count": 6}})
    t = run_sweep(spec, base).table
    assert np.all(np.diff(t, axis=0) < 0)  # stronger drive, smaller epsilon
    assert np.all(np.diff(t, axis=1) > 0)  # wider packet, larger epsilon


def test_degenerate_sweep_equals_scenario_reduction():
    base = builtin("fig3c").with_overrides(**{"time.periods": 1})
    spec, _ = sweep_from_dict({"base": "fig3c", "reduction": "max_pop1",
                               "axis1": {"field": "drive.rabi", "values": ["2pi*1MHz"]}})
    res = run_sweep(spec, base)
    assert res.table.shape == (1, 1)
    assert res.table[0, 0] == run_scenario(base).reduce("max_pop1")
    assert res.table[0, 0] == reduce(base, "max_pop1")


def test_serial_and_parallel_sweeps_identical():
    base = builtin("fig2").with_overrides(**{"time.periods": 2, "grid.n_points": 512,
                                             "time.samples_per_period": 32})
    spec, _ = sweep_from_dict({"reduction": "damping_ratio",
                               "axis1": {"field": "drive.rabi", "values": _rabi_values(0.5, 1, 2)},
                               "axis2": {"field": "initial.width", "values": [0.5, 1.0]}})
    serial = run_sweep(spec, base, workers=1)
    parallel = run_sweep(spec, base, workers=3)
    assert np.array_equal(serial.table, parallel.table)


def test_sweep_budget():
    spec, base = sweep_from_dict({"reduction": "gap", "max_cells": 5,
                                  "axis1": {"field": "initial.p_center", "start": 0, "stop": 1, "count": 3},
                                  "axis2": {"field": "initial.width", "values": [1, 2]}})
    with pytest.raises(ConfigError, match="budget"):
        run_sweep(spec, base)


@pytest.mark.parametrize("data, match", [
    ({"reduction": "nope", "axis1": {"field": "initial.width", "values": [1]}}, "reduction"),
    ({"reduction": "gap", "axis1": {"field": "initial.girth", "values": [1]}}, "girth"),
    ({"reduction": "gap"}, "axis1"),
    ({"reduction": "gap", "axis1": {"field": "initial.width", "start": -1, "stop": 1,
                                    "count": 3, "scale": "log"}}, "log"),
    ({"reduction": "gap", "colour": 1, "axis1": {"field": "initial.width", "values": [1]}}, "colour"),
])
def test_sweep_spec_errors(data, match):
    with pytest.raises(ConfigError, match=match):
        sweep_from_dict(data)


def test_load_sweep_file(tmp_path):
    (tmp_path / "base.yaml").write_text("drive:\n  rabi: omega_B*3\n")
    p = tmp_path / "s.yaml"
    p.write_text("base: base.yaml\nreduction: gap\naxis1:\n  field: initial.p_center\n"
                 "  values: [-0.5, 0.5]\n")
    spec, base = load_sweep(p)
    res = run_sweep(spec, base)
    assert spec.name == "s"
    assert res.table[:, 0] == pytest.approx([3.0, math.hypot(2.0, 3.0)])


# CLI

def test_cli_list_and_species(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    assert all(n in out for n in BUILTIN_NAMES)
    assert cli.main(["species"]) == 0
    assert "Yb173" in capsys.readouterr().out


def test_cli_run(tmp_path, capsys):
    code = cli.main(["run", "fig3c", "--out", str(tmp_path), "--format", "json",
                     "--grid-points", "1024", "--periods", "1"])
    assert code == 0
    assert (tmp_path / "fig3c.data.json").exists()
    assert "Strong" in capsys.readouterr().out


def test_cli_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("drive:\n  rabi: banana\n")
    assert cli.main(["run", str(bad), "--out", str(tmp_path)]) == 2
    assert "line 2" in capsys.readouterr().err
    assert cli.main(["run", "fig99"]) == 2


def test_cli_numerical_failure_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(scenarios, "NORM_TOLERANCE", -1.0)
    assert cli.main(["run", "fig3c", "--out", str(tmp_path)]) == 3


def test_cli_sweep(tmp_path, capsys):
    p = tmp_path / "s.yaml"
    p.write_text("name: eps\nreduction: epsilon_effective\naxis1:\n  field: drive.rabi\n"
                 "  values: [2pi*1MHz, 2pi*2MHz]\n")
    assert cli.main(["sweep", str(p), "--out", str(tmp_path), "--workers", "2"]) == 0
    assert (tmp_path / "eps.sweep.csv").exists()
    assert "2 x 1" in capsys.readouterr().out
