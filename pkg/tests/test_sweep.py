import io
import json
import math

import numpy as np
import pytest

from scatterlab.errors import ConfigError
from scatterlab.qstate import werner_tangle_at
from scatterlab.sweep import (
    SweepConfig,
    config_from_file,
    config_from_mapping,
    curve_points,
    emit_csv,
    emit_curves,
    run_sweep,
    write_curve,
    write_records,
)


def test_config_defaults_and_validation():
    cfg = SweepConfig(kind="I", samples=10).validate()
    assert cfg.delta_max == 0.95
    assert cfg.retardance_max == pytest.approx(2 * math.pi)
    with pytest.raises(ConfigError):
        SweepConfig(kind="X", samples=10).validate()
    with pytest.raises(ConfigError):
        SweepConfig(kind="I", samples=0).validate()
    with pytest.raises(ConfigError):
        SweepConfig(kind="I", samples=5, delta_max=1.0).validate()
    with pytest.raises(ConfigError):
        SweepConfig(kind="III", samples=5, tu_min=0.0).validate()


def test_config_error_names_field():
    with pytest.raises(ConfigError, match="samples"):
        SweepConfig(kind="I", samples=-3).validate()
    with pytest.raises(ConfigError, match="delta"):
        SweepConfig(kind="I", samples=3, delta_min=0.5, delta_max=0.2).validate()


def test_config_from_mapping_rejects_unknown_key():
    with pytest.raises(ConfigError, match="unknown config key"):
        config_from_mapping({"type": "I", "samples": 5, "bogus": 1})


def test_config_key_value_file(tmp_path):
    path = tmp_path / "sweep.cfg"
    path.write_text(
        "# a comment\n"
        "type = II\n"
        "samples = 7\n"
        "seed = 3\n"
        "delta_max = 0.5\n"
        "fit_gw = true\n"
    )
    cfg = config_from_file(path)
    assert cfg.kind == "II"
    assert cfg.samples == 7
    assert cfg.seed == 3
    assert cfg.delta_max == 0.5
    assert cfg.fit_gw is True


def test_config_json_file(tmp_path):
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps({"type": "III", "samples": 4, "d_max": 0.8}))
    cfg = config_from_file(path)
    assert cfg.kind == "III"
    assert cfg.d_max == 0.8


def test_config_file_errors(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("type II\n")
    with pytest.raises(ConfigError):
        config_from_file(path)
    path.write_text("type = I\ntype = II\nsamples = 1\n")
    with pytest.raises(ConfigError, match="duplicate"):
        config_from_file(path)


def test_run_sweep_type_i_all_on_werner():
    records = run_sweep(SweepConfig(kind="I", samples=100, seed=17))
    assert len(records) == 100
    assert all(r.classification == "on_werner" for r in records)


def test_run_sweep_type_ii_on_werner_with_fit():
    records = run_sweep(SweepConfig(kind="II", samples=10, seed=17, fit_gw=True))
    assert all(r.classification == "on_werner" for r in records)
    assert all(r.gw_fidelity >= 1.0 - 1e-6 for r in records)


def test_run_sweep_type_iii_never_super_werner():
    records = run_sweep(SweepConfig(kind="III", samples=100, seed=17))
    assert all(r.classification in ("on_werner", "sub_werner") for r in records)
    assert any(r.classification == "sub_werner" for r in records)
    for r in records:
        assert r.t <= werner_tangle_at(r.s_l) + 1e-9


def test_run_sweep_deterministic():
    cfg = SweepConfig(kind="III", samples=20, seed=99)
    a = run_sweep(cfg)
    b = run_sweep(cfg)
    assert a == b


def test_records_csv_format():
    records = run_sweep(SweepConfig(kind="II", samples=3, seed=5))
    buf = io.StringIO()
    write_records(records, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "scenario,param_json,S_L,T,class,gw_fidelity"
    assert len(lines) == 4
    # param_json column is valid JSON after csv-unquoting
    import csv as csvmod

    row = next(csvmod.reader(io.StringIO(lines[1])))
    params = json.loads(row[1])
    assert set(params) == {"delta", "retardance", "axis"}


def test_records_csv_byte_identical(tmp_path):
    cfg = SweepConfig(kind="III", samples=15, seed=4)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(run_sweep(cfg), p1)
    emit_csv(run_sweep(cfg), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_empty_records_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    emit_csv([], path)
    assert path.read_text() == "scenario,param_json,S_L,T,class,gw_fidelity\n"


def test_curve_points_values():
    pts = curve_points("werner", 3)
    assert pts[0] == (0.0, 1.0, 0.0)
    assert pts[1] == (0.5, 0.75, 0.0625)
    assert pts[2] == (1.0, 0.0, 1.0)


def test_mems_curve_contains_corner(tmp_path):
    path = tmp_path / "mems.csv"
    emit_curves("mems", 11, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "param,S_L,T"
    first = lines[1].split(",")
    assert float(first[1]) == pytest.approx(8 / 9, abs=1e-9)
    assert float(first[2]) == 0.0


def test_curve_rejects_unknown_kind():
    with pytest.raises(ConfigError):
        curve_points("bell", 5)


def test_write_curve_validates_before_header():
    buf = io.StringIO()
    with pytest.raises(Exception):
        write_curve("werner", 1, buf)
    assert buf.getvalue() == ""


def test_axis_samples_on_unit_sphere():
    records = run_sweep(SweepConfig(kind="II", samples=25, seed=1))
    for r in records:
        assert np.linalg.norm(r.params["axis"]) == pytest.approx(1.0, abs=1e-12)
