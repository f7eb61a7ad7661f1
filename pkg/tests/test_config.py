import math

import pytest
from hypothesis import given, settings, strategies as st

from sefdtd.config import ConfigError, ScenarioConfig, load_config, parse_config_text, validate_config

REFERENCE = {"lambda0": 1.5e-6, "d_eg": -1.342e-28}


def raw(**kw):
    base = {"scenario": "t", "geometry": "pec-cavity-1d", "geometry.l_x": 7.5e-7, "duration": 1e-13, **REFERENCE}
    base.update(kw)
    return base


def test_reference_defaults_accepted():
    cfg = validate_config(raw())
    assert isinstance(cfg, ScenarioConfig)
    assert cfg.emitter.lambda0 == 1.5e-6 and cfg.emitter.d_eg == -1.342e-28
    assert cfg.resolution == 20 and cfg.courant == 0.9
    assert cfg.coupling == "DipoleCurrent"
    assert cfg.boundary.kind == "PEC"


def test_2d_default_courant():
    cfg = validate_config(raw(geometry="square-cavity-2d", **{"geometry.l": 1e-6}) | {"geometry.l_x": None})
    assert cfg.courant == 0.5


def test_courant_09_in_2d_rejected():
    r = {k: v for k, v in raw(geometry="square-cavity-2d", courant=0.9).items() if k != "geometry.l_x"}
    r["geometry.l"] = 1e-6
    with pytest.raises(ConfigError) as exc:
        validate_config(r)
    assert any("exceeds 1/√2" in e for e in exc.value.errors)


def test_missing_lambda0_named():
    r = raw()
    del r["lambda0"]
    with pytest.raises(ConfigError) as exc:
        validate_config(r)
    assert any(e.startswith("lambda0") for e in exc.value.errors)


def test_unknown_keys_rejected_and_all_errors_reported():
    with pytest.raises(ConfigError) as exc:
        validate_config(raw(colour="red", resolution=5, **{"geometry.bogus": 1}))
    text = " ".join(exc.value.errors)
    assert "colour: unknown key" in text
    assert "geometry.bogus" in text
    assert "resolution" in text


@pytest.mark.parametrize("bad", [dict(courant=0), dict(courant=-0.1), dict(duration=0), dict(d_eg=0),
                                 dict(coupling="eq5"), dict(boundary="Mur1D"), dict(geometry="moon"),
                                 dict(decimation=1.5), dict(pml_cells=3)])
def test_invalid_values(bad):
    with pytest.raises(ConfigError):
        validate_config(raw(**bad))


def test_coupling_aliases():
    assert validate_config(raw(coupling="eq3")).coupling == "IntegralSource"
    assert validate_config(raw(coupling="DipoleCurrent")).coupling == "DipoleCurrent"


def test_bragg_defaults_filled():
    r = {k: v for k, v in raw(geometry="bragg-cavity-1d", **{"geometry.N": 5}).items() if k != "geometry.l_x"}
    cfg = validate_config(r)
    assert cfg.params["n1"] == 2.89 and cfg.params["n2"] == 3.37
    assert cfg.params["cavity_thickness"] == pytest.approx(1.5e-6 / 3.37)
    assert cfg.boundary.kind == "Mur1D"


def test_upml_options():
    r = {"scenario": "d", "geometry": "free-space-2d", "geometry.extent": 6e-6, "duration": 1e-13, **REFERENCE,
         "pml_cells": 16, "pml_order": 4}
    cfg = validate_config(r)
    assert cfg.boundary.pml_cells == 16 and cfg.boundary.pml_order == 4


def test_idempotent():
    cfg = validate_config(raw(coupling="eq3", resolution=33))
    assert validate_config(cfg) == cfg
    assert validate_config(cfg.to_raw()) == cfg


@settings(max_examples=30, deadline=None)
@given(res=st.floats(10, 200), courant=st.floats(0.01, 1.0), lx=st.floats(1e-7, 1e-5),
       coupling=st.sampled_from(["eq3", "eq4"]))
def test_idempotent_property(res, courant, lx, coupling):
    cfg = validate_config(raw(resolution=res, courant=courant, coupling=coupling, **{"geometry.l_x": lx}))
    assert validate_config(cfg) == cfg


def test_file_roundtrip(tmp_path):
    text = """# comment
scenario = cav
geometry = pec-cavity-1d
geometry.l_x = 7.5e-7   # half wave
lambda0 = 1.5e-6
d_eg = -1.342e-28
duration = 5e-13
coupling = eq4
"""
    path = tmp_path / "c.cfg"
    path.write_text(text)
    cfg = load_config(path)
    assert cfg.params["l_x"] == 7.5e-7
    path.write_text(cfg.dumps())
    assert load_config(path) == cfg


def test_parse_errors():
    with pytest.raises(ConfigError):
        parse_config_text("scenario = a\nnot a pair\n")
    with pytest.raises(ConfigError):
        parse_config_text("a = 1\na = 2\n")


def test_config_is_frozen():
    cfg = validate_config(raw())
    with pytest.raises(Exception):
        cfg.resolution = 30
    assert math.isclose(cfg.emitter.omega0, 2 * math.pi * 299792458 / 1.5e-6)
