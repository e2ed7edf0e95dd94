import warnings

import pytest

from rydeit.config import RunConfig, ScanRange, parse_config, parse_dict
from rydeit.errors import PhysicsError, SchemaError
from rydeit.model import paper_params


def test_minimal_document_echoes_defaults():
    cfg = parse_config("")
    assert cfg.raw == paper_params()
    assert cfg.raw.omega_p1 == 1 and cfg.raw.omega_c1 == 20 and cfg.raw.delta_p2 == 50
    assert cfg.raw.delta_c1 == 1000 and cfg.raw.gamma_ec == 3 and cfg.raw.gamma_r == 0.1
    assert cfg.scan == ScanRange(-2.0, 2.0, 0.005)
    assert cfg.mode == "two_atom" and cfg.workers == 1 and cfg.sweep is None
    assert cfg.v_values() == (0.0,)


def test_full_document():
    text = """
[params]
omega_p1 = [0.0, 1.0]
delta_c = 0.25
c6 = 2.0e5
r_sep = 10.0
gamma_r = 0.05

[scan]
delta_p_min = -1.0
delta_p_max = 0.5
step = 0.01

[sweep]
values = [0.5, 1.5]

[run]
mode = "two_atom"
out = "results"
name = "demo"
workers = 3
plot = true

[validate]
t_end = 2.0
samples = 11
"""
    cfg = parse_config(text)
    assert cfg.raw.omega_p1 == 1j
    assert cfg.raw.delta_c2 == pytest.approx(1000.25)
    assert cfg.raw.v == pytest.approx(-0.2)
    assert cfg.sweep == (0.5, 1.5) and cfg.v_values() == (0.5, 1.5)
    assert cfg.scan.grid().size == 151
    assert (cfg.out, cfg.name, cfg.workers, cfg.plot) == ("results", "demo", 3, True)
    assert cfg.validate.t_end == 2.0 and cfg.validate.samples == 11


def test_sweep_range():
    cfg = parse_config("[sweep]\nv_min = 0.0\nv_max = 2.0\nstep = 0.05\n")
    assert len(cfg.sweep) == 41 and cfg.sweep[-1] == 2.0


def test_single_atom_mode_drops_control():
    cfg = parse_config('[params]\nv = 1.5\n[run]\nmode = "single_atom"\n')
    assert cfg.v_values() == (0.0,)
    assert cfg.run_raw().coupling_on_control is False


@pytest.mark.parametrize(
    "text, path",
    [
        ("[scan]\nstep = -0.005\n", "scan.step"),
        ("[scan]\nstep = 0.0\n", "scan.step"),
        ("[scan]\ndelta_p_min = 1.0\ndelta_p_max = 0.0\n", "scan"),
        ("[params]\nomega_q = 1.0\n", "params.omega_q"),
        ("[bogus]\nx = 1\n", "bogus"),
        ("[run]\nworkers = 0\n", "run.workers"),
        ("[run]\nworkers = 1.5\n", "run.workers"),
        ('[run]\nmode = "fast"\n', "run.mode"),
        ('[params]\ngamma_r = "a lot"\n', "params.gamma_r"),
        ("[params]\ngamma_r = -0.1\n", "params.gamma_r"),
        ("[params]\nc6 = 1.0\n", "params.c6"),
        ("[params]\nomega_p1 = [1.0]\n", "params.omega_p1"),
        ("[sweep]\nv_min = 0.0\n", "sweep.v_max"),
        ("[validate]\nsamples = 1\n", "validate.samples"),
    ],
)
def test_schema_errors_carry_key_path(text, path):
    with pytest.raises(SchemaError) as info:
        parse_config(text)
    assert info.value.key_path == path
    assert SchemaError.exit_code == 2


def test_malformed_toml():
    with pytest.raises(SchemaError):
        parse_config("[params\n")


def test_dispersive_violation_warns_or_raises():
    text = "[params]\nomega_c1 = 10000.0\nomega_c2 = 10000.0\n"
    with pytest.warns(UserWarning):
        parse_config(text)
    with pytest.raises(PhysicsError):
        parse_config(text, strict=True)
    assert PhysicsError.exit_code == 3


def test_round_trip():
    cfg = parse_config('[params]\nomega_c1 = [0.0, 20.0]\nv = 1.5\n[sweep]\nvalues = [0.2, 1.0]\n[run]\nname = "x"\n')
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert parse_dict(cfg.to_dict()) == cfg


def test_runconfig_invariants():
    with pytest.raises(SchemaError):
        RunConfig(workers=0)
    with pytest.raises(SchemaError):
        RunConfig(scan=ScanRange(0, 1, -1))
    with pytest.raises(SchemaError):
        RunConfig(mode="bogus")
