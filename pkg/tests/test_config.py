import math

import pytest

from echolab.config import (
    ConfigError,
    build_device,
    build_schedule,
    load_config,
    parse_config,
    parse_overrides,
)
from echolab.model import PulseKind, occupation_from_temperature

BASE = """\
# reference device
device.qubit_splitting_ghz = 5
device.mech_freq_mhz = 50
device.kappa = 0.2      # dimensionless
device.q_factor = 3000
device.nbar = 10
device.t2_us = 0.5
device.alpha0 = 25
schedule.kind = echo
schedule.t1_us = 0.2
"""


def test_parse_and_build():
    cfg = parse_config(BASE, "base.cfg")
    dev = build_device(cfg)
    assert dev.qubit_splitting_hz == 5e9
    assert dev.mech_freq_hz == 50e6
    assert dev.coupling_kappa == 0.2
    assert dev.q_factor == 3000
    assert dev.t2_s == pytest.approx(0.5e-6)
    assert dev.alpha0 == 25
    # mbar defaults to the bath occupation
    assert dev.mbar == dev.nbar == 10
    sched = build_schedule(cfg)
    assert sched.kind is PulseKind.ECHO
    assert sched.t1_s == sched.t2_s == pytest.approx(0.2e-6)


def test_defaults_for_optional_keys():
    text = "device.qubit_splitting_ghz = 5\ndevice.mech_freq_mhz = 50\ndevice.kappa = 0.2\n"
    dev = build_device(parse_config(text))
    assert dev.q_factor == math.inf and dev.t2_s == math.inf
    assert dev.nbar == 0 and dev.alpha0 == 0


def test_inf_and_complex_values():
    cfg = parse_config(BASE.replace("3000", "inf").replace("alpha0 = 25", "alpha0 = 3+4i"))
    dev = build_device(cfg)
    assert dev.q_factor == math.inf
    assert dev.alpha0 == 3 + 4j


def test_temperatures():
    text = BASE.replace("device.nbar = 10", "device.bath_temp_mk = 25\ndevice.init_temp_mk = 0")
    dev = build_device(parse_config(text))
    assert dev.nbar == pytest.approx(occupation_from_temperature(25e-3, 50e6))
    assert dev.mbar == 0


def test_occupation_and_temperature_conflict():
    text = BASE + "device.bath_temp_mk = 25\n"
    with pytest.raises(ConfigError, match="not both") as info:
        build_device(parse_config(text, "x.cfg"))
    assert info.value.line == 11
    assert info.value.key == "device.bath_temp_mk"


@pytest.mark.parametrize(
    "text,line,key,match",
    [
        ("device.kapa = 0.2", 1, "device.kapa", "unknown key"),
        ("\n\ndevice.kappa 0.2", 3, None, "key = value"),
        ("device.kappa = 0.2\ndevice.kappa = 0.3", 2, "device.kappa", "duplicate"),
        ("device.kappa =", 1, "device.kappa", "empty"),
        ("sweep.axis3.key = nbar", 1, "sweep.axis3.key", "unknown key"),
    ],
)
def test_parse_errors_carry_location(text, line, key, match):
    with pytest.raises(ConfigError, match=match) as info:
        parse_config(text, "bad.cfg")
    assert info.value.line == line
    assert info.value.key == key
    assert str(info.value).startswith("bad.cfg, line")


def test_bad_values_name_the_key():
    cfg = parse_config(BASE.replace("kappa = 0.2", "kappa = lots"), "v.cfg")
    with pytest.raises(ConfigError, match="line 4, key 'device.kappa'"):
        build_device(cfg)
    cfg = parse_config(BASE.replace("kappa = 0.2", "kappa = nan"))
    with pytest.raises(ConfigError, match="NaN"):
        build_device(cfg)


def test_missing_required_key():
    with pytest.raises(ConfigError, match="device.kappa"):
        build_device(parse_config("device.qubit_splitting_ghz = 5\ndevice.mech_freq_mhz = 50"))


def test_physical_validation_becomes_config_error():
    with pytest.raises(ConfigError, match="nbar"):
        build_device(parse_config(BASE.replace("nbar = 10", "nbar = -1")))


def test_overrides_win(tmp_path):
    path = tmp_path / "dev.cfg"
    path.write_text(BASE, encoding="utf-8")
    cfg = load_config(path, parse_overrides(["--device.kappa=0.1", "--schedule.t1_us=0.3"]))
    assert build_device(cfg).coupling_kappa == 0.1
    assert build_schedule(cfg).t1_s == pytest.approx(0.3e-6)
    with pytest.raises(ConfigError, match="unknown key"):
        load_config(path, {"device.bogus": "1"})


def test_override_syntax():
    assert parse_overrides(["--a.b= 1 "]) == {"a.b": "1"}
    with pytest.raises(ConfigError):
        parse_overrides(["device.kappa=1"])


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.cfg")


def test_schedule_kinds():
    cfg = parse_config("schedule.kind = ramsey\nschedule.t_us = 0.3")
    s = build_schedule(cfg)
    assert s.kind is PulseKind.RAMSEY and s.t_s == pytest.approx(0.3e-6)
    with pytest.raises(ConfigError, match="ramsey or echo"):
        build_schedule(parse_config("schedule.kind = hahn"))
    s = build_schedule(parse_config("schedule.t1_us = 0.2\nschedule.t2_us = 0.1"))
    assert (s.t1_s, s.t2_s) == pytest.approx((0.2e-6, 0.1e-6))


def test_bool_parsing():
    cfg = parse_config("sweep.mbar_follows_nbar = yes")
    assert cfg.get_bool("sweep.mbar_follows_nbar")
    with pytest.raises(ConfigError):
        parse_config("sweep.mbar_follows_nbar = maybe").get_bool("sweep.mbar_follows_nbar")
