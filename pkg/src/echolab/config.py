"""Flat ``section.key = value`` configuration files.

Keys use experimentalist units with the unit in the name (``_ghz``, ``_mhz``,
``_us``, ``_mk``).  ``inf`` is accepted wherever an infinite Q or T2 makes
sense.  Command-line overrides of the form ``--device.kappa=0.2`` win over
the file.

Example::

    device.qubit_splitting_ghz = 5
    device.mech_freq_mhz = 50
    device.kappa = 0.2
    device.q_factor = 3000
    device.nbar = 10
    device.mbar = 10
    device.t2_us = 0.5
    device.alpha0 = 25
    schedule.kind = echo
    schedule.t1_us = 0.2
    sweep.axis1.key = t_us
    sweep.axis1.start = 0
    sweep.axis1.stop = 0.4
    sweep.axis1.count = 401
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

from .model import DeviceParams, ParameterError, PulseKind, PulseSchedule, occupation_from_temperature


class ConfigError(ValueError):
    """Bad configuration text; carries the offending line and key when known."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None,
                 source: str | None = None):
        self.key = key
        self.line = line
        self.source = source
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if key:
            where.append(f"key '{key}'")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


DEVICE_KEYS = {
    "qubit_splitting_ghz", "mech_freq_mhz", "kappa", "q_factor", "nbar",
    "bath_temp_mk", "mbar", "init_temp_mk", "t2_us", "alpha0",
}
SCHEDULE_KEYS = {"kind", "t_us", "t1_us", "t2_us"}
SWEEP_KEYS = {"engine", "outputs", "tol", "dim", "mbar_follows_nbar", "label", "crosscheck_engines"}
AXIS_FIELDS = {"key", "start", "stop", "count"}
_AXIS_RE = re.compile(r"^sweep\.axis([12])\.(\w+)$")


@dataclass(frozen=True)
class Entry:
    value: str
    line: int | None


class Config:
    """Ordered key/value pairs with their source lines."""

    def __init__(self, entries: dict[str, Entry] | None = None, source: str | None = None):
        self.entries = dict(entries or {})
        self.source = source

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def keys(self):
        return self.entries.keys()

    def raw(self, key: str, default=None):
        e = self.entries.get(key)
        return default if e is None else e.value

    def error(self, key: str, message: str) -> ConfigError:
        e = self.entries.get(key)
        return ConfigError(message, key=key, line=e.line if e else None, source=self.source)

    def get_float(self, key: str, default=None) -> float | None:
        text = self.raw(key)
        if text is None:
            return default
        try:
            value = float(text)
        except ValueError:
            raise self.error(key, f"expected a number, got {text!r}") from None
        if math.isnan(value):
            raise self.error(key, "NaN is not allowed")
        return value

    def get_int(self, key: str, default=None) -> int | None:
        text = self.raw(key)
        if text is None:
            return default
        try:
            return int(text)
        except ValueError:
            raise self.error(key, f"expected an integer, got {text!r}") from None

    def get_complex(self, key: str, default=None) -> complex | None:
        text = self.raw(key)
        if text is None:
            return default
        try:
            return complex(text.replace(" ", "").replace("i", "j"))
        except ValueError:
            raise self.error(key, f"expected a complex number like 3+1j, got {text!r}") from None

    def get_bool(self, key: str, default=False) -> bool:
        text = self.raw(key)
        if text is None:
            return default
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise self.error(key, f"expected true/false, got {text!r}")

    def with_overrides(self, overrides: dict[str, str]) -> "Config":
        entries = dict(self.entries)
        for key, value in overrides.items():
            _check_key(key, None, "command line")
            entries[key] = Entry(value, None)
        return Config(entries, self.source)


def _check_key(key: str, line: int | None, source: str | None) -> None:
    section, _, name = key.partition(".")
    ok = (
        (section == "device" and name in DEVICE_KEYS)
        or (section == "schedule" and name in SCHEDULE_KEYS)
        or (section == "sweep" and name in SWEEP_KEYS)
    )
    m = _AXIS_RE.match(key)
    if m and m.group(2) in AXIS_FIELDS:
        ok = True
    if not ok:
        raise ConfigError("unknown key", key=key, line=line, source=source)


def parse_config(text: str, source: str | None = None) -> Config:
    """Parse config text.  ``#`` starts a comment; duplicate keys are errors."""
    entries: dict[str, Entry] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno, source=source)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise ConfigError("empty key or value", key=key or None, line=lineno, source=source)
        _check_key(key, lineno, source)
        if key in entries:
            raise ConfigError(
                f"duplicate key (first set on line {entries[key].line})", key=key, line=lineno,
                source=source,
            )
        entries[key] = Entry(value, lineno)
    return Config(entries, source)


def load_config(path, overrides: dict[str, str] | None = None) -> Config:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from exc
    cfg = parse_config(text, source=str(path))
    return cfg.with_overrides(overrides) if overrides else cfg


def parse_overrides(args) -> dict[str, str]:
    """``['--device.kappa=0.2', ...]`` -> ``{'device.kappa': '0.2'}``."""
    out = {}
    for arg in args:
        if not arg.startswith("--") or "=" not in arg:
            raise ConfigError(f"expected --section.key=value, got {arg!r}")
        key, value = arg[2:].split("=", 1)
        out[key.strip()] = value.strip()
    return out


# ------------------------------------------------------------------ builders


def build_device(cfg: Config) -> DeviceParams:
    def required(key):
        v = cfg.get_float(key)
        if v is None:
            raise ConfigError("missing required key", key=key, source=cfg.source)
        return v

    mech_mhz = required("device.mech_freq_mhz")
    freq_hz = mech_mhz * 1e6
    nbar = _occupation(cfg, "device.nbar", "device.bath_temp_mk", freq_hz, 0.0)
    mbar = _occupation(cfg, "device.mbar", "device.init_temp_mk", freq_hz, nbar)
    t2_us = cfg.get_float("device.t2_us", math.inf)
    try:
        return DeviceParams(
            qubit_splitting_hz=required("device.qubit_splitting_ghz") * 1e9,
            mech_freq_hz=freq_hz,
            coupling_kappa=required("device.kappa"),
            q_factor=cfg.get_float("device.q_factor", math.inf),
            nbar=nbar,
            mbar=mbar,
            t2_s=t2_us * 1e-6,
            alpha0=cfg.get_complex("device.alpha0", 0j),
        )
    except ParameterError as exc:
        raise ConfigError(str(exc), source=cfg.source) from exc


def _occupation(cfg: Config, direct: str, temp: str, freq_hz: float, default: float) -> float:
    if direct in cfg and temp in cfg:
        raise cfg.error(temp, f"give either {direct} or {temp}, not both")
    if temp in cfg:
        t_mk = cfg.get_float(temp)
        try:
            return occupation_from_temperature(t_mk * 1e-3, freq_hz)
        except ParameterError as exc:
            raise cfg.error(temp, str(exc)) from None
    return cfg.get_float(direct, default)


def build_schedule(cfg: Config) -> PulseSchedule:
    kind_text = cfg.raw("schedule.kind", "echo").lower()
    try:
        kind = PulseKind(kind_text)
    except ValueError:
        raise cfg.error("schedule.kind", f"expected ramsey or echo, got {kind_text!r}") from None
    us = 1e-6
    try:
        if kind is PulseKind.RAMSEY:
            return PulseSchedule.ramsey(cfg.get_float("schedule.t_us", 0.0) * us)
        t1 = cfg.get_float("schedule.t1_us", 0.0)
        return PulseSchedule.echo(t1 * us, cfg.get_float("schedule.t2_us", t1) * us)
    except ParameterError as exc:
        raise ConfigError(str(exc), source=cfg.source) from exc
