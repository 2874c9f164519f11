"""Parameter sweeps over the analytic signal and the two oracles.

A :class:`SweepSpec` names a base device, a pulse schedule and up to two
linear axes.  :func:`run_sweep` evaluates every grid point (in a process
pool when ``ECHOLAB_WORKERS`` > 1) and returns rows in row-major axis order,
so the CSV text does not depend on the worker count.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace

import numpy as np

from . import analytic, fock, gaussian
from .analytic import SignalPoint
from .config import Config, ConfigError, build_device, build_schedule
from .model import (
    DeviceParams,
    ParameterError,
    PulseKind,
    PulseSchedule,
    derive,
    validate_regime,
)

CSV_MAGIC = "# echolab v1"
US = 1e-6


class Engine(enum.Enum):
    ANALYTIC = "analytic"
    GAUSSIAN = "gaussian_oracle"
    FOCK = "fock_oracle"
    CROSSCHECK = "crosscheck"

    @property
    def short(self) -> str:
        return self.value.split("_")[0]


AXIS_KEYS = ("alpha0_abs", "nbar", "mbar", "q_factor", "kappa", "t1_us", "tf_us", "t_us")
OUTPUT_FIELDS = ("t_us", "envelope", "p_plus", "trace_re", "trace_im", "theta_re", "theta_im")
DEFAULT_OUTPUTS = ("envelope", "p_plus")
SINGLE_ENGINES = (Engine.ANALYTIC, Engine.GAUSSIAN, Engine.FOCK)


class SweepError(RuntimeError):
    """A grid point could not be evaluated."""


class RegimeError(SweepError):
    """Dispersive-regime checks failed under strict validation."""


@dataclass(frozen=True)
class Axis:
    key: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.key not in AXIS_KEYS:
            raise ParameterError(f"unknown axis {self.key!r}; choose from {', '.join(AXIS_KEYS)}")
        if self.count < 1:
            raise ParameterError(f"axis {self.key}: count must be >= 1")
        if self.stop < self.start:
            raise ParameterError(f"axis {self.key}: stop must be >= start")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.start)])
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepSpec:
    base: DeviceParams
    schedule: PulseSchedule
    axes: tuple[Axis, ...] = ()
    engine: Engine = Engine.ANALYTIC
    outputs: tuple[str, ...] | None = None
    tol: float | None = None
    dim: int | None = None
    mbar_follows_nbar: bool = False
    label: str | None = None
    crosscheck_engines: tuple[Engine, ...] = SINGLE_ENGINES

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "engine", Engine(self.engine))
        object.__setattr__(
            self, "crosscheck_engines", tuple(Engine(e) for e in self.crosscheck_engines)
        )
        if len(self.axes) > 2:
            raise ParameterError("at most two sweep axes")
        keys = [a.key for a in self.axes]
        if len(set(keys)) != len(keys):
            raise ParameterError("duplicate sweep axis")
        if len({"t_us", "tf_us", "t1_us"} & set(keys)) > 1:
            raise ParameterError("sweep at most one of t_us, tf_us, t1_us")
        if "t1_us" in keys and self.schedule.kind is not PulseKind.ECHO:
            raise ParameterError("axis t1_us needs an echo schedule")
        if self.engine is Engine.CROSSCHECK:
            if self.tol is None or not self.tol > 0:
                raise ParameterError("crosscheck needs a positive tolerance")
            if len(self.crosscheck_engines) < 2 or Engine.CROSSCHECK in self.crosscheck_engines:
                raise ParameterError("crosscheck compares two or more single engines")
        for name in self.outputs or ():
            if name not in OUTPUT_FIELDS:
                raise ParameterError(f"unknown output {name!r}; choose from {', '.join(OUTPUT_FIELDS)}")

    @property
    def output_fields(self) -> tuple[str, ...]:
        if self.outputs is not None:
            return tuple(self.outputs)
        keys = {a.key for a in self.axes}
        lead = () if keys & {"t_us", "tf_us"} else ("t_us",)
        return lead + DEFAULT_OUTPUTS

    def columns(self) -> list[str]:
        cols = [a.key for a in self.axes]
        if self.engine is not Engine.CROSSCHECK:
            return cols + list(self.output_fields)
        fields = [f for f in self.output_fields if f != "t_us"]
        if "t_us" in self.output_fields:
            cols.append("t_us")
        for e in self.crosscheck_engines:
            cols += [f"{f}_{e.short}" for f in fields]
            cols += [f"trace_re_{e.short}", f"trace_im_{e.short}"]
        return cols + ["max_abs_diff"]

    def grid(self) -> list[tuple[float, ...]]:
        return list(itertools.product(*(a.values() for a in self.axes)))

    def point(self, values) -> tuple[DeviceParams, PulseSchedule]:
        """Device and schedule at one grid point."""
        dev, sched = self.base, self.schedule
        changes = {}
        for axis, v in zip(self.axes, values):
            v = float(v)
            k = axis.key
            if k == "alpha0_abs":
                a0 = complex(self.base.alpha0)
                phase = a0 / abs(a0) if a0 != 0 else 1.0
                changes["alpha0"] = v * phase
            elif k == "nbar":
                changes["nbar"] = v
                if self.mbar_follows_nbar:
                    changes["mbar"] = v
            elif k == "mbar":
                changes["mbar"] = v
            elif k == "q_factor":
                changes["q_factor"] = v
            elif k == "kappa":
                changes["coupling_kappa"] = v
            elif k == "t1_us":
                sched = PulseSchedule.echo(v * US, sched.t2_s)
            elif k == "tf_us":
                if sched.kind is PulseKind.ECHO:
                    sched = PulseSchedule.echo(0.5 * v * US, 0.5 * v * US)
                else:
                    sched = PulseSchedule.ramsey(v * US)
            elif k == "t_us":
                sched = _at_time(sched, v * US)
        if changes:
            dev = dev.replace(**changes)
        return dev, sched


def _at_time(template: PulseSchedule, t: float) -> PulseSchedule:
    """Ramsey at ``t``, or the echo run observed at total time ``t``."""
    if template.kind is PulseKind.RAMSEY or t <= template.t1_s:
        return PulseSchedule.ramsey(t)
    return PulseSchedule.echo(template.t1_s, t - template.t1_s)


# ---------------------------------------------------------------- evaluation


def _uncoupled(dev: DeviceParams, sched: PulseSchedule) -> SignalPoint:
    d_over_hbar = np.pi * dev.qubit_splitting_hz
    t = sched.total_s
    decay = math.exp(-t / dev.t2_s)
    if sched.kind is PulseKind.RAMSEY:
        trace = -0.5j * complex(analytic.carrier(d_over_hbar, t)) * decay
    else:
        trace = 0.5j * complex(analytic.carrier(d_over_hbar, sched.t2_s - sched.t1_s)) * decay
    return SignalPoint(t, trace, 0.5 - trace.imag, 0.5 + 0.5 * decay, 0j)


def evaluate(dev: DeviceParams, sched: PulseSchedule, engine: Engine, dim: int | None = None) -> SignalPoint:
    """Signal of one device/schedule pair with a single engine.

    Zero coupling short-circuits to the uncoupled qubit for every engine.
    """
    engine = Engine(engine)
    if dev.coupling_kappa == 0:
        return _uncoupled(dev, sched)
    derived = derive(dev)
    ramsey = sched.kind is PulseKind.RAMSEY
    if engine is Engine.ANALYTIC:
        if ramsey:
            return analytic.ramsey_damped(derived, dev, sched.t_s)
        return analytic.echo_damped(derived, dev, sched.t1_s, sched.t2_s)
    if engine is Engine.GAUSSIAN:
        if ramsey:
            return gaussian.ramsey_signal(dev, derived, sched.t_s)
        return gaussian.echo_signal(dev, derived, sched.t1_s, sched.t2_s)
    if engine is Engine.FOCK:
        n = dim or fock.recommended_dim(dev.alpha0, dev.mbar)
        return fock.run_sequence_report(dev, sched, n, derived=derived).point
    raise ValueError(f"{engine.value} is not a single engine")


def _fields(point: SignalPoint) -> dict[str, float]:
    tr = complex(point.trace_plus_minus)
    th = complex(point.theta)
    return {
        "t_us": float(point.t_s) / US,
        "envelope": float(point.envelope),
        "p_plus": float(point.p_plus),
        "trace_re": tr.real,
        "trace_im": tr.imag,
        "theta_re": th.real,
        "theta_im": th.imag,
    }


def _describe(spec: SweepSpec, values) -> str:
    parts = [f"{a.key}={float(v):.6g}" for a, v in zip(spec.axes, values)]
    return ", ".join(parts) if parts else "base point"


def compute_row(spec: SweepSpec, index: int, values=None) -> tuple[list[float], float]:
    """Numeric row for grid point ``index`` and its engine discrepancy."""
    if values is None:
        values = spec.grid()[index]
    try:
        dev, sched = spec.point(values)
        row = [float(v) for v in values]
        if spec.engine is not Engine.CROSSCHECK:
            f = _fields(evaluate(dev, sched, spec.engine, spec.dim))
            return row + [f[name] for name in spec.output_fields], 0.0
        points = [evaluate(dev, sched, e, spec.dim) for e in spec.crosscheck_engines]
    except (ArithmeticError, ParameterError) as exc:
        raise SweepError(
            f"grid point {index} ({_describe(spec, values)}): {type(exc).__name__}: {exc}"
        ) from None
    fields = [f for f in spec.output_fields if f != "t_us"]
    if "t_us" in spec.output_fields:
        row.append(float(points[0].t_s) / US)
    for p in points:
        f = _fields(p)
        row += [f[name] for name in fields] + [f["trace_re"], f["trace_im"]]
    ref = complex(points[0].trace_plus_minus)
    diff = max(abs(complex(p.trace_plus_minus) - ref) for p in points[1:])
    return row + [diff], diff


def _compute_chunk(spec: SweepSpec, indices: list[int]):
    grid = spec.grid()
    return [(i, *compute_row(spec, i, grid[i])) for i in indices]


@dataclass
class SweepResult:
    columns: list[str]
    rows: list[list]
    warnings: list[str] = field(default_factory=list)
    max_discrepancy: float = 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_MAGIC + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([v if isinstance(v, str) else format(float(v), ".12g") for v in row])
        return buf.getvalue()


def worker_count() -> int:
    text = os.environ.get("ECHOLAB_WORKERS")
    if text:
        try:
            n = int(text)
        except ValueError:
            raise ConfigError(f"ECHOLAB_WORKERS must be an integer, got {text!r}") from None
        if n < 1:
            raise ConfigError("ECHOLAB_WORKERS must be >= 1")
        return n
    return os.cpu_count() or 1


def regime_warnings(spec: SweepSpec) -> list[str]:
    """One line per failed check, with the number of grid points affected."""
    worst: dict[str, tuple[int, float, float, str]] = {}
    for values in spec.grid():
        dev, _ = spec.point(values)
        for c in validate_regime(dev).failures():
            n, v, limit, where = worst.get(c.name, (0, -math.inf, c.limit, ""))
            if c.value > v:
                v, where = c.value, _describe(spec, values)
            worst[c.name] = (n + 1, v, limit, where)
    label = f"[{spec.label}] " if spec.label else ""
    return [
        f"{label}regime check '{name}' fails at {n} point(s); worst {v:.4g} > {limit:g} at {where}"
        for name, (n, v, limit, where) in worst.items()
    ]


def run_sweep(spec: SweepSpec, workers: int | None = None, strict: bool = False) -> SweepResult:
    """Evaluate every grid point of ``spec``."""
    warnings = regime_warnings(spec)
    if strict and warnings:
        raise RegimeError("\n".join(warnings))
    n_points = len(spec.grid())
    workers = worker_count() if workers is None else workers
    slots: list = [None] * n_points
    if workers <= 1 or n_points == 1:
        for i, row, diff in _compute_chunk(spec, list(range(n_points))):
            slots[i] = (row, diff)
    else:
        n_chunks = min(n_points, 4 * workers)
        chunks = [list(range(k, n_points, n_chunks)) for k in range(n_chunks)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_compute_chunk, spec, c) for c in chunks]
            for fut in as_completed(futures):
                for i, row, diff in fut.result():
                    slots[i] = (row, diff)
    rows = [s[0] for s in slots]
    diffs = [s[1] for s in slots]
    return SweepResult(spec.columns(), rows, warnings, max(diffs, default=0.0))


def run_curves(specs: list[SweepSpec], workers: int | None = None, strict: bool = False) -> SweepResult:
    """Several labelled sweeps sharing one column layout, stacked with a ``curve`` column."""
    if not specs:
        raise ValueError("no curves")
    columns = specs[0].columns()
    out = SweepResult(["curve"] + columns, [])
    for spec in specs:
        if spec.columns() != columns:
            raise ValueError(f"curve {spec.label!r} has columns {spec.columns()}, expected {columns}")
        res = run_sweep(spec, workers, strict)
        out.rows += [[spec.label or ""] + r for r in res.rows]
        out.warnings += res.warnings
        out.max_discrepancy = max(out.max_discrepancy, res.max_discrepancy)
    return out


# ------------------------------------------------------------ config builder


def spec_from_config(cfg: Config) -> SweepSpec:
    base = build_device(cfg)
    schedule = build_schedule(cfg)
    axes = []
    for n in (1, 2):
        prefix = f"sweep.axis{n}."
        present = [k for k in cfg.keys() if k.startswith(prefix)]
        if not present:
            continue
        for part in ("key", "start", "stop", "count"):
            if prefix + part not in cfg:
                raise ConfigError("missing axis field", key=prefix + part, source=cfg.source)
        try:
            axes.append(
                Axis(
                    cfg.raw(prefix + "key"),
                    cfg.get_float(prefix + "start"),
                    cfg.get_float(prefix + "stop"),
                    cfg.get_int(prefix + "count"),
                )
            )
        except ParameterError as exc:
            raise cfg.error(prefix + "key", str(exc)) from None
    engine_text = cfg.raw("sweep.engine", "analytic")
    try:
        engine = Engine(engine_text)
    except ValueError:
        choices = ", ".join(e.value for e in Engine)
        raise cfg.error("sweep.engine", f"expected one of {choices}, got {engine_text!r}") from None
    outputs = cfg.raw("sweep.outputs")
    if outputs is not None:
        outputs = tuple(s.strip() for s in outputs.split(",") if s.strip())
    dim_text = cfg.raw("sweep.dim", "auto")
    dim = None if dim_text == "auto" else cfg.get_int("sweep.dim")
    engines = SINGLE_ENGINES
    if "sweep.crosscheck_engines" in cfg:
        try:
            engines = tuple(
                Engine(s.strip()) for s in cfg.raw("sweep.crosscheck_engines").split(",")
            )
        except ValueError as exc:
            raise cfg.error("sweep.crosscheck_engines", str(exc)) from None
    try:
        return SweepSpec(
            base=base,
            schedule=schedule,
            axes=tuple(axes),
            engine=engine,
            outputs=outputs,
            tol=cfg.get_float("sweep.tol"),
            dim=dim,
            mbar_follows_nbar=cfg.get_bool("sweep.mbar_follows_nbar"),
            label=cfg.raw("sweep.label"),
            crosscheck_engines=engines,
        )
    except ParameterError as exc:
        raise ConfigError(str(exc), source=cfg.source) from exc


def with_engine(spec: SweepSpec, engine: Engine, tol: float | None = None) -> SweepSpec:
    return replace(spec, engine=Engine(engine), tol=spec.tol if tol is None else tol)
