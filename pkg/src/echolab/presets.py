"""Parameter sets that reproduce the four published figure layouts.

All share the reference device: 5 GHz qubit splitting, 50 MHz resonator,
T2 = 0.5 us, and an echo pi pulse at 0.2 us unless the figure sweeps it.
"""

from __future__ import annotations

from dataclasses import replace

from .model import INFINITE, DeviceParams, PulseSchedule
from .sweep import Axis, Engine, SweepResult, SweepSpec, run_curves

CROSSCHECK_ENGINES = (Engine.ANALYTIC, Engine.GAUSSIAN)

PRESETS = ("fig1", "fig2", "fig3", "fig4")

#: x column of each CSV a preset writes
X_COLUMN = {
    "fig1": "t_us",
    "fig2": "alpha0_abs",
    "fig3_nbar": "nbar",
    "fig3_alpha0": "alpha0_abs",
    "fig4": "tf_us",
}

# fig4's horizontal range is not given by its caption; two T2 periods
# cover the initial plateau and the decay.
FIG4_TF_STOP_US = 1.0

REFERENCE = DeviceParams(
    qubit_splitting_hz=5e9,
    mech_freq_hz=50e6,
    coupling_kappa=0.2,
    q_factor=INFINITE,
    nbar=10.0,
    mbar=10.0,
    t2_s=0.5e-6,
    alpha0=25.0,
)
ECHO_AT_0_2 = PulseSchedule.echo(0.2e-6, 0.2e-6)


def _q_label(q: float) -> str:
    return "Q=inf" if q == INFINITE else f"Q={q:g}"


def _fig1(engine: Engine) -> list[SweepSpec]:
    axis = (Axis("t_us", 0.0, 0.4, 401),)
    specs = []
    for mbar in (10.0, 0.0):
        for q in (3000.0, INFINITE):
            dev = replace(REFERENCE, q_factor=q, mbar=mbar)
            specs.append(
                SweepSpec(dev, ECHO_AT_0_2, axis, engine, label=f"{_q_label(q)} mbar={mbar:g}")
            )
    uncoupled = replace(REFERENCE, coupling_kappa=0.0)
    specs.append(SweepSpec(uncoupled, ECHO_AT_0_2, axis, engine, label="uncoupled"))
    return specs


def _fig2(engine: Engine) -> list[SweepSpec]:
    axis = (Axis("alpha0_abs", 0.0, 25.0, 51),)
    specs = []
    for nbar in (10.0, 20.0):
        for mbar in (nbar, 0.0):
            dev = replace(REFERENCE, q_factor=1e4, nbar=nbar, mbar=mbar)
            specs.append(
                SweepSpec(dev, ECHO_AT_0_2, axis, engine, label=f"nbar={nbar:g} mbar={mbar:g}")
            )
    return specs


def _q_curves(dev: DeviceParams, axis: Axis, engine: Engine, follow: bool) -> list[SweepSpec]:
    specs = [
        SweepSpec(replace(dev, q_factor=q), ECHO_AT_0_2, (axis,), engine,
                  mbar_follows_nbar=follow, label=_q_label(q))
        for q in (1e3, 1e4)
    ]
    specs.append(
        SweepSpec(replace(dev, q_factor=INFINITE), ECHO_AT_0_2, (axis,), engine,
                  mbar_follows_nbar=follow, label="no dissipation")
    )
    return specs


def _fig3_nbar(engine: Engine) -> list[SweepSpec]:
    dev = replace(REFERENCE, alpha0=10.0)
    return _q_curves(dev, Axis("nbar", 0.0, 25.0, 51), engine, follow=True)


def _fig3_alpha0(engine: Engine) -> list[SweepSpec]:
    return _q_curves(REFERENCE, Axis("alpha0_abs", 0.0, 25.0, 51), engine, follow=False)


def _fig4(engine: Engine) -> list[SweepSpec]:
    axis = (Axis("tf_us", 0.0, FIG4_TF_STOP_US, 101),)
    specs = []
    for kappa in (0.1, 0.2):
        for q in (1e3, 1e4):
            dev = replace(REFERENCE, coupling_kappa=kappa, q_factor=q)
            specs.append(
                SweepSpec(dev, ECHO_AT_0_2, axis, engine, label=f"kappa={kappa:g} {_q_label(q)}")
            )
    # without dissipation the echo is perfect for any coupling
    specs.append(SweepSpec(REFERENCE, ECHO_AT_0_2, axis, engine, label="no dissipation"))
    return specs


_BUILDERS = {
    "fig1": [("fig1", _fig1)],
    "fig2": [("fig2", _fig2)],
    "fig3": [("fig3_nbar", _fig3_nbar), ("fig3_alpha0", _fig3_alpha0)],
    "fig4": [("fig4", _fig4)],
}


def preset_specs(name: str, engine=Engine.ANALYTIC, tol: float | None = None) -> dict[str, list[SweepSpec]]:
    """``{csv stem: curve specs}`` for preset ``name``."""
    if name not in _BUILDERS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    engine = Engine(engine)
    out = {}
    for stem, build in _BUILDERS[name]:
        specs = build(Engine.ANALYTIC)
        # the Fock oracle cannot reach alpha0 = 25, so crosschecks use the Gaussian one
        out[stem] = [
            replace(s, engine=engine, tol=tol, crosscheck_engines=CROSSCHECK_ENGINES) for s in specs
        ]
    return out


def run_preset(
    name: str,
    engine=Engine.ANALYTIC,
    tol: float | None = None,
    workers: int | None = None,
    strict: bool = False,
) -> dict[str, SweepResult]:
    return {
        stem: run_curves(specs, workers, strict)
        for stem, specs in preset_specs(name, engine, tol).items()
    }
