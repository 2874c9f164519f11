"""Device parameters, unit conversions and derived scales.

Everything internal is SI with angular frequencies (rad/s) and seconds.
Configuration files use experimentalist units and are converted at the
boundary (see :mod:`echolab.config`).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

from scipy.constants import hbar, k as k_boltzmann

#: Sentinel for an infinite quality factor or an infinite T2.  Code paths
#: test ``math.isinf`` so the gamma = 0 and no-dephasing limits are exact.
INFINITE = math.inf


class ParameterError(ValueError):
    """Raised for physically invalid device parameters."""


def occupation_from_temperature(temp_k: float, freq_hz: float) -> float:
    """Bose occupation ``1/(exp(hbar*w/kT) - 1)`` of a mode at ``freq_hz``."""
    if temp_k < 0:
        raise ParameterError(f"temperature must be >= 0, got {temp_k}")
    if freq_hz <= 0:
        raise ParameterError(f"frequency must be > 0, got {freq_hz}")
    if temp_k == 0:
        return 0.0
    x = hbar * 2 * math.pi * freq_hz / (k_boltzmann * temp_k)
    return 1.0 / math.expm1(x)


def thermal_uncertainty_diameter(nbar: float) -> float:
    """Phase-space uncertainty diameter ``sqrt(2n+1)/2`` of a thermal state."""
    return math.sqrt(2 * nbar + 1) / 2


@dataclass(frozen=True)
class DeviceParams:
    """Experimental knobs of the qubit/resonator device.

    ``qubit_splitting_hz`` is the qubit transition frequency 2*Delta/h and
    ``mech_freq_hz`` the ordinary mechanical frequency omega/2pi.  ``q_factor``
    and ``t2_s`` accept :data:`INFINITE`.
    """

    qubit_splitting_hz: float
    mech_freq_hz: float
    coupling_kappa: float
    q_factor: float = INFINITE
    nbar: float = 0.0
    mbar: float = 0.0
    t2_s: float = INFINITE
    alpha0: complex = 0j
    beam_mass_kg: float | None = None

    def __post_init__(self):
        if not self.qubit_splitting_hz > 0:
            raise ParameterError("qubit_splitting_hz must be > 0")
        if not self.mech_freq_hz > 0:
            raise ParameterError("mech_freq_hz must be > 0")
        for name in ("coupling_kappa", "q_factor", "nbar", "mbar", "t2_s"):
            value = getattr(self, name)
            if math.isnan(value) or value < 0:
                raise ParameterError(f"{name} must be >= 0, got {value}")
        if self.q_factor == 0 or self.t2_s == 0:
            raise ParameterError("q_factor and t2_s must be nonzero")
        object.__setattr__(self, "alpha0", complex(self.alpha0))

    @classmethod
    def from_temperatures(
        cls, *, bath_temp_k: float, init_temp_k: float | None = None, **kwargs
    ) -> "DeviceParams":
        """Build params with occupations computed from temperatures.

        ``init_temp_k`` defaults to the bath temperature (noiseless drive).
        """
        freq = kwargs["mech_freq_hz"]
        nbar = occupation_from_temperature(bath_temp_k, freq)
        if init_temp_k is None:
            mbar = nbar
        else:
            mbar = occupation_from_temperature(init_temp_k, freq)
        return cls(nbar=nbar, mbar=mbar, **kwargs)

    def replace(self, **changes) -> "DeviceParams":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class DerivedParams:
    omega_rad: float
    delta_over_hbar_rad: float
    lambda_joule: float
    omega1_rad: float
    gamma_rad: float
    delta_validity: float
    big_n: float
    beta: complex
    big_m: complex
    nbar: float = 0.0
    mbar: float = 0.0
    dephasing_rate: float = 0.0
    x_zp_m: float | None = None

    @property
    def ratio(self) -> complex:
        """``gamma / (2 omega1)``, the recurring damping ratio."""
        return self.gamma_rad / (2 * self.omega1_rad)


def _beta_and_m(gamma: float, omega1: float, nbar: float, mbar: float):
    if gamma == 0.0:
        # radical collapses to 1; keep M exactly m/(m+1)
        return 1.0 + 0j, complex(mbar / (mbar + 1.0))
    r = gamma / (2 * omega1)
    beta = cmath.sqrt((1 - 1j * r) ** 2 - 2j * gamma * nbar / omega1)
    a = 2 * mbar + 1 - 1j * r
    return beta, (a - beta) / (a + beta)


def derive(params: DeviceParams) -> DerivedParams:
    """Compute the angular scales and damping constants of ``params``."""
    if params.coupling_kappa <= 0:
        raise ParameterError("coupling_kappa must be > 0 to derive omega1")
    omega = 2 * math.pi * params.mech_freq_hz
    delta_over_hbar = math.pi * params.qubit_splitting_hz
    lam = params.coupling_kappa * hbar * omega
    omega1 = params.coupling_kappa**2 * omega**2 / delta_over_hbar
    gamma = 0.0 if math.isinf(params.q_factor) else omega / params.q_factor
    dephasing = 0.0 if math.isinf(params.t2_s) else 1.0 / params.t2_s
    beta, big_m = _beta_and_m(gamma, omega1, params.nbar, params.mbar)
    delta_validity = (
        2 * params.coupling_kappa * abs(params.alpha0) * omega / delta_over_hbar
    ) ** 2
    x_zp = None
    if params.beam_mass_kg is not None:
        x_zp = math.sqrt(hbar / (2 * params.beam_mass_kg * omega))
    return DerivedParams(
        omega_rad=omega,
        delta_over_hbar_rad=delta_over_hbar,
        lambda_joule=lam,
        omega1_rad=omega1,
        gamma_rad=gamma,
        delta_validity=delta_validity,
        big_n=2 * params.nbar + 1,
        beta=beta,
        big_m=big_m,
        nbar=params.nbar,
        mbar=params.mbar,
        dephasing_rate=dephasing,
        x_zp_m=x_zp,
    )


def flip_branch(derived: DerivedParams) -> DerivedParams:
    """Return ``derived`` with the other square-root branch (-beta, 1/M)."""
    from dataclasses import replace

    return replace(derived, beta=-derived.beta, big_m=1 / derived.big_m)


@dataclass(frozen=True)
class RegimeCheck:
    name: str
    value: float
    limit: float

    @property
    def ok(self) -> bool:
        # relative slack so a value landing on the limit by rounding passes
        return self.value <= self.limit * (1 + 1e-12)


@dataclass(frozen=True)
class RegimeReport:
    checks: tuple[RegimeCheck, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def __getitem__(self, name: str) -> RegimeCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[RegimeCheck]:
        return [c for c in self.checks if not c.ok]

    def format(self) -> str:
        lines = []
        for c in self.checks:
            status = "ok  " if c.ok else "FAIL"
            lines.append(f"{status} {c.name:<22} {c.value:.6g} (limit {c.limit:g})")
        return "\n".join(lines)


def validate_regime(params: DeviceParams, delta_max: float = 0.04) -> RegimeReport:
    """Check the dispersive-regime assumptions for ``params``.

    Reporting only: callers decide whether a failed check is fatal.
    """
    omega = 2 * math.pi * params.mech_freq_hz
    delta_over_hbar = math.pi * params.qubit_splitting_hz
    kappa = params.coupling_kappa
    # hbar*omega/Delta is a ratio of angular rates
    ratio = omega / delta_over_hbar
    delta = (2 * kappa * abs(params.alpha0) * ratio) ** 2
    # lambda^2 / (2 Delta hbar omega) = kappa^2 hbar omega / (2 Delta)
    rwa = kappa**2 * ratio / 2
    damping = 0.0 if math.isinf(params.q_factor) else 1.0 / params.q_factor
    return RegimeReport(
        (
            RegimeCheck("delta", delta, delta_max),
            RegimeCheck("timescale_separation", ratio, 0.1),
            RegimeCheck("rwa_coupling", rwa, 0.1),
            RegimeCheck("weak_damping", damping, 1e-2),
        )
    )


class PulseKind(enum.Enum):
    RAMSEY = "ramsey"
    ECHO = "echo"


@dataclass(frozen=True)
class PulseSchedule:
    """Timing of ideal instantaneous pulses.

    Ramsey uses ``t_s``; Echo uses ``t1_s`` (before the pi pulse) and
    ``t2_s`` (after it).
    """

    kind: PulseKind
    t_s: float = 0.0
    t1_s: float = 0.0
    t2_s: float = 0.0

    def __post_init__(self):
        if min(self.t_s, self.t1_s, self.t2_s) < 0:
            raise ParameterError("pulse times must be >= 0")

    @classmethod
    def ramsey(cls, t_s: float) -> "PulseSchedule":
        return cls(PulseKind.RAMSEY, t_s=t_s)

    @classmethod
    def echo(cls, t1_s: float, t2_s: float) -> "PulseSchedule":
        return cls(PulseKind.ECHO, t1_s=t1_s, t2_s=t2_s)

    @property
    def total_s(self) -> float:
        if self.kind is PulseKind.RAMSEY:
            return self.t_s
        return self.t1_s + self.t2_s
