"""Truncated-Fock-basis oracle.

Integrates the three qubit-indexed blocks of the master equation
(``rho_++``, ``rho_--``, ``rho_+-``) as dense ``dim x dim`` matrices and
applies ideal pulses as exact 2x2 algebra on the blocks.  Nothing here uses
the closed forms of :mod:`echolab.analytic`.

The Liouvillians are tridiagonal-in-shift: every term of the RWA damping
kernel maps ``rho[m, n]`` to itself or to ``rho[m -+ 1, n -+ 1]``, so the
generator is stored as three coefficient matrices (see :func:`generator`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm
from scipy.special import eval_genlaguerre, gammaln

from . import kernels
from .analytic import SignalPoint, carrier
from .model import DerivedParams, DeviceParams, PulseKind, PulseSchedule, derive

DEFAULT_TOL = 1e-9
MAX_STEPS = 10_000_000
HERMITICITY_BOUND = 1e-10
TRACE_BOUND = 1e-8
POSITIVITY_BOUND = -1e-8
TRUNCATION_BOUND = 1e-8


class FockOracleError(ArithmeticError):
    """Integration failure or an invariant violation in the Fock oracle."""


class TruncationError(FockOracleError):
    """The Fock basis is too small for the requested state."""


class Component(enum.Enum):
    PP = "pp"
    MM = "mm"
    PM = "pm"


def min_dim(alpha0: complex, mbar: float) -> int:
    """Smallest basis size accepted for a displaced thermal state."""
    n = abs(alpha0) ** 2 + mbar
    return math.ceil(n + 8 * math.sqrt(n) + 20)


def occupation_tail(alpha0: complex, mbar: float, dim: int) -> float:
    """Probability of ``n >= dim`` in the displaced thermal state (exact)."""
    n = np.arange(dim)
    a2 = abs(alpha0) ** 2
    if mbar == 0:
        logp = n * math.log(a2) - a2 - gammaln(n + 1) if a2 > 0 else np.where(n == 0, 0.0, -np.inf)
        return max(0.0, 1.0 - float(np.sum(np.exp(logp))))
    x = a2 / (mbar * (1 + mbar))
    logp = n * math.log(mbar) - (n + 1) * math.log1p(mbar) - a2 / (1 + mbar)
    return max(0.0, 1.0 - float(np.sum(np.exp(logp) * eval_genlaguerre(n, 0, -x))))


def recommended_dim(alpha0: complex, mbar: float, tail: float = 1e-11, margin: int = 10) -> int:
    """Basis size whose exact occupation tail is below ``tail``, plus ``margin``.

    Never smaller than :func:`min_dim`.  The rule in :func:`min_dim` alone
    underestimates the heavy tail of displaced states with ``mbar > 0``.
    """
    dim = min_dim(alpha0, mbar)
    while occupation_tail(alpha0, mbar, dim) >= tail:
        dim += 5
    return dim + margin


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def displaced_thermal(
    alpha0: complex, mbar: float, dim: int, check_dim: bool = True
) -> np.ndarray:
    """``D(alpha0) rho_th D(alpha0)^dagger`` in a ``dim``-level basis.

    The displacement is exponentiated in a padded basis and the result is
    cropped, so the trace deficit of the crop measures truncation error.
    """
    if check_dim and dim < min_dim(alpha0, mbar):
        raise TruncationError(
            f"dim={dim} below the minimum {min_dim(alpha0, mbar)} for "
            f"|alpha0|^2={abs(alpha0) ** 2:.4g}, mbar={mbar:.4g}"
        )
    work = dim + max(20, dim // 2)
    n = np.arange(work)
    if mbar == 0:
        pops = (n == 0).astype(float)
    else:
        pops = np.exp(n * math.log(mbar) - (n + 1) * math.log1p(mbar))
    a = annihilation(work)
    d_op = expm(alpha0 * a.conj().T - np.conj(alpha0) * a)
    rho = (d_op * pops) @ d_op.conj().T
    rho = rho[:dim, :dim]
    deficit = 1.0 - np.trace(rho).real
    if deficit >= TRUNCATION_BOUND:
        raise TruncationError(f"trace deficit {deficit:.3g} in dim={dim}")
    rho = rho / np.trace(rho).real
    return 0.5 * (rho + rho.conj().T)


def frame_frequency(kind: Component, derived: DerivedParams) -> float:
    """Rotation rate ``W`` of the factor ``exp(-i W (m - n) t)`` split off a block.

    That factor depends on ``m - n`` only, which the damping terms preserve,
    so it commutes with the rest of the generator and is reattached exactly.
    """
    kind = Component(kind)
    if kind is Component.PP:
        return derived.omega_rad + derived.omega1_rad
    if kind is Component.MM:
        return derived.omega_rad - derived.omega1_rad
    return derived.omega_rad


def generator(kind: Component, dim: int, derived: DerivedParams, rotating: bool = True):
    """Coefficient matrices ``(diag, up, down)`` of one block's Liouvillian.

    ``(L rho)[m, n] = diag*rho[m, n] + up*rho[m+1, n+1] + down*rho[m-1, n-1]``.
    The ``rho_+-`` block always has ``exp(-(2i Delta/hbar + 1/T2) t)`` removed;
    with ``rotating`` the :func:`frame_frequency` rotation is removed too.
    """
    kind = Component(kind)
    m = np.arange(dim, dtype=float)[:, None]
    n = np.arange(dim, dtype=float)[None, :]
    w1, g, nb = derived.omega1_rad, derived.gamma_rad, derived.nbar
    coherent = np.zeros((dim, dim), dtype=complex)
    if not rotating:
        coherent = coherent - 1j * frame_frequency(kind, derived) * (m - n)
    if kind is Component.PM:
        coherent = coherent - 1j * w1 * (m + n + 1)
    diag = coherent - 0.5 * g * (m + n) - g * nb * (m + n + 1)
    up = g * (nb + 1) * np.sqrt((m + 1) * (n + 1)) + 0j
    up[-1, :] = 0
    up[:, -1] = 0
    down = g * nb * np.sqrt(m * n) + 0j
    return np.ascontiguousarray(diag), np.ascontiguousarray(up), np.ascontiguousarray(down)


def _frame_phase(kind: Component, dim: int, derived: DerivedParams, duration: float) -> np.ndarray:
    d = np.arange(dim)[:, None] - np.arange(dim)[None, :]
    return np.exp(-1j * (frame_frequency(kind, derived) * duration) * d)


@dataclass
class Diagnostics:
    steps: int = 0
    max_hermiticity: float = 0.0
    max_trace_drift: float = 0.0
    min_eigenvalue: float = math.inf

    def merge(self, other: "Diagnostics") -> None:
        self.steps += other.steps
        self.max_hermiticity = max(self.max_hermiticity, other.max_hermiticity)
        self.max_trace_drift = max(self.max_trace_drift, other.max_trace_drift)
        self.min_eigenvalue = min(self.min_eigenvalue, other.min_eigenvalue)


def evolve_component(
    kind: Component,
    rho: np.ndarray,
    duration: float,
    derived: DerivedParams,
    tol: float = DEFAULT_TOL,
    diagnostics: Diagnostics | None = None,
) -> np.ndarray:
    """Evolve one block for ``duration`` seconds.

    The integrator runs in the frame of :func:`frame_frequency`; for ``pm``
    the fast factor ``exp(-(2i Delta/hbar + 1/T2) duration)`` is also
    applied analytically after integrating the slow part.
    """
    kind = Component(kind)
    if duration < 0:
        raise ValueError("duration must be >= 0")
    rho = np.asarray(rho, dtype=complex)
    if duration == 0:
        return rho.copy()
    dim = rho.shape[0]
    diag, up, down = generator(kind, dim, derived)
    # crude spectral radius bound sets the first trial step
    rate = float(np.max(np.abs(diag)) + np.max(np.abs(up)) + np.max(np.abs(down)))
    h0 = duration if rate == 0 else min(duration, 0.5 / rate)
    hermitian = kind is not Component.PM
    try:
        out, steps, _, herm, drift = kernels.lindblad_integrate(
            np.ascontiguousarray(rho), diag, up, down,
            float(duration), float(tol), h0, MAX_STEPS, hermitian,
        )
    except (kernels.StepUnderflow, kernels.NonFiniteState) as exc:
        raise FockOracleError(f"{kind.value}: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise FockOracleError(f"{kind.value}: non-finite entries after integration")
    out = out * _frame_phase(kind, dim, derived, duration)
    diag_info = Diagnostics(steps=steps)
    if hermitian:
        diag_info.max_hermiticity = herm
        diag_info.max_trace_drift = drift
        diag_info.min_eigenvalue = float(np.linalg.eigvalsh(0.5 * (out + out.conj().T))[0])
        if herm > HERMITICITY_BOUND or drift > TRACE_BOUND:
            raise FockOracleError(
                f"{kind.value}: invariant violated (hermiticity {herm:.3g}, "
                f"trace drift {drift:.3g})"
            )
        if diag_info.min_eigenvalue < POSITIVITY_BOUND:
            raise FockOracleError(
                f"{kind.value}: negative eigenvalue {diag_info.min_eigenvalue:.3g}"
            )
    else:
        decay = math.exp(-derived.dephasing_rate * duration)
        out = out * (complex(carrier(derived.delta_over_hbar_rad, duration)) * decay)
    if diagnostics is not None:
        diagnostics.merge(diag_info)
    return out


@dataclass(frozen=True)
class ComponentState:
    rho_pp: np.ndarray
    rho_mm: np.ndarray
    rho_pm: np.ndarray
    time_s: float = 0.0

    @classmethod
    def ground(cls, rho: np.ndarray) -> "ComponentState":
        """Qubit in ``|->`` with the resonator in ``rho``."""
        zero = np.zeros_like(rho, dtype=complex)
        return cls(zero, np.asarray(rho, dtype=complex), zero.copy())

    def populations(self) -> tuple[float, float]:
        return np.trace(self.rho_pp).real, np.trace(self.rho_mm).real

    def trace_pm(self) -> complex:
        return complex(np.trace(self.rho_pm))


def apply_rotation(state: ComponentState, angle: float) -> ComponentState:
    """Apply ``exp(-i angle sigma_x / 2)`` to the qubit, basis order (+, -)."""
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    u = np.array([[c, -1j * s], [-1j * s, c]])
    blocks = [[state.rho_pp, state.rho_pm], [state.rho_pm.conj().T, state.rho_mm]]

    def block(i, j):
        return sum(
            u[i, k] * np.conj(u[j, l]) * blocks[k][l] for k in range(2) for l in range(2)
        )

    return replace(state, rho_pp=block(0, 0), rho_mm=block(1, 1), rho_pm=block(0, 1))


def evolve_state(
    state: ComponentState,
    duration: float,
    derived: DerivedParams,
    tol: float = DEFAULT_TOL,
    diagnostics: Diagnostics | None = None,
) -> ComponentState:
    def ev(kind, rho):
        return evolve_component(kind, rho, duration, derived, tol, diagnostics)

    return ComponentState(
        ev(Component.PP, state.rho_pp),
        ev(Component.MM, state.rho_mm),
        ev(Component.PM, state.rho_pm),
        state.time_s + duration,
    )


@dataclass(frozen=True)
class FockResult:
    point: SignalPoint
    p_plus_from_trace: float
    diagnostics: Diagnostics
    final_state: ComponentState

    @property
    def route_mismatch(self) -> float:
        return abs(self.point.p_plus - self.p_plus_from_trace)


def run_sequence_report(
    dev: DeviceParams,
    schedule: PulseSchedule,
    dim: int,
    tol: float = DEFAULT_TOL,
    derived: DerivedParams | None = None,
    check_dim: bool = True,
) -> FockResult:
    """Simulate a full Ramsey or echo sequence; see :func:`run_sequence`."""
    derived = derive(dev) if derived is None else derived
    diag = Diagnostics()
    state = ComponentState.ground(displaced_thermal(dev.alpha0, dev.mbar, dim, check_dim))
    state = apply_rotation(state, math.pi / 2)
    if schedule.kind is PulseKind.RAMSEY:
        state = evolve_state(state, schedule.t_s, derived, tol, diag)
    else:
        state = evolve_state(state, schedule.t1_s, derived, tol, diag)
        state = apply_rotation(state, math.pi)
        state = evolve_state(state, schedule.t2_s, derived, tol, diag)
    return _result(schedule, state, derived, diag)


def _result(schedule, state: ComponentState, derived, diag: Diagnostics) -> FockResult:
    trace = state.trace_pm()
    final = apply_rotation(state, math.pi / 2)
    p_plus = final.populations()[0]
    total = sum(state.populations())
    p_from_trace = 0.5 * total - trace.imag
    point = _signal_point(schedule, trace, p_plus, derived)
    return FockResult(point, p_from_trace, replace(diag), final)


def _signal_point(schedule: PulseSchedule, trace: complex, p_plus: float, derived):
    tf = schedule.total_s
    decay = math.exp(-derived.dephasing_rate * tf)
    if schedule.kind is PulseKind.RAMSEY:
        ref = -0.5j * carrier(derived.delta_over_hbar_rad, tf)
    else:
        ref = 0.5j * carrier(derived.delta_over_hbar_rad, schedule.t2_s - schedule.t1_s)
    theta = -1j * np.log(trace / (complex(ref) * decay)) if trace != 0 else complex(0, math.inf)
    return SignalPoint(
        t_s=tf,
        trace_plus_minus=trace,
        p_plus=p_plus,
        envelope=0.5 + abs(trace),
        theta=complex(theta),
    )


def run_sequence(
    dev: DeviceParams, schedule: PulseSchedule, dim: int, tol: float = DEFAULT_TOL
) -> SignalPoint:
    """Prepare, pulse, evolve and read out; returns the qubit signal.

    ``p_plus`` comes from the populations after the final pi/2 pulse and
    ``trace_plus_minus`` is taken just before it.
    """
    return run_sequence_report(dev, schedule, dim, tol).point


def ramsey_trace(
    dev: DeviceParams, times, dim: int, tol: float = DEFAULT_TOL, derived=None
) -> tuple[list[FockResult], Diagnostics]:
    """Ramsey signal on sorted ``times``, integrating each block once through."""
    derived = derive(dev) if derived is None else derived
    diag = Diagnostics()
    state = apply_rotation(
        ComponentState.ground(displaced_thermal(dev.alpha0, dev.mbar, dim)), math.pi / 2
    )
    out = []
    for t in np.asarray(times, dtype=float):
        if t < state.time_s:
            raise ValueError("times must be sorted")
        state = evolve_state(state, t - state.time_s, derived, tol, diag)
        out.append(_result(PulseSchedule.ramsey(t), state, derived, diag))
    return out, diag


def echo_trace(
    dev: DeviceParams, t1: float, t2_times, dim: int, tol: float = DEFAULT_TOL, derived=None
) -> tuple[list[FockResult], Diagnostics]:
    """Echo signal with the pi pulse at ``t1``, observed at each sorted ``t2``."""
    derived = derive(dev) if derived is None else derived
    diag = Diagnostics()
    state = apply_rotation(
        ComponentState.ground(displaced_thermal(dev.alpha0, dev.mbar, dim)), math.pi / 2
    )
    state = apply_rotation(evolve_state(state, t1, derived, tol, diag), math.pi)
    out = []
    elapsed = 0.0
    for t2 in np.asarray(t2_times, dtype=float):
        if t2 < elapsed:
            raise ValueError("t2_times must be sorted")
        state = evolve_state(state, t2 - elapsed, derived, tol, diag)
        elapsed = t2
        out.append(_result(PulseSchedule.echo(t1, t2), state, derived, diag))
    return out, diag
