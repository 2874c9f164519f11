"""Gaussian-parameter oracle.

Integrates the ODEs for the phase, means and (co)variances of the Gaussian
Wigner function of the interaction-picture component ``rho_+-``.  No Fock
truncation is involved, so this is the verifier at full device scale.  The
phase is integrated directly, which makes it continuous in time and free of
logarithm branch choices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .analytic import PHASE0, SignalPoint, carrier
from .model import DerivedParams, DeviceParams

DEFAULT_TOL = 1e-10
MAX_STEPS = 50_000_000


class GaussianOracleError(ArithmeticError):
    pass


@dataclass(frozen=True)
class GaussianParams:
    theta_prime: complex
    xbar: complex
    pbar: complex
    sigma_x: complex
    sigma_p: complex
    sigma_xp: complex
    a1: complex
    a2: complex

    @classmethod
    def initial(cls, alpha0: complex, mbar: float) -> "GaussianParams":
        """Displaced thermal state just after the first pi/2 pulse."""
        alpha0 = complex(alpha0)
        s = 2 * mbar + 1
        return cls(
            theta_prime=PHASE0,
            xbar=2 * alpha0.real,
            pbar=2 * alpha0.imag,
            sigma_x=s,
            sigma_p=s,
            sigma_xp=0,
            a1=alpha0,
            a2=alpha0.conjugate(),
        )

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.theta_prime,
                self.xbar,
                self.pbar,
                self.sigma_x,
                self.sigma_p,
                self.sigma_xp,
                self.a1,
                self.a2,
            ],
            dtype=complex,
        )

    @classmethod
    def from_array(cls, y) -> "GaussianParams":
        return cls(*(complex(v) for v in y))

    def conjugate(self) -> "GaussianParams":
        """Parameters of the Hermitian conjugate component.

        The Wigner function is complex conjugated, so means and variances are
        conjugated and the trace phase becomes ``-conj(theta')``.  The mean
        combinations swap: ``a1 -> conj(a2)`` and ``a2 -> conj(a1)``.
        """
        c = np.conj
        return GaussianParams(
            theta_prime=-c(self.theta_prime),
            xbar=c(self.xbar),
            pbar=c(self.pbar),
            sigma_x=c(self.sigma_x),
            sigma_p=c(self.sigma_p),
            sigma_xp=c(self.sigma_xp),
            a1=c(self.a2),
            a2=c(self.a1),
        )

    def mean_consistency(self) -> float:
        """Largest mismatch between the (x, p) and (a1, a2) bookkeeping."""
        return max(
            abs((self.xbar + 1j * self.pbar) / 2 - self.a1),
            abs((self.xbar - 1j * self.pbar) / 2 - self.a2),
            abs(self.xbar**2 + self.pbar**2 - 4 * self.a1 * self.a2),
        )


def _params(derived: DerivedParams):
    return (derived.omega_rad, derived.omega1_rad, derived.gamma_rad, derived.big_n)


def _initial_step(derived: DerivedParams, duration: float) -> float:
    rate = max(derived.omega_rad, derived.omega1_rad, derived.gamma_rad, 1.0)
    return min(duration, 0.01 / rate) if duration > 0 else 0.01 / rate


def integrate_gaussian(
    initial: GaussianParams,
    duration: float,
    derived: DerivedParams,
    tol: float = DEFAULT_TOL,
) -> GaussianParams:
    """Evolve ``initial`` for ``duration`` seconds."""
    if duration < 0:
        raise ValueError("duration must be >= 0")
    if duration == 0:
        return initial
    y, _, _ = _integrate(initial.as_array(), duration, derived, tol, None)
    return GaussianParams.from_array(y)


def _integrate(y, duration, derived, tol, h0):
    _check_finite(y, "initial")
    h0 = _initial_step(derived, duration) if h0 is None else h0
    try:
        y, steps, h = kernels.gaussian_integrate(
            y, _params(derived), float(duration), float(tol), float(h0), MAX_STEPS
        )
    except kernels.NonFiniteState as exc:
        name = _NAMES[exc.index] if 0 <= exc.index < len(_NAMES) else "unknown"
        raise GaussianOracleError(
            f"parameter {name} became non-finite at t={exc.t:.6g} s"
        ) from exc
    except kernels.StepUnderflow as exc:
        raise GaussianOracleError(str(exc)) from exc
    _check_finite(y, "final")
    return y, steps, h


def _check_finite(y, where):
    bad = [n for n, v in zip(_NAMES, y) if not np.isfinite(v)]
    if bad:
        raise GaussianOracleError(f"non-finite {where} Gaussian parameter(s): {', '.join(bad)}")


_NAMES = ("theta_prime", "xbar", "pbar", "sigma_x", "sigma_p", "sigma_xp", "a1", "a2")


def trajectory(
    initial: GaussianParams,
    times,
    derived: DerivedParams,
    tol: float = DEFAULT_TOL,
) -> list[GaussianParams]:
    """Parameters at each of the sorted ``times``, integrating once through."""
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or (times.size and times[0] < 0):
        raise ValueError("times must be sorted and nonnegative")
    y = initial.as_array()
    t = 0.0
    h = None
    out = []
    for target in times:
        if target > t:
            y, _, h = _integrate(y, target - t, derived, tol, h)
            t = target
        out.append(GaussianParams.from_array(y))
    return out


def _trace_from_phase(theta_prime, frame_t, decay_t, derived: DerivedParams):
    decay = math.exp(-derived.dephasing_rate * decay_t)
    return complex(carrier(derived.delta_over_hbar_rad, frame_t)) * decay * np.exp(
        1j * theta_prime
    ) / 2


def _point(t, trace, theta, decay) -> SignalPoint:
    return SignalPoint(
        t_s=t,
        trace_plus_minus=trace,
        p_plus=0.5 * (1 - 2 * trace.imag),
        envelope=0.5 + 0.5 * decay * math.exp(-theta.imag),
        theta=theta,
    )


def reconstruct_trace(params: GaussianParams, t: float, derived: DerivedParams) -> SignalPoint:
    """Ramsey signal at ``t`` from Gaussian parameters integrated for ``t``."""
    trace = _trace_from_phase(params.theta_prime, t, t, derived)
    theta = complex(params.theta_prime) - PHASE0
    return _point(t, trace, theta, math.exp(-derived.dephasing_rate * t))


def echo_conjugate_and_continue(
    mid: GaussianParams,
    t1: float,
    t2: float,
    derived: DerivedParams,
    tol: float = DEFAULT_TOL,
) -> SignalPoint:
    """Apply the pi pulse to the state ``mid`` (reached at ``t1``) and evolve for ``t2``.

    The returned ``theta`` follows the echo convention
    ``Tr[rho_+-] = (i/2) exp(-2i Delta (t2-t1)/hbar - tf/T2 + i theta)``.
    """
    final = integrate_gaussian(mid.conjugate(), t2, derived, tol)
    return _echo_point(final, t1, t2, derived)


def _echo_point(final: GaussianParams, t1, t2, derived) -> SignalPoint:
    tf = t1 + t2
    trace = _trace_from_phase(final.theta_prime, t2 - t1, tf, derived)
    theta = complex(final.theta_prime) + PHASE0
    return _point(tf, trace, theta, math.exp(-derived.dephasing_rate * tf))


def ramsey_signal(dev: DeviceParams, derived: DerivedParams, t: float, tol=DEFAULT_TOL):
    start = GaussianParams.initial(dev.alpha0, dev.mbar)
    return reconstruct_trace(integrate_gaussian(start, t, derived, tol), t, derived)


def echo_signal(dev: DeviceParams, derived: DerivedParams, t1: float, t2: float, tol=DEFAULT_TOL):
    start = GaussianParams.initial(dev.alpha0, dev.mbar)
    mid = integrate_gaussian(start, t1, derived, tol)
    return echo_conjugate_and_continue(mid, t1, t2, derived, tol)


def echo_sequence(
    dev: DeviceParams, derived: DerivedParams, t1: float, times, tol=DEFAULT_TOL
) -> list[SignalPoint]:
    """Signal through a full echo run at each sorted time in ``times``.

    Times up to ``t1`` give the Ramsey branch, later times the echo branch
    with ``t2 = t - t1``.  Each branch is integrated once.
    """
    times = np.asarray(times, dtype=float)
    start = GaussianParams.initial(dev.alpha0, dev.mbar)
    before = times[times <= t1]
    after = times[times > t1]
    out = [
        reconstruct_trace(p, t, derived)
        for p, t in zip(trajectory(start, before, derived, tol), before)
    ]
    if after.size:
        mid = integrate_gaussian(start, t1, derived, tol)
        branch = trajectory(mid.conjugate(), after - t1, derived, tol)
        out.extend(_echo_point(p, t1, t - t1, derived) for p, t in zip(branch, after))
    return out
