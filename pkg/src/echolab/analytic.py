"""Closed-form qubit signals for Ramsey and echo sequences.

All signal functions return a :class:`SignalPoint`.  They are written with
numpy operations so ``t`` (or ``t2``) may also be an array, in which case the
fields of the returned point are arrays of matching shape.

Conventions shared by every function here::

    Tr[rho_+-](t)      = (-i/2) exp(-2i Delta t/hbar - t/T2 + i theta(t))        (Ramsey)
    Tr[rho_+-](t1+t2)  = (+i/2) exp(-2i Delta (t2-t1)/hbar - tf/T2 + i theta)   (echo)
    P+                 = 1/2 - Im Tr[rho_+-]
    envelope           = 1/2 + 1/2 exp(-t/T2) exp(-Im theta)

so only ``exp(i theta)`` is physical; the real part of ``theta`` is defined
modulo 2*pi (see :func:`unwrap_theta`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.special import xlogy

from .model import DerivedParams, DeviceParams

PHASE0 = 1.5 * math.pi  # initial phase of Tr[rho_+-] after the first pi/2 pulse


class ConsistencyError(ArithmeticError):
    """A closed form produced a non-physical value."""


@dataclass(frozen=True)
class SignalPoint:
    t_s: Any
    trace_plus_minus: Any
    p_plus: Any
    envelope: Any
    theta: Any
    chi: Any = None
    phi: Any = None


def _dephasing(t, t2_s):
    if t2_s is None or math.isinf(t2_s):
        return np.ones_like(np.asarray(t, dtype=float))
    return np.exp(-np.asarray(t, dtype=float) / t2_s)


def carrier(delta_over_hbar: float, t):
    """Fast qubit rotation ``exp(-2i Delta t/hbar)``, kept as a separate factor."""
    return np.exp(-2j * delta_over_hbar * np.asarray(t, dtype=float))


def _ramsey_point(t, theta, delta_over_hbar, decay):
    t = np.asarray(t, dtype=float)
    trace = -0.5j * decay * carrier(delta_over_hbar, t) * np.exp(1j * theta)
    return _finish(t, trace, theta, decay)


def _echo_point(t1, t2, theta, delta_over_hbar, decay):
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    trace = 0.5j * decay * carrier(delta_over_hbar, t2 - t1) * np.exp(1j * theta)
    return _finish(t1 + t2, trace, theta, decay)


def _finish(t, trace, theta, decay):
    p_plus = 0.5 - trace.imag
    envelope = 0.5 + 0.5 * decay * np.exp(-np.imag(theta))
    return SignalPoint(
        t_s=_scalar(t),
        trace_plus_minus=_scalar(trace),
        p_plus=_scalar(p_plus),
        envelope=_scalar(envelope),
        theta=_scalar(theta),
    )


def _scalar(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


def unwrap_theta(theta) -> np.ndarray:
    """Remove 2*pi jumps from the real part of ``theta`` along a time grid."""
    theta = np.asarray(theta, dtype=complex)
    return np.unwrap(theta.real) + 1j * theta.imag


def uncoupled_envelope(t, t2_s: float):
    """Envelope with no mechanical coupling: ``(1 + exp(-t/T2))/2``."""
    return _scalar(0.5 + 0.5 * _dephasing(t, t2_s))


# --------------------------------------------------------------- ideal cases


def ramsey_ideal(alpha0: complex, omega1: float, delta_over_hbar: float, t) -> SignalPoint:
    """Ramsey signal for an isolated resonator in a coherent state."""
    t = np.asarray(t, dtype=float)
    n0 = abs(alpha0) ** 2
    theta = 1j * n0 * (1 - np.exp(-2j * omega1 * t)) - omega1 * t
    point = _ramsey_point(t, theta, delta_over_hbar, np.ones_like(t))
    chi = np.exp(-(separation(alpha0, omega1, t) ** 2) / 2)
    phi = (2 * delta_over_hbar + omega1) * t + n0 * np.sin(2 * omega1 * t)
    return _with(point, chi=_scalar(chi), phi=_scalar(phi))


def _with(point: SignalPoint, **kw) -> SignalPoint:
    from dataclasses import replace

    return replace(point, **kw)


def echo_ideal(
    alpha0: complex, omega1: float, delta_over_hbar: float, t1, t2
) -> SignalPoint:
    """Echo signal for an isolated resonator in a coherent state."""
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    d = t1 - t2
    n0 = abs(alpha0) ** 2
    theta = 1j * n0 * (1 - np.exp(2j * omega1 * d)) + omega1 * d
    point = _echo_point(t1, t2, theta, delta_over_hbar, np.ones_like(d))
    # Re[1 - exp(2i w1 d)] = 1 - cos(2 w1 d) enters with a minus sign
    envelope = 0.5 * (1 + np.exp(-n0 * (1 - np.cos(2 * omega1 * d))))
    return _with(point, envelope=_scalar(envelope))


def separation(alpha0: complex, omega1: float, t):
    """Phase-space distance ``2|alpha0| sin(omega1 t)`` of the two branches."""
    return _scalar(2 * abs(alpha0) * np.sin(omega1 * np.asarray(t, dtype=float)))


def separation_small_time(alpha0: complex, omega1: float, t):
    return _scalar(2 * abs(alpha0) * omega1 * np.asarray(t, dtype=float))


def entanglement(S):
    """Entanglement (von Neumann entropy, bits) of the qubit-resonator state.

    ``chi = exp(-S^2/2)``; the reduced qubit state has eigenvalues
    ``(1 +- chi)/2``.
    """
    S = np.asarray(S, dtype=float)
    if np.any(S < 0):
        raise ValueError("separation must be >= 0")
    chi = np.exp(-(S**2) / 2)
    bits = (xlogy((1 + chi) / 2, 1 + chi) + xlogy((1 - chi) / 2, 1 - chi)) / math.log(2)
    return _scalar(1 - bits)


def ramsey_thermal_undamped(
    alpha0: complex, omega1: float, delta_over_hbar: float, mbar: float, t2_s: float, t
) -> SignalPoint:
    """Ramsey signal for a displaced thermal state with no mechanical damping."""
    t = np.asarray(t, dtype=float)
    eta = 1 - np.exp(-2j * omega1 * t)
    denom = 1 + mbar * eta
    # exp(i theta) = exp(-eta |a|^2 / denom) exp(-i w1 t) / denom
    theta = 1j * eta * abs(alpha0) ** 2 / denom - omega1 * t + 1j * np.log(denom)
    return _ramsey_point(t, theta, delta_over_hbar, _dephasing(t, t2_s))


# ------------------------------------------------------------- damped cases


def _ramsey_theta(d: DerivedParams, n0: float, t):
    """Phase theta(t) of the damped Ramsey signal (principal log branch)."""
    beta, big_m, w1 = d.beta, d.big_m, d.omega1_rad
    u = np.exp(-2j * w1 * beta * t)
    ell = (1 - big_m) / (1 - big_m * u)
    return (
        -(0.5j * d.gamma_rad + w1 * beta) * t
        - 1j * np.log(ell)
        - 1j * (n0 / beta) * (u - 1) * ell
    )


def _check(point: SignalPoint, tol: float = 1e-9) -> SignalPoint:
    im = np.imag(point.theta)
    if np.any(im < -tol) or np.any(np.abs(point.trace_plus_minus) > 0.5 + 1e-12):
        raise ConsistencyError(
            f"non-physical closed-form value: min Im theta = {np.min(im):.3g}, "
            f"max |trace| = {np.max(np.abs(point.trace_plus_minus)):.6g}"
        )
    return point


def ramsey_damped(derived: DerivedParams, dev: DeviceParams, t) -> SignalPoint:
    """Ramsey signal with mechanical damping, thermal bath and qubit T2."""
    t = np.asarray(t, dtype=float)
    theta = _ramsey_theta(derived, abs(dev.alpha0) ** 2, t)
    if theta.ndim:
        theta = unwrap_theta(theta)
    point = _ramsey_point(t, theta, derived.delta_over_hbar_rad, _dephasing(t, dev.t2_s))
    return _check(point)


def echo_theta(derived: DerivedParams, dev: DeviceParams, t1, t2):
    """Phase theta(t1 + t2) of the damped echo signal.

    The state just after the pi pulse is the Hermitian conjugate of the
    Ramsey component at ``t1``; its Gaussian data (variance, mean product,
    phase) seed a second stretch of evolution of length ``t2``.
    """
    beta, big_m, w1 = derived.beta, derived.big_m, derived.omega1_rad
    r = derived.gamma_rad / (2 * w1)
    n0 = abs(dev.alpha0) ** 2
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)

    u1 = np.exp(-2j * w1 * beta * t1)
    ell1 = (1 - big_m) / (1 - big_m * u1)
    # conjugated mid-state: variance 1 + sigma_1, mean product a1*a2, phase phi'
    var1 = np.conj(1j * r + beta * (1 + big_m * u1) / (1 - big_m * u1))
    prod1 = np.conj(n0 * u1 * ell1**2)
    phi1 = -np.conj(PHASE0 + _ramsey_theta(derived, n0, t1))

    a = var1 - 1j * r
    m2 = (a - beta) / (a + beta)
    u2 = np.exp(-2j * w1 * beta * t2)
    ell2 = (1 - m2) / (1 - m2 * u2)
    return (
        phi1
        + PHASE0
        - (0.5j * derived.gamma_rad + w1 * beta) * t2
        - 1j * np.log(ell2)
        - 1j * (prod1 / beta) * (u2 - 1) * ell2
    )


def echo_damped(derived: DerivedParams, dev: DeviceParams, t1, t2) -> SignalPoint:
    """Echo signal (pi pulse at ``t1``, readout at ``t1 + t2``) with damping."""
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    theta = echo_theta(derived, dev, t1, t2)
    if np.ndim(theta):
        theta = unwrap_theta(theta)
    decay = _dephasing(t1 + t2, dev.t2_s)
    return _check(_echo_point(t1, t2, theta, derived.delta_over_hbar_rad, decay))


def echo_sequence_envelope(derived: DerivedParams, dev: DeviceParams, t1: float, t):
    """Envelope through a whole echo run: Ramsey branch before ``t1``, echo after."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    before = t <= t1
    if before.any():
        out[before] = np.atleast_1d(ramsey_damped(derived, dev, t[before]).envelope)
    if (~before).any():
        after = echo_damped(derived, dev, t1, t[~before] - t1)
        out[~before] = np.atleast_1d(after.envelope)
    return out
