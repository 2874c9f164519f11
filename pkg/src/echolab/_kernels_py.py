"""Pure-Python implementations of the integration kernels.

Used when the compiled ``echolab._kernels`` extension is unavailable (or
``ECHOLAB_PURE_PYTHON=1``).  The signatures and return values match the
Cython module exactly; see :mod:`echolab.kernels`.

Both integrators are classic fourth-order Runge-Kutta with step doubling:
one full step is compared against two half steps, the difference (divided by
15) estimates the local error, and accepted steps keep the Richardson
extrapolated value ``y2 + (y2 - y1)/15``.
"""

import numpy as np

SAFETY = 0.9
MIN_SHRINK = 0.2
MAX_GROW = 4.0
H_MIN_FRACTION = 1e-14


class StepUnderflow(ArithmeticError):
    pass


class NonFiniteState(FloatingPointError):
    """A state component became NaN or infinite; ``index`` is -1 if unknown."""

    def __init__(self, index, t):
        self.index = index
        self.t = t
        super().__init__(f"non-finite state component {index} at t={t:.6g}")

    def __reduce__(self):
        return type(self), (self.index, self.t)


def _growth(err, tol):
    if err == 0.0:
        return MAX_GROW
    return min(MAX_GROW, max(MIN_SHRINK, SAFETY * (tol / err) ** 0.2))


# -------------------------------------------------------------- Fock blocks


def lindblad_rhs(rho, diag, up, down):
    """``diag*rho + up*rho[m+1, n+1] + down*rho[m-1, n-1]`` elementwise."""
    out = diag * rho
    out[:-1, :-1] += up[:-1, :-1] * rho[1:, 1:]
    out[1:, 1:] += down[1:, 1:] * rho[:-1, :-1]
    return out


def _rk4_matrix(rho, h, diag, up, down, k1=None):
    if k1 is None:
        k1 = lindblad_rhs(rho, diag, up, down)
    k2 = lindblad_rhs(rho + 0.5 * h * k1, diag, up, down)
    k3 = lindblad_rhs(rho + 0.5 * h * k2, diag, up, down)
    k4 = lindblad_rhs(rho + h * k3, diag, up, down)
    return rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def lindblad_integrate(rho, diag, up, down, duration, tol, h0, max_steps, check_hermitian):
    """Integrate ``d rho/dt = L rho`` for ``duration`` seconds.

    Returns ``(rho, steps, h_next, max_herm, max_trace_drift)``; the last two
    are maxima over accepted steps (zero when ``check_hermitian`` is false).
    """
    rho = np.array(rho, dtype=complex, copy=True)
    t = 0.0
    h = h0
    steps = 0
    max_herm = 0.0
    max_drift = 0.0
    tr0 = np.trace(rho)
    h_min = H_MIN_FRACTION * max(duration, 1e-300)
    while t < duration:
        if steps >= max_steps:
            raise StepUnderflow(f"exceeded {max_steps} steps at t={t:.6g}")
        step = min(h, duration - t)
        k1 = lindblad_rhs(rho, diag, up, down)
        y1 = _rk4_matrix(rho, step, diag, up, down, k1)
        half = _rk4_matrix(rho, 0.5 * step, diag, up, down, k1)
        y2 = _rk4_matrix(half, 0.5 * step, diag, up, down)
        diff = y2 - y1
        scale = max(np.max(np.abs(y2)), 1e-300)
        err = np.max(np.abs(diff)) / (15.0 * scale)
        if err != err:
            raise NonFiniteState(-1, t)
        if err <= tol:
            rho = y2 + diff / 15.0
            t = duration if step >= duration - t else t + step
            steps += 1
            if check_hermitian:
                max_herm = max(max_herm, float(np.max(np.abs(rho - rho.conj().T))))
                max_drift = max(max_drift, float(abs(np.trace(rho) - tr0)))
            if step < h:
                continue
        h = step * _growth(err, tol)
        if h < h_min:
            raise StepUnderflow(f"step size underflow (h={h:.3g}) at t={t:.6g}")
    return rho, steps, h, max_herm, max_drift


# ------------------------------------------------------- Gaussian parameters

# state vector layout: theta, xbar, pbar, sigma_x, sigma_p, sigma_xp, a1, a2


def gaussian_rhs(y, omega, omega1, gamma, big_n):
    th, x, p, sx, sp, sxp, a1, a2 = y
    i = 1j
    s_mean = 0.5 * (sx + sp)
    return (
        -0.5 * omega1 * (x * x + p * p + sx + sp),
        omega * p - 0.5 * gamma * x - i * omega1 * (sxp * p + sx * x),
        -omega * x - 0.5 * gamma * p - i * omega1 * (sxp * x + sp * p),
        2 * omega * sxp - gamma * (sx - big_n) - i * omega1 * (sx * sx + sxp * sxp - 1),
        -2 * omega * sxp - gamma * (sp - big_n) - i * omega1 * (sp * sp + sxp * sxp - 1),
        omega * (sp - sx) - gamma * sxp - i * omega1 * sxp * (sp + sx),
        (-i * omega - 0.5 * gamma - i * omega1 * s_mean) * a1,
        (i * omega - 0.5 * gamma - i * omega1 * s_mean) * a2,
    )


def _axpy(y, h, k):
    return tuple(a + h * b for a, b in zip(y, k))


def _rk4_vec(y, h, args, k1=None):
    f = gaussian_rhs
    if k1 is None:
        k1 = f(y, *args)
    k2 = f(_axpy(y, 0.5 * h, k1), *args)
    k3 = f(_axpy(y, 0.5 * h, k2), *args)
    k4 = f(_axpy(y, h, k3), *args)
    return tuple(
        a + (h / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4)
        for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)
    )


def gaussian_integrate(y, params, duration, tol, h0, max_steps):
    """Integrate the eight-component Gaussian state for ``duration`` seconds.

    ``params`` is ``(omega, omega1, gamma, big_n)``.  The local error test is
    absolute, per component.  Returns ``(y, steps, h_next)``.
    """
    y = tuple(complex(v) for v in y)
    args = tuple(float(v) for v in params)
    t = 0.0
    h = h0
    steps = 0
    h_min = H_MIN_FRACTION * max(duration, 1e-300)
    while t < duration:
        if steps >= max_steps:
            raise StepUnderflow(f"exceeded {max_steps} steps at t={t:.6g}")
        step = min(h, duration - t)
        k1 = gaussian_rhs(y, *args)
        y1 = _rk4_vec(y, step, args, k1)
        y2 = _rk4_vec(_rk4_vec(y, 0.5 * step, args, k1), 0.5 * step, args)
        diffs = [abs(b - a) for a, b in zip(y1, y2)]
        err = max(diffs) / 15.0
        if not err < float("inf"):
            bad = next(i for i, d in enumerate(diffs) if not d < float("inf"))
            raise NonFiniteState(bad, t)
        if err <= tol:
            y = tuple(b + (b - a) / 15.0 for a, b in zip(y1, y2))
            t = duration if step >= duration - t else t + step
            steps += 1
            if step < h:
                continue
        h = step * _growth(err, tol)
        if h < h_min:
            raise StepUnderflow(f"step size underflow (h={h:.3g}) at t={t:.6g}")
    return np.array(y, dtype=complex), steps, h
