# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled integration kernels; the pure-Python twin is ``_kernels_py``.

Same algorithm, same signatures, same return tuples.
"""

import numpy as np

from libc.math cimport INFINITY, pow, sqrt

from ._kernels_py import NonFiniteState, StepUnderflow

cdef double SAFETY = 0.9
cdef double MIN_SHRINK = 0.2
cdef double MAX_GROW = 4.0
cdef double H_MIN_FRACTION = 1e-14


cdef inline double cabs2(double complex z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline double cabs(double complex z) noexcept nogil:
    return sqrt(cabs2(z))


cdef inline double growth(double err, double tol) noexcept nogil:
    cdef double f
    if err == 0.0:
        return MAX_GROW
    f = SAFETY * pow(tol / err, 0.2)
    if f < MIN_SHRINK:
        return MIN_SHRINK
    if f > MAX_GROW:
        return MAX_GROW
    return f


# -------------------------------------------------------------- Fock blocks


cdef void rhs(const double complex[:, ::1] rho,
              const double complex[:, ::1] diag,
              const double complex[:, ::1] up,
              const double complex[:, ::1] down,
              double complex[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n = rho.shape[0], i, j
    for i in range(n):
        for j in range(n):
            out[i, j] = diag[i, j] * rho[i, j]
    for i in range(n - 1):
        for j in range(n - 1):
            out[i, j] = out[i, j] + up[i, j] * rho[i + 1, j + 1]
    for i in range(1, n):
        for j in range(1, n):
            out[i, j] = out[i, j] + down[i, j] * rho[i - 1, j - 1]


cdef void axpy(const double complex[:, ::1] y, double h,
               const double complex[:, ::1] k,
               double complex[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n = y.shape[0], i, j
    for i in range(n):
        for j in range(n):
            out[i, j] = y[i, j] + h * k[i, j]


cdef void rk4(const double complex[:, ::1] y, double h,
              const double complex[:, ::1] diag,
              const double complex[:, ::1] up,
              const double complex[:, ::1] down,
              const double complex[:, ::1] k1,
              double complex[:, ::1] k2,
              double complex[:, ::1] k3,
              double complex[:, ::1] k4,
              double complex[:, ::1] tmp,
              double complex[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n = y.shape[0], i, j
    axpy(y, 0.5 * h, k1, tmp)
    rhs(tmp, diag, up, down, k2)
    axpy(y, 0.5 * h, k2, tmp)
    rhs(tmp, diag, up, down, k3)
    axpy(y, h, k3, tmp)
    rhs(tmp, diag, up, down, k4)
    for i in range(n):
        for j in range(n):
            out[i, j] = y[i, j] + (h / 6.0) * (
                k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j]
            )


def lindblad_integrate(rho_in, diag_in, up_in, down_in, double duration, double tol,
                       double h0, long max_steps, bint check_hermitian):
    """Integrate ``d rho/dt = L rho`` for ``duration`` seconds.

    Returns ``(rho, steps, h_next, max_herm, max_trace_drift)``.
    """
    cdef double complex[:, ::1] rho = np.array(rho_in, dtype=np.complex128, order="C")
    cdef const double complex[:, ::1] diag = np.ascontiguousarray(diag_in, dtype=np.complex128)
    cdef const double complex[:, ::1] up = np.ascontiguousarray(up_in, dtype=np.complex128)
    cdef const double complex[:, ::1] down = np.ascontiguousarray(down_in, dtype=np.complex128)
    cdef Py_ssize_t n = rho.shape[0], i, j
    shape = (n, n)
    cdef double complex[:, ::1] k1 = np.empty(shape, np.complex128)
    cdef double complex[:, ::1] k2 = np.empty(shape, np.complex128)
    cdef double complex[:, ::1] k3 = np.empty(shape, np.complex128)
    cdef double complex[:, ::1] k4 = np.empty(shape, np.complex128)
    cdef double complex[:, ::1] tmp = np.empty(shape, np.complex128)
    cdef double complex[:, ::1] y1 = np.empty(shape, np.complex128)
    cdef double complex[:, ::1] half = np.empty(shape, np.complex128)
    cdef double complex[:, ::1] kh = np.empty(shape, np.complex128)
    cdef double complex[:, ::1] y2 = np.empty(shape, np.complex128)

    cdef double t = 0.0, h = h0, step, err, scale, dmax, a, herm, drift
    cdef double max_herm = 0.0, max_drift = 0.0, h_min
    cdef long steps = 0
    cdef double complex tr0 = 0, tr, d
    cdef int status = 0

    for i in range(n):
        tr0 = tr0 + rho[i, i]
    h_min = H_MIN_FRACTION * (duration if duration > 1e-300 else 1e-300)

    with nogil:
        while t < duration:
            if steps >= max_steps:
                status = 1
                break
            step = h if h < duration - t else duration - t
            rhs(rho, diag, up, down, k1)
            rk4(rho, step, diag, up, down, k1, k2, k3, k4, tmp, y1)
            rk4(rho, 0.5 * step, diag, up, down, k1, k2, k3, k4, tmp, half)
            rhs(half, diag, up, down, kh)
            rk4(half, 0.5 * step, diag, up, down, kh, k2, k3, k4, tmp, y2)
            scale = 0.0
            dmax = 0.0
            for i in range(n):
                for j in range(n):
                    a = cabs2(y2[i, j])
                    if a > scale:
                        scale = a
                    a = cabs2(y2[i, j] - y1[i, j])
                    if a > dmax:
                        dmax = a
            scale = sqrt(scale)
            if scale < 1e-300:
                scale = 1e-300
            err = sqrt(dmax) / (15.0 * scale)
            if err != err:
                status = 3
                break
            if err <= tol:
                for i in range(n):
                    for j in range(n):
                        rho[i, j] = y2[i, j] + (y2[i, j] - y1[i, j]) / 15.0
                if step >= duration - t:
                    t = duration
                else:
                    t = t + step
                steps += 1
                if check_hermitian:
                    tr = 0
                    herm = 0.0
                    for i in range(n):
                        tr = tr + rho[i, i]
                        for j in range(i, n):
                            d = rho[i, j] - rho[j, i].conjugate()
                            a = cabs(d)
                            if a > herm:
                                herm = a
                    if herm > max_herm:
                        max_herm = herm
                    drift = cabs(tr - tr0)
                    if drift > max_drift:
                        max_drift = drift
                if step < h:
                    continue
            h = step * growth(err, tol)
            if h < h_min:
                status = 2
                break

    if status == 1:
        raise StepUnderflow(f"exceeded {max_steps} steps at t={t:.6g}")
    if status == 2:
        raise StepUnderflow(f"step size underflow (h={h:.3g}) at t={t:.6g}")
    if status == 3:
        raise NonFiniteState(-1, t)
    return np.asarray(rho), steps, h, max_herm, max_drift


# ------------------------------------------------------- Gaussian parameters

# state layout: theta, xbar, pbar, sigma_x, sigma_p, sigma_xp, a1, a2
cdef enum:
    NG = 8


cdef void grhs(const double complex* y, double w, double w1, double g, double big_n,
               double complex* out) noexcept nogil:
    cdef double complex I = 1j
    cdef double complex x = y[1], p = y[2], sx = y[3], sp = y[4], sxp = y[5]
    cdef double complex s_mean = 0.5 * (sx + sp)
    out[0] = -0.5 * w1 * (x * x + p * p + sx + sp)
    out[1] = w * p - 0.5 * g * x - I * w1 * (sxp * p + sx * x)
    out[2] = -w * x - 0.5 * g * p - I * w1 * (sxp * x + sp * p)
    out[3] = 2 * w * sxp - g * (sx - big_n) - I * w1 * (sx * sx + sxp * sxp - 1)
    out[4] = -2 * w * sxp - g * (sp - big_n) - I * w1 * (sp * sp + sxp * sxp - 1)
    out[5] = w * (sp - sx) - g * sxp - I * w1 * sxp * (sp + sx)
    out[6] = (-I * w - 0.5 * g - I * w1 * s_mean) * y[6]
    out[7] = (I * w - 0.5 * g - I * w1 * s_mean) * y[7]


cdef void grk4(const double complex* y, double h, double w, double w1, double g,
               double big_n, const double complex* k1, double complex* out) noexcept nogil:
    cdef double complex k2[NG]
    cdef double complex k3[NG]
    cdef double complex k4[NG]
    cdef double complex tmp[NG]
    cdef int i
    for i in range(NG):
        tmp[i] = y[i] + 0.5 * h * k1[i]
    grhs(tmp, w, w1, g, big_n, k2)
    for i in range(NG):
        tmp[i] = y[i] + 0.5 * h * k2[i]
    grhs(tmp, w, w1, g, big_n, k3)
    for i in range(NG):
        tmp[i] = y[i] + h * k3[i]
    grhs(tmp, w, w1, g, big_n, k4)
    for i in range(NG):
        out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


def gaussian_integrate(y_in, params, double duration, double tol, double h0, long max_steps):
    """Integrate the eight-component Gaussian state for ``duration`` seconds.

    Returns ``(y, steps, h_next)``.
    """
    cdef double complex y[NG]
    cdef double complex k1[NG]
    cdef double complex kh[NG]
    cdef double complex y1[NG]
    cdef double complex half[NG]
    cdef double complex y2[NG]
    cdef int i
    for i in range(NG):
        y[i] = complex(y_in[i])
    cdef double w = params[0], w1 = params[1], g = params[2], big_n = params[3]
    cdef double t = 0.0, h = h0, step, err, a, h_min
    cdef long steps = 0
    cdef int status = 0, bad = -1
    h_min = H_MIN_FRACTION * (duration if duration > 1e-300 else 1e-300)

    with nogil:
        while t < duration:
            if steps >= max_steps:
                status = 1
                break
            step = h if h < duration - t else duration - t
            grhs(y, w, w1, g, big_n, k1)
            grk4(y, step, w, w1, g, big_n, k1, y1)
            grk4(y, 0.5 * step, w, w1, g, big_n, k1, half)
            grhs(half, w, w1, g, big_n, kh)
            grk4(half, 0.5 * step, w, w1, g, big_n, kh, y2)
            err = 0.0
            for i in range(NG):
                a = cabs(y2[i] - y1[i])
                if not a < INFINITY:
                    bad = i
                    break
                if a > err:
                    err = a
            if bad >= 0:
                status = 3
                break
            err = err / 15.0
            if err <= tol:
                for i in range(NG):
                    y[i] = y2[i] + (y2[i] - y1[i]) / 15.0
                if step >= duration - t:
                    t = duration
                else:
                    t = t + step
                steps += 1
                if step < h:
                    continue
            h = step * growth(err, tol)
            if h < h_min:
                status = 2
                break

    if status == 1:
        raise StepUnderflow(f"exceeded {max_steps} steps at t={t:.6g}")
    if status == 2:
        raise StepUnderflow(f"step size underflow (h={h:.3g}) at t={t:.6g}")
    if status == 3:
        raise NonFiniteState(bad, t)
    return np.array([y[i] for i in range(NG)], dtype=complex), steps, h
