# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled closed-loop simulation.

Mirrors ``_kernel_py.run`` operation for operation (same evaluation order,
libm transcendental functions, no fused multiply-add) so both backends
agree to rounding.
"""

import numpy as np

from libc.math cimport copysign, exp, fabs, isfinite, pow, sin

BACKEND = "cython"

cdef enum:
    NCOL = 11

cdef double[6] DP_C = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0]
cdef double[6][5] DP_A = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
]
cdef double[6] DP_B = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0]


cdef struct Cfg:
    double n_hat, k_hat, eta_hat, sigma, mu_res, delta_mu, d_c, mu_max
    double a_sin, omega, b_x1, b_x2, c_const
    int ref_kind
    double d_max, t_op, r0
    int ctrl_kind
    double g1, g2, g3, g4, lam, nominal_gain, p_const, p_limit


cdef inline double sgn(double x) noexcept nogil:
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


cdef inline double spow(double x, double g) noexcept nogil:
    if x == 0.0:
        return 0.0
    return copysign(pow(fabs(x), g), x)


cdef inline double friction(const Cfg* c, double x1) noexcept nogil:
    cdef double mu = c.mu_res - c.delta_mu * exp(-x1 / c.d_c)
    if mu > c.mu_max:
        return c.mu_max
    return mu


cdef inline double accel(const Cfg* c, double t, double x1, double x2, double p) noexcept nogil:
    cdef double mu = friction(c, x1)
    cdef double phi = c.a_sin * sin(c.omega * t) + c.b_x1 * x1 + c.b_x2 * x2 + c.c_const
    return -(mu - c.mu_max) * c.n_hat * c.sigma + mu * c.n_hat * p - c.k_hat * x1 - c.eta_hat * x2 + phi


cdef inline void reference(const Cfg* c, double t, double* r, double* dr) noexcept nogil:
    cdef double d, top, s, s2, s3
    if c.ref_kind == 1:
        if t > c.t_op:
            r[0] = c.d_max
            dr[0] = 0.0
            return
        d = c.d_max
        top = c.t_op
        s = t / top
        s2 = s * s
        s3 = s2 * s
        r[0] = d * s3 * (10.0 - 15.0 * s + 6.0 * s2)
        dr[0] = d * 30.0 * s2 * (1.0 - 2.0 * s + s2) / top
    elif c.ref_kind == 2:
        r[0] = c.r0
        dr[0] = 0.0
    else:
        r[0] = 0.0
        dr[0] = 0.0


cdef inline double clip(const Cfg* c, double p) noexcept nogil:
    if c.p_limit > 0.0:
        if p < -c.p_limit:
            p = -c.p_limit
        if p > c.p_limit:
            p = c.p_limit
    return p


cdef inline double control_output(const Cfg* c, double e1, double e2, double m1, double m2,
                                  double xi1, double xi2) noexcept nogil:
    cdef double nu, inner
    if c.ctrl_kind == 2:
        nu = (-pow(c.lam, 2.0 / 3.0) * c.g1 * spow(e1, 1.0 / 3.0)
              - pow(c.lam, 0.5) * c.g2 * spow(e2, 0.5) + xi1)
        return clip(c, nu / c.nominal_gain)
    if c.ctrl_kind == 3:
        inner = spow(e2, 1.5) + pow(c.lam, 0.5) * pow(c.g1, 1.5) * e1
        nu = -pow(c.lam, 0.5) * c.g2 * spow(inner, 1.0 / 3.0) + xi1
        return clip(c, nu / c.nominal_gain)
    if c.ctrl_kind == 4:
        return clip(c, -(c.g1 * m1 + c.g2 * m2 + c.g3 * xi1 + c.g4 * xi2))
    if c.ctrl_kind == 1:
        return clip(c, c.p_const)
    return 0.0


cdef inline void control_rate(const Cfg* c, double e1, double e2, double xi1,
                              double* d1, double* d2) noexcept nogil:
    if c.ctrl_kind == 2:
        d1[0] = -c.lam * c.g3 * sgn(e1) - c.lam * c.g4 * sgn(e2)
        d2[0] = 0.0
    elif c.ctrl_kind == 3:
        d1[0] = -c.lam * c.g3 * sgn(e1 + pow(c.lam, -0.5) * c.g4 * spow(e2, 1.5))
        d2[0] = 0.0
    elif c.ctrl_kind == 4:
        d1[0] = e1
        d2[0] = xi1
    else:
        d1[0] = 0.0
        d2[0] = 0.0


cdef inline void rhs(const Cfg* c, int closed, double t, const double* y, double p,
                     double* k) noexcept nogil:
    cdef double r, dr, e1, e2
    if closed:
        reference(c, t, &r, &dr)
        e1 = y[0] - r
        e2 = y[1] - dr
        p = control_output(c, e1, e2, y[0], y[1], y[2], y[3])
        control_rate(c, e1, e2, y[2], &k[2], &k[3])
    k[0] = y[1]
    k[1] = accel(c, t, y[0], y[1], p)


cdef int dp5_step(const Cfg* c, int closed, int n, double t, double h, double* y,
                  double p) noexcept nogil:
    """In-place step of the first ``n`` entries of ``y``; returns 0 on a non-finite value."""
    cdef double k[6][4]
    cdef double ys[4]
    cdef double acc
    cdef int s, j, i
    for s in range(6):
        for i in range(n):
            if s == 0:
                ys[i] = y[i]
            else:
                acc = 0.0
                for j in range(s):
                    acc += DP_A[s][j] * k[j][i]
                ys[i] = y[i] + h * acc
        rhs(c, closed, t + DP_C[s] * h, ys, p, k[s])
        for i in range(n):
            if not isfinite(k[s][i]):
                return 0
    for i in range(n):
        acc = 0.0
        for s in range(6):
            acc += DP_B[s] * k[s][i]
        ys[i] = y[i] + h * acc
    for i in range(n):
        if not isfinite(ys[i]):
            return 0
    for i in range(n):
        y[i] = ys[i]
    return 1


cdef inline void diff_step(double* w, double lam, double x1_meas, double dt) noexcept nogil:
    # w = (w1, w2, xhat1, xhat2, xhat3)
    cdef double g0 = 5.0 * pow(lam, 0.2) * spow(w[0], 0.8)
    cdef double g1 = 10.03 * pow(lam, 0.4) * spow(w[0], 0.6)
    cdef double g2 = 9.3 * pow(lam, 0.6) * spow(w[0], 0.4)
    cdef double g3 = 4.57 * pow(lam, 0.8) * spow(w[0], 0.2)
    cdef double g4 = 1.1 * pow(lam, 1.0) * spow(w[0], 0.0)
    cdef double dw1 = -g0 + w[1]
    cdef double dw2 = -g1 + w[2] - x1_meas
    cdef double dx1 = -g2 + w[3]
    cdef double dx2 = -g3 + w[4]
    cdef double dx3 = -g4
    w[0] = w[0] + dt * dw1
    w[1] = w[1] + dt * dw2
    w[2] = w[2] + dt * dx1
    w[3] = w[3] + dt * dx2
    w[4] = w[4] + dt * dx3


cdef Py_ssize_t _loop(const Cfg* c, int zoh, int estimate, double lambda_d, double* y,
                      double Ts, Py_ssize_t n_steps, double blowup, double[:, ::1] out,
                      int* status) noexcept nogil:
    cdef double w[5]
    cdef double t, r, dr, m1, m2, me1, me2, p, d1, d2, x1, x2, xi1, xi2
    cdef double yp[2]
    cdef Py_ssize_t i = 0
    w[0] = 0.0
    w[1] = 0.0
    w[2] = y[0]
    w[3] = 0.0
    w[4] = 0.0
    status[0] = 0
    while True:
        t = <double>i * Ts
        x1 = y[0]
        x2 = y[1]
        xi1 = y[2]
        xi2 = y[3]
        reference(c, t, &r, &dr)
        if estimate:
            m1 = w[2]
            m2 = w[3]
        else:
            m1 = x1
            m2 = x2
        me1 = m1 - r
        me2 = m2 - dr
        p = control_output(c, me1, me2, m1, m2, xi1, xi2)
        out[i, 0] = t
        out[i, 1] = x1
        out[i, 2] = x2
        out[i, 3] = r
        out[i, 4] = dr
        out[i, 5] = x1 - r
        out[i, 6] = x2 - dr
        out[i, 7] = p
        out[i, 8] = friction(c, x1)
        out[i, 9] = m1
        out[i, 10] = m2
        if i == n_steps:
            break
        if zoh:
            control_rate(c, me1, me2, xi1, &d1, &d2)
            yp[0] = x1
            yp[1] = x2
            if not dp5_step(c, 0, 2, t, Ts, yp, p):
                status[0] = 1
                break
            y[0] = yp[0]
            y[1] = yp[1]
            y[2] = xi1 + Ts * d1
            y[3] = xi2 + Ts * d2
            if estimate:
                diff_step(w, lambda_d, x1, Ts)
        else:
            if not dp5_step(c, 1, 4, t, Ts, y, 0.0):
                status[0] = 1
                break
        if not (fabs(y[0]) <= blowup and fabs(y[1]) <= blowup
                and isfinite(y[2]) and isfinite(y[3])):
            status[0] = 1
            break
        i += 1
    return i + 1


def run(plant, pert, ref_kind, ref, ctrl_kind, ctrl, zoh, estimate, x0, double Ts,
        Py_ssize_t n_steps, double blowup):
    """Simulate ``n_steps`` samples; returns ``(rows, n_rows, status)``."""
    if estimate and not zoh:
        raise ValueError("state estimation requires the zero-order-hold loop")
    cdef Cfg c
    c.n_hat, c.k_hat, c.eta_hat, c.sigma, c.mu_res, c.delta_mu, c.d_c = [float(v) for v in plant]
    c.mu_max = c.mu_res - c.delta_mu
    c.a_sin, c.omega, c.b_x1, c.b_x2, c.c_const = [float(v) for v in pert]
    c.ref_kind = int(ref_kind)
    c.d_max, c.t_op, c.r0 = [float(v) for v in ref]
    c.ctrl_kind = int(ctrl_kind)
    (c.g1, c.g2, c.g3, c.g4, c.lam, c.nominal_gain, c.p_const, c.p_limit,
     lambda_d) = [float(v) for v in ctrl]
    cdef double lam_d = lambda_d
    cdef double y[4]
    y[0] = float(x0[0])
    y[1] = float(x0[1])
    y[2] = 0.0
    y[3] = 0.0
    out_arr = np.zeros((n_steps + 1, NCOL))
    cdef double[:, ::1] out = out_arr
    cdef int status = 0
    cdef int z = 1 if zoh else 0
    cdef int est = 1 if estimate else 0
    cdef Py_ssize_t n_rows
    with nogil:
        n_rows = _loop(&c, z, est, lam_d, y, Ts, n_steps, blowup, out, &status)
    return out_arr, n_rows, status


def differentiate(const double[::1] signal, double dt, double lambda_d):
    """Differentiator estimates after each sample, shape ``(n, 3)``."""
    cdef Py_ssize_t n = signal.shape[0], i
    out_arr = np.empty((n, 3))
    cdef double[:, ::1] out = out_arr
    cdef double w[5]
    w[0] = 0.0
    w[1] = 0.0
    w[2] = signal[0]
    w[3] = 0.0
    w[4] = 0.0
    with nogil:
        for i in range(n):
            diff_step(w, lambda_d, signal[i], dt)
            out[i, 0] = w[2]
            out[i, 1] = w[3]
            out[i, 2] = w[4]
    return out_arr
