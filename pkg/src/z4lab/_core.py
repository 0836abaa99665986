"""Compiled kernels: vector fields, Jacobians, the Dormand-Prince stepper and
the Benettin loop.

Every field is addressed by an integer ``kind`` plus a flat float64 parameter
vector, so one compiled copy of the stepper serves all of them and caches to
disk.
"""

import numpy as np
from numba import njit

GENERAL = 0
NUMERIC = 1
SM = 2
LINEAR = 3

# parameter layout of the GENERAL kind
# gamma, beta, mu, a0, a1, a2, a3 (re, im pairs), b0 (re, im), b1, b2
N_GENERAL = 15

OK = 0
MAX_STEPS = 1
UNDERFLOW = 2
ESCAPED = 3

# Dormand-Prince 5(4)
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1 = 71 / 57600
E3 = -71 / 16695
E4 = 71 / 1920
E5 = -17253 / 339200
E6 = 22 / 525
E7 = -1 / 40


@njit(cache=True)
def field3(kind, p, x, y, z):
    if kind == GENERAL:
        u = complex(x, y)
        ub = complex(x, -y)
        c = complex(-p[0], p[1])
        a0 = complex(p[3], p[4])
        a1 = complex(p[5], p[6])
        a2 = complex(p[7], p[8])
        a3 = complex(p[9], p[10])
        b0 = complex(p[11], p[12])
        du = c * u + a0 * z * ub + a1 * u * u * ub + a2 * z * z * u + a3 * ub * ub * ub
        r2 = x * x + y * y
        dz = p[2] * z + 2.0 * (b0 * u * u).real + p[13] * z * z * z + p[14] * z * r2
        return du.real, du.imag, dz
    elif kind == NUMERIC:
        g, b, mu = p[0], p[1], p[2]
        fx = (-g * x - b * y - 0.5 * z * (x - y) + 0.5 * x * y * (x + y)
              + z * z * (0.375 * x - 0.125 * y))
        fy = (b * x - g * y + 0.5 * z * (x + y) + 0.5 * x * y * (x - y)
              + z * z * (0.125 * x + 0.375 * y))
        fz = mu * z + x * x - y * y - 0.25 * z * z * z - 0.5 * z * (x * x + y * y)
        return fx, fy, fz
    elif kind == SM:
        return y, x * (1.0 - z) - p[1] * y, -p[0] * z + x * x
    else:
        return (p[0] * x + p[1] * y + p[2] * z,
                p[3] * x + p[4] * y + p[5] * z,
                p[6] * x + p[7] * y + p[8] * z)


@njit(cache=True)
def jac3(kind, p, x, y, z, J):
    if kind == GENERAL:
        u = complex(x, y)
        ub = complex(x, -y)
        c = complex(-p[0], p[1])
        a0 = complex(p[3], p[4])
        a1 = complex(p[5], p[6])
        a2 = complex(p[7], p[8])
        a3 = complex(p[9], p[10])
        b0 = complex(p[11], p[12])
        b1, b2 = p[13], p[14]
        # Wirtinger derivatives of du/dt and dz/dt
        fu = c + 2.0 * a1 * u * ub + a2 * z * z
        fub = a0 * z + a1 * u * u + 3.0 * a3 * ub * ub
        fz = a0 * ub + 2.0 * a2 * z * u
        gu = 2.0 * b0 * u + b2 * z * ub
        gub = 2.0 * b0.conjugate() * ub + b2 * z * u
        gz = p[2] + 3.0 * b1 * z * z + b2 * (x * x + y * y)
        dx = fu + fub
        dy = 1j * (fu - fub)
        J[0, 0] = dx.real
        J[0, 1] = dy.real
        J[0, 2] = fz.real
        J[1, 0] = dx.imag
        J[1, 1] = dy.imag
        J[1, 2] = fz.imag
        J[2, 0] = (gu + gub).real
        J[2, 1] = (1j * (gu - gub)).real
        J[2, 2] = gz
    elif kind == NUMERIC:
        g, b, mu = p[0], p[1], p[2]
        J[0, 0] = -g - 0.5 * z + x * y + 0.5 * y * y + 0.375 * z * z
        J[0, 1] = -b + 0.5 * z + 0.5 * x * x + x * y - 0.125 * z * z
        J[0, 2] = -0.5 * (x - y) + 0.25 * z * (3.0 * x - y)
        J[1, 0] = b + 0.5 * z + x * y - 0.5 * y * y + 0.125 * z * z
        J[1, 1] = -g + 0.5 * z + 0.5 * x * x - x * y + 0.375 * z * z
        J[1, 2] = 0.5 * (x + y) + 0.25 * z * (x + 3.0 * y)
        J[2, 0] = 2.0 * x - z * x
        J[2, 1] = -2.0 * y - z * y
        J[2, 2] = mu - 0.75 * z * z - 0.5 * (x * x + y * y)
    elif kind == SM:
        J[0, 0] = 0.0
        J[0, 1] = 1.0
        J[0, 2] = 0.0
        J[1, 0] = 1.0 - z
        J[1, 1] = -p[1]
        J[1, 2] = -x
        J[2, 0] = 2.0 * x
        J[2, 1] = 0.0
        J[2, 2] = -p[0]
    else:
        for i in range(3):
            for j in range(3):
                J[i, j] = p[3 * i + j]


@njit(cache=True)
def deriv(kind, p, k, Y, out, J):
    fx, fy, fz = field3(kind, p, Y[0], Y[1], Y[2])
    out[0] = fx
    out[1] = fy
    out[2] = fz
    if k > 0:
        jac3(kind, p, Y[0], Y[1], Y[2], J)
        # frame stored row-major: W[i, j] = Y[3 + i*k + j]
        for i in range(3):
            for j in range(k):
                acc = 0.0
                for m in range(3):
                    acc += J[i, m] * Y[3 + m * k + j]
                out[3 + i * k + j] = acc


@njit(cache=True)
def dp_step(kind, p, k, y, f0, h, K, ynew, work, J):
    """One Dormand-Prince step. K[0] must hold f0 on entry; on exit K[6]
    holds f(ynew) and ``work`` holds the embedded error estimate."""
    n = y.shape[0]
    for i in range(n):
        K[0, i] = f0[i]
    for i in range(n):
        work[i] = y[i] + h * A21 * K[0, i]
    deriv(kind, p, k, work, K[1], J)
    for i in range(n):
        work[i] = y[i] + h * (A31 * K[0, i] + A32 * K[1, i])
    deriv(kind, p, k, work, K[2], J)
    for i in range(n):
        work[i] = y[i] + h * (A41 * K[0, i] + A42 * K[1, i] + A43 * K[2, i])
    deriv(kind, p, k, work, K[3], J)
    for i in range(n):
        work[i] = y[i] + h * (A51 * K[0, i] + A52 * K[1, i] + A53 * K[2, i]
                              + A54 * K[3, i])
    deriv(kind, p, k, work, K[4], J)
    for i in range(n):
        work[i] = y[i] + h * (A61 * K[0, i] + A62 * K[1, i] + A63 * K[2, i]
                              + A64 * K[3, i] + A65 * K[4, i])
    deriv(kind, p, k, work, K[5], J)
    for i in range(n):
        ynew[i] = y[i] + h * (B1 * K[0, i] + B3 * K[2, i] + B4 * K[3, i]
                              + B5 * K[4, i] + B6 * K[5, i])
    deriv(kind, p, k, ynew, K[6], J)
    for i in range(n):
        work[i] = h * (E1 * K[0, i] + E3 * K[2, i] + E4 * K[3, i] + E5 * K[4, i]
                       + E6 * K[5, i] + E7 * K[6, i])


@njit(cache=True)
def error_norm(y, ynew, err, rtol, atol):
    n = y.shape[0]
    acc = 0.0
    for i in range(n):
        sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        e = err[i] / sc
        acc += e * e
    return np.sqrt(acc / n)


@njit(cache=True)
def initial_step(kind, p, k, y, f0, direction, rtol, atol, max_step, J):
    # Hairer, Norsett & Wanner, section II.4
    n = y.shape[0]
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (f0[i] / sc) ** 2
    d0 = np.sqrt(d0 / n)
    d1 = np.sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, max_step)
    y1 = np.empty(n)
    f1 = np.empty(n)
    for i in range(n):
        y1[i] = y[i] + direction * h0 * f0[i]
    deriv(kind, p, k, y1, f1, J)
    d2 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y[i])
        d2 += ((f1[i] - f0[i]) / sc) ** 2
    d2 = np.sqrt(d2 / n) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, max_step)


@njit(cache=True)
def solve(kind, p, k, y0, t0, t1, rtol, atol, max_step, max_steps, h_init,
          record, escape):
    """Adaptive integration from t0 to t1 (either direction).

    Returns (status, t, y, f, h_next, nsteps, ts, ys, fs); the sample arrays
    hold every accepted step including the start when ``record`` is set.
    """
    n = y0.shape[0]
    direction = 1.0 if t1 >= t0 else -1.0
    J = np.empty((3, 3))
    K = np.empty((7, n))
    work = np.empty(n)
    y = y0.copy()
    ynew = np.empty(n)
    f = np.empty(n)
    deriv(kind, p, k, y, f, J)
    if h_init > 0.0:
        h = min(h_init, max_step)
    else:
        h = initial_step(kind, p, k, y, f, direction, rtol, atol, max_step, J)

    cap = 256 if record else 1
    ts = np.empty(cap)
    ys = np.empty((cap, n))
    fs = np.empty((cap, n))
    m = 0
    if record:
        ts[0] = t0
        ys[0] = y
        fs[0] = f
        m = 1

    t = t0
    status = OK
    nsteps = 0
    grow_cap = 10.0
    while (t1 - t) * direction > 0.0:
        if nsteps >= max_steps:
            status = MAX_STEPS
            break
        last = False
        if (t + direction * h - t1) * direction >= 0.0:
            h = abs(t1 - t)
            last = True
        dp_step(kind, p, k, y, f, direction * h, K, ynew, work, J)
        err = error_norm(y, ynew, work, rtol, atol)
        if not np.isfinite(err):
            err = 1e10
        if err <= 1.0:
            if last:
                t = t1
            else:
                t = t + direction * h
            y[:] = ynew
            f[:] = K[6]
            nsteps += 1
            if err == 0.0:
                fac = grow_cap
            else:
                fac = min(grow_cap, max(0.2, 0.9 * err ** -0.2))
            grow_cap = 10.0
            h = min(h * fac, max_step)
            if record:
                if m == cap:
                    cap *= 2
                    ts2 = np.empty(cap)
                    ys2 = np.empty((cap, n))
                    fs2 = np.empty((cap, n))
                    ts2[:m] = ts[:m]
                    ys2[:m] = ys[:m]
                    fs2[:m] = fs[:m]
                    ts, ys, fs = ts2, ys2, fs2
                ts[m] = t
                ys[m] = y
                fs[m] = f
                m += 1
            if escape > 0.0:
                if abs(y[0]) > escape or abs(y[1]) > escape or abs(y[2]) > escape:
                    status = ESCAPED
                    break
        else:
            h = h * max(0.2, 0.9 * err ** -0.2)
            grow_cap = 1.0
            if h < 1e-14 * max(1.0, abs(t)):
                status = UNDERFLOW
                break
    return status, t, y, f, h, nsteps, ts[:m], ys[:m], fs[:m]


@njit(cache=True)
def single_step(kind, p, k, y, h):
    """Exact Dormand-Prince step of size h from y (used for event refinement)."""
    n = y.shape[0]
    J = np.empty((3, 3))
    K = np.empty((7, n))
    work = np.empty(n)
    f = np.empty(n)
    ynew = np.empty(n)
    deriv(kind, p, k, y, f, J)
    dp_step(kind, p, k, y, f, h, K, ynew, work, J)
    return ynew


@njit(cache=True)
def _gram_schmidt(Y, k, logs):
    # modified Gram-Schmidt on the 3 x k frame stored in Y[3:]
    for j in range(k):
        for i in range(j):
            dot = 0.0
            for m in range(3):
                dot += Y[3 + m * k + j] * Y[3 + m * k + i]
            for m in range(3):
                Y[3 + m * k + j] -= dot * Y[3 + m * k + i]
        nrm = 0.0
        for m in range(3):
            nrm += Y[3 + m * k + j] ** 2
        nrm = np.sqrt(nrm)
        logs[j] = np.log(nrm)
        for m in range(3):
            Y[3 + m * k + j] /= nrm


@njit(cache=True)
def benettin(kind, p, k, s0, W0, t_transient, t_total, renorm_dt, rtol, atol,
             max_step, max_steps, escape):
    """QR-renormalised tangent propagation.

    Returns (status, sums, t_avg, sums_all, t_reached, y) where ``sums`` are
    log-growths accumulated after the transient over time ``t_avg`` and
    ``sums_all`` those accumulated from t=0.
    """
    n = 3 + 3 * k
    Y = np.empty(n)
    Y[:3] = s0
    for i in range(3):
        for j in range(k):
            Y[3 + i * k + j] = W0[i, j]
    logs = np.empty(k)
    sums = np.zeros(k)
    sums_all = np.zeros(k)
    _gram_schmidt(Y, k, logs)
    nint = int(np.ceil(t_total / renorm_dt - 1e-9))
    t = 0.0
    t_avg = 0.0
    h = 0.0
    status = OK
    for j in range(nint):
        t_next = min((j + 1) * renorm_dt, t_total)
        res = solve(kind, p, k, Y, t, t_next, rtol, atol, max_step, max_steps, h,
                    False, escape)
        status = res[0]
        Y = res[2]
        h = res[4]
        if status != OK:
            t = res[1]
            break
        _gram_schmidt(Y, k, logs)
        for i in range(k):
            sums_all[i] += logs[i]
        if t >= t_transient - 1e-12:
            for i in range(k):
                sums[i] += logs[i]
            t_avg += t_next - t
        t = t_next
    return status, sums, t_avg, sums_all, t, Y[:3].copy()
