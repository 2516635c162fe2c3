"""Compiled closed-loop flight; mirrors ``simulator.run(engine="python")``.

Kept deliberately flat: plain arrays in, telemetry rows out. The numpy
implementations in ``vehicle``/``linearization``/``simulator`` are the
reference; tests pin this kernel to them.
"""

import numpy as np
from numba import njit

# telemetry row: t, phi, theta, psi, z, p, q, r, vz, w1..w4, det, Ma4, x, y, vx, vy
N_COLUMNS = 19


@njit(cache=True)
def _plant(x, U, F, Tsc, inv_m, g):
    dx = np.empty(22)
    w = np.empty(4)
    for i in range(4):
        w[i] = x[18 + i] * abs(x[18 + i])
    fb = F @ w
    p, q, r = x[15], x[16], x[17]
    for i in range(3):
        dx[i] = x[3 + i]
        dx[3 + i] = (x[6 + 3 * i] * fb[0] + x[7 + 3 * i] * fb[1] + x[8 + 3 * i] * fb[2]) * inv_m
    dx[5] -= g
    # R @ hat(omega)
    for i in range(3):
        a, b, c = x[6 + 3 * i], x[7 + 3 * i], x[8 + 3 * i]
        dx[6 + 3 * i] = b * r - c * q
        dx[7 + 3 * i] = -a * r + c * p
        dx[8 + 3 * i] = a * q - b * p
    tb = Tsc @ w
    for i in range(3):
        dx[15 + i] = tb[i]
    for i in range(4):
        dx[18 + i] = U[i]
    return dx


@njit(cache=True)
def _orthonormalize(R):
    E = R.T @ R
    dev = 0.0
    for i in range(3):
        for j in range(3):
            d = abs(E[i, j] - (1.0 if i == j else 0.0))
            if d > dev:
                dev = d
    if dev < 1e-6:
        return R @ (1.5 * np.eye(3) - 0.5 * E)
    u, _, vt = np.linalg.svd(R)
    Q = u @ vt
    if np.linalg.det(Q) < 0:
        u[:, 2] = -u[:, 2]
        Q = u @ vt
    return Q


@njit(cache=True)
def closed_loop(x0, F, Tsc, inv_m, g, k1, k2, k3, ref, dt, n, singular_det, rotor_eps, blowup, gimbal, cap, out):
    """Fill ``out`` with telemetry; return the number of rows written.

    ``k1..k3`` hold per-output gains on the second-derivative, rate and
    output errors; ``ref`` is (4, 4): y, dy, ddy, dddy. ``cap <= 0`` disables
    the rotor-speed cap.
    """
    x = x0.copy()
    signs = np.sign(x0[18:22])
    core = np.empty((4, 4))
    core[:3, :] = Tsc
    w = np.empty(4)
    y = np.empty(4)
    dy = np.empty(4)
    for k in range(n + 1):
        R = x[6:15].reshape(3, 3)
        sth = min(1.0, max(-1.0, -R[2, 0]))
        y[0] = np.arctan2(R[2, 1], R[2, 2])
        y[1] = np.arcsin(sth)
        y[2] = np.arctan2(R[1, 0], R[0, 0])
        y[3] = x[2]
        for i in range(4):
            w[i] = x[18 + i] * abs(x[18 + i])
        for j in range(4):
            core[3, j] = (R[2, 0] * F[0, j] + R[2, 1] * F[1, j] + R[2, 2] * F[2, j]) * inv_m
        delta = core.copy()
        for j in range(4):
            for i in range(4):
                delta[i, j] *= 2.0 * abs(x[18 + j])
        det = np.linalg.det(delta)
        fb = F @ w
        p, q, r = x[15], x[16], x[17]
        wf0 = q * fb[2] - r * fb[1]
        wf1 = r * fb[0] - p * fb[2]
        wf2 = p * fb[1] - q * fb[0]
        ma4 = (R[2, 0] * wf0 + R[2, 1] * wf1 + R[2, 2] * wf2) * inv_m

        row = out[k]
        row[0] = k * dt
        row[1:5] = y
        row[5] = p
        row[6] = q
        row[7] = r
        row[8] = x[5]
        row[9:13] = x[18:22]
        row[13] = det
        row[14] = ma4
        row[15] = x[0]
        row[16] = x[1]
        row[17] = x[3]
        row[18] = x[4]
        if k == n:
            return k + 1

        stop = False
        big = 0.0
        for i in range(18):
            if i >= 6 and i < 15:
                continue
            v = x[i]
            if not np.isfinite(v):
                stop = True
            elif abs(v) > big:
                big = abs(v)
        if big > blowup or not abs(y[1]) < gimbal:
            stop = True
        for i in range(4):
            if not abs(x[18 + i]) >= rotor_eps or np.sign(x[18 + i]) != signs[i]:
                stop = True
        if not abs(det) > singular_det:
            stop = True
        if stop:
            return k + 1

        ddy = core @ w
        ddy[3] -= g
        dy[0] = p
        dy[1] = q
        dy[2] = r
        dy[3] = x[5]
        rhs = np.empty(4)
        for i in range(4):
            jerk = ref[3, i] + k1[i] * (ref[2, i] - ddy[i]) + k2[i] * (ref[1, i] - dy[i]) + k3[i] * (ref[0, i] - y[i])
            rhs[i] = jerk
        rhs[3] -= ma4
        U = np.linalg.solve(delta, rhs)

        s1 = _plant(x, U, F, Tsc, inv_m, g)
        s2 = _plant(x + 0.5 * dt * s1, U, F, Tsc, inv_m, g)
        s3 = _plant(x + 0.5 * dt * s2, U, F, Tsc, inv_m, g)
        s4 = _plant(x + dt * s3, U, F, Tsc, inv_m, g)
        x = x + (dt / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4)
        x[6:15] = _orthonormalize(x[6:15].reshape(3, 3).copy()).ravel()
        if cap > 0:
            for i in range(4):
                x[18 + i] = min(cap, max(-cap, x[18 + i]))
    return n + 1
