"""Pure numpy RK4 propagators (fallback when the compiled core is missing).

Both propagators take their time-dependent coefficients sampled on the
half-step grid ``t_k = k * dt / 2`` for ``k = 0 .. 2 * steps``, so stage
``i`` of step ``n`` reads index ``2n`` (start), ``2n + 1`` (midpoint) or
``2n + 2`` (end).

Dicke sector, basis ``|S, M>`` with ``M = -S .. S`` in ascending order::

    H(t) = a Sz^2 + b Sz + cx Sx + cy Sy

Moments are recorded every ``stride`` steps as rows
``(norm, <Sz>, <Sz^2>, <Sx>, <Sy>)``.

Bloch vector::

    dn/dt = (b(t) + jz(t) n_z e_z) x n
"""

import numpy as np


def _ladder(d):
    spin = 0.5 * (d - 1)
    m = np.arange(d, dtype=np.float64) - spin
    off = np.sqrt(spin * (spin + 1.0) - m[:-1] * (m[:-1] + 1.0))
    return m, off


def _moments(v, m, off):
    p = v.real**2 + v.imag**2
    splus = np.sum(off * np.conj(v[1:]) * v[:-1])
    return (p.sum(), np.dot(m, p), np.dot(m * m, p), splus.real, splus.imag)


def dicke_rk4(psi, a, b, cx, cy, dt, steps, stride, shift=False):
    d = psi.shape[0]
    m, off = _ladder(d)
    m2 = m * m

    def apply(v, i, c):
        out = (a[i] * m2 + b[i] * m - c) * v
        out[1:] += 0.5 * (cx[i] - 1j * cy[i]) * off * v[:-1]
        out[:-1] += 0.5 * (cx[i] + 1j * cy[i]) * off * v[1:]
        return -1j * out

    nrec = steps // stride + 1
    out = np.empty((nrec, 5))
    out[0] = _moments(psi, m, off)
    j = 1
    c = 0.0
    for n in range(steps):
        i0 = 2 * n
        if shift:
            mom = _moments(psi, m, off)
            c = (a[i0] * mom[2] + b[i0] * mom[1] + cx[i0] * mom[3] + cy[i0] * mom[4]) / mom[0]
        k1 = apply(psi, i0, c)
        k2 = apply(psi + 0.5 * dt * k1, i0 + 1, c)
        k3 = apply(psi + 0.5 * dt * k2, i0 + 1, c)
        k4 = apply(psi + dt * k3, i0 + 2, c)
        psi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (n + 1) % stride == 0:
            out[j] = _moments(psi, m, off)
            j += 1
    return out


def bloch_rk4(n0, bx, by, bz, jz, dt, steps, renorm=True):
    def rhs(v, i):
        x, y, z = v
        fz = bz[i] + jz[i] * z
        return np.array([by[i] * z - fz * y, fz * x - bx[i] * z, bx[i] * y - by[i] * x])

    traj = np.empty((steps + 1, 3))
    v = np.array(n0, dtype=np.float64)
    traj[0] = v
    for n in range(steps):
        i0 = 2 * n
        r1 = rhs(v, i0)
        r2 = rhs(v + 0.5 * dt * r1, i0 + 1)
        r3 = rhs(v + 0.5 * dt * r2, i0 + 1)
        r4 = rhs(v + dt * r3, i0 + 2)
        v = v + dt / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4)
        if renorm:
            v /= np.sqrt(v @ v)
        traj[n + 1] = v
    return traj
