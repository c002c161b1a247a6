# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 propagators for the Dicke-sector and Bloch-vector equations.

Mirrors :mod:`sta_anneal._pykernels` exactly; see there for the conventions.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

# Far tails of Dicke states sit below 1e-300; subnormal arithmetic there
# costs far more than the rest of the step, so flush it to zero.
cdef extern from *:
    """
    #if defined(__SSE2__) || defined(_M_X64)
    #include <xmmintrin.h>
    static unsigned int sta_ftz_on(void) {
        unsigned int old = _mm_getcsr();
        _mm_setcsr(old | 0x8040);
        return old;
    }
    static void sta_ftz_off(unsigned int old) { _mm_setcsr(old); }
    #else
    static unsigned int sta_ftz_on(void) { return 0; }
    static void sta_ftz_off(unsigned int old) { (void)old; }
    #endif
    """
    unsigned int sta_ftz_on() noexcept nogil
    void sta_ftz_off(unsigned int old) noexcept nogil


cdef void _dicke_apply(const double* vr, const double* vi, double* outr, double* outi,
                       const double* m2, const double* m, const double* lo,
                       const double* hi, Py_ssize_t d, double a, double b,
                       double cx, double cy, double shift) noexcept nogil:
    # out = -i (H - shift) v,  H = a Sz^2 + b Sz + cx Sx + cy Sy.
    # vr/vi are padded by one zero on each side; lo/hi vanish at the edges.
    cdef Py_ssize_t k
    cdef double ux = 0.5 * cx, uy = 0.5 * cy
    cdef double dg, wr, wi, accr, acci
    for k in range(d):
        dg = a * m2[k] + b * m[k] - shift
        accr = dg * vr[k + 1]
        acci = dg * vi[k + 1]
        # (ux - i uy) * lo * v[k-1]
        wr = lo[k] * vr[k]
        wi = lo[k] * vi[k]
        accr += ux * wr + uy * wi
        acci += ux * wi - uy * wr
        # (ux + i uy) * hi * v[k+1]
        wr = hi[k] * vr[k + 2]
        wi = hi[k] * vi[k + 2]
        accr += ux * wr - uy * wi
        acci += ux * wi + uy * wr
        outr[k + 1] = acci
        outi[k + 1] = -accr


cdef void _dicke_moments(const double* vr, const double* vi, const double* m,
                         const double* hi, Py_ssize_t d, double* rec) noexcept nogil:
    # norm, <Sz>, <Sz^2>, Re <S+>, Im <S+>
    cdef Py_ssize_t k
    cdef double p, nrm = 0.0, sz = 0.0, sz2 = 0.0, spr = 0.0, spi = 0.0
    for k in range(1, d + 1):
        p = vr[k] * vr[k] + vi[k] * vi[k]
        nrm += p
        sz += m[k - 1] * p
        sz2 += m[k - 1] * m[k - 1] * p
        # hi * conj(v[k+1]) * v[k]
        spr += hi[k - 1] * (vr[k + 1] * vr[k] + vi[k + 1] * vi[k])
        spi += hi[k - 1] * (vr[k + 1] * vi[k] - vi[k + 1] * vr[k])
    rec[0] = nrm
    rec[1] = sz
    rec[2] = sz2
    rec[3] = spr
    rec[4] = spi


cdef double _dicke_energy(const double* vr, const double* vi, const double* m,
                          const double* hi, Py_ssize_t d, double a, double b,
                          double cx, double cy) noexcept nogil:
    cdef double rec[5]
    _dicke_moments(vr, vi, m, hi, d, rec)
    return (a * rec[2] + b * rec[1] + cx * rec[3] + cy * rec[4]) / rec[0]


def dicke_rk4(double complex[::1] psi, const double[::1] a, const double[::1] b,
              const double[::1] cx, const double[::1] cy, double dt,
              Py_ssize_t steps, Py_ssize_t stride, bint shift=False):
    cdef Py_ssize_t d = psi.shape[0]
    cdef Py_ssize_t n, k, j, i0, i1, i2, nrec = steps // stride + 1
    cdef double spin = 0.5 * (d - 1)
    cdef double c = 0.0
    m_np = np.arange(d, dtype=np.float64) - spin
    hi_np = np.zeros(d, dtype=np.float64)
    hi_np[:d - 1] = np.sqrt(spin * (spin + 1.0) - m_np[:d - 1] * (m_np[:d - 1] + 1.0))
    lo_np = np.zeros(d, dtype=np.float64)
    lo_np[1:] = hi_np[:d - 1]
    m2_np = m_np * m_np
    # rows: psi, k1, k2, k3, k4, tmp; each padded to d + 2
    work_np = np.zeros((12, d + 2), dtype=np.float64)
    work_np[0, 1:d + 1] = np.asarray(psi).real
    work_np[1, 1:d + 1] = np.asarray(psi).imag
    cdef double[:, ::1] work = work_np
    cdef double[::1] mv = m_np, m2v = m2_np, lov = lo_np, hiv = hi_np
    cdef double* m_ = &mv[0]
    cdef double* m2_ = &m2v[0]
    cdef double* lo_ = &lov[0]
    cdef double* hi_ = &hiv[0]
    cdef double* pr = &work[0, 0]
    cdef double* pi = &work[1, 0]
    cdef double* k1r = &work[2, 0]
    cdef double* k1i = &work[3, 0]
    cdef double* k2r = &work[4, 0]
    cdef double* k2i = &work[5, 0]
    cdef double* k3r = &work[6, 0]
    cdef double* k3i = &work[7, 0]
    cdef double* k4r = &work[8, 0]
    cdef double* k4i = &work[9, 0]
    cdef double* tr = &work[10, 0]
    cdef double* ti = &work[11, 0]
    out_np = np.empty((nrec, 5), dtype=np.float64)
    cdef double[:, ::1] out = out_np
    cdef double h2 = 0.5 * dt, h6 = dt / 6.0
    cdef unsigned int csr

    with nogil:
        csr = sta_ftz_on()
        _dicke_moments(pr, pi, m_, hi_, d, &out[0, 0])
        j = 1
        for n in range(steps):
            i0 = 2 * n
            i1 = i0 + 1
            i2 = i0 + 2
            if shift:
                c = _dicke_energy(pr, pi, m_, hi_, d, a[i0], b[i0], cx[i0], cy[i0])
            _dicke_apply(pr, pi, k1r, k1i, m2_, m_, lo_, hi_, d,
                         a[i0], b[i0], cx[i0], cy[i0], c)
            for k in range(1, d + 1):
                tr[k] = pr[k] + h2 * k1r[k]
                ti[k] = pi[k] + h2 * k1i[k]
            _dicke_apply(tr, ti, k2r, k2i, m2_, m_, lo_, hi_, d,
                         a[i1], b[i1], cx[i1], cy[i1], c)
            for k in range(1, d + 1):
                tr[k] = pr[k] + h2 * k2r[k]
                ti[k] = pi[k] + h2 * k2i[k]
            _dicke_apply(tr, ti, k3r, k3i, m2_, m_, lo_, hi_, d,
                         a[i1], b[i1], cx[i1], cy[i1], c)
            for k in range(1, d + 1):
                tr[k] = pr[k] + dt * k3r[k]
                ti[k] = pi[k] + dt * k3i[k]
            _dicke_apply(tr, ti, k4r, k4i, m2_, m_, lo_, hi_, d,
                         a[i2], b[i2], cx[i2], cy[i2], c)
            for k in range(1, d + 1):
                pr[k] = pr[k] + h6 * (k1r[k] + 2.0 * k2r[k] + 2.0 * k3r[k] + k4r[k])
                pi[k] = pi[k] + h6 * (k1i[k] + 2.0 * k2i[k] + 2.0 * k3i[k] + k4i[k])
            if (n + 1) % stride == 0:
                _dicke_moments(pr, pi, m_, hi_, d, &out[j, 0])
                j += 1
        sta_ftz_off(csr)
    np.asarray(psi)[:] = work_np[0, 1:d + 1] + 1j * work_np[1, 1:d + 1]
    return out_np


cdef inline void _bloch_rhs(double x, double y, double z, double bx, double by,
                            double bz, double jz, double* r) noexcept nogil:
    # d n / dt = (b + jz n_z e_z) x n
    cdef double fz = bz + jz * z
    r[0] = by * z - fz * y
    r[1] = fz * x - bx * z
    r[2] = bx * y - by * x


def bloch_rk4(const double[::1] n0, const double[::1] bx, const double[::1] by,
              const double[::1] bz, const double[::1] jz, double dt,
              Py_ssize_t steps, bint renorm=True):
    traj_arr = np.empty((steps + 1, 3), dtype=np.float64)
    cdef double[:, ::1] traj = traj_arr
    cdef double x = n0[0], y = n0[1], z = n0[2], nn
    cdef double r1[3]
    cdef double r2[3]
    cdef double r3[3]
    cdef double r4[3]
    cdef Py_ssize_t n, i0, i1, i2
    cdef double h2 = 0.5 * dt, h6 = dt / 6.0
    traj[0, 0] = x
    traj[0, 1] = y
    traj[0, 2] = z
    with nogil:
        for n in range(steps):
            i0 = 2 * n
            i1 = i0 + 1
            i2 = i0 + 2
            _bloch_rhs(x, y, z, bx[i0], by[i0], bz[i0], jz[i0], r1)
            _bloch_rhs(x + h2 * r1[0], y + h2 * r1[1], z + h2 * r1[2],
                       bx[i1], by[i1], bz[i1], jz[i1], r2)
            _bloch_rhs(x + h2 * r2[0], y + h2 * r2[1], z + h2 * r2[2],
                       bx[i1], by[i1], bz[i1], jz[i1], r3)
            _bloch_rhs(x + dt * r3[0], y + dt * r3[1], z + dt * r3[2],
                       bx[i2], by[i2], bz[i2], jz[i2], r4)
            x = x + h6 * (r1[0] + 2.0 * r2[0] + 2.0 * r3[0] + r4[0])
            y = y + h6 * (r1[1] + 2.0 * r2[1] + 2.0 * r3[1] + r4[1])
            z = z + h6 * (r1[2] + 2.0 * r2[2] + 2.0 * r3[2] + r4[2])
            if renorm:
                nn = sqrt(x * x + y * y + z * z)
                x = x / nn
                y = y / nn
                z = z / nn
            traj[n + 1, 0] = x
            traj[n + 1, 1] = y
            traj[n + 1, 2] = z
    return traj_arr
