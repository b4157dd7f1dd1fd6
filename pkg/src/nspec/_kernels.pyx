# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same API and semantics as :mod:`nspec._kernels_py`."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, cos, acos, hypot, M_PI

from .errors import InternalConsistencyError, NoConvergence

cnp.import_array()

JACOBI_TOL = 1e-12
MAX_SWEEPS = 50
cdef double COS_CLAMP_SLACK = 1e-9
cdef double DEGENERATE_P = 1e-9


cdef int _jacobi3(double[3][3] a, double[3][3] v, double tol, int max_sweeps) nogil:
    """Diagonalise ``a`` in place, accumulating rotations in ``v``. Returns 0 on success."""
    cdef int i, j, k, p, q, r, sweep
    cdef double norm = 0.0, thresh, off, apq, theta, t, c, s, arp, arq, vkp, vkq
    cdef int pairs[3][2]
    pairs[0][0] = 0; pairs[0][1] = 1
    pairs[1][0] = 0; pairs[1][1] = 2
    pairs[2][0] = 1; pairs[2][1] = 2
    for i in range(3):
        for j in range(3):
            v[i][j] = 1.0 if i == j else 0.0
            norm += a[i][j] * a[i][j]
    thresh = tol * sqrt(norm)
    for sweep in range(max_sweeps + 1):
        off = fabs(a[0][1])
        if fabs(a[0][2]) > off:
            off = fabs(a[0][2])
        if fabs(a[1][2]) > off:
            off = fabs(a[1][2])
        if off <= thresh:
            return 0
        for k in range(3):
            p = pairs[k][0]
            q = pairs[k][1]
            apq = a[p][q]
            if apq == 0.0:
                continue
            theta = (a[q][q] - a[p][p]) / (2.0 * apq)
            t = 1.0 / (fabs(theta) + hypot(theta, 1.0))
            if theta < 0.0:
                t = -t
            c = 1.0 / sqrt(t * t + 1.0)
            s = t * c
            r = 3 - p - q
            arp = a[r][p]
            arq = a[r][q]
            a[r][p] = c * arp - s * arq
            a[p][r] = a[r][p]
            a[r][q] = s * arp + c * arq
            a[q][r] = a[r][q]
            a[p][p] -= t * apq
            a[q][q] += t * apq
            a[p][q] = 0.0
            a[q][p] = 0.0
            for i in range(3):
                vkp = v[i][p]
                vkq = v[i][q]
                v[i][p] = c * vkp - s * vkq
                v[i][q] = s * vkp + c * vkq
    return 1


cdef void _store_sorted(double[3][3] a, double[3][3] v, double[::1] w_out, double[:, ::1] v_out) nogil:
    cdef int order[3]
    cdef int i, j, tmp
    order[0] = 0; order[1] = 1; order[2] = 2
    for i in range(1, 3):
        j = i
        while j > 0 and a[order[j]][order[j]] > a[order[j - 1]][order[j - 1]]:
            tmp = order[j]; order[j] = order[j - 1]; order[j - 1] = tmp
            j -= 1
    for i in range(3):
        w_out[i] = a[order[i]][order[i]]
        for j in range(3):
            v_out[j, i] = v[j][order[i]]


def jacobi_eigh3(a, double tol=1e-12, int max_sweeps=50):
    cdef double[:, :] src = np.asarray(a, dtype=np.float64)
    cdef double m[3][3]
    cdef double vv[3][3]
    cdef int i, j
    for i in range(3):
        for j in range(3):
            m[i][j] = src[i, j]
    if _jacobi3(m, vv, tol, max_sweeps):
        raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    w = np.empty(3)
    v = np.empty((3, 3))
    _store_sorted(m, vv, w, v)
    return w, v


def jacobi_eigh3_batch(a, double tol=1e-12, int max_sweeps=50):
    cdef double[:, :, :] src = np.asarray(a, dtype=np.float64)
    cdef Py_ssize_t n = src.shape[0], idx
    cdef double m[3][3]
    cdef double vv[3][3]
    cdef int i, j, failed = -1
    w = np.empty((n, 3))
    v = np.empty((n, 3, 3))
    cdef double[:, ::1] wv = w
    cdef double[:, :, ::1] vview = v
    with nogil:
        for idx in range(n):
            for i in range(3):
                for j in range(3):
                    m[i][j] = src[idx, i, j]
            if _jacobi3(m, vv, tol, max_sweeps):
                failed = idx
                break
            _store_sorted(m, vv, wv[idx], vview[idx])
    if failed >= 0:
        raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps (row {failed})")
    return w, v


cdef int _trig(double omega1, double omega2, double delta1, double delta2,
               double* e, int* degenerate) nogil:
    """Returns 0 on success, 1 when cos(Theta) leaves [-1, 1] beyond rounding."""
    cdef double o1sq = omega1 * omega1
    cdef double o2sq = omega2 * omega2
    cdef double alpha = -2.0 * delta1 + delta2
    cdef double beta = delta1 * (delta1 - delta2) - 0.25 * (o1sq + o2sq)
    cdef double gamma = 0.25 * o1sq * (delta1 - delta2)
    cdef double p2 = alpha * alpha - 3.0 * beta
    cdef double p = sqrt(p2) if p2 > 0.0 else 0.0
    cdef double hnorm = sqrt(delta1 * delta1 + (delta1 - delta2) * (delta1 - delta2) + 0.5 * (o1sq + o2sq))
    cdef double shift = -alpha / 3.0
    cdef double cos_theta, theta, r, third
    if p < DEGENERATE_P * (hnorm if hnorm > 1.0 else 1.0):
        e[0] = shift; e[1] = shift; e[2] = shift
        degenerate[0] = 1
        return 0
    degenerate[0] = 0
    cos_theta = -(27.0 * gamma + 2.0 * alpha * alpha * alpha - 9.0 * alpha * beta) / (2.0 * p * p * p)
    if fabs(cos_theta) > 1.0 + COS_CLAMP_SLACK:
        return 1
    if cos_theta > 1.0:
        cos_theta = 1.0
    elif cos_theta < -1.0:
        cos_theta = -1.0
    theta = acos(cos_theta)
    r = 2.0 * p / 3.0
    third = theta / 3.0
    e[0] = shift + r * cos(third)
    e[1] = shift - r * cos(third + M_PI / 3.0)
    e[2] = shift - r * cos(third - M_PI / 3.0)
    return 0


def trig_energies(double omega1, double omega2, double delta1, double delta2):
    """Return ``(e1, e2, e3, degenerate)`` with e1 >= e2 >= e3."""
    cdef double e[3]
    cdef int degenerate
    if _trig(omega1, omega2, delta1, delta2, e, &degenerate):
        raise InternalConsistencyError("cos(Theta) outside [-1, 1]")
    return e[0], e[1], e[2], bool(degenerate)


def trig_energies_batch(omega1, omega2, delta1, delta2):
    """Vectorised-over-rows :func:`trig_energies`; returns ``(energies[n, 3], degenerate[n])``."""
    arrays = np.broadcast_arrays(*(np.asarray(x, dtype=np.float64) for x in (omega1, omega2, delta1, delta2)))
    cdef double[::1] o1 = np.ascontiguousarray(arrays[0]).ravel()
    cdef double[::1] o2 = np.ascontiguousarray(arrays[1]).ravel()
    cdef double[::1] d1 = np.ascontiguousarray(arrays[2]).ravel()
    cdef double[::1] d2 = np.ascontiguousarray(arrays[3]).ravel()
    cdef Py_ssize_t n = o1.shape[0], i
    out = np.empty((n, 3))
    flags = np.zeros(n, dtype=np.uint8)
    cdef double[:, ::1] ov = out
    cdef unsigned char[::1] fv = flags
    cdef double e[3]
    cdef int degenerate, failed = -1
    with nogil:
        for i in range(n):
            if _trig(o1[i], o2[i], d1[i], d2[i], e, &degenerate):
                failed = i
                break
            ov[i, 0] = e[0]; ov[i, 1] = e[1]; ov[i, 2] = e[2]
            fv[i] = degenerate
    if failed >= 0:
        raise InternalConsistencyError(f"cos(Theta) outside [-1, 1] (row {failed})")
    return out, flags.astype(bool)
