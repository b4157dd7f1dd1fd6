"""Pure-Python hot kernels.

Reference implementation and import-time fallback for :mod:`nspec._kernels`.
Both modules expose the same four functions with the same semantics:

``jacobi_eigh3(a)``
    Cyclic Jacobi eigendecomposition of one symmetric 3x3 matrix.
``jacobi_eigh3_batch(a)``
    The same over a stack of shape (n, 3, 3).
``trig_energies(omega1, omega2, delta1, delta2)``
    Trigonometric roots of the V-system characteristic cubic.
``trig_energies_batch(omega1, omega2, delta1, delta2)``
    The same over 1-d arrays.

Eigenvalues are returned in descending order with eigenvectors as columns.
"""
import math

import numpy as np

from .errors import InternalConsistencyError, NoConvergence

JACOBI_TOL = 1e-12
MAX_SWEEPS = 50
COS_CLAMP_SLACK = 1e-9
DEGENERATE_P = 1e-9


def _jacobi3(a, tol, max_sweeps):
    # a: 3x3 nested lists, modified in place
    v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    norm = math.sqrt(sum(a[i][j] * a[i][j] for i in range(3) for j in range(3)))
    thresh = tol * norm
    for _ in range(max_sweeps + 1):
        off = max(abs(a[0][1]), abs(a[0][2]), abs(a[1][2]))
        if off <= thresh:
            return [a[0][0], a[1][1], a[2][2]], v
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[p][q]
            if apq == 0.0:
                continue
            theta = (a[q][q] - a[p][p]) / (2.0 * apq)
            t = 1.0 / (abs(theta) + math.hypot(theta, 1.0))
            if theta < 0.0:
                t = -t
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            r = 3 - p - q
            arp, arq = a[r][p], a[r][q]
            a[r][p] = a[p][r] = c * arp - s * arq
            a[r][q] = a[q][r] = s * arp + c * arq
            a[p][p] -= t * apq
            a[q][q] += t * apq
            a[p][q] = a[q][p] = 0.0
            for k in range(3):
                vkp, vkq = v[k][p], v[k][q]
                v[k][p] = c * vkp - s * vkq
                v[k][q] = s * vkp + c * vkq
    raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def _sorted_desc(w, v):
    order = sorted(range(3), key=lambda i: -w[i])
    ws = [w[i] for i in order]
    vs = [[v[k][i] for i in order] for k in range(3)]
    return ws, vs


def jacobi_eigh3(a, tol=JACOBI_TOL, max_sweeps=MAX_SWEEPS):
    m = [[float(a[i][j]) for j in range(3)] for i in range(3)]
    w, v = _sorted_desc(*_jacobi3(m, tol, max_sweeps))
    return np.array(w), np.array(v)


def jacobi_eigh3_batch(a, tol=JACOBI_TOL, max_sweeps=MAX_SWEEPS):
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    w = np.empty((n, 3))
    v = np.empty((n, 3, 3))
    for i, mat in enumerate(a.tolist()):
        wi, vi = _sorted_desc(*_jacobi3(mat, tol, max_sweeps))
        w[i] = wi
        v[i] = vi
    return w, v


def trig_energies(omega1, omega2, delta1, delta2):
    """Return ``(e1, e2, e3, degenerate)`` with e1 >= e2 >= e3."""
    o1sq = omega1 * omega1
    o2sq = omega2 * omega2
    alpha = -2.0 * delta1 + delta2
    beta = delta1 * (delta1 - delta2) - 0.25 * (o1sq + o2sq)
    gamma = 0.25 * o1sq * (delta1 - delta2)
    p = math.sqrt(max(alpha * alpha - 3.0 * beta, 0.0))
    hnorm = math.sqrt(delta1 * delta1 + (delta1 - delta2) ** 2 + 0.5 * (o1sq + o2sq))
    shift = -alpha / 3.0
    if p < DEGENERATE_P * max(1.0, hnorm):
        return shift, shift, shift, True
    cos_theta = -(27.0 * gamma + 2.0 * alpha ** 3 - 9.0 * alpha * beta) / (2.0 * p ** 3)
    if abs(cos_theta) > 1.0 + COS_CLAMP_SLACK:
        raise InternalConsistencyError(f"cos(Theta) = {cos_theta!r} outside [-1, 1]")
    theta = math.acos(min(1.0, max(-1.0, cos_theta)))
    r = 2.0 * p / 3.0
    third = theta / 3.0
    return (
        shift + r * math.cos(third),
        shift - r * math.cos(third + math.pi / 3.0),
        shift - r * math.cos(third - math.pi / 3.0),
        False,
    )


def trig_energies_batch(omega1, omega2, delta1, delta2):
    """Vectorised-over-rows :func:`trig_energies`; returns ``(energies[n, 3], degenerate[n])``."""
    o1, o2, d1, d2 = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (omega1, omega2, delta1, delta2)))
    n = o1.size
    out = np.empty((n, 3))
    flags = np.zeros(n, dtype=bool)
    for i, args in enumerate(zip(o1.ravel().tolist(), o2.ravel().tolist(), d1.ravel().tolist(), d2.ravel().tolist())):
        e1, e2, e3, flags[i] = trig_energies(*args)
        out[i] = (e1, e2, e3)
    return out, flags
