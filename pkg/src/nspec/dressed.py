"""Dressed states of the doubly driven V system.

Basis order throughout is ``(a, c, d)``: the shared lower level ``a``, the
upper level ``c`` reached by the second coupling field and the upper level
``d`` reached by the first coupling field (and probed from ``b``). All
frequencies are in MHz with hbar = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateSpectrum, InternalConsistencyError

COS_CLAMP_SLACK = 1e-9
DEGENERATE_P = 1e-9
NULL_VECTOR = 1e-9
RESIDUAL_TOL = 1e-9
ORTHONORMAL_TOL = 1e-13


@dataclass(frozen=True)
class DriveConfig:
    """Rabi frequencies and detunings of the two coupling fields (MHz)."""

    omega1: float
    omega2: float
    delta1: float = 0.0
    delta2: float = 0.0

    def __post_init__(self):
        for name in ("omega1", "omega2", "delta1", "delta2"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.omega1 < 0 or self.omega2 < 0:
            raise ValueError("Rabi frequencies must be non-negative")

    @property
    def omega_eff(self) -> float:
        return math.hypot(self.omega1, self.omega2)

    def scaled(self, s: float) -> "DriveConfig":
        return DriveConfig(s * self.omega1, s * self.omega2, s * self.delta1, s * self.delta2)


@dataclass(frozen=True)
class CubicCoefficients:
    """Coefficients of det(E - H) = E^3 + alpha E^2 + beta E + gamma and its trigonometric parameters."""

    alpha: float
    beta: float
    gamma: float
    p: float
    theta: float


@dataclass(frozen=True)
class DressedSolution:
    """Dressed energies (descending), eigenvectors and probe weights.

    ``vectors[nu]`` is the dressed state nu in the ``(a, c, d)`` basis and
    ``weights[nu] = vectors[nu][2] ** 2``.
    """

    energies: np.ndarray
    vectors: np.ndarray
    weights: np.ndarray
    degenerate: bool = field(default=False)

    @property
    def splitting(self) -> float:
        """Autler-Townes separation of the outer peaks, E1 - E3."""
        return float(self.energies[0] - self.energies[2])


def build_hamiltonian(cfg: DriveConfig) -> np.ndarray:
    """Rotating-frame Hamiltonian of the V system, rows/columns ordered (a, c, d)."""
    h2 = cfg.omega2 / 2.0
    h1 = cfg.omega1 / 2.0
    return np.array(
        [
            [cfg.delta1, h2, h1],
            [h2, cfg.delta1 - cfg.delta2, 0.0],
            [h1, 0.0, 0.0],
        ]
    )


def _hnorm(cfg: DriveConfig) -> float:
    return float(np.linalg.norm(build_hamiltonian(cfg)))


def characteristic_coeffs(cfg: DriveConfig) -> CubicCoefficients:
    """Cubic coefficients and the trigonometric parameters ``p`` and ``theta``.

    Raises
    ------
    DegenerateSpectrum
        If ``p`` is below ``1e-9 * max(1, |H|)`` so that all three roots coincide.
    InternalConsistencyError
        If cos(theta) leaves [-1, 1] by more than 1e-9.
    """
    d1, d2 = cfg.delta1, cfg.delta2
    o1sq, o2sq = cfg.omega1**2, cfg.omega2**2
    alpha = -2.0 * d1 + d2
    beta = d1 * (d1 - d2) - 0.25 * (o1sq + o2sq)
    gamma = 0.25 * o1sq * (d1 - d2)
    p = math.sqrt(max(alpha * alpha - 3.0 * beta, 0.0))
    if p < DEGENERATE_P * max(1.0, _hnorm(cfg)):
        raise DegenerateSpectrum(f"triple root at {-alpha / 3.0!r} MHz (p = {p:.3e})")
    cos_theta = -(27.0 * gamma + 2.0 * alpha**3 - 9.0 * alpha * beta) / (2.0 * p**3)
    if abs(cos_theta) > 1.0 + COS_CLAMP_SLACK:
        raise InternalConsistencyError(f"cos(Theta) = {cos_theta!r} outside [-1, 1]")
    theta = math.acos(min(1.0, max(-1.0, cos_theta)))
    return CubicCoefficients(alpha, beta, gamma, p, theta)


def dressed_energies(cfg: DriveConfig) -> np.ndarray:
    """The three dressed energies E1 >= E2 >= E3 in MHz.

    In the degenerate case the triple root ``-alpha/3`` is returned three times.
    """
    try:
        cc = characteristic_coeffs(cfg)
    except DegenerateSpectrum:
        shift = (2.0 * cfg.delta1 - cfg.delta2) / 3.0
        return np.array([shift, shift, shift])
    shift = -cc.alpha / 3.0
    r = 2.0 * cc.p / 3.0
    third = cc.theta / 3.0
    return np.array(
        [
            shift + r * math.cos(third),
            shift - r * math.cos(third + math.pi / 3.0),
            shift - r * math.cos(third - math.pi / 3.0),
        ]
    )


def dressed_energies_batch(omega1, omega2, delta1, delta2) -> np.ndarray:
    """Closed-form energies for broadcastable parameter arrays; shape ``(..., 3)``."""
    o1, o2, d1, d2 = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (omega1, omega2, delta1, delta2)))
    if np.any(o1 < 0) or np.any(o2 < 0):
        raise ValueError("Rabi frequencies must be non-negative")
    energies, _ = kernels.trig_energies_batch(o1.ravel(), o2.ravel(), d1.ravel(), d2.ravel())
    return energies.reshape(o1.shape + (3,))


def canonical_sign(vec: np.ndarray) -> np.ndarray:
    """Flip ``vec`` so its largest-magnitude component is positive.

    Components within 1e-9 (relative) of the largest magnitude count as tied;
    the last of them decides, which favours the ``d`` amplitude.
    """
    vec = np.asarray(vec, dtype=float)
    mags = np.abs(vec)
    top = mags.max()
    if top == 0.0:
        return vec
    idx = int(np.nonzero(mags >= top * (1.0 - 1e-9))[0][-1])
    return -vec if vec[idx] < 0 else vec


def eigen_oracle(matrix) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic-Jacobi eigendecomposition of a symmetric 3x3 matrix.

    Returns eigenvalues in descending order and the matching unit
    eigenvectors as *columns* (numpy ``eigh`` layout), each normalised with
    :func:`canonical_sign`.

    Raises
    ------
    NoConvergence
        If the off-diagonal elements do not fall below ``1e-12 * |H|`` within
        the sweep cap.
    """
    m = np.asarray(matrix, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(m).max()))):
        raise ValueError("matrix is not symmetric")
    w, v = kernels.jacobi_eigh3(0.5 * (m + m.T))
    for k in range(3):
        v[:, k] = canonical_sign(v[:, k])
    return w, v


def dressed_vectors(cfg: DriveConfig, energies=None) -> np.ndarray:
    """Unit dressed-state vectors, one row per energy, in the (a, c, d) basis.

    Uses the closed-form component triple
    ``(E W2/2, E (E - D1) - W1^2/4, W1 W2/4)``. Rows where that triple is
    numerically null (e.g. ``omega2 == 0``) or fails the eigen-residual check
    are replaced by the Jacobi eigenvector of the same rank; if the resulting
    set is not orthonormal to 1e-13 all three rows come from the oracle.
    """
    if energies is None:
        energies = dressed_energies(cfg)
    energies = np.asarray(energies, dtype=float)
    h = build_hamiltonian(cfg)
    scale = max(1.0, float(np.linalg.norm(h)))
    o1, o2, d1 = cfg.omega1, cfg.omega2, cfg.delta1

    rows = np.empty((3, 3))
    fallback = []
    for nu, e in enumerate(energies):
        comp = np.array([e * o2 / 2.0, e * (e - d1) - o1 * o1 / 4.0, o1 * o2 / 4.0])
        norm = float(np.linalg.norm(comp))
        if norm < NULL_VECTOR * scale**2:
            fallback.append(nu)
            continue
        vec = comp / norm
        if np.linalg.norm(h @ vec - e * vec) > RESIDUAL_TOL * scale:
            fallback.append(nu)
            continue
        rows[nu] = canonical_sign(vec)

    if fallback:
        _, v = eigen_oracle(h)
        for nu in fallback:
            rows[nu] = v[:, nu]
    if np.abs(rows @ rows.T - np.eye(3)).max() > ORTHONORMAL_TOL:
        _, v = eigen_oracle(h)
        rows = v.T.copy()
    return rows


def absorption_weights(cfg: DriveConfig) -> np.ndarray:
    """Probe weights A_nu = |<d|D_nu>|^2 for the three dressed states."""
    return dressed_vectors(cfg)[:, 2] ** 2


def solve(cfg: DriveConfig) -> DressedSolution:
    """Energies, vectors and weights in one call."""
    try:
        characteristic_coeffs(cfg)
        degenerate = False
    except DegenerateSpectrum:
        degenerate = True
    energies = dressed_energies(cfg)
    vectors = dressed_vectors(cfg, energies)
    return DressedSolution(energies, vectors, vectors[:, 2] ** 2, degenerate)


def resonance_solution(omega1: float, omega2: float) -> DressedSolution:
    """Closed forms for mutually resonant coupling fields (both detunings zero).

    Vectors follow the resonance-case expressions and are then passed
    through :func:`canonical_sign`, so they compare directly with
    :func:`solve` output.
    """
    if omega1 < 0 or omega2 < 0:
        raise ValueError("Rabi frequencies must be non-negative")
    oe = math.hypot(omega1, omega2)
    if oe == 0.0:
        raise DegenerateSpectrum("both Rabi frequencies are zero")
    c2, c1 = omega2 / oe, omega1 / oe
    s = 1.0 / math.sqrt(2.0)
    vectors = np.array(
        [
            canonical_sign([s, s * c2, s * c1]),
            canonical_sign([0.0, -c1, c2]),
            canonical_sign([-s, s * c2, s * c1]),
        ]
    )
    energies = np.array([0.5 * oe, 0.0, -0.5 * oe])
    return DressedSolution(energies, vectors, vectors[:, 2] ** 2)
