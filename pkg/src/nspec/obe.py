"""Steady-state optical Bloch equations for the four-level N system.

Levels are ordered ``(a, b, c, d)``. ``C1`` couples a-d, ``C2`` couples a-c
and a weak probe couples b-d. In the rotating frame the diagonal energies are

    a: delta1     b: delta_p     c: delta1 - delta2     d: 0

so the (a, c, d) block is exactly the dressed-state Hamiltonian and a weak
probe absorbs when ``delta_p`` equals a dressed energy. Density matrices are
vectorised row-major, ``vec(rho)[4 i + j] = rho[i, j]``.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dressed import DriveConfig
from .errors import DegenerateKernel, EmptyGrid, InternalConsistencyError, InvalidBranching

A, B, C, D = range(4)
LEVELS = "abcd"
KERNEL_TOL = 1e-9
BRANCH_TOL = 1e-12


@dataclass(frozen=True)
class DecayConfig:
    """Spontaneous decay and ground-state relaxation rates (MHz, angular units).

    ``repump`` is an incoherent a -> b transfer rate. It is zero by default
    and only needed when ``a`` is otherwise disconnected (both couplings off),
    where it gives the bare two-level probe line a unique steady state.
    """

    gamma_d: float = 6.0
    gamma_c: float = 5.7
    d_to_a: float = 0.5
    d_to_b: float = 0.5
    c_to_a: float = 1.0
    c_to_b: float = 0.0
    ground_dephasing: float = 0.0
    repump: float = 0.0

    def __post_init__(self):
        for name in ("gamma_d", "gamma_c", "d_to_a", "d_to_b", "c_to_a", "c_to_b", "ground_dephasing", "repump"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
            object.__setattr__(self, name, value)
        for label, row in (("d", (self.d_to_a, self.d_to_b)), ("c", (self.c_to_a, self.c_to_b))):
            if abs(sum(row) - 1.0) > BRANCH_TOL:
                raise InvalidBranching(f"branching of {label} sums to {sum(row)!r}, not 1")


@dataclass(frozen=True)
class ProbeConfig:
    omega_p: float = 0.3
    delta_p: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.omega_p) and self.omega_p > 0):
            raise ValueError(f"omega_p must be positive, got {self.omega_p!r}")
        if not math.isfinite(self.delta_p):
            raise ValueError("delta_p must be finite")


@dataclass(frozen=True)
class SteadyState:
    rho: np.ndarray
    residual: float

    @property
    def populations(self) -> dict[str, float]:
        return {lab: float(self.rho[i, i].real) for i, lab in enumerate(LEVELS)}

    @property
    def probe_coherence(self) -> complex:
        """rho[d, b]."""
        return complex(self.rho[D, B])


def _lindblad(jump: np.ndarray) -> np.ndarray:
    eye = np.eye(4)
    jj = jump.conj().T @ jump
    return np.kron(jump, jump.conj()) - 0.5 * (np.kron(jj, eye) + np.kron(eye, jj.T))


def _jump(lower: int, upper: int, rate: float) -> np.ndarray:
    m = np.zeros((4, 4))
    m[lower, upper] = math.sqrt(rate)
    return m


def hamiltonian(drive: DriveConfig, probe: ProbeConfig | None) -> np.ndarray:
    """Rotating-frame Hamiltonian in the (a, b, c, d) basis; ``probe=None`` switches the probe off."""
    h = np.zeros((4, 4))
    h[A, A] = drive.delta1
    h[C, C] = drive.delta1 - drive.delta2
    h[A, D] = h[D, A] = drive.omega1 / 2.0
    h[A, C] = h[C, A] = drive.omega2 / 2.0
    if probe is not None:
        h[B, B] = probe.delta_p
        h[B, D] = h[D, B] = probe.omega_p / 2.0
    return h


def build_liouvillian(drive: DriveConfig, probe: ProbeConfig | None, decay: DecayConfig) -> np.ndarray:
    """16x16 generator with d(vec rho)/dt = L vec rho."""
    h = hamiltonian(drive, probe)
    eye = np.eye(4)
    lv = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for lower, upper, rate in (
        (A, D, decay.gamma_d * decay.d_to_a),
        (B, D, decay.gamma_d * decay.d_to_b),
        (A, C, decay.gamma_c * decay.c_to_a),
        (B, C, decay.gamma_c * decay.c_to_b),
        (B, A, decay.repump),
    ):
        if rate > 0:
            lv = lv + _lindblad(_jump(lower, upper, rate))
    if decay.ground_dephasing > 0:
        lv[4 * A + B, 4 * A + B] -= decay.ground_dephasing
        lv[4 * B + A, 4 * B + A] -= decay.ground_dephasing
    return lv


def kernel_dimension(lv: np.ndarray, tol: float = KERNEL_TOL) -> int:
    s = np.linalg.svd(lv, compute_uv=False)
    return int(np.sum(s < tol * s[0])) if s[0] > 0 else lv.shape[0]


def steady_state(lv: np.ndarray, check_kernel: bool = True) -> SteadyState:
    """Unit-trace null vector of ``lv``.

    The first row is replaced by the trace functional and the system solved
    with LU (partial pivoting).

    Raises
    ------
    DegenerateKernel
        If the kernel of ``lv`` is more than one-dimensional.
    """
    if check_kernel:
        dim = kernel_dimension(lv)
        if dim != 1:
            raise DegenerateKernel(f"Liouvillian kernel has dimension {dim}", dim)
    system = lv.copy()
    system[0, :] = np.eye(4).reshape(-1)
    rhs = np.zeros(16, dtype=complex)
    rhs[0] = 1.0
    rho = np.linalg.solve(system, rhs).reshape(4, 4)
    rho = 0.5 * (rho + rho.conj().T)
    residual = float(np.linalg.norm(lv @ rho.reshape(-1)))
    if abs(np.trace(rho) - 1.0) > 1e-10 or np.linalg.eigvalsh(rho).min() < -1e-8:
        raise InternalConsistencyError("steady state is not a valid density matrix")
    return SteadyState(rho, residual)


def _warn_strong_probe(omega_p: float, drive: DriveConfig, decay: DecayConfig):
    scale = max(drive.omega1, drive.omega2, decay.gamma_d)
    if omega_p > 0.1 * scale:
        warnings.warn(
            f"probe Rabi frequency {omega_p} MHz is not small against {scale} MHz; the weak-probe picture may fail",
            stacklevel=3,
        )


def absorption_at(drive: DriveConfig, decay: DecayConfig, probe: ProbeConfig) -> float:
    """Normalised absorption ``-Im(rho_db) * gamma_d / omega_p``.

    A closed two-level b-d line driven weakly on resonance gives 1.
    """
    ss = steady_state(build_liouvillian(drive, probe, decay))
    return -ss.probe_coherence.imag * decay.gamma_d / probe.omega_p


def probe_absorption_spectrum(
    drive: DriveConfig,
    decay: DecayConfig,
    probe_grid,
    omega_p: float | None = None,
    workers: int = 1,
) -> np.ndarray:
    """Normalised steady-state absorption over a probe-detuning grid (MHz).

    ``omega_p`` defaults to ``gamma_d / 20``. Grid points are independent
    solves and run on ``workers`` threads.
    """
    grid = np.asarray(probe_grid, dtype=float)
    if grid.size == 0:
        raise EmptyGrid("probe grid is empty")
    if omega_p is None:
        omega_p = decay.gamma_d / 20.0 if decay.gamma_d > 0 else 0.05
    _warn_strong_probe(omega_p, drive, decay)

    def point(x):
        return absorption_at(drive, decay, ProbeConfig(omega_p, float(x)))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(point, grid)))
    return np.array([point(x) for x in grid])
