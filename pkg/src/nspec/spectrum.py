"""Weak-probe absorption spectra built from dressed states.

The coupled part of a spectrum is three Lorentzians at the dressed energies
weighted by A_nu. On top of it sits the phenomenology seen in the rubidium
data: a stationary uncoupled-absorption line of free height, a global
frequency displacement (the trap-beam shift), and broadened linewidths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.signal

from .dressed import DriveConfig, dressed_energies_batch, solve
from .errors import EmptyGrid, NoAnticrossing

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class LineshapeConfig:
    fwhm: float = 6.0
    broadening_factor: float = 1.0

    def __post_init__(self):
        if not self.fwhm > 0:
            raise ValueError(f"fwhm must be positive, got {self.fwhm!r}")
        if not self.broadening_factor >= 1:
            raise ValueError(f"broadening_factor must be >= 1, got {self.broadening_factor!r}")

    @property
    def width(self) -> float:
        """Effective FWHM after broadening."""
        return self.fwhm * self.broadening_factor


@dataclass(frozen=True)
class SpectrumModel:
    drive: DriveConfig
    lineshape: LineshapeConfig = field(default_factory=LineshapeConfig)
    uncoupled_height: float = 0.0
    uncoupled_center: float = 0.0
    global_shift: float = 0.0
    coupled_scale: float = 1.0

    def __post_init__(self):
        if self.uncoupled_height < 0:
            raise ValueError("uncoupled_height must be >= 0")
        if not self.coupled_scale > 0:
            raise ValueError("coupled_scale must be > 0")

    def lines(self) -> list[tuple[float, float]]:
        """(center, peak height) of every Lorentzian component, shift included."""
        sol = solve(self.drive)
        out = [(float(e) + self.global_shift, self.coupled_scale * float(a)) for e, a in zip(sol.energies, sol.weights)]
        if self.uncoupled_height > 0:
            out.append((self.uncoupled_center + self.global_shift, self.uncoupled_height))
        return out


class Peak(NamedTuple):
    center: float
    height: float


class Anticrossing(NamedTuple):
    branches: tuple[int, int]
    location: float
    gap: float


def lorentzian(x, fwhm):
    """Unit-peak Lorentzian of full width ``fwhm`` centred at zero."""
    u = 2.0 * np.asarray(x, dtype=float) / fwhm
    return 1.0 / (1.0 + u * u)


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise EmptyGrid("probe grid is empty")
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be one-dimensional and strictly increasing")
    return grid


def synthesize(model: SpectrumModel, grid) -> np.ndarray:
    """Absorption on the probe-detuning grid (MHz)."""
    grid = _check_grid(grid)
    width = model.lineshape.width
    out = np.zeros_like(grid)
    for center, height in model.lines():
        out += height * lorentzian(grid - center, width)
    return out


def find_peaks(grid, values, prominence: float = 0.05) -> list[Peak]:
    """Local maxima with prominence above ``prominence * max(values)``.

    Centres and heights come from the parabola through each maximum and its
    two neighbours. Returned in descending order of centre.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if grid.shape != values.shape or grid.size < 3:
        raise ValueError("need matching grid and values with at least 3 samples")
    top = float(values.max())
    if top <= 0:
        return []
    idx, _ = scipy.signal.find_peaks(values, prominence=prominence * top)
    peaks = []
    for i in idx:
        x0, x1, x2 = grid[i - 1 : i + 2]
        y0, y1, y2 = values[i - 1 : i + 2]
        # Parabola through three (possibly unevenly spaced) samples.
        d01, d12, d02 = x0 - x1, x1 - x2, x0 - x2
        a = (y0 / (d01 * d02)) - (y1 / (d01 * d12)) + (y2 / (d02 * d12))
        b = (y1 - y0) / (x1 - x0) - a * (x0 + x1)
        if a < 0:
            xc = -b / (2.0 * a)
            xc = min(max(xc, x0), x2)
            yc = y1 + (y1 - y0) / (x1 - x0) * (xc - x1) + a * (xc - x1) * (xc - x0)
        else:
            xc, yc = x1, y1
        if yc > 0:
            peaks.append(Peak(float(xc), float(yc)))
    peaks.sort(key=lambda p: -p.center)
    return peaks


def trajectory_vs_delta2(omega1: float, omega2: float, delta1: float, delta2_grid) -> np.ndarray:
    """Dressed energies along a sweep of the second field's detuning, shape (n, 3).

    Columns keep the descending-energy labelling, so branches exchange
    character through anticrossings rather than crossing.
    """
    d2 = np.asarray(delta2_grid, dtype=float)
    if not np.all(np.isfinite(d2)):
        raise ValueError("delta2 grid must be finite")
    return dressed_energies_batch(omega1, omega2, delta1, d2)


def weights_vs_ratio(ratio_grid) -> tuple[np.ndarray, np.ndarray]:
    """Normalised energies E_nu / Omega1 and weights A_nu against Omega2 / Omega1 at resonance."""
    r = np.asarray(ratio_grid, dtype=float)
    if np.any(r < 0):
        raise ValueError("ratios must be non-negative")
    half = 0.5 * np.sqrt(1.0 + r * r)
    energies = np.stack([half, np.zeros_like(r), -half], axis=-1)
    outer = 0.5 / (1.0 + r * r)
    weights = np.stack([outer, r * r / (1.0 + r * r), outer], axis=-1)
    return energies, weights


def _golden_min(f, lo, hi, tol):
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + GOLDEN * (hi - lo)
            fd = f(d)
    x = 0.5 * (lo + hi)
    return x, f(x)


def anticrossing_gap(omega1: float, omega2: float, delta1: float, window=None, n_scan: int = 4001) -> list[Anticrossing]:
    """Locate the minimum gap between adjacent branches as the second detuning is swept.

    A coarse scan over ``window`` (default: ``delta1`` +- twice the bare
    splitting plus margin) brackets each interior minimum, which is then
    refined by golden-section search.

    Raises
    ------
    NoAnticrossing
        If neither adjacent-branch gap has an interior minimum on the window.
    """
    if window is None:
        half = 2.0 * math.hypot(omega1, omega2) + 2.0 * abs(delta1) + 1.0
        window = (delta1 - half, delta1 + half)
    lo, hi = map(float, window)
    grid = np.linspace(lo, hi, n_scan)
    energies = trajectory_vs_delta2(omega1, omega2, delta1, grid)
    tol = 1e-10 * max(1.0, hi - lo)
    found = []
    for i, j in ((0, 1), (1, 2)):
        gap = energies[:, i] - energies[:, j]
        k = int(np.argmin(gap))
        if k == 0 or k == n_scan - 1:
            continue

        def f(x, i=i, j=j):
            e = dressed_energies_batch(omega1, omega2, delta1, x)
            return float(e[i] - e[j])

        x, g = _golden_min(f, grid[k - 1], grid[k + 1], tol)
        found.append(Anticrossing((i + 1, j + 1), float(x), float(g)))
    if not found:
        raise NoAnticrossing(f"no interior gap minimum on [{lo}, {hi}] MHz")
    return found
