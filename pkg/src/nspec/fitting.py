"""Fits of Autler-Townes splitting and central-peak height against coupling power.

With the second coupling field's Rabi frequency written as
``omega2 = k * sqrt(P2)`` the leading-order models are

    splitting(P2) = sqrt(omega1**2 + k**2 * P2)
    height(P2)    = h_uc + B * k**2 P2 / (omega1**2 + k**2 P2)

The splitting model is fitted by Levenberg-Marquardt on squared internal
parameters (so both stay non-negative); the height model is linear in
``(h_uc, B)`` once ``omega1`` and ``k`` are fixed.
"""
from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptySeries, ParseError, RankDeficient, SingularJacobian

Z95 = 1.959963984540054
LM_LAMBDA0 = 1e-3
LM_MAX_ITER = 200
STEP_TOL = 1e-10
GRAD_TOL = 1e-10


@dataclass(frozen=True)
class PowerSeries:
    """Observations against coupling power P2 (mW), optionally with 1-sigma errors."""

    p2: np.ndarray
    y: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self):
        p2 = np.asarray(self.p2, dtype=float).reshape(-1)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if p2.size == 0:
            raise EmptySeries("power series has no points")
        if p2.shape != y.shape:
            raise ValueError("p2 and y differ in length")
        if not (np.all(np.isfinite(p2)) and np.all(np.isfinite(y))):
            raise ValueError("non-finite values in series")
        if np.any(p2 < 0):
            raise ValueError("powers must be >= 0")
        object.__setattr__(self, "p2", p2)
        object.__setattr__(self, "y", y)
        if self.sigma is not None:
            sigma = np.asarray(self.sigma, dtype=float).reshape(-1)
            if sigma.shape != y.shape or not np.all(np.isfinite(sigma)) or np.any(sigma <= 0):
                raise ValueError("sigma must be positive and match y")
            object.__setattr__(self, "sigma", sigma)

    def __len__(self):
        return self.p2.size

    @property
    def weights(self) -> np.ndarray:
        return np.ones_like(self.y) if self.sigma is None else 1.0 / self.sigma


@dataclass(frozen=True)
class SplittingModel:
    omega1: float
    k: float

    names = ("omega1", "k")

    def __call__(self, p2):
        return np.sqrt(self.omega1**2 + self.k**2 * np.asarray(p2, dtype=float))

    def gradient(self, p2) -> np.ndarray:
        """d model / d (omega1, k), shape (n, 2)."""
        p2 = np.asarray(p2, dtype=float)
        f = np.maximum(self(p2), np.finfo(float).tiny)
        return np.stack([self.omega1 / f, self.k * p2 / f], axis=-1)

    @property
    def parameters(self) -> np.ndarray:
        return np.array([self.omega1, self.k])


@dataclass(frozen=True)
class HeightModel:
    h_uc: float
    B: float
    omega1: float
    k: float

    names = ("h_uc", "B")

    def fraction_regressor(self, p2) -> np.ndarray:
        """k^2 P2 / (omega1^2 + k^2 P2), zero where both vanish."""
        p2 = np.asarray(p2, dtype=float)
        num = self.k**2 * p2
        den = self.omega1**2 + num
        return np.divide(num, den, out=np.zeros_like(num), where=den > 0)

    def __call__(self, p2):
        return self.h_uc + self.B * self.fraction_regressor(p2)

    def gradient(self, p2) -> np.ndarray:
        f = self.fraction_regressor(p2)
        return np.stack([np.ones_like(f), f], axis=-1)

    @property
    def parameters(self) -> np.ndarray:
        return np.array([self.h_uc, self.B])

    def three_photon_fraction(self, p2):
        """Share of the central peak not due to uncoupled absorption, (h_c - h_uc) / h_c."""
        return self.B * self.fraction_regressor(p2) / self(p2)


@dataclass
class FitResult:
    model: SplittingModel | HeightModel
    covariance: np.ndarray
    residual_norm: float
    dof: int
    converged: bool = True
    iterations: int = 0
    history: list[float] = field(default_factory=list)
    detuning_bias: float | None = None

    @property
    def parameters(self) -> dict[str, float]:
        return dict(zip(self.model.names, map(float, self.model.parameters)))

    @property
    def stderr(self) -> dict[str, float]:
        return dict(zip(self.model.names, map(float, np.sqrt(np.clip(np.diag(self.covariance), 0, None)))))

    def predict(self, p2) -> np.ndarray:
        return self.model(p2)

    def to_dict(self) -> dict:
        out = {
            "model": type(self.model).__name__,
            "parameters": self.parameters,
            "stderr": self.stderr,
            "covariance": self.covariance.tolist(),
            "residual_norm": self.residual_norm,
            "dof": self.dof,
            "converged": self.converged,
            "iterations": self.iterations,
        }
        if self.detuning_bias is not None:
            out["detuning_bias_mhz"] = self.detuning_bias
        return out


def _covariance(jac_w: np.ndarray, chi2: float, dof: int, absolute: bool) -> np.ndarray:
    jtj = jac_w.T @ jac_w
    try:
        cov = np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(jtj)
    if not absolute:
        cov = cov * (chi2 / dof if dof > 0 else 0.0)
    return 0.5 * (cov + cov.T)


def _initial_splitting(data: PowerSeries) -> tuple[float, float]:
    # y^2 is linear in P2: intercept omega1^2, slope k^2
    w = data.weights**2
    X = np.stack([np.ones_like(data.p2), data.p2], axis=-1)
    coef = np.linalg.lstsq(X * np.sqrt(w)[:, None], data.y**2 * np.sqrt(w), rcond=None)[0]
    scale = float(np.max(np.abs(data.y))) or 1.0
    o1 = math.sqrt(coef[0]) if coef[0] > 0 else 1e-3 * scale
    k = math.sqrt(coef[1]) if coef[1] > 0 else 1e-3 * scale
    return o1, k


def fit_splitting(data: PowerSeries, delta: float = 0.0, max_iter: int = LM_MAX_ITER) -> FitResult:
    """Levenberg-Marquardt fit of ``sqrt(omega1^2 + k^2 P2)``.

    Internally ``omega1 = u^2`` and ``k = v^2``. Damping starts at 1e-3 and
    moves by factors of 10. Iteration stops when the relative step or the
    gradient norm drops below 1e-10; if the cap is hit first the best point
    so far is returned with ``converged=False`` and a warning.

    ``delta`` is the common one-photon detuning; the result carries the
    worst-case bias ``delta^2 / (2 omega1)`` of the leading-order model.

    Raises
    ------
    SingularJacobian
        If the powers take fewer than two distinct values.
    """
    if len(data) < 3:
        raise ValueError("need at least 3 points for a 2-parameter fit")
    if np.unique(data.p2).size < 2:
        raise SingularJacobian("all powers equal: omega1 and k are not separable")
    w = data.weights
    o1, k = _initial_splitting(data)
    theta = np.sqrt([o1, k])

    def residual(t):
        model = SplittingModel(t[0] ** 2, t[1] ** 2)
        return (data.y - model(data.p2)) * w, model

    def jacobian(t, model):
        # d residual / d (u, v) = -w * d model / d (omega1, k) * (2u, 2v)
        return -(model.gradient(data.p2) * (2.0 * t)) * w[:, None]

    r, model = residual(theta)
    cost = float(r @ r)
    history = [cost]
    lam = LM_LAMBDA0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        J = jacobian(theta, model)
        g = J.T @ r
        if np.linalg.norm(g) < GRAD_TOL:
            converged = True
            break
        jtj = J.T @ J
        a = jtj + lam * np.diag(np.maximum(np.diag(jtj), 1e-300))
        try:
            step = -np.linalg.solve(a, g)
        except np.linalg.LinAlgError:
            step = -np.linalg.lstsq(a, g, rcond=None)[0]
        trial = theta + step
        r_new, model_new = residual(trial)
        cost_new = float(r_new @ r_new)
        if cost_new <= cost:
            small = np.linalg.norm(step) < STEP_TOL * (np.linalg.norm(theta) + STEP_TOL)
            theta, r, model, cost = trial, r_new, model_new, cost_new
            history.append(cost)
            lam = max(lam / 10.0, 1e-15)
            if small:
                converged = True
                break
        else:
            lam *= 10.0
            if np.linalg.norm(step) < STEP_TOL * (np.linalg.norm(theta) + STEP_TOL):
                converged = True
                break
    if not converged:
        warnings.warn(f"splitting fit hit the {max_iter}-iteration cap; returning best point", RuntimeWarning, stacklevel=2)

    dof = len(data) - 2
    jac_nat = model.gradient(data.p2) * w[:, None]
    cov = _covariance(jac_nat, cost, dof, data.sigma is not None)
    bias = delta**2 / (2.0 * model.omega1) if delta and model.omega1 > 0 else None
    return FitResult(model, cov, math.sqrt(cost), dof, converged, it, history, bias)


def fit_height(data: PowerSeries, omega1: float, k: float) -> FitResult:
    """Weighted linear least squares for ``h_uc`` and ``B`` at fixed ``omega1``, ``k``.

    Raises
    ------
    RankDeficient
        If the regressor is the same at every point (e.g. all powers equal).
    """
    if len(data) < 2:
        raise ValueError("need at least 2 points for a 2-parameter fit")
    probe = HeightModel(0.0, 1.0, omega1, k)
    f = probe.fraction_regressor(data.p2)
    if np.ptp(f) <= 1e-12 * max(1.0, float(np.abs(f).max())):
        raise RankDeficient("regressor is constant across the series")
    w = data.weights
    X = np.stack([np.ones_like(f), f], axis=-1) * w[:, None]
    rhs = data.y * w
    # normal equations, LU with partial pivoting
    coef = np.linalg.solve(X.T @ X, X.T @ rhs)
    model = HeightModel(float(coef[0]), float(coef[1]), omega1, k)
    r = rhs - X @ coef
    cost = float(r @ r)
    dof = len(data) - 2
    cov = _covariance(X, cost, dof, data.sigma is not None)
    return FitResult(model, cov, math.sqrt(cost), dof, True, 1, [cost])


def confidence_band(fit: FitResult, p2_grid, z: float = Z95) -> tuple[np.ndarray, np.ndarray]:
    """Delta-method band ``model +- z sqrt(g^T C g)`` (95% by default)."""
    p2 = np.asarray(p2_grid, dtype=float)
    g = fit.model.gradient(p2)
    var = np.einsum("...i,ij,...j->...", g, fit.covariance, g)
    half = z * np.sqrt(np.clip(var, 0.0, None))
    center = fit.model(p2)
    return center - half, center + half


def load_series(path, format: str = "csv") -> PowerSeries:
    """Read a ``p2_mw,value[,sigma]`` CSV file.

    Raises
    ------
    ParseError
        For a bad header, wrong column count, unparsable or non-finite
        numbers, negative power or non-positive sigma; carries the line number.
    EmptySeries
        If the file has a header but no data rows.
    """
    if format != "csv":
        raise ValueError(f"unsupported series format {format!r}")
    rows = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptySeries(f"{path}: file is empty")
        header = [h.strip() for h in header]
        if header not in (["p2_mw", "value"], ["p2_mw", "value", "sigma"]):
            raise ParseError(f"expected header 'p2_mw,value[,sigma]', got {','.join(header)!r}", 1)
        ncol = len(header)
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != ncol:
                raise ParseError(f"expected {ncol} columns, got {len(row)}", line)
            try:
                values = [float(c) for c in row]
            except ValueError:
                raise ParseError(f"unparsable number in {row!r}", line) from None
            if not all(math.isfinite(v) for v in values):
                raise ParseError("non-finite value", line)
            if values[0] < 0:
                raise ParseError(f"negative power {values[0]!r}", line)
            if ncol == 3 and values[2] <= 0:
                raise ParseError(f"sigma must be positive, got {values[2]!r}", line)
            rows.append(values)
    if not rows:
        raise EmptySeries(f"{path}: no data rows")
    arr = np.array(rows)
    return PowerSeries(arr[:, 0], arr[:, 1], arr[:, 2] if ncol == 3 else None)


@dataclass(frozen=True)
class MonteCarloSummary:
    omega1: np.ndarray
    k: np.ndarray
    h_uc: np.ndarray
    B: np.ndarray
    fraction_at_max: np.ndarray

    def within(self, name: str, center: float, tol: float) -> float:
        """Share of trials with |estimate - center| <= tol."""
        return float(np.mean(np.abs(getattr(self, name) - center) <= tol))


def simulate_series(omega1, k, h_uc, B, p2, noise, rng) -> tuple[PowerSeries, PowerSeries]:
    """Splitting and height series with independent multiplicative Gaussian noise."""
    p2 = np.asarray(p2, dtype=float)
    split = SplittingModel(omega1, k)(p2) * (1.0 + noise * rng.standard_normal(p2.size))
    height = HeightModel(h_uc, B, omega1, k)(p2) * (1.0 + noise * rng.standard_normal(p2.size))
    return PowerSeries(p2, split), PowerSeries(p2, height)


def monte_carlo(
    omega1: float = 62.0,
    k: float = 22.0,
    h_uc: float = 1.76,
    B: float = 3.0,
    p2=None,
    noise: float = 0.02,
    trials: int = 500,
    seed: int = 0,
    workers: int = 1,
) -> MonteCarloSummary:
    """Repeat simulate-then-fit ``trials`` times with independent child RNG streams."""
    p2 = np.linspace(0.0, 4.0, 8) if p2 is None else np.asarray(p2, dtype=float)
    seeds = np.random.SeedSequence(seed).spawn(trials)
    p_max = float(p2.max())

    def one(ss):
        rng = np.random.default_rng(ss)
        split, height = simulate_series(omega1, k, h_uc, B, p2, noise, rng)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            fs = fit_splitting(split)
        fh = fit_height(height, fs.model.omega1, fs.model.k)
        return fs.model.omega1, fs.model.k, fh.model.h_uc, fh.model.B, float(fh.model.three_photon_fraction(p_max))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, seeds))
    else:
        rows = [one(s) for s in seeds]
    cols = np.array(rows).T
    return MonteCarloSummary(*cols)
