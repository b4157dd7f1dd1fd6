import warnings

import numpy as np
import pytest
import scipy.optimize
from hypothesis import given, settings
from hypothesis import strategies as st

from nspec.dressed import DriveConfig, absorption_weights, dressed_energies
from nspec.errors import DegenerateKernel, EmptyGrid, InvalidBranching
from nspec.obe import (
    A,
    B,
    C,
    D,
    DecayConfig,
    ProbeConfig,
    absorption_at,
    build_liouvillian,
    hamiltonian,
    kernel_dimension,
    probe_absorption_spectrum,
    steady_state,
)
from nspec.spectrum import find_peaks

# closed b-d line: everything from d returns to b, repump keeps a empty
TWO_LEVEL = DecayConfig(d_to_a=0.0, d_to_b=1.0, repump=1.0)


def random_hermitian(rng):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    return m + m.conj().T


def evolve(lv, rho):
    return (lv @ rho.reshape(-1)).reshape(4, 4)


class TestConfigs:
    def test_branching_rows(self):
        with pytest.raises(InvalidBranching):
            DecayConfig(d_to_a=0.5, d_to_b=0.6)
        with pytest.raises(InvalidBranching):
            DecayConfig(c_to_a=0.9)

    def test_negative_rates(self):
        with pytest.raises(ValueError):
            DecayConfig(gamma_d=-1.0)

    def test_probe(self):
        with pytest.raises(ValueError):
            ProbeConfig(omega_p=0.0)

    def test_frame_convention(self):
        h = hamiltonian(DriveConfig(62, 44, 7, 3), ProbeConfig(0.3, 11.0))
        assert np.diag(h).tolist() == [7.0, 11.0, 4.0, 0.0]
        assert h[A, D] == 31.0 and h[A, C] == 22.0 and h[B, D] == 0.15
        assert np.array_equal(h, h.T)


class TestLiouvillian:
    @given(st.floats(0, 80), st.floats(0, 80), st.floats(-30, 30), st.floats(-30, 30), st.floats(-60, 60), st.floats(0, 0.5))
    @settings(max_examples=50)
    def test_trace_preserving(self, o1, o2, d1, d2, dp, frac):
        lv = build_liouvillian(DriveConfig(o1, o2, d1, d2), ProbeConfig(0.3, dp), DecayConfig(d_to_a=frac, d_to_b=1 - frac, ground_dephasing=0.2))
        trace_row = np.eye(4).reshape(-1)
        assert np.abs(trace_row @ lv).max() <= 1e-12 * max(1.0, np.abs(lv).max())

    def test_hermiticity_preserving(self):
        rng = np.random.default_rng(3)
        lv = build_liouvillian(DriveConfig(62, 44, 7, -2), ProbeConfig(0.3, 5.0), DecayConfig(ground_dephasing=0.5, repump=0.1))
        for _ in range(100):
            drho = evolve(lv, random_hermitian(rng))
            assert np.abs(drho - drho.conj().T).max() < 1e-12

    def test_pure_decay_kernel_is_ground(self):
        lv = build_liouvillian(DriveConfig(0, 0), None, DecayConfig())
        w, v = np.linalg.eig(lv)
        null = v[:, np.abs(w) < 1e-9]
        assert null.shape[1] >= 1
        excited = [4 * i + j for i in range(4) for j in range(4) if i in (C, D) or j in (C, D)]
        assert np.abs(null[excited]).max() < 1e-12

    def test_decay_rates(self):
        lv = build_liouvillian(DriveConfig(0, 0), None, DecayConfig(gamma_d=6.0, gamma_c=5.7))
        rho = np.zeros((4, 4))
        rho[D, D] = 1.0
        drho = evolve(lv, rho)
        assert drho[D, D].real == pytest.approx(-6.0)
        assert drho[A, A].real == pytest.approx(3.0) and drho[B, B].real == pytest.approx(3.0)
        rho = np.zeros((4, 4))
        rho[C, C] = 1.0
        assert evolve(lv, rho)[A, A].real == pytest.approx(5.7)

    def test_ground_dephasing(self):
        lv = build_liouvillian(DriveConfig(0, 0), None, DecayConfig(ground_dephasing=0.7))
        rho = np.zeros((4, 4), dtype=complex)
        rho[A, B] = rho[B, A] = 0.5
        assert evolve(lv, rho)[A, B] == pytest.approx(-0.35)


class TestSteadyState:
    def test_fields_off_degenerate(self):
        lv = build_liouvillian(DriveConfig(0, 0), None, DecayConfig())
        with pytest.raises(DegenerateKernel) as info:
            steady_state(lv)
        assert info.value.dimension > 1

    def test_couplings_off_pumps_to_a(self):
        ss = steady_state(build_liouvillian(DriveConfig(0, 0), ProbeConfig(0.3, 0.0), DecayConfig()))
        expected = np.zeros((4, 4))
        expected[A, A] = 1.0
        assert np.abs(ss.rho - expected).max() < 1e-10

    def test_strong_couplings_pump_to_b(self):
        ss = steady_state(build_liouvillian(DriveConfig(62, 44), ProbeConfig(0.3, 20.0), DecayConfig()))
        assert ss.populations["b"] > 0.99

    @given(st.floats(1, 80), st.floats(0, 80), st.floats(-20, 20), st.floats(-20, 20), st.floats(-60, 60))
    @settings(max_examples=60, deadline=None)
    def test_valid_density_matrix(self, o1, o2, d1, d2, dp):
        lv = build_liouvillian(DriveConfig(o1, o2, d1, d2), ProbeConfig(0.3, dp), DecayConfig())
        ss = steady_state(lv)
        rho = ss.rho
        assert np.abs(rho - rho.conj().T).max() < 1e-10
        assert abs(np.trace(rho) - 1) < 1e-10
        assert np.linalg.eigvalsh(rho).min() >= -1e-8
        assert ss.residual <= 1e-10 * np.linalg.norm(lv, 2)

    def test_kernel_dimension(self):
        assert kernel_dimension(build_liouvillian(DriveConfig(62, 44), ProbeConfig(0.3, 0.0), DecayConfig())) == 1


class TestSpectrum:
    def test_bare_two_level(self):
        grid = np.linspace(-20, 20, 801)
        y = probe_absorption_spectrum(DriveConfig(0, 0), TWO_LEVEL, grid, omega_p=0.03)
        assert grid[np.argmax(y)] == 0.0
        assert y.max() == pytest.approx(1.0, abs=1e-4)
        half = grid[y >= y.max() / 2]
        assert half[-1] - half[0] == pytest.approx(6.0, abs=0.1)

    def test_default_probe_is_weak(self):
        y = probe_absorption_spectrum(DriveConfig(0, 0), TWO_LEVEL, [0.0])
        # gamma/20 probe: saturation 1/(1 + 2 (omega_p/gamma)^2)
        assert y[0] == pytest.approx(1 / (1 + 2 / 400), rel=1e-6)

    def test_autler_townes_doublet(self):
        grid = np.linspace(-100, 100, 2001)
        y = probe_absorption_spectrum(DriveConfig(120, 0), DecayConfig(), grid)
        centers = [p.center for p in find_peaks(grid, y)]
        assert centers == pytest.approx([60.0, -60.0], abs=0.5)

    def test_three_peaks_at_dressed_energies(self):
        grid = np.linspace(-60, 60, 1201)
        y = probe_absorption_spectrum(DriveConfig(62, 44), DecayConfig(), grid, omega_p=0.3)
        peaks = find_peaks(grid, y)
        assert [p.center for p in peaks] == pytest.approx(list(dressed_energies(DriveConfig(62, 44))), abs=3.0)

    def test_peak_areas_follow_weights(self):
        cfg = DriveConfig(62, 44)
        grid = np.linspace(-150, 150, 3001)
        y = probe_absorption_spectrum(cfg, DecayConfig(), grid, omega_p=0.3)
        areas = lorentzian_areas(grid, y, dressed_energies(cfg))
        weights = absorption_weights(cfg)
        assert areas / areas.sum() == pytest.approx(weights, rel=0.05)

    def test_probe_linearity(self):
        grid = np.linspace(-60, 60, 121)
        for cfg in (DriveConfig(62, 44, 7, 0), DriveConfig(62, 44)):
            spectra = [probe_absorption_spectrum(cfg, DecayConfig(), grid, omega_p=op) for op in (0.3, 0.15, 0.075)]
            changes = [np.abs(x - y).max() / x.max() for x, y in zip(spectra, spectra[1:])]
            assert changes[1] < 0.01
            # saturation correction is quadratic in the probe amplitude
            assert changes[0] / changes[1] == pytest.approx(4.0, rel=0.1)

    def test_linewidth_limit(self):
        cfg = DriveConfig(62, 44, 7, -3)
        energies = dressed_energies(cfg)
        errors = []
        for scale in (1.0, 0.5, 0.25, 0.125):
            decay = DecayConfig(gamma_d=6 * scale, gamma_c=5.7 * scale)
            centers = [refine_peak(cfg, decay, e, 0.3 * scale) for e in energies]
            errors.append(np.abs(np.array(centers) - energies).max())
        assert np.all(np.diff(errors) < 0)
        assert errors[-1] < 0.05

    def test_eit_dip(self):
        for o1 in (60.0, 120.0):
            y = probe_absorption_spectrum(DriveConfig(o1, 0), DecayConfig(), [0.0])
            assert y[0] < 0.1

    def test_threads_match_serial(self):
        grid = np.linspace(-50, 50, 41)
        serial = probe_absorption_spectrum(DriveConfig(62, 44), DecayConfig(), grid)
        threaded = probe_absorption_spectrum(DriveConfig(62, 44), DecayConfig(), grid, workers=4)
        assert np.array_equal(serial, threaded)

    def test_strong_probe_warns(self):
        with pytest.warns(UserWarning):
            probe_absorption_spectrum(DriveConfig(10, 0), DecayConfig(), [0.0], omega_p=5.0)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            probe_absorption_spectrum(DriveConfig(10, 0), DecayConfig(), [0.0], omega_p=0.3)

    def test_empty_grid(self):
        with pytest.raises(EmptyGrid):
            probe_absorption_spectrum(DriveConfig(1, 1), DecayConfig(), [])

    def test_single_point(self):
        assert absorption_at(DriveConfig(0, 0), TWO_LEVEL, ProbeConfig(0.03, 3.0)) == pytest.approx(0.5, rel=1e-3)


def refine_peak(cfg, decay, guess, omega_p):
    res = scipy.optimize.minimize_scalar(
        lambda x: -absorption_at(cfg, decay, ProbeConfig(omega_p, x)),
        bracket=(guess - 0.5, guess, guess + 0.5),
        tol=1e-10,
    )
    return res.x


def lorentzian_areas(grid, y, centers):
    def model(x, *p):
        out = np.zeros_like(x)
        for c, h, w in zip(p[0::3], p[1::3], p[2::3]):
            out += h / (1 + (2 * (x - c) / w) ** 2)
        return out

    p0 = [v for c in centers for v in (c, 0.5, 4.0)]
    popt = scipy.optimize.least_squares(lambda p: model(grid, *p) - y, p0).x
    return np.array([np.pi / 2 * h * abs(w) for h, w in zip(popt[1::3], popt[2::3])])
