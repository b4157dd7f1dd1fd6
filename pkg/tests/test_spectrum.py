import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nspec.dressed import DriveConfig, absorption_weights, eigen_oracle, build_hamiltonian
from nspec.errors import EmptyGrid, NoAnticrossing
from nspec.spectrum import (
    LineshapeConfig,
    SpectrumModel,
    anticrossing_gap,
    find_peaks,
    lorentzian,
    synthesize,
    trajectory_vs_delta2,
    weights_vs_ratio,
)

GRID = np.arange(-100.0, 100.0 + 1e-9, 0.2)


def test_lineshape_validation():
    with pytest.raises(ValueError):
        LineshapeConfig(fwhm=0.0)
    with pytest.raises(ValueError):
        LineshapeConfig(broadening_factor=0.5)
    assert LineshapeConfig(6.0, 3.0).width == 18.0


def test_lorentzian_half_width():
    assert lorentzian(0.0, 6.0) == 1.0
    assert lorentzian(3.0, 6.0) == pytest.approx(0.5)


class TestSynthesize:
    def test_single_line_at_center(self):
        model = SpectrumModel(DriveConfig(0, 0, 0, 0), uncoupled_height=0.0, coupled_scale=2.5)
        # null drive: a single d-weighted line of weight 1 at E = 0
        assert synthesize(model, [-1.0, 0.0, 1.0])[1] == 2.5

    def test_three_peaks(self):
        model = SpectrumModel(DriveConfig(62, 44, 0, 0), LineshapeConfig(6.0))
        peaks = find_peaks(GRID, synthesize(model, GRID))
        assert len(peaks) == 3
        assert [p.center for p in peaks] == pytest.approx([38.0, 0.0, -38.0], abs=0.05)

    def test_uncoupled_peak_between_asymmetric_autler_townes(self):
        model = SpectrumModel(DriveConfig(62, 0, 7, 0), uncoupled_height=0.3)
        peaks = find_peaks(GRID, synthesize(model, GRID))
        assert len(peaks) == 3
        top, mid, bottom = peaks
        assert bottom.center < mid.center < top.center
        assert mid.center == pytest.approx(0.0, abs=0.05)
        # detuned coupling: the two Autler-Townes heights differ
        assert abs(top.height - bottom.height) > 0.05

    def test_global_shift_moves_everything(self):
        base = SpectrumModel(DriveConfig(62, 44, 0, 0), uncoupled_height=0.5, uncoupled_center=5.0)
        shifted = SpectrumModel(DriveConfig(62, 44, 0, 0), uncoupled_height=0.5, uncoupled_center=5.0, global_shift=9.0)
        assert synthesize(shifted, GRID + 9.0) == pytest.approx(synthesize(base, GRID), abs=1e-12)

    def test_empty_grid(self):
        with pytest.raises(EmptyGrid):
            synthesize(SpectrumModel(DriveConfig(1, 1)), [])

    def test_grid_must_increase(self):
        with pytest.raises(ValueError):
            synthesize(SpectrumModel(DriveConfig(1, 1)), [0.0, 0.0, 1.0])

    @given(st.floats(0, 100), st.floats(0, 100), st.floats(-50, 50), st.floats(-50, 50), st.floats(0, 2))
    def test_non_negative_and_decaying(self, o1, o2, d1, d2, huc):
        model = SpectrumModel(DriveConfig(o1, o2, d1, d2), uncoupled_height=huc)
        values = synthesize(model, np.array([-1e6, -10.0, 0.0, 10.0, 1e6]))
        assert np.all(values >= 0)
        assert values[0] < 1e-6 and values[-1] < 1e-6

    def test_component_area_proportional_to_weight(self):
        cfg = DriveConfig(62, 44, 7, -5)
        width = 6.0
        for center, height in SpectrumModel(cfg, LineshapeConfig(width)).lines():
            x = np.linspace(center - 50 * width, center + 50 * width, 200_001)
            area = np.trapezoid(height * lorentzian(x - center, width), x)
            assert area == pytest.approx(height * math.pi * width / 2, rel=0.01)

    def test_central_height_grows_with_omega2(self):
        heights = []
        for o2 in np.linspace(0, 100, 21):
            model = SpectrumModel(DriveConfig(62, o2, 0, 0))
            heights.append(synthesize(model, [-0.1, 0.0, 0.1])[1])
        # the outer lines leak into 0 as well, so use the weights for strict monotonicity
        a2 = [absorption_weights(DriveConfig(62, o2, 0, 0))[1] for o2 in np.linspace(0, 100, 21)]
        assert np.all(np.diff(a2) > 0)
        assert heights[-1] > heights[0]


class TestFindPeaks:
    def test_ramp_has_none(self):
        x = np.linspace(0, 1, 50)
        assert find_peaks(x, x) == []

    def test_descending_order(self):
        model = SpectrumModel(DriveConfig(62, 44, 0, 0), uncoupled_height=0.2, uncoupled_center=12.0)
        peaks = find_peaks(GRID, synthesize(model, GRID))
        centers = [p.center for p in peaks]
        assert centers == sorted(centers, reverse=True)
        assert all(p.height > 0 for p in peaks)

    def test_merging_below_half_width(self):
        width = 6.0
        x = np.arange(-30, 30, 0.05)
        for sep in np.linspace(0.0, width / 2 - 1e-6, 25):
            y = lorentzian(x - sep / 2, width) + lorentzian(x + sep / 2, width)
            assert len(find_peaks(x, y)) == 1

    def test_resolved_above_threshold(self):
        width = 6.0
        x = np.arange(-30, 30, 0.05)
        y = lorentzian(x - 4.0, width) + lorentzian(x + 4.0, width)
        assert len(find_peaks(x, y)) == 2

    @given(st.floats(-0.5, 0.5), st.sampled_from([0.05, 0.1, 0.2, 0.4]), st.floats(3.0, 20.0))
    def test_center_accuracy(self, offset, step, width):
        x = np.arange(-60, 60 + step / 2, step)
        center = offset * step + 1.3
        peaks = find_peaks(x, lorentzian(x - center, width))
        assert len(peaks) == 1
        assert abs(peaks[0].center - center) <= step**2 / width

    def test_prominence_threshold(self):
        x = np.arange(-50, 50, 0.1)
        y = lorentzian(x, 6.0) + 0.03 * lorentzian(x - 30, 6.0)
        assert len(find_peaks(x, y)) == 1
        assert len(find_peaks(x, y, prominence=0.01)) == 2


class TestTrajectory:
    def test_decoupled_limit(self):
        d2 = np.array([-200.0, -150.0, 150.0, 200.0])
        e = trajectory_vs_delta2(62, 1e-9, 0.0, d2)
        for row, x in zip(e, d2):
            assert sorted(row) == pytest.approx(sorted([31.0, -31.0, -x]), abs=1e-6)

    def test_central_branch_zero_at_equal_detunings(self):
        d2 = np.linspace(-80, 80, 321)
        e = trajectory_vs_delta2(62, 44, 7.0, d2)
        i = int(np.argmin(np.abs(d2 - 7.0)))
        assert e[i, 1] == pytest.approx(0.0, abs=1e-9)
        # and it changes sign there: the branch moves red as delta2 increases
        assert e[i - 4, 1] > 0 > e[i + 4, 1]

    def test_trace_identity(self):
        d2 = np.linspace(-80, 80, 161)
        e = trajectory_vs_delta2(62, 44, 7.0, d2)
        assert e.sum(axis=1) == pytest.approx(14.0 - d2, abs=1e-10)

    def test_branches_ordered_and_match_oracle(self):
        d2 = np.linspace(-80, 80, 161)
        e = trajectory_vs_delta2(62, 44, 7.0, d2)
        assert np.all(np.diff(-e, axis=1) >= 0)
        for row, x in zip(e, d2):
            w, _ = eigen_oracle(build_hamiltonian(DriveConfig(62, 44, 7.0, x)))
            assert row == pytest.approx(w, abs=1e-10)


class TestWeightsVsRatio:
    def test_r_zero(self):
        e, a = weights_vs_ratio([0.0])
        assert e[0] == pytest.approx([0.5, 0.0, -0.5])
        assert a[0] == pytest.approx([0.5, 0.0, 0.5])

    def test_r_one(self):
        e, a = weights_vs_ratio([1.0])
        assert e[0] == pytest.approx([1 / math.sqrt(2), 0.0, -1 / math.sqrt(2)])
        assert a[0] == pytest.approx([0.25, 0.5, 0.25])

    def test_large_ratio(self):
        _, a = weights_vs_ratio([1e4])
        assert a[0, 1] == pytest.approx(1.0, abs=1e-7)

    def test_matches_general_path(self):
        r = np.linspace(0, 3, 31)
        e, a = weights_vs_ratio(r)
        for k, ratio in enumerate(r):
            cfg = DriveConfig(1.0, ratio)
            assert absorption_weights(cfg) == pytest.approx(a[k], abs=1e-12)


class TestAnticrossing:
    def test_subharmonic_locations(self):
        found = anticrossing_gap(62, 6.2, 0.0)
        locs = sorted(a.location for a in found)
        assert len(locs) == 2
        assert locs[0] == pytest.approx(-31.0, rel=0.02)
        assert locs[1] == pytest.approx(31.0, rel=0.02)

    def test_gap_closes_when_decoupled(self):
        for a in anticrossing_gap(62, 1e-7, 0.0):
            assert abs(abs(a.location) - 31.0) < 1e-4
            assert a.gap < 1e-6

    def test_gap_even_in_delta2(self):
        d2 = np.linspace(-70, 70, 141)
        e = trajectory_vs_delta2(62, 6.2, 0.0, d2)
        e_flip = trajectory_vs_delta2(62, 6.2, 0.0, -d2)
        assert e[:, 0] - e[:, 1] == pytest.approx(e_flip[:, 1] - e_flip[:, 2], abs=1e-10)
        min_gap = np.minimum(e[:, 0] - e[:, 1], e[:, 1] - e[:, 2])
        min_gap_flip = np.minimum(e_flip[:, 0] - e_flip[:, 1], e_flip[:, 1] - e_flip[:, 2])
        assert min_gap == pytest.approx(min_gap_flip, abs=1e-10)
        found = {a.branches: a for a in anticrossing_gap(62, 6.2, 0.0)}
        assert found[(1, 2)].location == pytest.approx(-found[(2, 3)].location, abs=1e-6)
        assert found[(1, 2)].gap == pytest.approx(found[(2, 3)].gap, abs=1e-9)

    def test_monotone_window(self):
        with pytest.raises(NoAnticrossing):
            anticrossing_gap(62, 6.2, 0.0, window=(100.0, 200.0))
