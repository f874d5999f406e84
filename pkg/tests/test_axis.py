import math

import numpy as np
import pytest

from telecg.axis import (
    compute_axes,
    frontal_axis,
    lead_angle_deg,
    manual_axis,
    net_wave_amplitude,
    wrap_degrees,
)
from telecg.delineation import measure
from telecg.model import LeadId
from telecg.synth import SynthSpec, synth_record

FS = 500.0


class TestNetWaveAmplitude:
    def test_symmetric_biphasic_is_zero(self):
        x = np.concatenate([np.full(20, 100.0), np.full(20, -100.0)])
        assert net_wave_amplitude(x, (0, 40), 0.0, FS) == pytest.approx(0.0)

    def test_rectangular_pulse_area(self):
        x = np.zeros(100)
        x[10:30] = 1000.0  # 20 samples = 40 ms at 500 Hz
        assert net_wave_amplitude(x, (10, 30), 0.0, FS) == pytest.approx(40000.0)

    def test_baseline_subtraction(self):
        x = np.full(100, 1000.0)
        assert net_wave_amplitude(x, (10, 30), 1000.0, FS) == pytest.approx(0.0)

    def test_empty_window_rejected(self):
        with pytest.raises(ValueError):
            net_wave_amplitude(np.zeros(10), (5, 5), 0.0, FS)


class TestFrontalAxis:
    @pytest.mark.parametrize(
        "amp_i,amp_avf,expected",
        [(1000.0, 0.0, 0.0), (0.0, 1000.0, 90.0), (-500.0, -500.0, -135.0)],
    )
    def test_default_pair_examples(self, amp_i, amp_avf, expected):
        assert frontal_axis(amp_i, amp_avf) == pytest.approx(expected)

    def test_ii_iii_equal_deflections(self):
        assert frontal_axis(1000.0, 1000.0, LeadId.II, LeadId.III) == pytest.approx(90.0)

    def test_scale_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a, b = rng.normal(size=2) * 1000
            if a == 0 and b == 0:
                continue
            k = float(rng.uniform(0.1, 50.0))
            assert frontal_axis(k * a, k * b) == pytest.approx(frontal_axis(a, b))

    def test_negation_flips_180(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            a, b = rng.normal(size=2) * 1000
            if a == 0 and b == 0:
                continue
            flipped = frontal_axis(-a, -b)
            expected = wrap_degrees(frontal_axis(a, b) + 180.0)
            assert flipped == pytest.approx(expected)

    def test_indeterminate_rejected(self):
        with pytest.raises(ValueError, match="indeterminate"):
            frontal_axis(0.0, 0.0)

    def test_parallel_leads_rejected(self):
        with pytest.raises(ValueError, match="parallel"):
            frontal_axis(1.0, 1.0, LeadId.I, LeadId.I)

    def test_precordial_lead_rejected(self):
        with pytest.raises(ValueError):
            lead_angle_deg(LeadId.V1)

    def test_range_is_half_open(self):
        assert frontal_axis(-1000.0, 0.0) == 180.0  # never -180


class TestManualAxis:
    def test_pure_lead_i(self):
        assert manual_axis(0.0, 1000.0, 0.0, 0.0, LeadId.I, LeadId.aVF) == pytest.approx(0.0)

    def test_zero_net_on_i(self):
        assert manual_axis(100.0, 100.0, 0.0, 500.0, LeadId.I, LeadId.aVF) == pytest.approx(90.0)

    def test_ii_iii_pair(self):
        assert manual_axis(0.0, 1000.0, 0.0, 1000.0, LeadId.II, LeadId.III) == pytest.approx(90.0)


class TestComputeAxes:
    def test_known_axes_recovered(self):
        spec = SynthSpec(qrs_axis_deg=60.0, t_axis_deg=-30.0)
        record, _ = synth_record(spec, seed=12)
        axes = compute_axes(record, measure(record))
        assert abs(wrap_degrees(axes.qrs_axis_deg - 60.0)) <= 10.0
        assert abs(wrap_degrees(axes.t_axis_deg - (-30.0))) <= 10.0

    def test_absent_p_gives_absent_axis(self):
        record, _ = synth_record(SynthSpec(p_amplitude_uv=0.0), seed=13)
        axes = compute_axes(record, measure(record))
        assert axes.p_axis_deg is None
        assert axes.qrs_axis_deg is not None

    def test_pair_independence(self):
        spec = SynthSpec(qrs_axis_deg=20.0)
        record, _ = synth_record(spec, seed=14)
        result = measure(record)
        a = compute_axes(record, result)
        b = compute_axes(record, result, pair=(LeadId.II, LeadId.aVL))
        assert abs(wrap_degrees(a.qrs_axis_deg - b.qrs_axis_deg)) <= 5.0

    def test_non_limb_pair_rejected(self, default_record):
        result = measure(default_record)
        with pytest.raises(ValueError):
            compute_axes(default_record, result, pair=(LeadId.I, LeadId.V1))


class TestWrapDegrees:
    @pytest.mark.parametrize(
        "angle,expected",
        [(0.0, 0.0), (180.0, 180.0), (-180.0, 180.0), (190.0, -170.0), (540.0, 180.0), (-350.0, 10.0)],
    )
    def test_wrapping(self, angle, expected):
        assert wrap_degrees(angle) == pytest.approx(expected)

    def test_angles_stay_in_range(self):
        for angle in np.linspace(-1000, 1000, 400):
            w = wrap_degrees(float(angle))
            assert -180.0 < w <= 180.0
