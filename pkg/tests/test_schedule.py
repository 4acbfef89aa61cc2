import json
import math

import numpy as np
import pytest

from becprobe.errors import ConfigValidationError, ScheduleError
from becprobe.probe import ScheduleSpec, Segment, export_schedule, make_schedule, sample_strength


def test_continuous_schedule_is_constant() -> None:
    schedule = make_schedule("continuous", t_end=2.0, strength=0.5)
    assert schedule.strength(0.0) == 0.5
    assert schedule.strength(1.999) == 0.5
    assert schedule.strength(2.0) == 0.0
    assert schedule.integrated_strength(2.0) == pytest.approx(1.0)
    assert schedule.breakpoints(2.0) == [0.0, 2.0]
    assert not schedule.is_off(0.5, 0.6)


def test_ramp_falls_linearly_to_zero() -> None:
    schedule = make_schedule("ramp", t_end=2.0 * math.pi)
    assert schedule.strength(1.0) == 1.0
    assert schedule.strength(1.5 * math.pi) == pytest.approx(0.5)
    assert schedule.strength(2.0 * math.pi - 1e-9) == pytest.approx(0.0, abs=1e-8)
    assert schedule.integrated_strength(2.0 * math.pi) == pytest.approx(1.5 * math.pi)
    assert schedule.breakpoints(2.0 * math.pi) == [0.0, math.pi, 2.0 * math.pi]

    with pytest.raises(ScheduleError, match="ramp must start"):
        make_schedule("ramp", t_end=1.0, ramp_start=2.0, ramp_end=1.0)


def test_squeezing_pulses_sit_at_half_periods() -> None:
    omega = 2.0
    schedule = make_schedule("squeezing", t_end=2.0 * math.pi, frequencies=[omega])
    width = 1.0 / (200.0 * omega)

    assert schedule.pulse_width == pytest.approx(width)
    assert schedule.repetition_frequency == pytest.approx(2.0 * omega)
    np.testing.assert_allclose(schedule.pulse_centers, [k * math.pi / omega for k in range(5)])
    # first pulse keeps only its second half, the last one only its first
    assert schedule.segments[0].t_start == 0.0
    assert schedule.segments[0].t_end == pytest.approx(0.5 * width)
    assert schedule.segments[-1].t_end == pytest.approx(2.0 * math.pi)
    assert schedule.integrated_strength(2.0 * math.pi) == pytest.approx(4 * width)

    assert schedule.strength(math.pi / omega) == 1.0
    assert schedule.strength(0.5 * math.pi / omega) == 0.0
    assert schedule.is_off(0.1, 0.2)


def test_entangling_duty_cycle() -> None:
    schedule = make_schedule("entangling", t_end=10.0, frequencies=[1.0, 2.0])
    varpi = 3.0
    assert schedule.pulse_width * varpi == pytest.approx(2.0 * math.pi * 0.03)
    assert schedule.pulse_centers[1] == pytest.approx(2.0 * math.pi / varpi)
    assert schedule.repetition_frequency == pytest.approx(varpi)


def test_overlapping_pulses_are_rejected() -> None:
    with pytest.raises(ScheduleError, match="pulses overlap") as exc:
        make_schedule("squeezing", t_end=10.0, frequencies=[1.0], pulse_width=4.0)
    assert isinstance(exc.value, ConfigValidationError)
    assert exc.value.issues[0][0] == "schedule.pulse_width"


@pytest.mark.parametrize(
    ("mode", "kwargs", "message"),
    [
        ("continuous", {"t_end": 0.0}, "end time"),
        ("continuous", {"t_end": 1.0, "strength": -1.0}, "non-negative"),
        ("squeezing", {"t_end": 1.0, "frequencies": [1.0, 2.0]}, "exactly one"),
        ("entangling", {"t_end": 1.0, "frequencies": [1.0]}, "exactly two"),
        ("squeezing", {"t_end": 1.0, "frequencies": [1.0], "pulse_width": 0.0}, "positive"),
        ("strobe", {"t_end": 1.0}, "unknown schedule mode"),
    ],
)
def test_make_schedule_errors(mode, kwargs, message) -> None:
    with pytest.raises(ScheduleError, match=message):
        make_schedule(mode, **kwargs)


def test_segment_integral_is_clipped() -> None:
    segment = Segment(1.0, 3.0, 2.0, 0.0)
    assert segment.value(2.0) == pytest.approx(1.0)
    assert segment.integral(0.5) == 0.0
    assert segment.integral(2.0) == pytest.approx(1.5)
    assert segment.integral(10.0) == pytest.approx(2.0)
    assert Segment(0.0, 1.0, 0.0, 0.0).is_zero


def test_schedule_spec_validation_and_build() -> None:
    assert ScheduleSpec().validate() == []
    issues = dict(ScheduleSpec(mode="entangling", target_modes=(1,)).validate())
    assert "target_modes" in issues
    issues = dict(ScheduleSpec(mode="squeezing", target_modes=(0,), strength=-1.0).validate())
    assert set(issues) == {"target_modes", "strength"}

    schedule = ScheduleSpec(mode="squeezing", target_modes=(2,)).build([1.5], 5.0)
    assert schedule.mode == "squeezing"
    assert schedule.pulse_width == pytest.approx(1.0 / 300.0)


def test_sample_and_export(tmp_path) -> None:
    schedule = make_schedule("ramp", t_end=2.0 * math.pi)
    values = sample_strength(schedule, np.array([0.0, 1.5 * math.pi, 7.0]))
    np.testing.assert_allclose(values, [1.0, 0.5, 0.0])

    data = json.loads(export_schedule(schedule, tmp_path).read_text())
    assert data["mode"] == "ramp"
    assert len(data["segments"]) == 2
