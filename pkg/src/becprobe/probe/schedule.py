"""Time dependence of the probe strength."""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import chz
import numpy as np

from ..errors import ScheduleError
from ..storage.tables import write_json

ScheduleMode = Literal["continuous", "squeezing", "entangling", "ramp"]

SQUEEZING_WIDTH_FACTOR = 1.0 / 200.0
ENTANGLING_DUTY = 0.03


@dataclass(frozen=True)
class Segment:
    """Multiplier ramping linearly from `m_start` to `m_end` over [t_start, t_end)."""

    t_start: float
    t_end: float
    m_start: float
    m_end: float

    def value(self, t: float) -> float:
        if self.t_end == self.t_start:
            return self.m_start
        frac = (t - self.t_start) / (self.t_end - self.t_start)
        return self.m_start + frac * (self.m_end - self.m_start)

    def integral(self, t: float) -> float:
        """Integral of the multiplier from t_start to min(t, t_end)."""
        upper = min(t, self.t_end)
        if upper <= self.t_start:
            return 0.0
        return 0.5 * (self.m_start + self.value(upper)) * (upper - self.t_start)

    @property
    def is_zero(self) -> bool:
        return self.m_start == 0 and self.m_end == 0


@dataclass(frozen=True)
class ProbeSchedule:
    mode: ScheduleMode
    segments: tuple[Segment, ...]
    pulse_centers: tuple[float, ...] = ()
    pulse_width: float | None = None
    repetition_frequency: float | None = None

    def segment_at(self, t: float) -> Segment | None:
        for segment in self.segments:
            if segment.t_start <= t < segment.t_end:
                return segment
        return None

    def strength(self, t: float) -> float:
        segment = self.segment_at(t)
        return segment.value(t) if segment is not None else 0.0

    def integrated_strength(self, t: float) -> float:
        return sum(segment.integral(t) for segment in self.segments)

    def breakpoints(self, t_end: float) -> list[float]:
        """Sorted segment boundaries inside [0, t_end], always including both ends."""
        points = {0.0, float(t_end)}
        for segment in self.segments:
            for t in (segment.t_start, segment.t_end):
                if 0.0 <= t <= t_end:
                    points.add(float(t))
        return sorted(points)

    def is_off(self, t0: float, t1: float) -> bool:
        """True when no segment with non-zero multiplier overlaps (t0, t1)."""
        return not any(
            not segment.is_zero and segment.t_start < t1 and segment.t_end > t0
            for segment in self.segments
        )

    def to_dict(self) -> dict[str, object]:
        return {
            "mode": self.mode,
            "pulse_centers": list(self.pulse_centers),
            "pulse_width": self.pulse_width,
            "repetition_frequency": self.repetition_frequency,
            "segments": [
                {"t_start": s.t_start, "t_end": s.t_end, "m_start": s.m_start, "m_end": s.m_end}
                for s in self.segments
            ],
        }


def _pulse_train(
    mode: ScheduleMode,
    period: float,
    width: float,
    t_end: float,
    strength: float,
    repetition_frequency: float,
) -> ProbeSchedule:
    if width <= 0:
        raise ScheduleError(
            "pulse width must be positive", issues=[("schedule.pulse_width", f"got {width}")]
        )
    if width >= period:
        raise ScheduleError(
            "pulses overlap: the pulse width exceeds the repetition period",
            issues=[("schedule.pulse_width", f"{width:.4g} >= period {period:.4g}")],
        )
    centers: list[float] = []
    segments: list[Segment] = []
    count = int(math.floor(t_end / period + 1e-9))
    for index in range(count + 1):
        center = index * period
        start = max(0.0, center - 0.5 * width)
        stop = min(t_end, center + 0.5 * width)
        if stop <= start:
            continue
        centers.append(center)
        segments.append(Segment(start, stop, strength, strength))
    return ProbeSchedule(
        mode=mode,
        segments=tuple(segments),
        pulse_centers=tuple(centers),
        pulse_width=width,
        repetition_frequency=repetition_frequency,
    )


def make_schedule(
    mode: ScheduleMode,
    *,
    t_end: float,
    frequencies: Sequence[float] = (),
    strength: float = 1.0,
    pulse_width: float | None = None,
    ramp_start: float = math.pi,
    ramp_end: float = 2.0 * math.pi,
) -> ProbeSchedule:
    """
    Build a probe schedule.

    squeezing: pulses centred on l pi / omega_j of width 1 / (200 omega_j).
    entangling: pulses centred on 2 pi l / (omega_j + omega_k) with
    (omega_j + omega_k) * width = 2 pi * 0.03.
    ramp: constant until `ramp_start`, then linear to zero at `ramp_end`.
    A pulse centred on t = 0 keeps only its second half.
    """
    if t_end <= 0:
        raise ScheduleError("schedule end time must be positive", issues=[("t_end", f"got {t_end}")])
    if strength < 0:
        raise ScheduleError(
            "schedule strength must be non-negative", issues=[("schedule.strength", f"got {strength}")]
        )
    if mode == "continuous":
        return ProbeSchedule(mode=mode, segments=(Segment(0.0, t_end, strength, strength),))
    if mode == "ramp":
        if not 0 <= ramp_start < ramp_end:
            raise ScheduleError(
                "ramp must start before it ends",
                issues=[("schedule.ramp_start", f"{ramp_start} >= ramp_end {ramp_end}")],
            )
        segments = [Segment(0.0, min(ramp_start, t_end), strength, strength)]
        if t_end > ramp_start:
            segments.append(Segment(ramp_start, ramp_end, strength, 0.0))
        return ProbeSchedule(mode=mode, segments=tuple(segments))
    if mode == "squeezing":
        if len(frequencies) != 1 or frequencies[0] <= 0:
            raise ScheduleError(
                "squeezing needs exactly one positive target frequency",
                issues=[("schedule.target_modes", f"frequencies {list(frequencies)}")],
            )
        omega = float(frequencies[0])
        width = pulse_width if pulse_width is not None else SQUEEZING_WIDTH_FACTOR / omega
        return _pulse_train(mode, math.pi / omega, width, t_end, strength, 2.0 * omega)
    if mode == "entangling":
        if len(frequencies) != 2 or min(frequencies) <= 0:
            raise ScheduleError(
                "entangling needs exactly two positive target frequencies",
                issues=[("schedule.target_modes", f"frequencies {list(frequencies)}")],
            )
        varpi = float(sum(frequencies))
        width = pulse_width if pulse_width is not None else 2.0 * math.pi * ENTANGLING_DUTY / varpi
        return _pulse_train(mode, 2.0 * math.pi / varpi, width, t_end, strength, varpi)
    raise ScheduleError(f"unknown schedule mode {mode!r}", issues=[("schedule.mode", str(mode))])


@chz.chz
class ScheduleSpec:
    """Schedule description resolved against the basis frequencies at run time."""

    mode: ScheduleMode = "continuous"
    target_modes: tuple[int, ...] = ()
    strength: float = 1.0
    pulse_width: float | None = None
    ramp_start: float = math.pi
    ramp_end: float = 2.0 * math.pi

    def build(self, frequencies: Sequence[float], t_end: float) -> ProbeSchedule:
        return make_schedule(
            self.mode,
            t_end=t_end,
            frequencies=frequencies,
            strength=self.strength,
            pulse_width=self.pulse_width,
            ramp_start=self.ramp_start,
            ramp_end=self.ramp_end,
        )

    def validate(self) -> list[tuple[str, str]]:
        issues: list[tuple[str, str]] = []
        expected = {"squeezing": 1, "entangling": 2}.get(self.mode, 0)
        if len(self.target_modes) != expected:
            issues.append(
                ("target_modes", f"{self.mode} schedule takes {expected} target modes")
            )
        if any(j < 1 for j in self.target_modes):
            issues.append(("target_modes", "stroboscopic targets must be excited modes (j >= 1)"))
        if self.strength < 0:
            issues.append(("strength", f"must be non-negative, got {self.strength}"))
        if self.pulse_width is not None and self.pulse_width <= 0:
            issues.append(("pulse_width", f"must be positive, got {self.pulse_width}"))
        return issues


def export_schedule(schedule: ProbeSchedule, directory: Path) -> Path:
    return write_json(directory / "schedule.json", schedule.to_dict())


def sample_strength(schedule: ProbeSchedule, times: np.ndarray) -> np.ndarray:
    return np.array([schedule.strength(float(t)) for t in times])
