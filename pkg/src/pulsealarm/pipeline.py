"""End-to-end wiring: samples -> beat detector -> rate estimator ->
plausibility filter -> alarm engine, with a run report mirroring the
device's serial-monitor listing (one reading per line with its status)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional

from .detector import (
    BeatEvent,
    BpmEstimate,
    BpmEstimator,
    BpmStatus,
    Sample,
    SchmittConfig,
    SchmittState,
    schmitt_step,
)
from .engine import (
    AlarmEngineState,
    BpmReading,
    ClockTick,
    EngineConfig,
    LogTransition,
    Phase,
    initial_state,
    set_alarm,
    step,
)
from .errors import StreamOrderError


@dataclass
class RunReport:
    transitions: list[LogTransition]
    readings: list[BpmEstimate]
    beat_count: int
    sample_count: int
    final_phase: Phase
    gap_count: int = 0
    corrupt_count: int = 0
    resync_count: int = 0

    @property
    def valid_count(self) -> int:
        return sum(1 for r in self.readings if r.status is BpmStatus.VALID)

    @property
    def rejected_low_count(self) -> int:
        return sum(1 for r in self.readings if r.status is BpmStatus.REJECTED_LOW)

    @property
    def rejected_high_count(self) -> int:
        return sum(1 for r in self.readings if r.status is BpmStatus.REJECTED_HIGH)

    def to_jsonl(self) -> str:
        """Line-delimited records: transitions, readings, then a summary.
        Deterministic byte-for-byte for identical runs."""
        lines = [json.dumps(t.to_record(), sort_keys=True) for t in self.transitions]
        lines.extend(
            json.dumps(
                {
                    "kind": "reading",
                    "t_ms": r.t_ms,
                    "bpm": round(r.bpm, 4),
                    "status": r.status.value,
                },
                sort_keys=True,
            )
            for r in self.readings
        )
        lines.append(
            json.dumps(
                {
                    "kind": "summary",
                    "samples": self.sample_count,
                    "beats": self.beat_count,
                    "valid": self.valid_count,
                    "rejected_low": self.rejected_low_count,
                    "rejected_high": self.rejected_high_count,
                    "gaps": self.gap_count,
                    "corrupt_frames": self.corrupt_count,
                    "resyncs": self.resync_count,
                    "final_phase": self.final_phase.value,
                },
                sort_keys=True,
            )
        )
        return "\n".join(lines) + "\n"

    def summary_text(self) -> str:
        lines = [
            f"samples: {self.sample_count}",
            f"beats: {self.beat_count}",
            f"readings: {len(self.readings)} "
            f"(valid {self.valid_count}, "
            f"rejected_low {self.rejected_low_count}, "
            f"rejected_high {self.rejected_high_count})",
        ]
        if self.gap_count or self.corrupt_count or self.resync_count:
            lines.append(
                f"protocol: {self.gap_count} gaps, "
                f"{self.corrupt_count} corrupt frames, {self.resync_count} resyncs"
            )
        for t in self.transitions:
            lines.append(
                f"t={t.t_ms} ms: {t.from_phase.value} -> {t.to_phase.value} "
                f"({t.trigger})"
            )
        lines.append(f"final phase: {self.final_phase.value}")
        return "\n".join(lines)


class Pipeline:
    """Streaming pipeline: push samples, the alarm engine reacts.

    The engine is armed for alarm_time_ms up front; every sample drives a
    clock tick, every detected beat drives a rate reading.
    """

    def __init__(
        self,
        schmitt: SchmittConfig,
        engine_config: EngineConfig,
        alarm_time_ms: int,
        smoothing_window: int = 5,
    ):
        self._schmitt_config = schmitt
        self._schmitt_state = SchmittState()
        self._estimator = BpmEstimator(smoothing_window)
        self._engine_state = set_alarm(initial_state(engine_config), alarm_time_ms)
        self._last_t: Optional[int] = None
        self._prev_beat_t: Optional[int] = None
        self.transitions: list[LogTransition] = []
        self.readings: list[BpmEstimate] = []
        self.beat_count = 0
        self.sample_count = 0

    @property
    def engine_state(self) -> AlarmEngineState:
        return self._engine_state

    def _engine_step(self, event) -> None:
        self._engine_state, actions = step(self._engine_state, event)
        self.transitions.extend(a for a in actions if isinstance(a, LogTransition))

    def push(self, sample: Sample) -> None:
        if self._last_t is not None and sample.t_ms <= self._last_t:
            raise StreamOrderError(
                f"sample at t_ms={sample.t_ms} does not advance past {self._last_t}"
            )
        self._last_t = sample.t_ms
        self.sample_count += 1
        self._engine_step(ClockTick(sample.t_ms))
        self._schmitt_state, edge = schmitt_step(
            self._schmitt_state, self._schmitt_config, sample
        )
        if not edge:
            return
        ibi = None if self._prev_beat_t is None else sample.t_ms - self._prev_beat_t
        self._prev_beat_t = sample.t_ms
        self.beat_count += 1
        estimate = self._estimator.add(BeatEvent(sample.t_ms, ibi))
        if estimate is not None:
            self.readings.append(estimate)
            self._engine_step(BpmReading(estimate))

    def report(
        self, gap_count: int = 0, corrupt_count: int = 0, resync_count: int = 0
    ) -> RunReport:
        return RunReport(
            transitions=list(self.transitions),
            readings=list(self.readings),
            beat_count=self.beat_count,
            sample_count=self.sample_count,
            final_phase=self._engine_state.phase,
            gap_count=gap_count,
            corrupt_count=corrupt_count,
            resync_count=resync_count,
        )


def run_pipeline(
    samples: Iterable[Sample],
    schmitt: SchmittConfig,
    engine_config: EngineConfig,
    alarm_time_ms: int,
    smoothing_window: int = 5,
) -> RunReport:
    """Run the whole chain over a buffered or generated sample stream."""
    pipeline = Pipeline(schmitt, engine_config, alarm_time_ms, smoothing_window)
    for sample in samples:
        pipeline.push(sample)
    return pipeline.report()
