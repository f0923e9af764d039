"""Beat detection on a noisy sampled pulse waveform.

The detector is a software Schmitt trigger: the output only goes HIGH once
the signal reaches the upper threshold and only re-arms after it falls to
the lower threshold, so excursions that stay inside the hysteresis band can
never produce a beat. A refractory guard suppresses double-triggers on a
single pulse. A deliberately fragile single-threshold detector is kept
around as a comparison baseline.
"""

from __future__ import annotations

import enum
import statistics
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .errors import StreamOrderError

ADC_MAX = 1023

PLAUSIBLE_MIN_BPM = 23.0
PLAUSIBLE_MAX_BPM = 200.0


class Level(enum.Enum):
    LOW = "low"
    HIGH = "high"


class BpmStatus(enum.Enum):
    VALID = "valid"
    REJECTED_LOW = "rejected_low"
    REJECTED_HIGH = "rejected_high"


@dataclass(frozen=True)
class Sample:
    """One timestamped ADC reading, value in [0, 1023]."""

    t_ms: int
    value: int

    def __post_init__(self):
        if self.t_ms < 0:
            raise ValueError(f"t_ms must be non-negative, got {self.t_ms}")
        if not 0 <= self.value <= ADC_MAX:
            raise ValueError(f"value must be in [0, {ADC_MAX}], got {self.value}")


@dataclass(frozen=True)
class SchmittConfig:
    """Trigger thresholds in ADC counts and the refractory guard in ms."""

    upper_threshold: int = 550
    lower_threshold: int = 470
    refractory_ms: int = 250

    def __post_init__(self):
        if self.lower_threshold >= self.upper_threshold:
            raise ValueError(
                "lower_threshold must be strictly below upper_threshold "
                f"({self.lower_threshold} >= {self.upper_threshold})"
            )
        if self.refractory_ms <= 0:
            raise ValueError(f"refractory_ms must be positive, got {self.refractory_ms}")


@dataclass(frozen=True)
class SchmittState:
    """The trigger's memory: current output level and last accepted beat time."""

    level: Level = Level.LOW
    last_beat_t_ms: Optional[int] = None


@dataclass(frozen=True)
class BeatEvent:
    """A detected heartbeat. ibi_ms is absent for the first beat of a stream."""

    t_ms: int
    ibi_ms: Optional[int] = None


@dataclass(frozen=True)
class BpmEstimate:
    t_ms: int
    bpm: float
    status: BpmStatus


def schmitt_step(
    state: SchmittState, config: SchmittConfig, sample: Sample
) -> tuple[SchmittState, bool]:
    """Advance the trigger by one sample.

    Returns the new state and whether an accepted rising edge occurred.
    LOW -> HIGH requires value >= upper_threshold; the edge is suppressed
    (but the level still flips) when it falls inside the refractory window
    of the previous accepted beat. HIGH -> LOW requires value <= lower
    threshold and never emits. Values inside the band change nothing.
    """
    if state.level is Level.LOW:
        if sample.value >= config.upper_threshold:
            suppressed = (
                state.last_beat_t_ms is not None
                and sample.t_ms - state.last_beat_t_ms < config.refractory_ms
            )
            if suppressed:
                return SchmittState(Level.HIGH, state.last_beat_t_ms), False
            return SchmittState(Level.HIGH, sample.t_ms), True
        return state, False
    if sample.value <= config.lower_threshold:
        return SchmittState(Level.LOW, state.last_beat_t_ms), False
    return state, False


def detect_beats(
    samples: Iterable[Sample], config: SchmittConfig = SchmittConfig()
) -> Iterator[BeatEvent]:
    """Run the Schmitt trigger over an ordered sample stream.

    Yields one BeatEvent per accepted rising edge; single-pass and causal.
    Raises StreamOrderError on a non-monotone timestamp.
    """
    state = SchmittState()
    last_t: Optional[int] = None
    prev_beat_t: Optional[int] = None
    for sample in samples:
        if last_t is not None and sample.t_ms <= last_t:
            raise StreamOrderError(
                f"sample at t_ms={sample.t_ms} does not advance past {last_t}"
            )
        last_t = sample.t_ms
        state, edge = schmitt_step(state, config, sample)
        if edge:
            ibi = None if prev_beat_t is None else sample.t_ms - prev_beat_t
            prev_beat_t = sample.t_ms
            yield BeatEvent(sample.t_ms, ibi)


def naive_detect_beats(
    samples: Iterable[Sample], single_threshold: int
) -> Iterator[BeatEvent]:
    """Single-threshold baseline: a beat on every upward crossing.

    No hysteresis and no refractory guard, so mid-amplitude stray pulses
    and noise riding the threshold produce false beats. Kept for
    benchmarking against detect_beats.
    """
    last_t: Optional[int] = None
    prev_value: Optional[int] = None
    prev_beat_t: Optional[int] = None
    for sample in samples:
        if last_t is not None and sample.t_ms <= last_t:
            raise StreamOrderError(
                f"sample at t_ms={sample.t_ms} does not advance past {last_t}"
            )
        last_t = sample.t_ms
        below_before = prev_value is None or prev_value < single_threshold
        prev_value = sample.value
        if below_before and sample.value >= single_threshold:
            ibi = None if prev_beat_t is None else sample.t_ms - prev_beat_t
            prev_beat_t = sample.t_ms
            yield BeatEvent(sample.t_ms, ibi)


def bpm_from_ibi(ibi_ms: float) -> float:
    """Instantaneous rate in beats per minute from one inter-beat interval."""
    if ibi_ms <= 0:
        raise ValueError(f"ibi_ms must be positive, got {ibi_ms}")
    return 60000.0 / ibi_ms


def plausibility_filter(bpm: float, t_ms: int) -> BpmEstimate:
    """Classify a reading against the physiological band [23, 200] bpm.

    Readings below 23 or above 200 are rejected as implausible; the bpm
    value itself passes through unchanged.
    """
    if bpm < 0:
        raise ValueError(f"bpm must be non-negative, got {bpm}")
    if bpm < PLAUSIBLE_MIN_BPM:
        status = BpmStatus.REJECTED_LOW
    elif bpm > PLAUSIBLE_MAX_BPM:
        status = BpmStatus.REJECTED_HIGH
    else:
        status = BpmStatus.VALID
    return BpmEstimate(t_ms, bpm, status)


def estimate_bpm(
    beats: Sequence[BeatEvent], smoothing_window: int = 5
) -> Optional[BpmEstimate]:
    """Median-smoothed rate from the most recent beats.

    Takes the median of the last min(smoothing_window, available)
    instantaneous bpm values and runs it through the plausibility filter.
    Returns None until at least two beats (one interval) are available.
    """
    if smoothing_window < 1:
        raise ValueError(f"smoothing_window must be >= 1, got {smoothing_window}")
    rates = [bpm_from_ibi(b.ibi_ms) for b in beats if b.ibi_ms is not None]
    if not rates:
        return None
    window = rates[-smoothing_window:]
    return plausibility_filter(statistics.median(window), beats[-1].t_ms)


class BpmEstimator:
    """Streaming counterpart of estimate_bpm: feed beats, get estimates."""

    def __init__(self, smoothing_window: int = 5):
        if smoothing_window < 1:
            raise ValueError(f"smoothing_window must be >= 1, got {smoothing_window}")
        self._rates: deque[float] = deque(maxlen=smoothing_window)

    def add(self, beat: BeatEvent) -> Optional[BpmEstimate]:
        if beat.ibi_ms is None:
            return None
        self._rates.append(bpm_from_ibi(beat.ibi_ms))
        return plausibility_filter(statistics.median(self._rates), beat.t_ms)
