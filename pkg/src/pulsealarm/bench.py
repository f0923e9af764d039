"""Detector benchmarking: hysteresis trigger vs the single-threshold
baseline over a corpus of waveforms with injected stray pulses and noise."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .detector import SchmittConfig, detect_beats, naive_detect_beats
from .synth import StrayPulse, WaveformSpec, synthesize


def match_beats(
    detected_times: Sequence[float],
    truth_times: Sequence[float],
    tolerance_ms: float,
) -> tuple[int, int]:
    """Greedy in-order matching of detected beats to ground truth.

    Returns (false_count, missed_count): detections with no truth beat
    within the tolerance, and truth beats never claimed by a detection.
    """
    false_count = 0
    ti = 0
    matched = 0
    for d in detected_times:
        while ti < len(truth_times) and truth_times[ti] < d - tolerance_ms:
            ti += 1
        if ti < len(truth_times) and abs(truth_times[ti] - d) <= tolerance_ms:
            matched += 1
            ti += 1
        else:
            false_count += 1
    return false_count, len(truth_times) - matched


def place_strays(
    truth_times: Sequence[float],
    count: int,
    peak: int,
    width_ms: float,
    rng: random.Random,
    grid_ms: float,
) -> tuple[StrayPulse, ...]:
    """Scatter stray pulses between beats, snapped to the sample grid and
    kept away from the real pulses so overlap cannot mask them."""
    if count == 0 or len(truth_times) < 2:
        return ()
    times: list[float] = []
    attempts = 0
    while len(times) < count and attempts < count * 100:
        attempts += 1
        k = rng.randrange(len(truth_times) - 1)
        ibi = truth_times[k + 1] - truth_times[k]
        offset = rng.uniform(0.25 * ibi, 0.75 * ibi)
        t = grid_ms * round((truth_times[k] + offset) / grid_ms)
        # non-overlapping strays only: two superimposed mid-band pulses
        # could sum past the upper threshold and stop being "mid-band"
        if all(abs(t - other) >= width_ms for other in times):
            times.append(t)
    return tuple(StrayPulse(t, peak, width_ms) for t in sorted(times))


@dataclass(frozen=True)
class BenchRow:
    stray_count: int
    noise_stddev: float
    schmitt_false: int
    schmitt_missed: int
    naive_false: int
    naive_missed: int


def bench_corpus(
    base_spec: WaveformSpec,
    stray_counts: Sequence[int],
    noise_levels: Sequence[float],
    runs_per_cell: int,
    schmitt: SchmittConfig,
    naive_threshold: int,
    stray_peak: int,
    stray_width_ms: float = 80.0,
    match_tolerance_ms: float = 100.0,
    seed: int = 0,
) -> list[BenchRow]:
    """Sweep stray density x noise level; per cell, total the false and
    missed beats of both detectors across runs_per_cell seeded waveforms."""
    rows = []
    grid_ms = 1000.0 / base_spec.sample_rate_hz
    for stray_count in stray_counts:
        for noise in noise_levels:
            totals = [0, 0, 0, 0]
            for run in range(runs_per_cell):
                cell_seed = seed * 1_000_003 + hash((stray_count, noise, run)) % 1_000_003
                rng = random.Random(cell_seed)
                _, truth = synthesize(base_spec)
                spec = WaveformSpec(
                    duration_ms=base_spec.duration_ms,
                    sample_rate_hz=base_spec.sample_rate_hz,
                    heart_rate_bpm=base_spec.heart_rate_bpm,
                    pulse_amplitude=base_spec.pulse_amplitude,
                    baseline=base_spec.baseline,
                    pulse_width_ms=base_spec.pulse_width_ms,
                    noise_stddev=noise,
                    wander_amplitude=base_spec.wander_amplitude,
                    wander_period_ms=base_spec.wander_period_ms,
                    stray_pulses=place_strays(
                        truth.beat_times_ms, stray_count, stray_peak,
                        stray_width_ms, rng, grid_ms,
                    ),
                    rng_seed=cell_seed,
                )
                samples, truth = synthesize(spec)
                schmitt_times = [b.t_ms for b in detect_beats(samples, schmitt)]
                naive_times = [b.t_ms for b in naive_detect_beats(samples, naive_threshold)]
                sf, sm = match_beats(schmitt_times, truth.beat_times_ms, match_tolerance_ms)
                nf, nm = match_beats(naive_times, truth.beat_times_ms, match_tolerance_ms)
                totals[0] += sf
                totals[1] += sm
                totals[2] += nf
                totals[3] += nm
            rows.append(BenchRow(stray_count, noise, *totals))
    return rows
