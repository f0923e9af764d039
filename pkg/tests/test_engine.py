import random

import pytest

from pulsealarm import (
    AlarmLineLevel,
    BpmEstimate,
    BpmReading,
    BpmStatus,
    BuzzerOff,
    BuzzerOn,
    ClockTick,
    Disarm,
    EngineConfig,
    Latch,
    LogTransition,
    Phase,
    StateConflictError,
    StreamOrderError,
    initial_state,
    latch_alarm_line,
    run_engine,
    set_alarm,
    step,
)

CONFIG = EngineConfig(required_streak=3)


def reading(t_ms, bpm):
    if bpm < 23:
        status = BpmStatus.REJECTED_LOW
    elif bpm > 200:
        status = BpmStatus.REJECTED_HIGH
    else:
        status = BpmStatus.VALID
    return BpmReading(BpmEstimate(t_ms, bpm, status))


def ringing_state(config=CONFIG, t=1000):
    state = set_alarm(initial_state(config), t)
    state, actions = step(state, ClockTick(t))
    assert state.phase is Phase.RINGING
    return state


class TestSetAlarm:
    def test_arm_from_idle(self):
        state = set_alarm(initial_state(CONFIG), 6 * 3600 * 1000)
        assert state.phase is Phase.ARMED
        assert state.alarm_time_ms == 6 * 3600 * 1000
        assert state.latch is Latch.RESET
        assert state.in_band_streak == 0

    def test_rearm_from_stopped(self):
        state = ringing_state()
        for t in (2000, 3000, 4000):
            state, _ = step(state, reading(t, 150))
        assert state.phase is Phase.STOPPED
        state = set_alarm(state, 90_000_000)
        assert state.phase is Phase.ARMED

    def test_rejected_while_ringing(self):
        with pytest.raises(StateConflictError):
            set_alarm(ringing_state(), 0)


class TestLatch:
    def test_sets_at_threshold(self):
        state = set_alarm(initial_state(CONFIG), 1000)
        state = latch_alarm_line(state, 800)
        assert state.latch is Latch.SET

    def test_bistable_stays_set(self):
        state = set_alarm(initial_state(CONFIG), 1000)
        state = latch_alarm_line(state, 800)
        state = latch_alarm_line(state, 0)
        assert state.latch is Latch.SET

    def test_below_threshold_stays_reset(self):
        state = set_alarm(initial_state(CONFIG), 1000)
        state = latch_alarm_line(state, 300)
        assert state.latch is Latch.RESET

    def test_rejected_while_idle(self):
        with pytest.raises(StateConflictError):
            latch_alarm_line(initial_state(CONFIG), 800)


class TestStep:
    def test_alarm_fires_at_set_time(self):
        state = set_alarm(initial_state(CONFIG), 1000)
        state, actions = step(state, ClockTick(1000))
        assert state.phase is Phase.RINGING
        assert state.latch is Latch.SET
        assert any(isinstance(a, BuzzerOn) for a in actions)

    def test_streak_of_in_band_readings_stops(self):
        state = ringing_state()
        actions = []
        for t in (2000, 3000, 4000):
            state, acts = step(state, reading(t, 150))
            actions.extend(acts)
        assert state.phase is Phase.STOPPED
        assert any(isinstance(a, BuzzerOff) for a in actions)

    def test_boundary_100_not_in_band(self):
        state = ringing_state()
        for t in (2000, 3000, 4000, 5000):
            state, _ = step(state, reading(t, 100))
        assert state.phase is Phase.RINGING
        assert state.in_band_streak == 0

    def test_out_of_band_resets_streak(self):
        state = ringing_state()
        phases = []
        for t, bpm in [(2000, 150), (3000, 95), (4000, 150), (5000, 150), (6000, 150)]:
            state, _ = step(state, reading(t, bpm))
            phases.append(state.phase)
        assert phases == [
            Phase.RINGING, Phase.RINGING, Phase.RINGING, Phase.RINGING, Phase.STOPPED,
        ]

    def test_rejected_reading_resets_streak(self):
        state = ringing_state()
        state, _ = step(state, reading(2000, 150))
        state, _ = step(state, reading(3000, 220))  # rejected_high
        assert state.in_band_streak == 0

    def test_rings_forever_without_in_band_readings(self):
        state = ringing_state(t=1000)
        state, actions = step(state, ClockTick(1000 + 10 * 3600 * 1000))
        assert state.phase is Phase.RINGING
        assert actions == []

    def test_disarm_silences(self):
        state = ringing_state()
        state, actions = step(state, Disarm(2000))
        assert state.phase is Phase.IDLE
        assert any(isinstance(a, BuzzerOff) for a in actions)
        assert state.latch is Latch.RESET

    def test_out_of_order_event_rejected(self):
        state = ringing_state(t=5000)
        with pytest.raises(StreamOrderError):
            step(state, ClockTick(4000))

    def test_stopped_is_latched(self):
        state = ringing_state()
        for t in (2000, 3000, 4000):
            state, _ = step(state, reading(t, 150))
        state, actions = step(state, reading(5000, 60))
        assert state.phase is Phase.STOPPED
        assert actions == []


class TestRunEngine:
    def test_empty_stream_stays_armed(self):
        state = set_alarm(initial_state(CONFIG), 1000)
        final, log = run_engine([], CONFIG, state)
        assert final.phase is Phase.ARMED
        assert log == []

    def test_full_wake_scenario(self):
        state = set_alarm(initial_state(CONFIG), 1000)
        events = [ClockTick(1000)] + [reading(1000 + 500 * i, 150) for i in range(1, 4)]
        final, log = run_engine(events, CONFIG, state)
        assert final.phase is Phase.STOPPED
        assert [(t.from_phase, t.to_phase) for t in log] == [
            (Phase.ARMED, Phase.RINGING),
            (Phase.RINGING, Phase.STOPPED),
        ]

    def test_disarm_while_idle_no_buzzer(self):
        final, log = run_engine([Disarm(0)], CONFIG)
        assert final.phase is Phase.IDLE
        assert log == []

    def test_error_carries_event_index(self):
        state = set_alarm(initial_state(CONFIG), 1000)
        events = [ClockTick(1000), ClockTick(500)]
        with pytest.raises(StreamOrderError, match="event 1"):
            run_engine(events, CONFIG, state)


def random_events(rng, n, t_step=500):
    t = 0
    events = []
    for _ in range(n):
        t += rng.randrange(0, t_step)
        kind = rng.random()
        if kind < 0.5:
            events.append(reading(t, rng.uniform(10, 230)))
        elif kind < 0.85:
            events.append(ClockTick(t))
        elif kind < 0.95:
            events.append(AlarmLineLevel(t, rng.randrange(0, 1024)))
        else:
            events.append(Disarm(t))
    return events


def qualifies(event, config):
    return (
        isinstance(event, BpmReading)
        and event.estimate.status is BpmStatus.VALID
        and config.satisfaction_band.contains(event.estimate.bpm)
    )


@pytest.mark.parametrize("streak", [1, 3])
def test_randomized_streams_safety(streak):
    # Every RINGING -> STOPPED must be immediately preceded by a run of
    # `streak` consecutive qualifying readings; buzzer actions alternate.
    config = EngineConfig(required_streak=streak)
    rng = random.Random(42 + streak)
    for _ in range(300):
        state = set_alarm(initial_state(config), rng.randrange(0, 2000))
        recent = []
        buzzer = []
        for event in random_events(rng, 40):
            was_ringing = state.phase is Phase.RINGING
            if was_ringing and isinstance(event, BpmReading):
                recent.append(qualifies(event, config))
            state, actions = step(state, event)
            for a in actions:
                if isinstance(a, (BuzzerOn, BuzzerOff)):
                    buzzer.append(type(a))
            if was_ringing and state.phase is Phase.STOPPED:
                assert len(recent) >= streak
                assert all(recent[-streak:])
            if state.phase is not Phase.RINGING:
                recent = []
        expected = [BuzzerOn, BuzzerOff] * (len(buzzer) // 2 + 1)
        assert buzzer == expected[: len(buzzer)]


def test_determinism():
    config = EngineConfig(required_streak=2)
    events = random_events(random.Random(7), 100)
    runs = []
    for _ in range(2):
        state = set_alarm(initial_state(config), 500)
        final, log = run_engine(events, config, state)
        runs.append((final, log))
    assert runs[0] == runs[1]


def test_transition_log_serializes():
    t = LogTransition(1000, Phase.ARMED, Phase.RINGING, "clock_tick")
    assert t.to_record() == {
        "kind": "transition",
        "t_ms": 1000,
        "from": "armed",
        "to": "ringing",
        "trigger": "clock_tick",
    }
