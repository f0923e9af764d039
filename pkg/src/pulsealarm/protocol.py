"""Framed byte-stream transport for sensor samples.

Wire format, 9 bytes per frame, all multi-byte fields big-endian:

    offset 0  sync      0xAA
    offset 1  seq       modulo-256 frame counter
    offset 2  t_ms      4-byte unsigned timestamp
    offset 6  value     2-byte unsigned ADC count, must be <= 1023
    offset 8  checksum  XOR of bytes 1..7 (everything except sync)

The sync byte may legitimately occur inside payloads; the checksum, not
byte-stuffing, disambiguates. The decoder is total over arbitrary input:
corruption surfaces as outcomes, never exceptions, and parsing resumes at
the next plausible sync byte.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence, Union

from .detector import ADC_MAX, Sample
from .errors import StreamOrderError
from .synth import read_waveform

SYNC_BYTE = 0xAA
FRAME_LEN = 9


@dataclass(frozen=True)
class SampleOutcome:
    seq: int
    sample: Sample


@dataclass(frozen=True)
class Gap:
    expected_seq: int
    got_seq: int


@dataclass(frozen=True)
class CorruptFrame:
    byte_offset: int


@dataclass(frozen=True)
class Resync:
    skipped_bytes: int


ParseOutcome = Union[SampleOutcome, Gap, CorruptFrame, Resync]


def _checksum(payload: bytes) -> int:
    c = 0
    for b in payload:
        c ^= b
    return c


def encode_frame(seq: int, sample: Sample) -> bytes:
    if not 0 <= seq <= 255:
        raise ValueError(f"seq must fit one byte, got {seq}")
    if not 0 <= sample.t_ms < 2**32:
        raise ValueError(f"t_ms must fit 4 bytes, got {sample.t_ms}")
    if not 0 <= sample.value <= ADC_MAX:
        raise ValueError(f"value must be in [0, {ADC_MAX}], got {sample.value}")
    payload = bytes([seq]) + sample.t_ms.to_bytes(4, "big") + sample.value.to_bytes(2, "big")
    return bytes([SYNC_BYTE]) + payload + bytes([_checksum(payload)])


class FrameDecoder:
    """Incremental frame parser; feed bytes in any chunking.

    Emits SampleOutcome for each checksum-valid frame, Gap when the seq
    counter jumps, CorruptFrame (with the frame's absolute byte offset)
    when a sync byte leads a frame that fails validation, and Resync
    counting bytes skipped while hunting for a sync byte.
    """

    def __init__(self):
        self._buf = bytearray()
        self._offset = 0  # absolute stream offset of _buf[0]
        self._last_seq: int | None = None

    def feed(self, data: bytes) -> list[ParseOutcome]:
        self._buf.extend(data)
        out: list[ParseOutcome] = []
        buf = self._buf
        i = 0
        skipped = 0
        while i < len(buf):
            if buf[i] != SYNC_BYTE:
                skipped += 1
                i += 1
                continue
            if skipped:
                out.append(Resync(skipped))
                skipped = 0
            if len(buf) - i < FRAME_LEN:
                break  # partial frame, wait for more bytes
            frame = bytes(buf[i : i + FRAME_LEN])
            payload = frame[1:-1]
            value = int.from_bytes(frame[6:8], "big")
            if _checksum(payload) != frame[-1] or value > ADC_MAX:
                out.append(CorruptFrame(self._offset + i))
                i += 1  # drop only the sync byte, rescan inside the frame
                continue
            seq = frame[1]
            t_ms = int.from_bytes(frame[2:6], "big")
            out.append(SampleOutcome(seq, Sample(t_ms, value)))
            if self._last_seq is not None and (seq - self._last_seq) % 256 != 1:
                out.append(Gap((self._last_seq + 1) % 256, seq))
            self._last_seq = seq
            i += FRAME_LEN
        if skipped:
            out.append(Resync(skipped))
        del buf[:i]
        self._offset += i
        return out


def decode_all(data: bytes) -> list[ParseOutcome]:
    return FrameDecoder().feed(data)


def encode_stream(samples: Sequence[Sample], start_seq: int = 0) -> bytes:
    """Encode an ordered sample stream with a sequential frame counter."""
    return b"".join(
        encode_frame((start_seq + i) % 256, s) for i, s in enumerate(samples)
    )


def replay_file(
    path, sink: Callable[[bytes], None], speed: float = 0.0
) -> int:
    """Encode a waveform CSV frame by frame into `sink`.

    speed is a real-time multiplier: 1.0 paces frames at the recorded
    sample intervals, 2.0 twice as fast, 0 disables pacing entirely.
    Returns the number of frames sent. Refuses non-monotone timestamps.
    """
    samples = read_waveform(path)
    prev_t = None
    for i, sample in enumerate(samples):
        if prev_t is not None:
            if sample.t_ms <= prev_t:
                raise StreamOrderError(
                    f"sample {i} at t_ms={sample.t_ms} does not advance past {prev_t}"
                )
            if speed > 0:
                time.sleep((sample.t_ms - prev_t) / 1000.0 / speed)
        prev_t = sample.t_ms
        sink(encode_frame(i % 256, sample))
    return len(samples)
