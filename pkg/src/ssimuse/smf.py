"""Standard MIDI File ingestion.

Reads SMF format 0 and 1 byte streams directly (MThd/MTrk chunks,
variable-length delta times, running status) and reduces them to quantized
note-onset events on a steps-per-quarter grid. Only onsets are kept: note-offs
and durations carry no information for onset piano rolls. A small writer,
:func:`write_smf`, exists so tests and demo scripts can build fixture files
without an external MIDI dependency.
"""

from __future__ import annotations

from dataclasses import dataclass
from fnmatch import fnmatchcase
from typing import Iterable, Optional

from .errors import EmptySelection, MalformedFile, UnsupportedDivision

_NOTE_OFF = 0x80
_NOTE_ON = 0x90
_META = 0xFF
_SYSEX = (0xF0, 0xF7)
# Data-byte counts for channel messages, keyed by the high status nibble.
_CHANNEL_DATA_LEN = {0x80: 2, 0x90: 2, 0xA0: 2, 0xB0: 2, 0xC0: 1, 0xD0: 1, 0xE0: 2}


@dataclass(frozen=True, order=True)
class NoteEvent:
    """One quantized note onset.

    ``step`` is the grid index (``steps_per_quarter`` steps per quarter note),
    ``pitch`` the MIDI note number, ``velocity`` the strike velocity.
    """

    step: int
    pitch: int
    velocity: int

    def __post_init__(self) -> None:
        if self.step < 0:
            raise ValueError(f"step must be >= 0, got {self.step}")
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch must be in [0, 127], got {self.pitch}")
        if not 1 <= self.velocity <= 127:
            raise ValueError(f"velocity must be in [1, 127], got {self.velocity}")


@dataclass(frozen=True)
class QuantizedTrackSet:
    """All selected note onsets of one file on a common step grid.

    ``meter_ok`` is True iff every time-signature event in the file says 4/4
    (files without any time signature default to 4/4 per the SMF spec).
    Events are sorted by (step, pitch) and deduplicated: colliding onsets at
    the same (step, pitch) keep the maximum velocity.
    """

    events: tuple[NoteEvent, ...]
    steps_per_quarter: int
    total_steps: int
    source_id: str
    meter_ok: bool


def quantize_tick(tick: int, ticks_per_quarter: int, steps_per_quarter: int) -> int:
    """Map an absolute tick to the nearest grid step, rounding half up."""
    return (2 * tick * steps_per_quarter + ticks_per_quarter) // (2 * ticks_per_quarter)


class _Reader:
    """Cursor over a byte buffer with the integer readers SMF needs."""

    def __init__(self, data: bytes, pos: int = 0, end: int | None = None):
        self.data = data
        self.pos = pos
        self.end = len(data) if end is None else end

    def take(self, n: int) -> bytes:
        if self.pos + n > self.end:
            raise MalformedFile("unexpected end of data")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return int.from_bytes(self.take(2), "big")

    def u32(self) -> int:
        return int.from_bytes(self.take(4), "big")

    def varlen(self) -> int:
        value = 0
        for _ in range(4):
            byte = self.u8()
            value = (value << 7) | (byte & 0x7F)
            if not byte & 0x80:
                return value
        raise MalformedFile("variable-length quantity longer than 4 bytes")


@dataclass
class _RawTrack:
    name: str = ""
    onsets: list[tuple[int, int, int]] | None = None  # (tick, pitch, velocity)
    time_signatures: list[tuple[int, int]] | None = None  # (numerator, denominator)
    end_tick: int = 0

    def __post_init__(self) -> None:
        self.onsets = [] if self.onsets is None else self.onsets
        self.time_signatures = [] if self.time_signatures is None else self.time_signatures


def _parse_track_chunk(reader: _Reader) -> _RawTrack:
    track = _RawTrack()
    running_status: int | None = None
    tick = 0
    while reader.pos < reader.end:
        tick += reader.varlen()
        status = reader.u8()
        if status < 0x80:
            # Running status: the byte we just read is the first data byte.
            if running_status is None:
                raise MalformedFile("data byte with no running status")
            reader.pos -= 1
            status = running_status
        if status == _META:
            running_status = None
            meta_type = reader.u8()
            payload = reader.take(reader.varlen())
            if meta_type == 0x03 and not track.name:
                track.name = payload.decode("latin-1", errors="replace")
            elif meta_type == 0x58 and len(payload) >= 2:
                track.time_signatures.append((payload[0], 1 << payload[1]))
            elif meta_type == 0x2F:
                track.end_tick = tick
                return track
        elif status in _SYSEX:
            running_status = None
            reader.take(reader.varlen())
        else:
            kind = status & 0xF0
            if kind not in _CHANNEL_DATA_LEN:
                raise MalformedFile(f"unexpected status byte 0x{status:02x}")
            running_status = status
            data = reader.take(_CHANNEL_DATA_LEN[kind])
            if kind == _NOTE_ON and data[1] > 0:
                track.onsets.append((tick, data[0], data[1]))
            # Note-offs and velocity-0 note-ons end sustains we do not model.
    # Tolerate a missing end-of-track meta when the chunk ends cleanly.
    track.end_tick = tick
    return track


def _parse_chunks(data: bytes) -> tuple[int, list[_RawTrack]]:
    reader = _Reader(data)
    if reader.take(4) != b"MThd":
        raise MalformedFile("missing MThd header")
    header_len = reader.u32()
    if header_len < 6:
        raise MalformedFile(f"MThd length {header_len} < 6")
    fmt = reader.u16()
    ntrks = reader.u16()
    division = reader.u16()
    reader.take(header_len - 6)
    if fmt not in (0, 1):
        raise MalformedFile(f"unsupported SMF format {fmt}")
    if division & 0x8000:
        raise UnsupportedDivision("SMPTE timecode division is not supported")
    if division == 0:
        raise MalformedFile("division (ticks per quarter) must be positive")
    if fmt == 0 and ntrks != 1:
        raise MalformedFile(f"format 0 must declare 1 track, got {ntrks}")

    tracks: list[_RawTrack] = []
    while len(tracks) < ntrks and reader.pos < reader.end:
        chunk_type = reader.take(4)
        chunk_len = reader.u32()
        if reader.pos + chunk_len > reader.end:
            raise MalformedFile("chunk length overruns file")
        if chunk_type == b"MTrk":
            tracks.append(_parse_track_chunk(_Reader(data, reader.pos, reader.pos + chunk_len)))
        # Alien chunk types are skipped per the SMF spec.
        reader.pos += chunk_len
    if len(tracks) != ntrks:
        raise MalformedFile(f"header declares {ntrks} tracks, found {len(tracks)}")
    return division, tracks


def _track_selected(index: int, name: str, track_filter: Iterable[int | str]) -> bool:
    for item in track_filter:
        if isinstance(item, int):
            if index == item:
                return True
        elif fnmatchcase(name, str(item)):
            return True
    return False


def parse_midi(
    data: bytes,
    track_filter: Iterable[int | str] | None = None,
    *,
    steps_per_quarter: int = 4,
    source_id: str = "",
) -> QuantizedTrackSet:
    """Parse an SMF byte stream into a :class:`QuantizedTrackSet`.

    Args:
        data: Raw bytes of a format 0 or 1 Standard MIDI File.
        track_filter: Optional collection of track indices (int) and/or glob
            patterns matched against track names. ``None`` selects all tracks.
        steps_per_quarter: Grid resolution; 4 puts one bar of 4/4 on 16 steps.
        source_id: Opaque identifier propagated into the result (file name,
            usually).

    Raises:
        MalformedFile: bad header/chunk structure (or SMF format 2).
        UnsupportedDivision: SMPTE timecode division.
        EmptySelection: ``track_filter`` was given but matched no notes.
    """
    if steps_per_quarter < 1:
        raise ValueError("steps_per_quarter must be positive")
    ticks_per_quarter, tracks = _parse_chunks(data)

    meter_ok = all(
        sig == (4, 4) for track in tracks for sig in track.time_signatures
    )

    if track_filter is None:
        selected = list(tracks)
    else:
        spec = list(track_filter)
        selected = [
            t for i, t in enumerate(tracks) if _track_selected(i, t.name, spec)
        ]

    best: dict[tuple[int, int], int] = {}
    end_step = 0
    for track in selected:
        end_step = max(end_step, quantize_tick(track.end_tick, ticks_per_quarter, steps_per_quarter))
        for tick, pitch, velocity in track.onsets:
            step = quantize_tick(tick, ticks_per_quarter, steps_per_quarter)
            key = (step, pitch)
            if velocity > best.get(key, 0):
                best[key] = velocity

    if track_filter is not None and not best:
        raise EmptySelection("track filter matched no note events")

    events = tuple(NoteEvent(s, p, v) for (s, p), v in sorted(best.items()))
    if events:
        end_step = max(end_step, events[-1].step + 1)
    return QuantizedTrackSet(
        events=events,
        steps_per_quarter=steps_per_quarter,
        total_steps=max(end_step, 1),
        source_id=source_id,
        meter_ok=meter_ok,
    )


def filter_meter(ts: QuantizedTrackSet) -> Optional[QuantizedTrackSet]:
    """Return ``ts`` if it is 4/4 throughout, else ``None`` (rejected).

    Rejection is a normal outcome, not an error: corpus loaders drop the file
    and move on. Files without any time-signature event count as 4/4.
    """
    return ts if ts.meter_ok else None


def _vlq(value: int) -> bytes:
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def write_smf(
    tracks: list[dict],
    *,
    ticks_per_quarter: int = 480,
) -> bytes:
    """Serialize tracks to SMF bytes (format 1; format 0 when one track).

    Each track dict may carry ``name`` (str), ``time_signature`` as a
    ``(numerator, denominator)`` pair, and ``notes`` as an iterable of
    ``(tick, pitch, velocity, duration_ticks)``. Intended for fixtures and
    demos, not as a general-purpose MIDI writer.
    """
    fmt = 0 if len(tracks) == 1 else 1
    chunks = [b"MThd" + (6).to_bytes(4, "big") + fmt.to_bytes(2, "big")
              + len(tracks).to_bytes(2, "big") + ticks_per_quarter.to_bytes(2, "big")]
    for track in tracks:
        events: list[tuple[int, int, bytes]] = []  # (tick, order, payload)
        if track.get("name"):
            name = track["name"].encode("latin-1")
            events.append((0, 0, bytes([0xFF, 0x03]) + _vlq(len(name)) + name))
        if track.get("time_signature"):
            num, den = track["time_signature"]
            events.append((0, 1, bytes([0xFF, 0x58, 4, num, den.bit_length() - 1, 24, 8])))
        for tick, pitch, velocity, duration in track.get("notes", ()):
            events.append((tick, 2, bytes([0x90, pitch, velocity])))
            events.append((tick + max(1, duration), 3, bytes([0x80, pitch, 0])))
        events.sort(key=lambda e: (e[0], e[1]))
        body = bytearray()
        now = 0
        for tick, _, payload in events:
            body += _vlq(tick - now) + payload
            now = tick
        body += _vlq(0) + bytes([0xFF, 0x2F, 0x00])
        chunks.append(b"MTrk" + len(body).to_bytes(4, "big") + bytes(body))
    return b"".join(chunks)
