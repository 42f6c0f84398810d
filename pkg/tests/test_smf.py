import numpy as np
import pytest

from ssimuse import (EmptySelection, MalformedFile, NoteEvent, UnsupportedDivision,
                     filter_meter, parse_midi, write_smf)
from ssimuse.smf import quantize_tick


def one_track(notes, name=None, time_signature=(4, 4), tpq=480):
    return write_smf([{"name": name, "time_signature": time_signature,
                       "notes": notes}], ticks_per_quarter=tpq)


def test_quarter_note_is_four_steps():
    data = one_track([(480, 60, 80, 100)])
    ts = parse_midi(data)
    assert ts.events == (NoteEvent(step=4, pitch=60, velocity=80),)


def test_note_off_produces_no_event():
    # write_smf emits a note-off for every note; only the onset must survive
    data = one_track([(0, 60, 64, 480)])
    ts = parse_midi(data)
    assert len(ts.events) == 1
    assert ts.events[0].step == 0


def test_velocity_zero_note_on_is_a_note_off():
    # hand-rolled track: note-on v64 at 0, then running-status v0 at tick 10
    body = bytes([
        0x00, 0x90, 60, 64,
        0x0A, 62, 0,          # running status, velocity 0 -> off
        0x00, 0xFF, 0x2F, 0x00,
    ])
    data = (b"MThd" + (6).to_bytes(4, "big") + (0).to_bytes(2, "big")
            + (1).to_bytes(2, "big") + (480).to_bytes(2, "big")
            + b"MTrk" + len(body).to_bytes(4, "big") + body)
    ts = parse_midi(data)
    assert ts.events == (NoteEvent(step=0, pitch=60, velocity=64),)


def test_running_status_parses_multiple_onsets():
    body = bytes([
        0x00, 0x90, 60, 80,
        0x00, 64, 70,         # running status note-on
        0x00, 67, 60,
        0x00, 0xFF, 0x2F, 0x00,
    ])
    data = (b"MThd" + (6).to_bytes(4, "big") + (0).to_bytes(2, "big")
            + (1).to_bytes(2, "big") + (480).to_bytes(2, "big")
            + b"MTrk" + len(body).to_bytes(4, "big") + body)
    ts = parse_midi(data)
    assert [(e.pitch, e.velocity) for e in ts.events] == [(60, 80), (64, 70), (67, 60)]


def test_track_index_filter():
    data = write_smf([
        {"name": "melody", "time_signature": (4, 4), "notes": [(0, 60, 80, 100)]},
        {"name": "bass", "notes": [(0, 36, 90, 100)]},
    ])
    ts = parse_midi(data, track_filter={1})
    assert [e.pitch for e in ts.events] == [36]


def test_track_name_glob_filter():
    data = write_smf([
        {"name": "melody", "time_signature": (4, 4), "notes": [(0, 60, 80, 100)]},
        {"name": "bass", "notes": [(0, 36, 90, 100)]},
    ])
    ts = parse_midi(data, track_filter=["mel*"])
    assert [e.pitch for e in ts.events] == [60]


def test_empty_selection_raises():
    data = one_track([(0, 60, 80, 100)], name="piano")
    with pytest.raises(EmptySelection):
        parse_midi(data, track_filter=["guitar*", 7])


def test_collision_keeps_max_velocity():
    # ticks 10 and 20 both quantize to step 0 at tpq=480
    data = one_track([(10, 60, 50, 40), (20, 60, 90, 40)])
    ts = parse_midi(data)
    assert ts.events == (NoteEvent(step=0, pitch=60, velocity=90),)


def test_collision_across_tracks_keeps_max():
    data = write_smf([
        {"notes": [(0, 60, 50, 100)]},
        {"notes": [(0, 60, 88, 100)]},
    ])
    ts = parse_midi(data)
    assert ts.events == (NoteEvent(step=0, pitch=60, velocity=88),)


def test_rounding_is_half_up():
    # 60 ticks = 0.5 steps at tpq=480, spq=4 -> rounds up to 1
    assert quantize_tick(60, 480, 4) == 1
    assert quantize_tick(59, 480, 4) == 0
    data = one_track([(60, 60, 80, 40)])
    assert parse_midi(data).events[0].step == 1


def test_quantization_round_trip_on_exact_grid():
    tpq, spq = 480, 4
    rng = np.random.default_rng(5)
    for _ in range(200):
        step = int(rng.integers(0, 4096))
        tick = step * tpq // spq
        assert quantize_tick(tick, tpq, spq) == step


def test_event_count_matches_distinct_onsets():
    rng = np.random.default_rng(6)
    notes = [(int(rng.integers(0, 64)) * 120, int(rng.integers(40, 80)),
              int(rng.integers(1, 128)), 60) for _ in range(300)]
    ts = parse_midi(one_track(notes))
    distinct = {(tick // 120, pitch) for tick, pitch, _, _ in notes}
    assert len(ts.events) == len(distinct)
    assert list(ts.events) == sorted(ts.events, key=lambda e: (e.step, e.pitch))
    assert all(e.step < ts.total_steps for e in ts.events)


def test_determinism():
    data = one_track([(0, 60, 80, 100), (480, 62, 70, 100)])
    assert parse_midi(data, source_id="a") == parse_midi(data, source_id="a")


def test_meter_filter_rejects_non_four_four():
    waltz = one_track([(0, 60, 80, 100)], time_signature=(3, 4))
    ts = parse_midi(waltz)
    assert not ts.meter_ok
    assert filter_meter(ts) is None


def test_meter_filter_keeps_four_four():
    ts = parse_midi(one_track([(0, 60, 80, 100)]))
    assert ts.meter_ok
    assert filter_meter(ts) is ts


def test_missing_time_signature_defaults_to_four_four():
    data = write_smf([{"notes": [(0, 60, 80, 100)]}])
    ts = parse_midi(data)
    assert ts.meter_ok
    assert filter_meter(ts) is ts


def test_steps_per_quarter_override():
    data = one_track([(480, 60, 80, 100)])
    ts = parse_midi(data, steps_per_quarter=8)
    assert ts.events[0].step == 8
    assert ts.steps_per_quarter == 8


def test_bad_header_rejected():
    with pytest.raises(MalformedFile):
        parse_midi(b"XXXX" + bytes(20))


def test_truncated_file_rejected():
    data = one_track([(0, 60, 80, 100)])
    with pytest.raises(MalformedFile):
        parse_midi(data[:-5])


def test_format_two_rejected():
    data = (b"MThd" + (6).to_bytes(4, "big") + (2).to_bytes(2, "big")
            + (1).to_bytes(2, "big") + (480).to_bytes(2, "big"))
    with pytest.raises(MalformedFile):
        parse_midi(data)


def test_smpte_division_rejected():
    division = 0x8000 | (30 << 8) | 80
    data = (b"MThd" + (6).to_bytes(4, "big") + (0).to_bytes(2, "big")
            + (1).to_bytes(2, "big") + division.to_bytes(2, "big"))
    with pytest.raises(UnsupportedDivision):
        parse_midi(data)


def test_zero_division_rejected():
    data = (b"MThd" + (6).to_bytes(4, "big") + (0).to_bytes(2, "big")
            + (1).to_bytes(2, "big") + (0).to_bytes(2, "big"))
    with pytest.raises(MalformedFile):
        parse_midi(data)


def test_note_event_validation():
    with pytest.raises(ValueError):
        NoteEvent(step=-1, pitch=60, velocity=64)
    with pytest.raises(ValueError):
        NoteEvent(step=0, pitch=128, velocity=64)
    with pytest.raises(ValueError):
        NoteEvent(step=0, pitch=60, velocity=0)
