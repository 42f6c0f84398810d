"""Load MIDI files and directories into scoring-ready clips."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

from .errors import SsimuseError
from .pianoroll import DEFAULT_CLIP_STEPS, VELOCITY, Clip, build_roll, segment_clips
from .smf import filter_meter, parse_midi


def load_file(
    path,
    *,
    flavor: str = VELOCITY,
    steps_per_quarter: int = 4,
    tracks: Iterable[int | str] | None = None,
    clip_steps: int = DEFAULT_CLIP_STEPS,
) -> list[Clip] | None:
    """Clips of one MIDI file, or ``None`` when its meter is not 4/4.

    Empty clips are kept (callers that pool clips drop them); pieces shorter
    than one clip yield an empty list.
    """
    path = Path(path)
    ts = parse_midi(path.read_bytes(), tracks, steps_per_quarter=steps_per_quarter,
                    source_id=path.name)
    ts = filter_meter(ts)
    if ts is None:
        return None
    if not ts.events:
        return []
    return segment_clips(build_roll(ts, flavor), clip_steps)


def load_directory(
    directory,
    *,
    flavor: str = VELOCITY,
    steps_per_quarter: int = 4,
    tracks: Iterable[int | str] | None = None,
    clip_steps: int = DEFAULT_CLIP_STEPS,
    on_skip=None,
) -> list[Clip]:
    """All usable clips under ``directory`` (*.mid / *.midi, sorted by name).

    Files that fail to parse or are not in 4/4 are skipped; ``on_skip``
    (path, reason) is called for each skip when given. Nonempty clips only.
    """
    clips: list[Clip] = []
    paths = sorted(p for p in Path(directory).iterdir()
                   if p.suffix.lower() in (".mid", ".midi"))
    for path in paths:
        try:
            file_clips = load_file(path, flavor=flavor,
                                   steps_per_quarter=steps_per_quarter,
                                   tracks=tracks, clip_steps=clip_steps)
        except (SsimuseError, OSError) as exc:
            if on_skip:
                on_skip(path, str(exc))
            continue
        if file_clips is None:
            if on_skip:
                on_skip(path, "meter is not 4/4 throughout")
            continue
        clips.extend(c for c in file_clips if not c.empty)
    return clips
