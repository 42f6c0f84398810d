"""Seeded synthetic MIDI corpora for demos and tests.

Real corpora are user-supplied; this generator exists so the benchmark and
the demo scripts have something deterministic to chew on. Pieces imitate pop
piano texture: a two-bar comping-plus-melody pattern looped with per-repeat
mutations (dropouts, neighbor-tone substitutions) under phrase-level dynamics
(a smooth random velocity arc plus per-note jitter).

Two corpus styles:

* ``songs`` — every piece gets its own pattern, key, register, and dynamic
  character. Unrelated pieces are genuinely dissimilar, the way distinct
  songs are; use this for replication benchmarks.
* ``covers`` — all pieces are mutated renditions of one shared pattern
  (think: forty covers of the same song). Clips share most of their
  structure, which is the regime where windowing hyperparameters matter
  least; use this for hyperparameter studies.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

MAJOR = (0, 2, 4, 5, 7, 9, 11)
MINOR = (0, 2, 3, 5, 7, 8, 10)

TICKS_PER_QUARTER = 480
_TICKS_PER_STEP = TICKS_PER_QUARTER // 4
_LOOP_BARS = 2
_TONIC = (0, 2, 4)  # scale-degree triads of the two-chord vamp
_RELATIVE = (5, 0, 2)
_COMP_MASK = (0, 2, 4, 6)  # eighth-note comping grid


def _smooth_walk(rng: np.random.Generator, n: int, window: int = 9) -> np.ndarray:
    """Unit-variance smooth random curve; the piece's dynamic arc."""
    raw = np.cumsum(rng.normal(0.0, 1.0, n + window))
    smooth = np.convolve(raw, np.ones(window) / window, mode="valid")[:n]
    smooth -= smooth.mean()
    sd = smooth.std()
    return smooth / sd if sd > 0 else smooth


def build_pattern(rng: np.random.Generator, mel_density: float = 0.9,
                  chordtone_pull: float = 0.8) -> list[tuple[int, str, object]]:
    """Two-bar skeleton: comping triads on the eighth grid plus a melody line.

    Entries are (step, kind, payload) with payload a chord degree-triple or a
    melody scale degree.
    """
    pattern: list[tuple[int, str, object]] = []
    for bar in range(_LOOP_BARS):
        chord = _TONIC if bar % 2 == 0 else _RELATIVE
        for eighth in _COMP_MASK:
            pattern.append((bar * 16 + eighth * 2, "chord", chord))
    degree = 9
    for step in range(_LOOP_BARS * 16):
        if rng.random() < mel_density:
            chord = _TONIC if (step // 16) % 2 == 0 else _RELATIVE
            if rng.random() < chordtone_pull:
                degree = int(rng.choice(chord)) + 7
            else:
                degree = int(np.clip(degree + rng.integers(-2, 3), 7, 12))
            pattern.append((step, "mel", degree))
    return pattern


def realize_pattern(
    rng: np.random.Generator,
    pattern: list[tuple[int, str, object]],
    *,
    bars: int,
    scale: tuple[int, ...],
    root: int,
    keep: float,
    substitute: float,
    center: float,
    spread: float,
    amp: float,
) -> list[tuple[int, int, int, int]]:
    """Loop a pattern over ``bars`` bars with mutations and dynamics."""
    arc = _smooth_walk(rng, bars * 16)

    def pitch(degree: int, octave: int = 0) -> int:
        octaves, index = divmod(degree, len(scale))
        return min(127, root + 12 * (octaves + octave) + scale[index])

    def velocity(step: int) -> int:
        value = center + amp * arc[step] + rng.normal(0.0, spread)
        return int(np.clip(round(value), 1, 127))

    notes: list[tuple[int, int, int, int]] = []
    for loop_start in range(0, bars * 16, _LOOP_BARS * 16):
        for step_in_loop, kind, payload in pattern:
            step = loop_start + step_in_loop
            if step >= bars * 16:
                continue
            tick = step * _TICKS_PER_STEP
            if kind == "chord":
                voicing = [pitch(payload[0], -1)] + [pitch(d) for d in payload]
                for note in voicing:
                    if rng.random() <= 0.96:
                        notes.append((tick, note, velocity(step), _TICKS_PER_STEP))
            else:
                if rng.random() > keep:
                    continue
                degree = payload
                if rng.random() < substitute:
                    degree = int(np.clip(degree + int(rng.choice((-1, 1))), 7, 12))
                notes.append((tick, pitch(degree), velocity(step), _TICKS_PER_STEP))
    return notes


def song_notes(rng: np.random.Generator, bars: int = 18) -> list[tuple[int, int, int, int]]:
    """One independent piece: own pattern, key, and dynamic character."""
    scale = MAJOR if rng.random() < 0.5 else MINOR
    root = int(rng.integers(44, 61))
    mel_density = float(rng.uniform(0.85, 0.95))
    keep = float(rng.uniform(0.9, 0.97))
    center = float(rng.uniform(64, 74))
    spread = float(rng.uniform(2.0, 12.0))
    amp = float(rng.uniform(2.0, 14.0))
    pattern = build_pattern(rng, mel_density=mel_density, chordtone_pull=0.85)
    return realize_pattern(rng, pattern, bars=bars, scale=scale, root=root,
                           keep=keep, substitute=0.1, center=center,
                           spread=spread, amp=amp)


def cover_notes(rng: np.random.Generator, pattern: list,
                bars: int = 18) -> list[tuple[int, int, int, int]]:
    """One rendition of a shared pattern: own key, mutations, and dynamics."""
    root = int(rng.integers(44, 61))
    keep = float(rng.uniform(0.82, 0.92))
    center = float(rng.uniform(64, 74))
    spread = float(rng.uniform(2.0, 12.0))
    amp = float(rng.uniform(2.0, 14.0))
    return realize_pattern(rng, pattern, bars=bars, scale=MAJOR, root=root,
                           keep=keep, substitute=0.12, center=center,
                           spread=spread, amp=amp)


def _track(name: str, notes: list) -> dict:
    return {"name": name, "time_signature": (4, 4), "notes": notes}


def synth_midi(seed, bars: int = 18, name: str = "piano") -> bytes:
    """SMF bytes of one synthetic 4/4 piece; ``seed`` feeds default_rng."""
    from .smf import write_smf

    rng = np.random.default_rng(seed)
    return write_smf([_track(name, song_notes(rng, bars=bars))],
                     ticks_per_quarter=TICKS_PER_QUARTER)


def synth_corpus(directory, n_pieces: int = 40, seed: int = 0, bars: int = 18,
                 style: str = "songs") -> list[Path]:
    """Write ``n_pieces`` synthetic MIDI files into ``directory``.

    Identical (seed, n_pieces, bars, style) always reproduce identical bytes.
    """
    from .smf import write_smf

    if style not in ("songs", "covers"):
        raise ValueError(f"style must be 'songs' or 'covers', got {style!r}")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    shared = None
    if style == "covers":
        shared = build_pattern(np.random.default_rng([seed, 0]))
    paths = []
    for index in range(n_pieces):
        name = f"piece{index:03d}"
        if style == "songs":
            rng = np.random.default_rng([seed, index])
            notes = song_notes(rng, bars=bars)
        else:
            rng = np.random.default_rng([seed, 1 + index])
            notes = cover_notes(rng, shared, bars=bars)
        path = directory / f"{name}.mid"
        path.write_bytes(write_smf([_track(name, notes)],
                                   ticks_per_quarter=TICKS_PER_QUARTER))
        paths.append(path)
    return paths
