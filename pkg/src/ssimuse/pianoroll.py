"""Piano-roll construction, segmentation, and transformation.

A roll is a T x 128 step-by-pitch matrix of onsets: binary rolls mark onsets
with 1, velocity rolls store the strike velocity (1..127). Rolls fold to a
T x 12 pitch-class count matrix for octave-invariant structure comparison,
and segment into fixed-length clips (16 bars by default) for scoring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadClipLength, EmptyInput, OutOfRange, WrongFlavor
from .smf import QuantizedTrackSet

BINARY = "binary"
VELOCITY = "velocity"

NUM_PITCHES = 128
NUM_PITCH_CLASSES = 12
DEFAULT_CLIP_STEPS = 256


@dataclass(frozen=True)
class PianoRoll:
    """Onset matrix with its grid metadata. ``grid`` is read-only."""

    grid: np.ndarray  # (T, 128) uint8
    flavor: str
    steps_per_bar: int
    source_id: str = ""

    def __post_init__(self) -> None:
        if self.flavor not in (BINARY, VELOCITY):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if self.grid.ndim != 2 or self.grid.shape[1] != NUM_PITCHES:
            raise ValueError(f"grid must be (T, {NUM_PITCHES}), got {self.grid.shape}")
        self.grid.setflags(write=False)

    @property
    def steps(self) -> int:
        return self.grid.shape[0]


@dataclass(frozen=True)
class FoldedRoll:
    """T x 12 pitch-class onset counts (octave-folded roll)."""

    grid: np.ndarray  # (T, 12) int16

    def __post_init__(self) -> None:
        if self.grid.ndim != 2 or self.grid.shape[1] != NUM_PITCH_CLASSES:
            raise ValueError(f"grid must be (T, {NUM_PITCH_CLASSES}), got {self.grid.shape}")
        self.grid.setflags(write=False)

    @property
    def steps(self) -> int:
        return self.grid.shape[0]


@dataclass(frozen=True)
class Clip:
    """A fixed-length excerpt of a roll, tagged with its provenance."""

    roll: PianoRoll
    origin: tuple[str, int]  # (source_id, start_step)

    @property
    def steps(self) -> int:
        return self.roll.steps

    @property
    def bars(self) -> int:
        return self.roll.steps // self.roll.steps_per_bar

    @property
    def empty(self) -> bool:
        return not self.roll.grid.any()


def build_roll(ts: QuantizedTrackSet, flavor: str) -> PianoRoll:
    """Rasterize a quantized track set; length is padded up to a bar multiple.

    Raises EmptyInput when the track set has no onsets.
    """
    if not ts.events:
        raise EmptyInput(f"no note events in {ts.source_id or 'input'}")
    steps_per_bar = 4 * ts.steps_per_quarter
    steps = -(-ts.total_steps // steps_per_bar) * steps_per_bar
    grid = np.zeros((steps, NUM_PITCHES), dtype=np.uint8)
    for event in ts.events:
        value = 1 if flavor == BINARY else event.velocity
        # Keep the loudest strike if dedup upstream was skipped.
        if value > grid[event.step, event.pitch]:
            grid[event.step, event.pitch] = value
    return PianoRoll(grid=grid, flavor=flavor, steps_per_bar=steps_per_bar,
                     source_id=ts.source_id)


def fold_pitch_classes(pr: PianoRoll) -> FoldedRoll:
    """Sum the 128 pitches modulo 12 into per-step pitch-class counts."""
    if pr.flavor != BINARY:
        raise WrongFlavor("pitch-class folding is defined for binary rolls only")
    folded = np.zeros((pr.steps, NUM_PITCH_CLASSES), dtype=np.int16)
    for pc in range(NUM_PITCH_CLASSES):
        folded[:, pc] = pr.grid[:, pc::NUM_PITCH_CLASSES].sum(axis=1)
    return FoldedRoll(grid=folded)


def segment_clips(pr: PianoRoll, clip_steps: int = DEFAULT_CLIP_STEPS) -> list[Clip]:
    """Cut a roll into consecutive non-overlapping clips.

    A trailing remainder shorter than ``clip_steps`` is dropped so every clip
    covers a full, exact number of bars.
    """
    if clip_steps <= 0 or clip_steps % pr.steps_per_bar:
        raise BadClipLength(
            f"clip_steps {clip_steps} is not a positive multiple of {pr.steps_per_bar}"
        )
    clips = []
    for start in range(0, pr.steps - clip_steps + 1, clip_steps):
        roll = PianoRoll(
            grid=pr.grid[start : start + clip_steps].copy(),
            flavor=pr.flavor,
            steps_per_bar=pr.steps_per_bar,
            source_id=pr.source_id,
        )
        clips.append(Clip(roll=roll, origin=(pr.source_id, start)))
    return clips


def paste_segment(dst: Clip, src: Clip, src_bar: int, dst_bar: int, n_bars: int) -> Clip:
    """Overwrite ``n_bars`` bars of ``dst`` with bars copied from ``src``.

    All 128 pitch rows of the destination span are replaced verbatim (exact
    replication, not a merge). Returns a new clip; ``dst`` is untouched.
    """
    if dst.roll.flavor != src.roll.flavor:
        raise WrongFlavor("cannot paste between rolls of different flavors")
    if dst.roll.steps_per_bar != src.roll.steps_per_bar:
        raise ValueError("clips disagree on steps per bar")
    if n_bars < 1:
        raise OutOfRange(f"n_bars must be >= 1, got {n_bars}")
    if src_bar < 0 or src_bar + n_bars > src.bars:
        raise OutOfRange(f"source bars [{src_bar}, {src_bar + n_bars}) exceed {src.bars}")
    if dst_bar < 0 or dst_bar + n_bars > dst.bars:
        raise OutOfRange(f"destination bars [{dst_bar}, {dst_bar + n_bars}) exceed {dst.bars}")
    spb = dst.roll.steps_per_bar
    grid = dst.roll.grid.copy()
    grid[dst_bar * spb : (dst_bar + n_bars) * spb] = (
        src.roll.grid[src_bar * spb : (src_bar + n_bars) * spb]
    )
    roll = PianoRoll(grid=grid, flavor=dst.roll.flavor, steps_per_bar=spb,
                     source_id=dst.roll.source_id)
    return Clip(roll=roll, origin=dst.origin)


def binarize(clip: Clip) -> Clip:
    """Binary view of a clip (velocity onsets collapse to 1); no-op if binary."""
    if clip.roll.flavor == BINARY:
        return clip
    grid = (clip.roll.grid > 0).astype(np.uint8)
    roll = PianoRoll(grid=grid, flavor=BINARY, steps_per_bar=clip.roll.steps_per_bar,
                     source_id=clip.roll.source_id)
    return Clip(roll=roll, origin=clip.origin)


def write_pgm(pr: PianoRoll, path) -> None:
    """Dump a roll as a portable greymap (one pixel per cell, high pitch on top)."""
    maxval = 1 if pr.flavor == BINARY else 127
    image = pr.grid.T[::-1]  # pitch rows, descending
    header = f"P5 {image.shape[1]} {image.shape[0]} {maxval}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(image.astype(np.uint8).tobytes())


def write_csv(pr: PianoRoll, path) -> None:
    """Dump nonzero cells as ``step,pitch,value`` rows."""
    steps, pitches = np.nonzero(pr.grid)
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("step,pitch,value\n")
        for step, pitch in zip(steps, pitches):
            fh.write(f"{step},{pitch},{pr.grid[step, pitch]}\n")
