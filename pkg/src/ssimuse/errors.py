"""Exception types shared across the package."""


class SsimuseError(Exception):
    """Base class for all package-specific errors."""


class MalformedFile(SsimuseError):
    """The byte stream is not a structurally valid SMF format 0/1 file."""


class UnsupportedDivision(SsimuseError):
    """The file uses SMPTE timecode division instead of ticks per quarter."""


class EmptySelection(SsimuseError):
    """A track filter was given but matched no note events."""


class EmptyInput(SsimuseError):
    """An operation that needs note events received none."""


class WrongFlavor(SsimuseError):
    """A roll of the wrong flavor (binary vs velocity) was passed."""


class BadClipLength(SsimuseError):
    """Requested clip length is not a whole number of bars."""


class OutOfRange(SsimuseError):
    """A bar segment exceeds the clip bounds."""


class LengthMismatch(SsimuseError):
    """Two rolls or clips that must share a time length do not."""


class ShapeMismatch(SsimuseError):
    """Two windows that must share a shape do not."""


class EmptyClip(SsimuseError):
    """A clip with no onsets cannot be scored."""


class EmptyCurve(SsimuseError):
    """A velocity curve with no points cannot be aligned."""


class InsufficientCorpus(SsimuseError):
    """The corpus cannot supply the requested disjoint pools."""


class EmptyCorpus(SsimuseError):
    """An audit corpus directory contains no usable MIDI files."""
