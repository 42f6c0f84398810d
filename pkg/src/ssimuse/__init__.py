"""Structural-similarity metrics for symbolic music piano rolls.

Two scores over 16-bar clips: a composition score on binary onset rolls
(note density times shift-searched, octave-folded Jaccard structure) and a
performance score on velocity rolls (onset dynamics plus DTW-aligned
velocity-curve correlation). A forced-replication benchmark harness pastes
exact bar copies between unrelated clips and validates that the scores
separate replication levels.
"""

from .bench import (BenchConfig, BenchResult, PairOutcome, SweepConfig, SweepRow,
                    baseline_pairs, build_pools, level_scores, run_battery,
                    run_bench, run_sweep, summary_rows, synthesize_targets)
from .binary import (BParams, BReport, density_l, shift_search_s, ssimuse_b,
                     weighted_window_s, window_jaccard)
from .corpus import load_directory, load_file
from .errors import (BadClipLength, EmptyClip, EmptyCorpus, EmptyCurve,
                     EmptyInput, EmptySelection, InsufficientCorpus,
                     LengthMismatch, MalformedFile, OutOfRange, ShapeMismatch,
                     SsimuseError, UnsupportedDivision, WrongFlavor)
from .pianoroll import (BINARY, VELOCITY, Clip, FoldedRoll, PianoRoll, binarize,
                        build_roll, fold_pitch_classes, paste_segment,
                        segment_clips, write_csv, write_pgm)
from .smf import NoteEvent, QuantizedTrackSet, filter_meter, parse_midi, write_smf
from .stats import chi2_sf, kruskal_wallis, reg_gamma_q
from .velocity import (VelocityCurve, VParams, VReport, dtw_align, dynamic_c,
                       dynamic_l, extract_curve, onset_stats, ssimuse_v,
                       velocity_s)

__version__ = "0.1.0"

__all__ = [
    "BINARY", "VELOCITY", "BParams", "BReport", "BadClipLength", "BenchConfig",
    "BenchResult", "Clip", "EmptyClip", "EmptyCorpus", "EmptyCurve",
    "EmptyInput", "EmptySelection", "FoldedRoll", "InsufficientCorpus",
    "LengthMismatch", "MalformedFile", "NoteEvent", "OutOfRange",
    "PairOutcome", "PianoRoll", "QuantizedTrackSet", "ShapeMismatch",
    "SsimuseError", "SweepConfig", "SweepRow", "UnsupportedDivision",
    "VParams", "VReport", "VelocityCurve", "WrongFlavor", "baseline_pairs",
    "binarize", "build_pools", "build_roll", "chi2_sf", "density_l",
    "dtw_align", "dynamic_c", "dynamic_l", "extract_curve", "filter_meter",
    "fold_pitch_classes", "kruskal_wallis", "level_scores", "load_directory",
    "load_file", "onset_stats", "parse_midi", "paste_segment", "reg_gamma_q",
    "run_battery", "run_bench", "run_sweep", "segment_clips", "shift_search_s",
    "ssimuse_b", "ssimuse_v", "summary_rows", "synthesize_targets",
    "velocity_s", "weighted_window_s", "window_jaccard", "write_csv",
    "write_pgm", "write_smf",
]
