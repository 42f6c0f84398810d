"""Composition similarity over binary piano rolls.

The score multiplies two components. A density term compares the overall
note density of the two clips. A structure term folds both rolls to pitch
classes, takes the Jaccard index of active cells over sliding windows
(weighted so highly overlapping windows dominate), and maximizes over all
cyclic time/pitch-class shifts of one roll, down-weighting time shifts
linearly. The shift search makes the structure term invariant to octave
transposition and tolerant of misaligned repeats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, ShapeMismatch, WrongFlavor
from .pianoroll import BINARY, NUM_PITCH_CLASSES, Clip, FoldedRoll, fold_pitch_classes


@dataclass(frozen=True)
class BParams:
    """Knobs of the binary metric.

    ``weight_exponent`` is the power applied to each window's similarity to
    form its weight; ``lam`` scales the linear time-shift penalty; ``c1``
    stabilizes the density ratio (K1=0.01 with unit dynamic range).
    """

    window_steps: int = 16
    hop_steps: int = 16
    weight_exponent: float = 1.0
    lam: float = 0.5
    c1: float = 1e-4

    def __post_init__(self) -> None:
        if self.window_steps < 1 or self.hop_steps < 1:
            raise ValueError("window_steps and hop_steps must be positive")
        if self.weight_exponent < 0:
            raise ValueError("weight_exponent must be nonnegative")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must be in [0, 1]")
        if self.c1 <= 0:
            raise ValueError("c1 must be positive")


@dataclass(frozen=True)
class BReport:
    """Score breakdown for one clip pair.

    ``per_window_s`` holds the raw (unweighted, unpenalized) window
    similarities at the winning shift.
    """

    l: float
    s: float
    ssimuse_b: float
    best_shift: tuple[int, int]
    per_window_s: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "l": self.l,
            "s": self.s,
            "ssimuse_b": self.ssimuse_b,
            "best_shift": list(self.best_shift),
            "per_window_s": list(self.per_window_s),
        }

    def csv_row(self) -> str:
        return (f"{self.l:.12g},{self.s:.12g},{self.ssimuse_b:.12g},"
                f"{self.best_shift[0]},{self.best_shift[1]}")


def _require_binary_pair(x: Clip, y: Clip) -> None:
    if x.roll.flavor != BINARY or y.roll.flavor != BINARY:
        raise WrongFlavor("binary metric needs binary clips")
    if x.steps != y.steps:
        raise LengthMismatch(f"clip lengths differ: {x.steps} vs {y.steps}")


def density_l(x: Clip, y: Clip, c1: float = 1e-4) -> float:
    """Note-density consistency: (2 μx μy + C1) / (μx² + μy² + C1).

    Means are taken over the full T x 128 binary grid. Equals 1 iff the two
    densities match; both-empty clips score 1 through the stabilizer.
    """
    _require_binary_pair(x, y)
    mx = float(x.roll.grid.mean())
    my = float(y.roll.grid.mean())
    return (2.0 * mx * my + c1) / (mx * mx + my * my + c1)


def window_jaccard(xw: np.ndarray, yw: np.ndarray) -> float:
    """Jaccard index of active cells in two equally-shaped windows.

    Cells count as active when > 0 (folded counts are binarized). Two fully
    silent windows agree perfectly and score 1.
    """
    xw = np.asarray(xw)
    yw = np.asarray(yw)
    if xw.shape != yw.shape:
        raise ShapeMismatch(f"window shapes differ: {xw.shape} vs {yw.shape}")
    xa = xw > 0
    ya = yw > 0
    union = int(np.logical_or(xa, ya).sum())
    if union == 0:
        return 1.0
    return float(np.logical_and(xa, ya).sum()) / union


def _window_starts(steps: int, window: int, hop: int) -> np.ndarray:
    if window > steps:
        raise ValueError(f"window of {window} steps exceeds clip length {steps}")
    return np.arange(0, steps - window + 1, hop)


def _window_scores(xb: np.ndarray, yb: np.ndarray, window: int, hop: int) -> np.ndarray:
    starts = _window_starts(xb.shape[0], window, hop)
    return np.array([
        window_jaccard(xb[o : o + window], yb[o : o + window]) for o in starts
    ])


def _aggregate(scores: np.ndarray, exponent: float) -> float:
    weights = scores**exponent
    total = weights.sum()
    if total <= 0.0:
        return 0.0
    return float((weights * scores).sum() / total)


def weighted_window_s(xf: FoldedRoll, yf: FoldedRoll, params: BParams) -> float:
    """Window-weighted structure similarity at zero shift.

    Each window's Jaccard score s_i is weighted by s_i**exponent, so strongly
    overlapping windows dominate and near-misses fade; all-zero weights give 0.
    """
    if xf.steps != yf.steps:
        raise LengthMismatch(f"folded lengths differ: {xf.steps} vs {yf.steps}")
    scores = _window_scores(xf.grid, yf.grid, params.window_steps, params.hop_steps)
    return _aggregate(scores, params.weight_exponent)


_GATHER_CACHE: dict[int, np.ndarray] = {}


def _gather_index(steps: int) -> np.ndarray:
    """[d, i] -> (i - d) % steps, cached per clip length."""
    idx = _GATHER_CACHE.get(steps)
    if idx is None:
        ii = np.arange(steps)
        idx = ((ii[None, :] - ii[:, None]) % steps).astype(np.intp)
        _GATHER_CACHE[steps] = idx
    return idx


def _window_sums(values: np.ndarray, starts: np.ndarray, window: int,
                 tiling: bool) -> np.ndarray:
    """Sums of ``values`` over [start, start+window) along the last axis.

    Inputs are small integer counts, exact in float32; accumulation happens
    in float64, so both paths return identical exact integers.
    """
    if tiling:
        shape = values.shape[:-1] + (values.shape[-1] // window, window)
        return values.reshape(shape).sum(axis=-1, dtype=np.float64)
    pad = np.zeros(values.shape[:-1] + (1,), dtype=np.float64)
    csum = np.concatenate([pad, np.cumsum(values, axis=-1, dtype=np.float64)], axis=-1)
    return csum[..., starts + window] - csum[..., starts]


def _all_shift_scores(xb: np.ndarray, yb: np.ndarray, params: BParams) -> np.ndarray:
    """Aggregated window similarity for every cyclic shift: array (12, T).

    Entry [dp, d] is the weighted window score between x and y rolled by
    d steps in time and dp pitch classes. Exploits that windows span all
    pitch columns, so only the intersection count depends on dp. The large
    intermediates hold small integer counts and live in float32 (exact);
    ratios are formed in float64.
    """
    steps = xb.shape[0]
    window = params.window_steps
    starts = _window_starts(steps, window, params.hop_steps)
    tiling = params.hop_steps == window and steps % window == 0

    # Step-pair intersection counts per pitch rotation: corr[dp][i, u] is the
    # number of pitch classes active both at x step i and y step u under dp.
    xf = xb.astype(np.float32)
    corr = np.empty((NUM_PITCH_CLASSES, steps, steps), dtype=np.float32)
    for dp in range(NUM_PITCH_CLASSES):
        np.matmul(xf, np.roll(yb, dp, axis=1).astype(np.float32).T, out=corr[dp])
    gather = _gather_index(steps)
    inter_step = corr[:, np.arange(steps)[None, :], gather]  # [dp, d, i]
    inter = _window_sums(inter_step, starts, window, tiling)  # [dp, d, j]

    x_count = _window_sums(xb.sum(axis=1).astype(np.float32), starts, window, tiling)
    y_row = yb.sum(axis=1).astype(np.float32)
    y_count = _window_sums(y_row[gather], starts, window, tiling)  # [d, j]

    union = x_count[None, None, :] + y_count[None, :, :] - inter
    scores = np.divide(inter, union, out=np.ones_like(inter), where=union > 0)
    weights = scores**params.weight_exponent
    totals = weights.sum(axis=-1)
    shat = np.divide((weights * scores).sum(axis=-1), totals,
                     out=np.zeros_like(totals), where=totals > 0)
    return shat


def shift_search_s(xf: FoldedRoll, yf: FoldedRoll,
                   params: BParams) -> tuple[float, tuple[int, int]]:
    """Maximum penalized structure similarity over all cyclic shifts.

    Shifts range over every time offset Δt in (-T, T) and every pitch-class
    rotation Δp in [0, 12); each candidate scores ŝ(x, shift(y)) times the
    penalty 1 - lam*|Δt|/T. Ties resolve to the smallest |Δt|, then the
    smallest Δp, then nonnegative Δt.
    """
    if xf.steps != yf.steps:
        raise LengthMismatch(f"folded lengths differ: {xf.steps} vs {yf.steps}")
    steps = xf.steps
    xb = xf.grid > 0
    yb = yf.grid > 0
    shat = _all_shift_scores(xb, yb, params)  # (12, T)

    d = np.arange(steps)
    score_pos = shat * (1.0 - params.lam * d / steps)  # Δt = d
    score_neg = shat * (1.0 - params.lam * (steps - d) / steps)  # Δt = d - T
    best = float(score_pos.max())
    if steps > 1:
        best = max(best, float(score_neg[:, 1:].max()))

    # (|Δt|, Δp, sign) keys pick the deterministic argmax among exact ties.
    candidates = []
    for dp, dd in zip(*np.nonzero(score_pos == best)):
        candidates.append((int(dd), int(dp), 0, int(dd)))
    for dp, dd in zip(*np.nonzero(score_neg == best)):
        if dd:
            candidates.append((steps - int(dd), int(dp), 1, int(dd) - steps))
    _, dp, _, dt = min(candidates)
    return best, (dt, dp)


def ssimuse_b(x: Clip, y: Clip, params: BParams = BParams()) -> BReport:
    """Composition similarity of two binary clips: density times structure.

    The windows of the shift search are anchored to the first operand's
    frame, which would leak a slight operand-order dependence into the score;
    the operands are therefore ordered canonically by content before the
    search, making the result an exact function of the unordered pair.
    ``best_shift`` is always expressed as the shift to apply to ``y``.
    """
    _require_binary_pair(x, y)
    l = density_l(x, y, params.c1)
    xf = fold_pitch_classes(x.roll)
    yf = fold_pitch_classes(y.roll)
    swapped = x.roll.grid.tobytes() > y.roll.grid.tobytes()
    first, second = (yf, xf) if swapped else (xf, yf)
    s, shift = shift_search_s(first, second, params)
    shifted = np.roll(np.roll(second.grid, shift[0], axis=0), shift[1], axis=1)
    per_window = _window_scores(first.grid, shifted, params.window_steps,
                                params.hop_steps)
    best = (-shift[0], (-shift[1]) % NUM_PITCH_CLASSES) if swapped else shift
    return BReport(
        l=l,
        s=s,
        ssimuse_b=l * s,
        best_shift=best,
        per_window_s=tuple(float(v) for v in per_window),
    )
