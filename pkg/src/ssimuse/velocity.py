"""Performance-dynamics similarity over velocity piano rolls.

Three multiplicative components, all computed on note-on cells only so
silence never dilutes the statistics: a mean-velocity term, a velocity-spread
term, and a structure term that extracts each clip's per-step maximum
velocity curve, aligns the two curves with dynamic time warping, and
correlates the aligned sequences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyClip, EmptyCurve
from .pianoroll import Clip


@dataclass(frozen=True)
class VParams:
    """Stabilizer constants for unit-range velocities (v / 127).

    ``c3`` is always ``c2 / 2``, matching the convention the structure term
    inherits from the image metric.
    """

    c1: float = 1e-4
    c2: float = 9e-4
    velocity_scale: float = 127.0

    @property
    def c3(self) -> float:
        return self.c2 / 2.0

    def __post_init__(self) -> None:
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("c1 and c2 must be positive")
        if self.velocity_scale <= 0:
            raise ValueError("velocity_scale must be positive")


@dataclass(frozen=True)
class VelocityCurve:
    """Per-step maximum normalized velocity with silence steps removed."""

    values: np.ndarray  # float64, (n,)
    step_index: np.ndarray  # int64, (n,)

    def __post_init__(self) -> None:
        if self.values.shape != self.step_index.shape:
            raise ValueError("values and step_index must be parallel")
        self.values.setflags(write=False)
        self.step_index.setflags(write=False)


@dataclass(frozen=True)
class VReport:
    """Score breakdown for one velocity clip pair.

    ``degenerate`` flags pairs whose aligned curves were too short or
    constant, where the structure term falls back to 1 via the stabilizer.
    """

    l: float
    c: float
    s: float
    ssimuse_v: float
    dtw_path_len: int
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "l": self.l,
            "c": self.c,
            "s": self.s,
            "ssimuse_v": self.ssimuse_v,
            "dtw_path_len": self.dtw_path_len,
            "degenerate": self.degenerate,
        }

    def csv_row(self) -> str:
        return (f"{self.l:.12g},{self.c:.12g},{self.s:.12g},"
                f"{self.ssimuse_v:.12g},{self.dtw_path_len}")


def _onset_values(x: Clip, scale: float) -> np.ndarray:
    values = x.roll.grid[x.roll.grid > 0]
    if values.size == 0:
        raise EmptyClip(f"clip {x.origin} has no onsets")
    return values.astype(np.float64) / scale


def onset_stats(x: Clip, scale: float = 127.0) -> tuple[float, float]:
    """Mean and sample standard deviation of normalized onset velocities.

    A single-onset clip has σ = 0 by definition (the N-1 divisor is guarded).
    """
    values = _onset_values(x, scale)
    mu = float(values.mean())
    sigma = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return mu, sigma


def dynamic_l(x: Clip, y: Clip, params: VParams = VParams()) -> float:
    """Overall dynamic consistency: mean-velocity agreement of onsets."""
    mx, _ = onset_stats(x, params.velocity_scale)
    my, _ = onset_stats(y, params.velocity_scale)
    return (2.0 * mx * my + params.c1) / (mx * mx + my * my + params.c1)


def dynamic_c(x: Clip, y: Clip, params: VParams = VParams()) -> float:
    """Dynamic-dispersion consistency: velocity-spread agreement of onsets."""
    _, sx = onset_stats(x, params.velocity_scale)
    _, sy = onset_stats(y, params.velocity_scale)
    return (2.0 * sx * sy + params.c2) / (sx * sx + sy * sy + params.c2)


def extract_curve(x: Clip, scale: float = 127.0) -> VelocityCurve:
    """Per-step maximum normalized velocity, skipping silent steps."""
    grid = x.roll.grid
    if not grid.any():
        raise EmptyClip(f"clip {x.origin} has no onsets")
    peaks = grid.max(axis=1)
    steps = np.nonzero(peaks)[0]
    return VelocityCurve(values=peaks[steps].astype(np.float64) / scale,
                         step_index=steps.astype(np.int64))


def dtw_align(a: VelocityCurve, b: VelocityCurve) -> tuple[np.ndarray, np.ndarray]:
    """Expand both curves along the optimal dynamic-time-warping path.

    Local cost is |a_i - b_j| with the three canonical moves (match, step in
    a, step in b) and endpoint-to-endpoint alignment. Backtracking ties
    prefer the diagonal, then advancing a, then advancing b. Both returned
    arrays have length equal to the warping path.
    """
    va, vb = a.values, b.values
    n, m = va.size, vb.size
    if n == 0 or m == 0:
        raise EmptyCurve("cannot align an empty velocity curve")
    cost = np.abs(va[:, None] - vb[None, :]).tolist()
    inf = float("inf")
    acc = [[0.0] + [inf] * m]
    for i in range(1, n + 1):
        cost_row = cost[i - 1]
        prev = acc[-1]
        row = [inf] * (m + 1)
        left = inf
        for j in range(1, m + 1):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if left < best:
                best = left
            left = cost_row[j - 1] + best
            row[j] = left
        acc.append(row)
    i, j = n, m
    pairs = [(i - 1, j - 1)]
    while i > 1 or j > 1:
        if i > 1 and j > 1:
            diag, up, left = acc[i - 1][j - 1], acc[i - 1][j], acc[i][j - 1]
            if diag <= up and diag <= left:
                i, j = i - 1, j - 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        elif i > 1:
            i -= 1
        else:
            j -= 1
        pairs.append((i - 1, j - 1))
    pairs.reverse()
    idx = np.array(pairs)
    return va[idx[:, 0]], vb[idx[:, 1]]


def _structure(x: Clip, y: Clip, params: VParams) -> tuple[float, int, bool]:
    """(s, path length, degenerate flag) for the aligned velocity curves."""
    ca = extract_curve(x, params.velocity_scale)
    cb = extract_curve(y, params.velocity_scale)
    # Canonical operand order keeps DTW tie resolution, and therefore the
    # score, exactly symmetric in (x, y).
    key_a = (tuple(ca.values), tuple(ca.step_index))
    key_b = (tuple(cb.values), tuple(cb.step_index))
    if key_b < key_a:
        ca, cb = cb, ca
    aligned_a, aligned_b = dtw_align(ca, cb)
    length = aligned_a.size
    if length < 2:
        return 1.0, length, True
    dev_a = aligned_a - aligned_a.mean()
    dev_b = aligned_b - aligned_b.mean()
    cov = float((dev_a * dev_b).sum()) / (length - 1)
    var_a = float((dev_a * dev_a).sum()) / (length - 1)
    var_b = float((dev_b * dev_b).sum()) / (length - 1)
    # sqrt of the variance product (not std*std) keeps x == y exactly at 1.
    s = (cov + params.c3) / (np.sqrt(var_a * var_b) + params.c3)
    return s, length, var_a == 0.0 or var_b == 0.0


def velocity_s(x: Clip, y: Clip, params: VParams = VParams()) -> float:
    """Temporal consistency of velocity changes after DTW alignment.

    May be negative for anti-correlated dynamics; constant aligned curves
    degenerate to 1 through the stabilizer.
    """
    s, _, _ = _structure(x, y, params)
    return s


def ssimuse_v(x: Clip, y: Clip, params: VParams = VParams()) -> VReport:
    """Performance similarity of two velocity clips: l * c * s."""
    l = dynamic_l(x, y, params)
    c = dynamic_c(x, y, params)
    s, path_len, degenerate = _structure(x, y, params)
    return VReport(l=l, c=c, s=s, ssimuse_v=l * c * s,
                   dtw_path_len=path_len, degenerate=degenerate)
