"""Forced-replication benchmark: synthetic data, score batteries, statistics.

The protocol splits a clip corpus into disjoint reference and mixture pools,
pastes exact bar-aligned copies of reference clips into mixture clips at
several replication levels, scores every target-reference pair, and checks
with a Kruskal-Wallis test that the score distributions separate across
levels. Everything is driven by one seed: all random draws happen in a
sequential pre-pass, so the optional process pool cannot perturb results.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .binary import BParams, BReport, ssimuse_b
from .errors import EmptyClip, InsufficientCorpus
from .pianoroll import Clip, binarize, paste_segment
from .stats import kruskal_wallis
from .velocity import VParams, VReport, ssimuse_v

MODE_BINARY = "binary"
MODE_VELOCITY = "velocity"
MODE_BOTH = "both"
MODES = (MODE_BINARY, MODE_VELOCITY, MODE_BOTH)

BASELINE = 0  # level code for unrelated reference-mixture pairs

SWEEP_PARAMETERS = ("window_steps", "hop_steps", "weight_exponent")
SWEEP_DEFAULT_VALUES = {
    "window_steps": (8, 16, 32),
    "hop_steps": (4, 8, 16),
    "weight_exponent": (0.5, 1.0, 2.0),
}

# Stream keys mixed with the seed so each stage draws independently.
_POOL_STREAM = 1
_BASELINE_STREAM = 2
_LEVEL_STREAM = 3


@dataclass(frozen=True)
class BenchConfig:
    """Desk-scale defaults; the reference protocol used 400 x 10."""

    clip_steps: int = 256
    set_size: int = 20
    synthetics_per_reference: int = 5
    levels: tuple[int, ...] = (1, 2, 4, 8)
    seed: int = 0
    mode: str = MODE_BOTH
    bparams: BParams = BParams()
    vparams: VParams = VParams()

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.set_size < 1 or self.synthetics_per_reference < 1:
            raise ValueError("set_size and synthetics_per_reference must be positive")
        if not self.levels:
            raise ValueError("levels must be nonempty")

    @property
    def pairs_per_level(self) -> int:
        return self.set_size * self.synthetics_per_reference


@dataclass(frozen=True)
class SweepConfig:
    parameter: str
    values: tuple
    base: BenchConfig

    def __post_init__(self) -> None:
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(f"parameter must be one of {SWEEP_PARAMETERS}")
        if not self.values:
            raise ValueError("values must be nonempty")


@dataclass(frozen=True)
class PairOutcome:
    """Scores of one target-reference pair at one level."""

    level: int
    pair_id: int
    target_origin: tuple[str, int]
    reference_origin: tuple[str, int]
    binary: BReport | None
    velocity: VReport | None
    velocity_skipped: bool


@dataclass
class BenchResult:
    config: BenchConfig
    outcomes: list[PairOutcome]
    kw: dict[str, tuple[float, int, float]]  # metric -> (H, df, p)

    @property
    def level_order(self) -> tuple[int, ...]:
        return (BASELINE, *self.config.levels)


@dataclass(frozen=True)
class SweepRow:
    parameter: str
    value: float
    level: int
    mean_s: float
    std_s: float
    n: int


def level_label(level: int) -> str:
    return "baseline" if level == BASELINE else str(level)


def _check_corpus(corpus: list[Clip], cfg: BenchConfig) -> None:
    for clip in corpus:
        if clip.steps != cfg.clip_steps:
            raise ValueError(
                f"corpus clip of {clip.steps} steps does not match clip_steps {cfg.clip_steps}"
            )


def build_pools(corpus: list[Clip], cfg: BenchConfig) -> tuple[list[Clip], list[Clip]]:
    """Disjoint reference and mixture pools, one clip per source piece.

    Source-piece disjointness (not just clip disjointness) keeps near-duplicate
    clips of one piece from contaminating the baseline.
    """
    _check_corpus(corpus, cfg)
    usable = [clip for clip in corpus if not clip.empty]
    rng = np.random.default_rng([cfg.seed, _POOL_STREAM])
    picked: list[Clip] = []
    seen_sources: set[str] = set()
    for index in rng.permutation(len(usable)):
        clip = usable[index]
        if clip.origin[0] in seen_sources:
            continue
        seen_sources.add(clip.origin[0])
        picked.append(clip)
        if len(picked) == 2 * cfg.set_size:
            return picked[: cfg.set_size], picked[cfg.set_size :]
    raise InsufficientCorpus(
        f"need {2 * cfg.set_size} nonempty clips from distinct pieces, found {len(picked)}"
    )


def synthesize_targets(
    reference: list[Clip],
    mixture: list[Clip],
    level_bars: int,
    cfg: BenchConfig,
) -> list[tuple[Clip, Clip]]:
    """Target-reference pairs for one replication level.

    For each reference clip, ``synthetics_per_reference`` mixture clips are
    drawn (without replacement when the pool allows) and a bar-aligned block
    of ``level_bars`` bars is copied from the reference at a uniform source
    offset to a uniform destination offset. Deterministic in (cfg.seed,
    level_bars).
    """
    bars = reference[0].bars
    if not 1 <= level_bars <= bars:
        raise ValueError(f"level_bars must be in [1, {bars}], got {level_bars}")
    rng = np.random.default_rng([cfg.seed, _LEVEL_STREAM, level_bars])
    count = cfg.synthetics_per_reference
    pairs: list[tuple[Clip, Clip]] = []
    for ref in reference:
        if count <= len(mixture):
            mix_ids = rng.choice(len(mixture), size=count, replace=False)
        else:
            mix_ids = rng.integers(0, len(mixture), size=count)
        for mix_id in mix_ids:
            src_bar = int(rng.integers(0, bars - level_bars + 1))
            dst_bar = int(rng.integers(0, bars - level_bars + 1))
            target = paste_segment(mixture[int(mix_id)], ref, src_bar, dst_bar, level_bars)
            pairs.append((target, ref))
    return pairs


def baseline_pairs(
    reference: list[Clip],
    mixture: list[Clip],
    cfg: BenchConfig,
) -> list[tuple[Clip, Clip]]:
    """Unrelated mixture-reference pairs, count-matched to one level."""
    rng = np.random.default_rng([cfg.seed, _BASELINE_STREAM])
    count = cfg.pairs_per_level
    total = len(reference) * len(mixture)
    if count <= total:
        flat = rng.choice(total, size=count, replace=False)
    else:
        flat = rng.integers(0, total, size=count)
    return [
        (mixture[int(f) % len(mixture)], reference[int(f) // len(mixture)])
        for f in flat
    ]


def _score_pair(job):
    target, reference, mode, bparams, vparams = job
    breport = vreport = None
    skipped = False
    if mode in (MODE_BINARY, MODE_BOTH):
        breport = ssimuse_b(binarize(target), binarize(reference), bparams)
    if mode in (MODE_VELOCITY, MODE_BOTH):
        try:
            vreport = ssimuse_v(target, reference, vparams)
        except EmptyClip:
            skipped = True
    return breport, vreport, skipped


def run_battery(
    pairs: list[tuple[Clip, Clip]],
    mode: str = MODE_BOTH,
    bparams: BParams = BParams(),
    vparams: VParams = VParams(),
    workers: int = 1,
) -> list[tuple[BReport | None, VReport | None, bool]]:
    """Score every pair; output order matches input order.

    A pair whose velocity metric cannot be computed (a silent side) comes
    back with a True skip flag instead of aborting the batch.
    """
    if not pairs:
        raise ValueError("no pairs to score")
    jobs = [(t, r, mode, bparams, vparams) for t, r in pairs]
    if workers <= 1:
        return [_score_pair(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(jobs) // (4 * workers))
        return list(pool.map(_score_pair, jobs, chunksize=chunk))


def run_bench(corpus: list[Clip], cfg: BenchConfig, workers: int = 1) -> BenchResult:
    """The full protocol: pools, baseline, levels, battery, significance."""
    reference, mixture = build_pools(corpus, cfg)
    blocks: list[tuple[int, list[tuple[Clip, Clip]]]] = [
        (BASELINE, baseline_pairs(reference, mixture, cfg))
    ]
    for level in cfg.levels:
        blocks.append((level, synthesize_targets(reference, mixture, level, cfg)))

    outcomes: list[PairOutcome] = []
    for level, pairs in blocks:
        scored = run_battery(pairs, cfg.mode, cfg.bparams, cfg.vparams, workers)
        for pair_id, ((target, ref), (b, v, skipped)) in enumerate(zip(pairs, scored)):
            outcomes.append(PairOutcome(
                level=level,
                pair_id=pair_id,
                target_origin=target.origin,
                reference_origin=ref.origin,
                binary=b,
                velocity=v,
                velocity_skipped=skipped,
            ))

    result = BenchResult(config=cfg, outcomes=outcomes, kw={})
    for metric in _active_metrics(cfg.mode):
        groups = [scores for _, scores in level_scores(result, metric).items()]
        if all(groups) and len(groups) >= 2:
            result.kw[metric] = kruskal_wallis(groups)
    return result


def _active_metrics(mode: str) -> tuple[str, ...]:
    if mode == MODE_BOTH:
        return ("ssimuse_b", "ssimuse_v")
    return ("ssimuse_b",) if mode == MODE_BINARY else ("ssimuse_v",)


def level_scores(result: BenchResult, metric: str) -> dict[int, list[float]]:
    """Combined scores grouped by level, in level order; skips excluded."""
    groups: dict[int, list[float]] = {level: [] for level in result.level_order}
    for outcome in result.outcomes:
        if metric == "ssimuse_b" and outcome.binary is not None:
            groups[outcome.level].append(outcome.binary.ssimuse_b)
        elif metric == "ssimuse_v" and outcome.velocity is not None:
            groups[outcome.level].append(outcome.velocity.ssimuse_v)
    return groups


def _component_values(result: BenchResult, level: int) -> list[tuple[str, list[float]]]:
    binary = [o.binary for o in result.outcomes if o.level == level and o.binary]
    velocity = [o.velocity for o in result.outcomes if o.level == level and o.velocity]
    columns: list[tuple[str, list[float]]] = []
    if binary:
        columns += [
            ("binary_l", [r.l for r in binary]),
            ("binary_s", [r.s for r in binary]),
            ("ssimuse_b", [r.ssimuse_b for r in binary]),
        ]
    if velocity:
        columns += [
            ("velocity_l", [r.l for r in velocity]),
            ("velocity_c", [r.c for r in velocity]),
            ("velocity_s", [r.s for r in velocity]),
            ("ssimuse_v", [r.ssimuse_v for r in velocity]),
        ]
    return columns


def summary_rows(result: BenchResult) -> list[tuple[str, str, float, float, int]]:
    """(level, component, mean, sample std, n) rows in level order."""
    rows = []
    for level in result.level_order:
        for component, values in _component_values(result, level):
            arr = np.asarray(values)
            std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
            rows.append((level_label(level), component, float(arr.mean()), std, arr.size))
    return rows


def run_sweep(sweep: SweepConfig, corpus: list[Clip], workers: int = 1) -> list[SweepRow]:
    """Structure-term distributions per level for each parameter value.

    The pair sets are built once from the base config, so every parameter
    value scores the exact same clips; only the varied knob changes, the
    others stay at the base values.
    """
    cfg = sweep.base
    reference, mixture = build_pools(corpus, cfg)
    blocks = [(BASELINE, baseline_pairs(reference, mixture, cfg))]
    for level in cfg.levels:
        blocks.append((level, synthesize_targets(reference, mixture, level, cfg)))

    rows: list[SweepRow] = []
    for value in sweep.values:
        bparams = replace(cfg.bparams, **{sweep.parameter: value})
        for level, pairs in blocks:
            scored = run_battery(pairs, MODE_BINARY, bparams, cfg.vparams, workers)
            s_values = np.array([b.s for b, _, _ in scored])
            std = float(s_values.std(ddof=1)) if s_values.size > 1 else 0.0
            rows.append(SweepRow(
                parameter=sweep.parameter,
                value=float(value),
                level=level,
                mean_s=float(s_values.mean()),
                std_s=std,
                n=s_values.size,
            ))
    return rows


def write_scores_csv(result: BenchResult, path, corpus_name: str = "corpus") -> None:
    """Per-pair rows: corpus,mode,level,pair_id,l,c,s,score,skipped."""
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("corpus,mode,level,pair_id,l,c,s,score,skipped\n")
        for o in result.outcomes:
            label = level_label(o.level)
            if o.binary is not None:
                b = o.binary
                fh.write(f"{corpus_name},binary,{label},{o.pair_id},"
                         f"{b.l:.12g},,{b.s:.12g},{b.ssimuse_b:.12g},0\n")
            if o.velocity is not None:
                v = o.velocity
                fh.write(f"{corpus_name},velocity,{label},{o.pair_id},"
                         f"{v.l:.12g},{v.c:.12g},{v.s:.12g},{v.ssimuse_v:.12g},0\n")
            elif o.velocity_skipped:
                fh.write(f"{corpus_name},velocity,{label},{o.pair_id},,,,,1\n")


def write_summary_csv(result: BenchResult, path) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("level,component,mean,std,n\n")
        for level, component, mean, std, n in summary_rows(result):
            fh.write(f"{level},{component},{mean:.12g},{std:.12g},{n}\n")


def write_stats_csv(result: BenchResult, path) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("metric,H,df,p\n")
        for metric, (h, df, p) in result.kw.items():
            fh.write(f"{metric},{h:.12g},{df},{p:.12g}\n")


def write_sweep_csv(rows: list[SweepRow], path) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("parameter,value,level,mean_s,std_s,n\n")
        for row in rows:
            fh.write(f"{row.parameter},{row.value:.12g},{level_label(row.level)},"
                     f"{row.mean_s:.12g},{row.std_s:.12g},{row.n}\n")


def render_bench_charts(result: BenchResult, directory) -> list[Path]:
    """One mean-with-std line chart per score component."""
    from .svg import line_chart

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    labels = [level_label(level) for level in result.level_order]
    paths = []
    by_level = {
        level: dict(_component_values(result, level)) for level in result.level_order
    }
    components: dict[str, None] = {}
    for level in result.level_order:
        components.update(dict.fromkeys(by_level[level]))
    for component in components:
        means, stds = [], []
        for level in result.level_order:
            values = np.asarray(by_level[level].get(component, [np.nan]))
            means.append(float(values.mean()))
            stds.append(float(values.std(ddof=1)) if values.size > 1 else 0.0)
        path = directory / f"{component}.svg"
        line_chart(path, title=f"{component} vs replication level",
                   x_labels=labels, series=[(component, means, stds)])
        paths.append(path)
    return paths


def render_sweep_chart(rows: list[SweepRow], directory) -> Path:
    """All values of one swept parameter on a single chart."""
    from .svg import line_chart

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    parameter = rows[0].parameter
    levels = sorted({row.level for row in rows})
    labels = [level_label(level) for level in levels]
    series = []
    for value in sorted({row.value for row in rows}):
        chosen = {row.level: row for row in rows if row.value == value}
        series.append((
            f"{parameter}={value:g}",
            [chosen[level].mean_s for level in levels],
            [chosen[level].std_s for level in levels],
        ))
    path = directory / f"sweep_{parameter}.svg"
    line_chart(path, title=f"structure term vs level across {parameter}",
               x_labels=labels, series=series)
    return path
