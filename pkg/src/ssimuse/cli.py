"""Command-line front end.

Four subcommands: ``compare`` scores two MIDI files clip by clip, ``audit``
ranks a corpus against a query file, ``bench`` runs the forced-replication
benchmark, ``sweep`` varies one structure-term knob. Exit codes are a stable
contract for scripting: 0 success, 1 input error, 2 rejected input (meter),
3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields as dataclass_fields
from pathlib import Path

from . import bench as bench_mod
from .bench import (BenchConfig, SweepConfig, SWEEP_DEFAULT_VALUES,
                    SWEEP_PARAMETERS, level_label)
from .binary import BParams, ssimuse_b
from .corpus import load_directory, load_file
from .errors import EmptyClip, EmptyCorpus, SsimuseError
from .pianoroll import binarize
from .velocity import VParams, ssimuse_v

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_REJECTED = 2
EXIT_CONFIG = 3

_SEED_ENV = "SSIMUSE_SEED"

_PARAM_ALIASES = {
    "window": "window_steps",
    "hop": "hop_steps",
    "exponent": "weight_exponent",
}


class ConfigError(Exception):
    """Invalid configuration (file or flags); maps to exit code 3."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _csv_list(text: str) -> list[str]:
    return [item for item in text.split(",") if item]


def _parse_tracks(text: str | None):
    if text is None:
        return None
    items: list[int | str] = []
    for item in _csv_list(text):
        items.append(int(item) if item.lstrip("-").isdigit() else item)
    return items


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=("binary", "velocity", "both"), default=None,
                        help="which metric(s) to compute (default both)")
    parser.add_argument("--steps-per-quarter", type=int, default=4, metavar="N")
    parser.add_argument("--tracks", default=None, metavar="LIST",
                        help="comma list of track indices or name glob patterns")
    parser.add_argument("--out", default="ssimuse_out", metavar="DIR",
                        help="output directory for report files")
    parser.add_argument("--emit", default=None, metavar="LIST",
                        help="comma list from csv,json,svg")
    parser.add_argument("--window", type=int, default=None, metavar="STEPS")
    parser.add_argument("--hop", type=int, default=None, metavar="STEPS")
    parser.add_argument("--weight-exp", type=float, default=None, metavar="Q")
    parser.add_argument("--lambda", dest="lam", type=float, default=None,
                        metavar="L", help="time-shift penalty strength in [0,1]")


def _add_bench_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("corpus", help="directory of MIDI files")
    parser.add_argument("--config", default=None, metavar="FILE",
                        help="JSON config; flags override file values")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--set-size", type=int, default=None, metavar="N")
    parser.add_argument("--synthetics", type=int, default=None, metavar="N")
    parser.add_argument("--levels", default=None, metavar="LIST",
                        help="comma list of replicated bar counts (default 1,2,4,8)")
    parser.add_argument("--clip-steps", type=int, default=None, metavar="N")
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1, metavar="N",
                        help="parallel scoring processes (default: available cores)")


def _build_parser() -> _Parser:
    parser = _Parser(prog="ssimuse",
                     description="Structural-similarity metrics for symbolic music.")
    sub = parser.add_subparsers(dest="command", required=True)

    compare = sub.add_parser("compare", help="score two MIDI files clip by clip")
    compare.add_argument("a")
    compare.add_argument("b")
    _add_common(compare)
    compare.set_defaults(func=cmd_compare)

    audit = sub.add_parser("audit", help="rank corpus clips against a query file")
    audit.add_argument("query")
    audit.add_argument("corpus", help="directory of MIDI files")
    audit.add_argument("--top-k", type=int, default=10, metavar="K")
    _add_common(audit)
    audit.set_defaults(func=cmd_audit)

    bench = sub.add_parser("bench", help="run the forced-replication benchmark")
    _add_bench_common(bench)
    _add_common(bench)
    bench.set_defaults(func=cmd_bench)

    sweep = sub.add_parser("sweep", help="sweep one structure-term parameter")
    _add_bench_common(sweep)
    sweep.add_argument("--parameter", default=None,
                       help="window | hop | exponent (or the full field name)")
    sweep.add_argument("--values", default=None, metavar="LIST",
                       help="comma list of parameter values")
    _add_common(sweep)
    sweep.set_defaults(func=cmd_sweep)
    return parser


def _emit_set(args, default: str) -> set[str]:
    chosen = args.emit if args.emit is not None else default
    emit = set(_csv_list(chosen))
    unknown = emit - {"csv", "json", "svg"}
    if unknown:
        raise ConfigError(f"unknown emit kinds: {', '.join(sorted(unknown))}")
    return emit


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_config_file(path: str, allowed: set[str]) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    for key in doc:
        if key not in allowed:
            raise ConfigError(f"{path}: unknown field {key!r}")
    for section, cls in (("bparams", BParams), ("vparams", VParams)):
        if section in doc:
            if not isinstance(doc[section], dict):
                raise ConfigError(f"{path}: {section} must be an object")
            valid = {f.name for f in dataclass_fields(cls)}
            for key in doc[section]:
                if key not in valid:
                    raise ConfigError(f"{path}: unknown {section} field {key!r}")
    return doc


def _resolve_seed(args, doc: dict) -> int:
    if args.seed is not None:
        return args.seed
    if "seed" in doc:
        return int(doc["seed"])
    env = os.environ.get(_SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{_SEED_ENV} must be an integer, got {env!r}") from exc
    raise ConfigError(f"a seed is required: pass --seed, set it in the config, "
                      f"or export {_SEED_ENV}")


def _metric_params(args, doc: dict) -> tuple[BParams, VParams]:
    bvals = dict(doc.get("bparams", {}))
    for field, value in (("window_steps", args.window), ("hop_steps", args.hop),
                         ("weight_exponent", args.weight_exp), ("lam", args.lam)):
        if value is not None:
            bvals[field] = value
    try:
        return BParams(**bvals), VParams(**doc.get("vparams", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _parse_levels(text: str) -> tuple[int, ...]:
    try:
        levels = tuple(int(item) for item in _csv_list(text))
    except ValueError as exc:
        raise ConfigError(f"bad levels list {text!r}") from exc
    if not levels:
        raise ConfigError("levels list is empty")
    return levels


def _bench_config(args, allowed_extra: set[str] = frozenset()) -> tuple[BenchConfig, dict]:
    allowed = {"clip_steps", "set_size", "synthetics_per_reference", "levels",
               "seed", "mode", "bparams", "vparams"} | allowed_extra
    doc = _load_config_file(args.config, allowed) if args.config else {}
    bparams, vparams = _metric_params(args, doc)
    values = {
        "clip_steps": args.clip_steps or doc.get("clip_steps", 256),
        "set_size": args.set_size or doc.get("set_size", 20),
        "synthetics_per_reference": args.synthetics
            or doc.get("synthetics_per_reference", 5),
        "levels": _parse_levels(args.levels) if args.levels
            else tuple(doc.get("levels", (1, 2, 4, 8))),
        "seed": _resolve_seed(args, doc),
        "mode": args.mode or doc.get("mode", "both"),
        "bparams": bparams,
        "vparams": vparams,
    }
    try:
        return BenchConfig(**values), doc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _load_clips(path: str, args, clip_steps: int = 256, need_meter: bool = True):
    """Clips of one file; (clips, exit_code) with clips None on failure."""
    try:
        clips = load_file(path, steps_per_quarter=args.steps_per_quarter,
                          tracks=_parse_tracks(args.tracks), clip_steps=clip_steps)
    except (SsimuseError, OSError) as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return None, EXIT_INPUT
    if clips is None:
        if need_meter:
            print(f"rejected: {path} is not 4/4 throughout", file=sys.stderr)
            return None, EXIT_REJECTED
        return [], EXIT_OK
    return clips, EXIT_OK


def _score_clip_pair(a, b, mode, bparams, vparams):
    row = {"binary": None, "velocity": None, "velocity_skipped": False}
    if mode in ("binary", "both"):
        row["binary"] = ssimuse_b(binarize(a), binarize(b), bparams)
    if mode in ("velocity", "both"):
        try:
            row["velocity"] = ssimuse_v(a, b, vparams)
        except EmptyClip:
            row["velocity_skipped"] = True
    return row


def cmd_compare(args) -> int:
    mode = args.mode or "both"
    try:
        bparams, vparams = _metric_params(args, {})
        emit = _emit_set(args, "csv,json")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    clips_a, code = _load_clips(args.a, args)
    if clips_a is None:
        return code
    clips_b, code = _load_clips(args.b, args)
    if clips_b is None:
        return code
    count = min(len(clips_a), len(clips_b))
    if count == 0:
        print("error: need at least one full clip on each side", file=sys.stderr)
        return EXIT_INPUT

    rows = []
    for index in range(count):
        a, b = clips_a[index], clips_b[index]
        row = _score_clip_pair(a, b, mode, bparams, vparams)
        row.update(clip=index, a_empty=a.empty, b_empty=b.empty)
        rows.append(row)

    best = {}
    for metric, key in (("ssimuse_b", "binary"), ("ssimuse_v", "velocity")):
        scores = [getattr(r[key], metric) for r in rows if r[key] is not None]
        if scores:
            best[metric] = max(scores)

    out = _out_dir(args)
    if "json" in emit:
        doc = {
            "a": args.a, "b": args.b, "mode": mode,
            "clips": [
                {
                    "clip": r["clip"], "a_empty": r["a_empty"], "b_empty": r["b_empty"],
                    "binary": r["binary"].to_dict() if r["binary"] else None,
                    "velocity": r["velocity"].to_dict() if r["velocity"] else None,
                    "velocity_skipped": r["velocity_skipped"],
                }
                for r in rows
            ],
            "max": best,
        }
        (out / "compare.json").write_text(json.dumps(doc, indent=2) + "\n",
                                          encoding="utf-8")
    if "csv" in emit:
        with open(out / "compare.csv", "w", encoding="ascii", newline="") as fh:
            fh.write("clip,mode,l,c,s,score,best_dt,best_dp,dtw_path_len,"
                     "a_empty,b_empty,skipped\n")
            for r in rows:
                empties = f"{int(r['a_empty'])},{int(r['b_empty'])}"
                if r["binary"] is not None:
                    b = r["binary"]
                    fh.write(f"{r['clip']},binary,{b.l:.12g},,{b.s:.12g},"
                             f"{b.ssimuse_b:.12g},{b.best_shift[0]},"
                             f"{b.best_shift[1]},,{empties},0\n")
                if r["velocity"] is not None:
                    v = r["velocity"]
                    fh.write(f"{r['clip']},velocity,{v.l:.12g},{v.c:.12g},"
                             f"{v.s:.12g},{v.ssimuse_v:.12g},,,"
                             f"{v.dtw_path_len},{empties},0\n")
                elif r["velocity_skipped"]:
                    fh.write(f"{r['clip']},velocity,,,,,,,,{empties},1\n")

    print(f"compared {count} clip pair(s) from {args.a} and {args.b}")
    for metric, value in best.items():
        print(f"max {metric}: {value:.6f}")
    return EXIT_OK


def cmd_audit(args) -> int:
    mode = args.mode or "binary"
    try:
        bparams, vparams = _metric_params(args, {})
        emit = _emit_set(args, "csv")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    query_clips, code = _load_clips(args.query, args)
    if query_clips is None:
        return code
    query_clips = [c for c in query_clips if not c.empty]
    if not query_clips:
        print("error: query yields no nonempty clips", file=sys.stderr)
        return EXIT_INPUT

    def note_skip(path, reason):
        print(f"skipping {path.name}: {reason}", file=sys.stderr)

    try:
        corpus_clips = load_directory(args.corpus,
                                      steps_per_quarter=args.steps_per_quarter,
                                      tracks=_parse_tracks(args.tracks),
                                      on_skip=note_skip)
    except OSError as exc:
        print(f"error: {args.corpus}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not corpus_clips:
        raise EmptyCorpus(f"no usable MIDI files in {args.corpus}")

    rank_metric = "ssimuse_v" if mode == "velocity" else "ssimuse_b"
    rank_key = "velocity" if mode == "velocity" else "binary"
    entries = []
    for clip in corpus_clips:
        for query_index, query in enumerate(query_clips):
            row = _score_clip_pair(query, clip, mode, bparams, vparams)
            report = row[rank_key]
            if report is None:
                continue
            entries.append((
                -getattr(report, rank_metric),
                clip.origin[0], clip.origin[1], query_index, row,
            ))
    entries.sort(key=lambda e: e[:4])
    top = entries[: max(args.top_k, 0)]

    print(f"{'rank':>4}  {'score':>9}  {'corpus clip':<28}  query clip")
    lines = []
    for rank, (neg, source, start, query_index, row) in enumerate(top, start=1):
        score = -neg
        label = f"{source}@{start}"
        print(f"{rank:>4}  {score:9.6f}  {label:<28}  {query_index}")
        lines.append((rank, score, source, start, query_index, row))

    if "csv" in emit and lines:
        out = _out_dir(args)
        with open(out / "audit.csv", "w", encoding="ascii", newline="") as fh:
            fh.write("rank,score,corpus_file,clip_start,query_clip,l,c,s\n")
            for rank, score, source, start, query_index, row in lines:
                report = row[rank_key]
                c_val = f"{report.c:.12g}" if rank_key == "velocity" else ""
                fh.write(f"{rank},{score:.12g},{source},{start},{query_index},"
                         f"{report.l:.12g},{c_val},{report.s:.12g}\n")
    if "json" in emit and lines:
        out = _out_dir(args)
        doc = [
            {
                "rank": rank, "score": score, "corpus_file": source,
                "clip_start": start, "query_clip": query_index,
                "binary": row["binary"].to_dict() if row["binary"] else None,
                "velocity": row["velocity"].to_dict() if row["velocity"] else None,
            }
            for rank, score, source, start, query_index, row in lines
        ]
        (out / "audit.json").write_text(json.dumps(doc, indent=2) + "\n",
                                        encoding="utf-8")
    return EXIT_OK


def _load_bench_corpus(args, cfg: BenchConfig):
    def note_skip(path, reason):
        print(f"skipping {path.name}: {reason}", file=sys.stderr)

    return load_directory(args.corpus, steps_per_quarter=args.steps_per_quarter,
                          tracks=_parse_tracks(args.tracks),
                          clip_steps=cfg.clip_steps, on_skip=note_skip)


def cmd_bench(args) -> int:
    try:
        cfg, _ = _bench_config(args)
        emit = _emit_set(args, "csv")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    clips = _load_bench_corpus(args, cfg)
    result = bench_mod.run_bench(clips, cfg, workers=args.workers)

    out = _out_dir(args)
    corpus_name = Path(args.corpus).name or "corpus"
    if "csv" in emit:
        bench_mod.write_scores_csv(result, out / "bench_scores.csv", corpus_name)
        bench_mod.write_summary_csv(result, out / "bench_summary.csv")
        bench_mod.write_stats_csv(result, out / "bench_stats.csv")
    if "svg" in emit:
        bench_mod.render_bench_charts(result, out)

    print(f"bench on {corpus_name}: {cfg.pairs_per_level} pairs per level, "
          f"levels baseline,{','.join(map(str, cfg.levels))}, seed {cfg.seed}")
    for level, component, mean, std, n in bench_mod.summary_rows(result):
        print(f"  level {level:>8}  {component:<10}  mean {mean:8.5f}  "
              f"std {std:8.5f}  n {n}")
    for metric, (h, df, p) in result.kw.items():
        print(f"kruskal-wallis {metric}: H={h:.4f} df={df} p={p:.3g}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        cfg, doc = _bench_config(args, allowed_extra={"parameter", "values"})
        emit = _emit_set(args, "csv")
        raw_param = args.parameter or doc.get("parameter")
        if raw_param is None:
            raise ConfigError("sweep needs --parameter (window | hop | exponent)")
        parameter = _PARAM_ALIASES.get(raw_param, raw_param)
        if parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"unknown sweep parameter {raw_param!r}")
        if args.values is not None:
            cast = float if parameter == "weight_exponent" else int
            values = tuple(cast(v) for v in _csv_list(args.values))
        elif "values" in doc:
            values = tuple(doc["values"])
        else:
            values = SWEEP_DEFAULT_VALUES[parameter]
        sweep = SweepConfig(parameter=parameter, values=values, base=cfg)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    clips = _load_bench_corpus(args, cfg)
    rows = bench_mod.run_sweep(sweep, clips, workers=args.workers)

    out = _out_dir(args)
    if "csv" in emit:
        bench_mod.write_sweep_csv(rows, out / "sweep.csv")
    if "svg" in emit:
        bench_mod.render_sweep_chart(rows, out)

    print(f"sweep of {parameter} over {', '.join(f'{v:g}' for v in values)}")
    for row in rows:
        print(f"  {row.parameter}={row.value:<6g} level {level_label(row.level):>8}  "
              f"mean s {row.mean_s:8.5f}  std {row.std_s:8.5f}  n {row.n}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SsimuseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
