"""Command-line surface.

Subcommands:

    generate    one video under the configured algorithm
    search      one beam-search run (forces algo = beam)
    benchmark   a config matrix over a seed list
    inspect     dump saved tensors, traces, and result CSVs
    corpus      build and save the reference corpus

Every config key has a flag of the same name (underscores become
dashes; ``out_dir`` is exposed as ``--out``). ``--config FILE`` loads a
key = value file first; explicit flags override file values. All
artifacts are bit-reproducible from (config, seed); wall time is printed
to stdout but never written to files.
"""

from __future__ import annotations

import argparse
import dataclasses
import itertools
import sys
from pathlib import Path

from . import config as config_mod
from .config import RunConfig, apply_overrides, dumps, fingerprint, load_file
from .harness import (
    RUN_COLUMNS,
    SUMMARY_COLUMNS,
    _run_row,
    build_world,
    read_trace,
    run_benchmark,
    run_single,
    write_csv,
)
from .kernels import backend_name
from .tensorio import export_frames, load_tensor, save_tensor

_CHOICES = {
    "paradigm": ("fifo", "chunk"),
    "reward": ("full", "local", "anchor"),
    "fft_mode": ("2d", "3d"),
    "subject_shape": ("square", "disc"),
    "algo": ("beam", "greedy", "bon"),
}


def _converter(field_obj: dataclasses.Field):
    def convert(raw: str):
        return config_mod._parse_value(field_obj, raw)

    convert.__name__ = field_obj.name
    return convert


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, metavar="FILE", help="key = value config file")
    for f in dataclasses.fields(RunConfig):
        flag = "--out" if f.name == "out_dir" else "--" + f.name.replace("_", "-")
        if isinstance(f.default, bool):
            parser.add_argument(
                flag,
                dest=f.name,
                action=argparse.BooleanOptionalAction,
                default=None,
                help=f"(default {f.default})",
            )
            continue
        kwargs = {
            "dest": f.name,
            "type": _converter(f),
            "default": None,
            "help": f"(default {config_mod._format_value(f.default)})",
        }
        if f.name in _CHOICES:
            kwargs["choices"] = _CHOICES[f.name]
        if f.name == "mix":
            kwargs["metavar"] = "A1,A2,A3,A4"
        parser.add_argument(flag, **kwargs)


def _build_config(args) -> RunConfig:
    cfg = load_file(args.config) if args.config else RunConfig()
    overrides = {
        f.name: getattr(args, f.name)
        for f in dataclasses.fields(RunConfig)
        if hasattr(args, f.name)
    }
    return apply_overrides(cfg, overrides)


def _parse_seeds(raw: str) -> list[int]:
    raw = raw.strip()
    if ":" in raw:
        lo, hi = raw.split(":", 1)
        seeds = list(range(int(lo), int(hi)))
    else:
        seeds = [int(p) for p in raw.split(",") if p.strip()]
    if not seeds:
        raise ValueError("empty seed list")
    return seeds


def _parse_sweeps(pairs: list[str]) -> list[tuple[str, list]]:
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    sweeps = []
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"sweep must look like key=v1,v2 (got {pair!r})")
        key, _, values = pair.partition("=")
        key = key.strip().replace("-", "_")
        if key not in fields:
            raise ValueError(f"unknown sweep key {key!r}")
        if key == "mix":
            parsed = [tuple(float(x) for x in values.split(","))]
            if len(parsed[0]) != 4:
                raise ValueError("sweeping mix takes exactly one 4-weight value")
        else:
            parsed = [config_mod._parse_value(fields[key], v) for v in values.split(",")]
        sweeps.append((key, parsed))
    return sweeps


def _run_and_write(cfg: RunConfig) -> int:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trace_fh = open(out / "trace.jsonl", "w") if cfg.algo == "beam" else None
    try:
        report = run_single(cfg, trace_writer=trace_fh)
    finally:
        if trace_fh is not None:
            trace_fh.close()
    save_tensor(out / "video.nbt", report.video)
    write_csv(out / "metrics.csv", [_run_row("run", cfg, report, None)], RUN_COLUMNS)
    (out / "config.txt").write_text(dumps(cfg))
    if cfg.export_frames:
        frame_dir = out / "frames"
        frame_dir.mkdir(exist_ok=True)
        export_frames(report.video, frame_dir)
    print(f"config {fingerprint(cfg)}  seed {cfg.seed}  algo {cfg.algo}  backend {backend_name()}")
    for name, value in report.metrics.items():
        print(f"  {name}_analog = {value:.6f}")
    print(f"  denoiser_calls = {report.denoiser_calls}")
    print(f"  wall_time_s = {report.wall_time:.3f}  (not written to artifacts)")
    print(f"wrote {out / 'video.nbt'}")
    return 0


def _cmd_generate(args) -> int:
    return _run_and_write(_build_config(args))


def _cmd_search(args) -> int:
    cfg = _build_config(args)
    cfg.algo = "beam"
    cfg.validate()
    return _run_and_write(cfg)


def _cmd_benchmark(args) -> int:
    base = _build_config(args)
    sweeps = _parse_sweeps(args.sweep or [])
    seeds = _parse_seeds(args.seeds) if args.seeds else [base.seed]
    configs: list[tuple[str, RunConfig]] = []
    if sweeps:
        keys = [k for k, _ in sweeps]
        for combo in itertools.product(*(vals for _, vals in sweeps)):
            cfg = dataclasses.replace(base, **dict(zip(keys, combo)))
            label = ";".join(
                f"{k}={config_mod._format_value(v)}" for k, v in zip(keys, combo)
            )
            configs.append((label, cfg))
    else:
        configs.append(("base", base))
    out = Path(base.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows, summary = run_benchmark(configs, seeds)
    write_csv(out / "runs.csv", rows, RUN_COLUMNS)
    write_csv(out / "summary.csv", summary, SUMMARY_COLUMNS)
    failed = sum(1 for r in rows if r["status"] != "ok")
    print(f"{len(rows)} runs ({failed} failed), {len(summary)} configs")
    for entry in summary:
        mean = entry["subject_consistency_analog_mean"]
        shown = f"{float(mean):.6f}" if mean else "n/a"
        print(f"  {entry['config']}: subject_consistency_analog mean = {shown}")
    print(f"wrote {out / 'runs.csv'} and {out / 'summary.csv'}")
    return 0


def _cmd_corpus(args) -> int:
    cfg = _build_config(args)
    world = build_world(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_tensor(out / "corpus.nbt", world.corpus)
    if cfg.export_frames:
        for j, clip in enumerate(world.corpus):
            clip_dir = out / f"clip_{j:04d}"
            clip_dir.mkdir(exist_ok=True)
            export_frames(clip, clip_dir)
    n, frames, h, w = world.corpus.shape
    print(f"corpus: {n} clips x {frames} frames of {h}x{w}")
    print(f"wrote {out / 'corpus.nbt'}")
    return 0


def _inspect_one(path: Path) -> None:
    if path.is_dir():
        known = ["video.nbt", "corpus.nbt", "trace.jsonl", "metrics.csv", "runs.csv", "summary.csv"]
        found = [path / name for name in known if (path / name).exists()]
        if not found:
            print(f"{path}: no run artifacts found")
        for sub in found:
            _inspect_one(sub)
        return
    if path.suffix == ".nbt":
        arr = load_tensor(path)
        print(
            f"{path}: tensor shape={tuple(arr.shape)} dtype={arr.dtype} "
            f"min={arr.min():.6f} max={arr.max():.6f} mean={arr.mean():.6f}"
        )
    elif path.suffix == ".jsonl":
        records = read_trace(path)
        steps = sorted({r["step"] for r in records})
        print(f"{path}: {len(records)} candidate records over {len(steps)} steps")
        for step in steps:
            batch = [r for r in records if r["step"] == step]
            winners = [r for r in batch if r["selected"]]
            best = max(r["score"] for r in batch)
            tags = ",".join(f"{w['strategy']}@s{w['slot']}" for w in winners)
            print(f"  step {step}: {len(batch)} candidates, best score {best:.6f}, kept {tags}")
    elif path.suffix == ".csv":
        print(f"{path}:")
        sys.stdout.write(path.read_text())
    elif path.suffix == ".txt":
        print(f"{path}:")
        sys.stdout.write(path.read_text())
    else:
        raise ValueError(f"cannot inspect {path}: unknown artifact type")


def _cmd_inspect(args) -> int:
    for raw in args.paths:
        _inspect_one(Path(raw))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noisebeam",
        description="Initial-noise beam search for autoregressive video denoising.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="generate one video with the configured algorithm")
    _add_config_flags(p_gen)
    p_gen.set_defaults(fn=_cmd_generate)

    p_search = sub.add_parser("search", help="run beam search (algo forced to beam)")
    _add_config_flags(p_search)
    p_search.set_defaults(fn=_cmd_search)

    p_bench = sub.add_parser("benchmark", help="run a config matrix over seeds")
    _add_config_flags(p_bench)
    p_bench.add_argument(
        "--sweep",
        action="append",
        metavar="KEY=V1,V2",
        help="sweep a config key over values; repeatable, keys combine as a product",
    )
    p_bench.add_argument(
        "--seeds",
        default=None,
        metavar="LO:HI or S1,S2,...",
        help="seed list (default: the single configured seed)",
    )
    p_bench.set_defaults(fn=_cmd_benchmark)

    p_corpus = sub.add_parser("corpus", help="build and save the reference corpus")
    _add_config_flags(p_corpus)
    p_corpus.set_defaults(fn=_cmd_corpus)

    p_inspect = sub.add_parser("inspect", help="summarize saved artifacts")
    p_inspect.add_argument("paths", nargs="+", help=".nbt/.jsonl/.csv files or run directories")
    p_inspect.set_defaults(fn=_cmd_inspect)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
