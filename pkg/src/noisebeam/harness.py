"""Experiment harness: world construction, single runs, benchmark matrices.

A run builds the synthetic world from the config (one fixed corpus per
world seed, so search seeds vary only the search), executes the chosen
algorithm, computes the desk-scale metric analogs, and checks the
denoiser-call counter against the predicted budget. Benchmarks execute a
config matrix over a seed list, write one CSV row per (config, seed) and
one summary row per config, and record individual failures without
aborting the rest of the matrix. Wall time is printed but never written
to result files, which keeps every artifact bit-reproducible.
"""

from __future__ import annotations

import csv
import dataclasses
import time
from dataclasses import dataclass, field

import numpy as np

from . import rng as rng_mod
from .config import RunConfig, fingerprint
from .metrics import subject_consistency, temporal_flicker
from .schedule import NoiseSchedule, make_schedule
from .search import (
    TraceRecord,
    beam_search_generate,
    best_of_n,
    greedy_generate,
    predicted_beam_calls,
    predicted_bon_calls,
    predicted_greedy_calls,
)
from .toyworld import MixtureDenoiser, SubjectSpec, gen_clip, make_denoiser

# Result files label the metrics as desk-scale analogs explicitly.
_METRIC_COLUMNS = {
    "subject_consistency": "subject_consistency_analog",
    "temporal_flicker": "temporal_flicker_analog",
}
_METRIC_FNS = {
    "subject_consistency": subject_consistency,
    "temporal_flicker": temporal_flicker,
}

RUN_COLUMNS = (
    "config",
    "fingerprint",
    "seed",
    "paradigm",
    "algo",
    "beam_k",
    "cands_n",
    "steps",
    "reward",
    "mix",
    "subject_consistency_analog",
    "temporal_flicker_analog",
    "denoiser_calls",
    "status",
    "error",
)


@dataclass
class World:
    schedule: NoiseSchedule
    corpus: np.ndarray
    model: MixtureDenoiser


@dataclass
class MetricsReport:
    config_fingerprint: str
    seed: int
    metrics: dict
    denoiser_calls: int
    wall_time: float
    video: np.ndarray | None = None
    trace: list[TraceRecord] = field(default_factory=list)


def _phase_spec(cfg: RunConfig, phase: int, size: int) -> SubjectSpec:
    return SubjectSpec(
        shape=cfg.subject_shape,
        size=size,
        intensity=cfg.subject_intensity,
        position=(
            cfg.start_row + phase * cfg.velocity_row,
            cfg.start_col + phase * cfg.velocity_col,
        ),
        velocity=(cfg.velocity_row, cfg.velocity_col),
        background=cfg.background,
    )


def build_world(cfg: RunConfig) -> World:
    """Deterministic world: schedule plus a branching-orbit corpus.

    Phase j of the orbit starts j velocity steps along, so temporal
    shifts of any window stay inside the corpus and continuations are
    always well-posed. With branch_size > 0 the subject has two stable
    appearances (edge lengths subject_size and branch_size) and the
    corpus holds, for every phase and either appearance, windows where
    the subject morphs to the other appearance at each interior frame.
    The recent (low-noise) frames of a partially denoised state then pin
    the phase and current appearance but leave the continuation
    genuinely ambiguous; that ambiguity is what gives initial noise its
    influence and search something to select for. Morphs strictly lower
    the consistency metric (the descriptor changes and never recovers
    within the window), so incoherent noise picks are visible as subject
    morphs in the emitted video.

    Queue-paradigm corpora use whole-queue-length windows; chunk corpora
    use window-length ones.
    """
    cfg.validate()
    schedule = make_schedule(cfg.total_steps, cfg.ddim_steps, cfg.beta_min, cfg.beta_max)
    clip_len = cfg.window * cfg.partitions if cfg.paradigm == "fifo" else cfg.window

    def orbit(phase: int, size: int, frames: int, stream_ids) -> np.ndarray:
        gen = rng_mod.stream(cfg.world_seed, rng_mod.CORPUS, *stream_ids)
        return gen_clip(
            _phase_spec(cfg, phase, size), frames, cfg.height, cfg.width, gen,
            pixel_noise=cfg.pixel_noise,
        )

    sizes = [cfg.subject_size]
    if cfg.branch_size not in (0, cfg.subject_size):
        sizes.append(cfg.branch_size)
    clips = []
    for j in range(cfg.corpus_size):
        for s, size in enumerate(sizes):
            clips.append(orbit(j, size, clip_len, (j, s, 0)))
            if len(sizes) == 1:
                continue
            other = sizes[1 - s]
            for k in range(1, clip_len):
                before = orbit(j, size, k, (j, s, k, 0))
                after = orbit(j + k, other, clip_len - k, (j, s, k, 1))
                clips.append(np.concatenate([before, after], axis=0))
    corpus = np.stack(clips)
    return World(schedule=schedule, corpus=corpus, model=MixtureDenoiser(corpus))


def run_single(cfg: RunConfig, trace_writer=None) -> MetricsReport:
    """Execute one run and verify its denoiser-call budget."""
    world = build_world(cfg)
    denoiser = make_denoiser(world.model, world.schedule)
    scfg = cfg.to_search_config()
    start = time.perf_counter()
    trace: list[TraceRecord] = []
    if cfg.algo == "beam":
        video, trace = beam_search_generate(scfg, denoiser, world.schedule, trace_writer)
        expected = predicted_beam_calls(scfg, world.schedule)
    elif cfg.algo == "greedy":
        video = greedy_generate(scfg, denoiser, world.schedule)
        expected = predicted_greedy_calls(scfg, world.schedule)
    else:
        video = best_of_n(scfg, cfg.bon_n, denoiser, world.schedule)
        expected = predicted_bon_calls(scfg, world.schedule, cfg.bon_n)
    elapsed = time.perf_counter() - start
    if denoiser.calls != expected:
        raise RuntimeError(
            f"budget mismatch: denoiser made {denoiser.calls} calls, predicted {expected}"
        )
    metrics = {name: float(_METRIC_FNS[name](video)) for name in cfg.metrics}
    return MetricsReport(
        config_fingerprint=fingerprint(cfg),
        seed=cfg.seed,
        metrics=metrics,
        denoiser_calls=denoiser.calls,
        wall_time=elapsed,
        video=video,
        trace=trace,
    )


def _run_row(label: str, cfg: RunConfig, report: MetricsReport | None, error: str | None) -> dict:
    row = {
        "config": label,
        "fingerprint": fingerprint(cfg),
        "seed": cfg.seed,
        "paradigm": cfg.paradigm,
        "algo": cfg.algo,
        "beam_k": cfg.beam_k,
        "cands_n": cfg.cands_n,
        "steps": cfg.steps,
        "reward": cfg.reward,
        "mix": ",".join(repr(w) for w in cfg.mix),
        "subject_consistency_analog": "",
        "temporal_flicker_analog": "",
        "denoiser_calls": "",
        "status": "ok" if error is None else "error",
        "error": "" if error is None else error.splitlines()[0],
    }
    if report is not None:
        for name, value in report.metrics.items():
            row[_METRIC_COLUMNS[name]] = repr(value)
        row["denoiser_calls"] = report.denoiser_calls
    return row


def run_benchmark(configs: list[tuple[str, RunConfig]], seeds: list[int]) -> tuple[list[dict], list[dict]]:
    """Run every (config, seed) cell; returns (rows, summary rows).

    A failing cell yields a row with status=error and is excluded from
    its config's summary statistics; the rest of the matrix proceeds.
    """
    rows = []
    for label, base in configs:
        for seed in seeds:
            cfg = dataclasses.replace(base, seed=seed)
            try:
                report = run_single(cfg)
                rows.append(_run_row(label, cfg, report, None))
            except Exception as exc:
                rows.append(_run_row(label, cfg, None, f"{type(exc).__name__}: {exc}"))
    return rows, summarize(rows)


def summarize(rows: list[dict]) -> list[dict]:
    """Per-config mean/stddev over the successful rows."""
    summary = []
    labels = []
    for row in rows:
        if row["config"] not in labels:
            labels.append(row["config"])
    for label in labels:
        cell = [r for r in rows if r["config"] == label]
        ok = [r for r in cell if r["status"] == "ok"]
        entry = {
            "config": label,
            "fingerprint": cell[0]["fingerprint"],
            "n_runs": len(cell),
            "n_failed": len(cell) - len(ok),
        }
        for column in ("subject_consistency_analog", "temporal_flicker_analog"):
            values = [float(r[column]) for r in ok if r[column] != ""]
            entry[f"{column}_mean"] = repr(float(np.mean(values))) if values else ""
            entry[f"{column}_std"] = repr(float(np.std(values))) if values else ""
        calls = [int(r["denoiser_calls"]) for r in ok if r["denoiser_calls"] != ""]
        entry["denoiser_calls_mean"] = repr(float(np.mean(calls))) if calls else ""
        summary.append(entry)
    return summary


SUMMARY_COLUMNS = (
    "config",
    "fingerprint",
    "n_runs",
    "n_failed",
    "subject_consistency_analog_mean",
    "subject_consistency_analog_std",
    "temporal_flicker_analog_mean",
    "temporal_flicker_analog_std",
    "denoiser_calls_mean",
)


def write_csv(path, rows: list[dict], columns) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_trace(path, records: list[TraceRecord]) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_trace(path) -> list[dict]:
    import json

    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]
