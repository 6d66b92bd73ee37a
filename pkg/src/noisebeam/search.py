"""Beam search over initial noises, plus the greedy and best-of-n baselines.

Each step scores ``beam_k * cands_n`` candidates with exactly one cheap
denoiser call per candidate (a one-step clean-clip preview rewarded
against the slot's anchor), keeps the global top k with deterministic
tie-breaking, and commits only the winners:

* queue paradigm: each slot's queue is advanced once per step (one call,
  emitting one clean frame, shared by all of that slot's candidates);
  candidates are evaluated as the advanced queue with the candidate
  enqueued at the top level, and committing a winner just performs that
  enqueue.
* chunk paradigm: candidates are window-shaped noises conditioned on the
  slot's tail; committing a winner runs the full conditioned denoise.

Total denoiser usage is exactly predictable from the configuration; see
``predicted_beam_calls`` and friends. Every random draw is keyed by
(seed, step, slot, candidate), so runs are bit-reproducible, also when
scoring in threads.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng as rng_mod
from .metrics import subject_consistency
from .noisepool import Candidate, allocate_counts, build_pool, sample_random, with_score
from .paradigms import DenoisingQueue, Trajectory, chunk_step, fifo_advance, fifo_init
from .reward import make_reward
from .sampler import predict_x0
from .schedule import NoiseSchedule

PARADIGMS = ("fifo", "chunk")
REWARD_VARIANTS = ("full", "local", "anchor")


@dataclass(frozen=True)
class SearchConfig:
    """Everything the search needs besides the denoiser and schedule."""

    paradigm: str = "fifo"
    beam_k: int = 2
    cands_n: int = 5
    steps: int = 48
    reward: str = "full"
    mix: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    fft_r: float = 0.25
    fft_mode: str = "2d"
    delta: float = 0.3
    anchor_lag: int = 0
    overlap: int = 1
    seed: int = 0
    workers: int = 1
    height: int = 16
    width: int = 16
    window: int = 4
    partitions: int = 4

    def validate(self):
        if self.paradigm not in PARADIGMS:
            raise ValueError(f"paradigm must be one of {PARADIGMS}")
        if self.reward not in REWARD_VARIANTS:
            raise ValueError(f"reward must be one of {REWARD_VARIANTS}")
        if min(self.beam_k, self.cands_n, self.steps, self.window) < 1:
            raise ValueError("beam_k, cands_n, steps and window must be positive")
        if self.paradigm == "fifo" and self.partitions < 1:
            raise ValueError("partitions must be positive")
        if not 0 <= self.overlap < self.window:
            raise ValueError("overlap must satisfy 0 <= overlap < window")
        if len(self.mix) != 4 or any(w < 0 for w in self.mix) or sum(self.mix) <= 0:
            raise ValueError("mix must be four non-negative weights, not all zero")
        if not 0.0 <= self.fft_r <= 1.0:
            raise ValueError("fft_r must lie in [0, 1]")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError("delta must lie in [0, 1)")
        if self.anchor_lag < 0 or self.seed < 0 or self.workers < 1:
            raise ValueError("anchor_lag and seed must be >= 0, workers >= 1")


@dataclass
class Beam:
    """The k retained trajectories plus the step counter."""

    slots: list
    step: int
    seed: int


@dataclass(frozen=True)
class TraceRecord:
    step: int
    slot: int
    candidate: int
    strategy: str
    score: float
    selected: bool

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)


@dataclass(frozen=True)
class _SlotContext:
    """Per-slot scoring context for one step."""

    anchor: np.ndarray | None
    # queue paradigm: the advanced queue awaiting its fresh frame
    rest_frames: np.ndarray | None = None
    rest_levels: np.ndarray | None = None
    top_t: int = 0
    # chunk paradigm: the conditioning tail (None when unconditioned)
    tail: np.ndarray | None = None
    alpha_top: float = 0.0

    def eval_state(self, noise: np.ndarray):
        if self.rest_frames is not None:
            frames = np.concatenate([self.rest_frames, noise[None]], axis=0)
            levels = np.append(self.rest_levels, self.top_t)
            return frames, levels
        v = np.array(noise, copy=True)
        if self.tail is not None:
            v[: len(self.tail)] = self.alpha_top * self.tail
        return v, self.top_t


def score_candidates(
    candidates: list[Candidate],
    contexts: list[_SlotContext],
    denoiser,
    schedule: NoiseSchedule,
    reward_fn,
    workers: int = 1,
) -> list[Candidate]:
    """Score each candidate with exactly one denoiser call.

    The candidate's evaluation state is previewed with ``predict_x0`` and
    rewarded against its slot's anchor. Results are independent of
    evaluation order; with workers > 1 candidates are scored in threads.
    """

    def one(cand: Candidate) -> Candidate:
        ctx = contexts[cand.slot]
        frames, levels = ctx.eval_state(cand.noise)
        pred = predict_x0(frames, levels, denoiser, schedule)
        return with_score(cand, reward_fn(ctx.anchor, pred))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, candidates))
    return [one(c) for c in candidates]


def select_top_k(scored: list[Candidate], k: int) -> list[Candidate]:
    """Top k by score, ties broken by (lower slot, lower candidate index)."""
    if k < 1 or k > len(scored):
        raise ValueError("k must satisfy 1 <= k <= number of candidates")
    if any(c.score is None for c in scored):
        raise ValueError("all candidates must be scored")
    return sorted(scored, key=lambda c: (-c.score, c.slot, c.index))[:k]


def _queue_top_level(schedule: NoiseSchedule, qlen: int) -> int:
    return int(schedule.ddim_times[qlen])


def _trace_step(records, writer, step, scored, winners):
    chosen = {(c.slot, c.index) for c in winners}
    for c in scored:
        rec = TraceRecord(
            step=step,
            slot=c.slot,
            candidate=c.index,
            strategy=c.strategy,
            score=c.score,
            selected=(c.slot, c.index) in chosen,
        )
        records.append(rec)
        if writer is not None:
            writer.write(rec.to_json() + "\n")
    if writer is not None:
        writer.flush()


def beam_search_generate(
    cfg: SearchConfig,
    denoiser,
    schedule: NoiseSchedule,
    trace_writer=None,
) -> tuple[np.ndarray, list[TraceRecord]]:
    """Run the full search; returns (best video, trace records).

    The best final trajectory is the one committed from the top-scored
    winner of the last step (slot 0 after selection). When
    ``trace_writer`` is given, each step's records are written and
    flushed as soon as they exist, so a failed run keeps its prefix.
    """
    cfg.validate()
    reward_fn = make_reward(cfg.reward)
    frame_shape = (cfg.height, cfg.width)
    records: list[TraceRecord] = []

    if cfg.paradigm == "fifo":
        qlen = cfg.window * cfg.partitions
        if qlen > schedule.num_ddim_steps:
            raise ValueError("queue length exceeds available strided levels")
        warm_rng = rng_mod.stream(cfg.seed, rng_mod.WARMUP)
        queue, base = fifo_init(
            denoiser, schedule, cfg.window, cfg.partitions, frame_shape, warm_rng
        )
        slots = [
            Trajectory(video=[], anchor=None, queue=queue, base=base, stream_label=f"slot{i}")
            for i in range(cfg.beam_k)
        ]
    else:
        qlen = 0
        slots = [Trajectory(video=[], stream_label=f"slot{i}") for i in range(cfg.beam_k)]

    beam = Beam(slots=slots, step=0, seed=cfg.seed)

    for step in range(cfg.steps):
        contexts = []
        advanced = []
        pools = []
        for s, traj in enumerate(beam.slots):
            if cfg.paradigm == "fifo":
                rest, rest_levels, emitted = fifo_advance(traj.queue, denoiser, schedule)
                advanced.append((rest, rest_levels, emitted))
                top_t = _queue_top_level(schedule, qlen)
                contexts.append(
                    _SlotContext(
                        anchor=traj.anchor_frame(cfg.anchor_lag),
                        rest_frames=rest,
                        rest_levels=rest_levels,
                        top_t=top_t,
                    )
                )
                noise_shape = frame_shape
                context_len = qlen
            else:
                overlap_eff = cfg.overlap if traj.video else 0
                tail = np.stack(traj.video[-overlap_eff:]) if overlap_eff else None
                top_t = int(schedule.ddim_times[-1])
                a_top, _ = schedule.alpha_sigma(top_t)
                contexts.append(
                    _SlotContext(
                        anchor=traj.anchor_frame(cfg.anchor_lag),
                        tail=tail,
                        top_t=top_t,
                        alpha_top=float(a_top),
                    )
                )
                noise_shape = (cfg.window,) + frame_shape
                context_len = cfg.window
            pools.append(
                build_pool(
                    cfg.cands_n,
                    traj,
                    cfg.mix,
                    denoiser,
                    schedule,
                    cfg.seed,
                    step,
                    s,
                    noise_shape,
                    context_len,
                    top_t,
                    fft_r=cfg.fft_r,
                    fft_mode=cfg.fft_mode,
                    delta=cfg.delta,
                )
            )

        flat = [c for pool in pools for c in pool]
        scored = score_candidates(flat, contexts, denoiser, schedule, reward_fn, cfg.workers)
        winners = select_top_k(scored, cfg.beam_k)
        _trace_step(records, trace_writer, step, scored, winners)

        new_slots = []
        for winner in winners:
            src = beam.slots[winner.slot]
            if cfg.paradigm == "fifo":
                rest, rest_levels, emitted = advanced[winner.slot]
                frames = np.concatenate([rest, winner.noise[None]], axis=0)
                levels = np.append(rest_levels, _queue_top_level(schedule, qlen))
                traj = Trajectory(
                    video=src.video + [emitted],
                    queue=DenoisingQueue(
                        frames=frames,
                        levels=levels,
                        window=cfg.window,
                        partitions=cfg.partitions,
                    ),
                    base=src.base,
                    stream_label=src.stream_label,
                )
            else:
                overlap_eff = cfg.overlap if src.video else 0
                clip = chunk_step(src, winner.noise, denoiser, schedule, overlap_eff)
                traj = Trajectory(
                    video=src.video + list(clip[overlap_eff:]),
                    stream_label=src.stream_label,
                )
            traj.anchor = traj.anchor_frame(cfg.anchor_lag)
            new_slots.append(traj)
        beam = Beam(slots=new_slots, step=step + 1, seed=cfg.seed)

    video = np.stack(beam.slots[0].video)
    return video, records


def greedy_generate(cfg: SearchConfig, denoiser, schedule: NoiseSchedule) -> np.ndarray:
    """No-search baseline: one trajectory, first A1 candidate each step.

    Uses the same random-stream keys as slot 0 / candidate 0 of the beam
    path, so it produces the same video as beam_search_generate with
    beam_k = cands_n = 1 and an A1-only mix, without any scoring calls.
    """
    cfg.validate()
    frame_shape = (cfg.height, cfg.width)
    if cfg.paradigm == "fifo":
        qlen = cfg.window * cfg.partitions
        if qlen > schedule.num_ddim_steps:
            raise ValueError("queue length exceeds available strided levels")
        warm_rng = rng_mod.stream(cfg.seed, rng_mod.WARMUP)
        queue, _base = fifo_init(
            denoiser, schedule, cfg.window, cfg.partitions, frame_shape, warm_rng
        )
        video = []
        top = _queue_top_level(schedule, qlen)
        for step in range(cfg.steps):
            rest, rest_levels, emitted = fifo_advance(queue, denoiser, schedule)
            video.append(emitted)
            fresh = sample_random(frame_shape, rng_mod.stream(cfg.seed, rng_mod.CANDIDATE, step, 0, 0))
            queue = DenoisingQueue(
                frames=np.concatenate([rest, fresh[None]], axis=0),
                levels=np.append(rest_levels, top),
                window=cfg.window,
                partitions=cfg.partitions,
            )
        return np.stack(video)

    traj = Trajectory(video=[])
    for step in range(cfg.steps):
        overlap_eff = cfg.overlap if traj.video else 0
        noise = sample_random(
            (cfg.window,) + frame_shape, rng_mod.stream(cfg.seed, rng_mod.CANDIDATE, step, 0, 0)
        )
        clip = chunk_step(traj, noise, denoiser, schedule, overlap_eff)
        traj.video.extend(clip[overlap_eff:])
    return np.stack(traj.video)


def best_of_n(cfg: SearchConfig, n_total: int, denoiser, schedule: NoiseSchedule) -> np.ndarray:
    """Generate n_total greedy videos and keep the most subject-consistent.

    Run i uses master seed cfg.seed + i, so n_total = 1 reproduces
    ``greedy_generate`` exactly. Ties keep the lowest run index.
    """
    if n_total < 1:
        raise ValueError("n_total must be at least 1")
    best_video = None
    best_score = -np.inf
    for i in range(n_total):
        video = greedy_generate(dataclasses.replace(cfg, seed=cfg.seed + i), denoiser, schedule)
        score = subject_consistency(video)
        if score > best_score:
            best_video, best_score = video, score
    return best_video


def _pool_inversion_cost(cfg: SearchConfig, schedule: NoiseSchedule, has_context: bool) -> int:
    """Denoiser calls build_pool spends on the shared inversion, per slot."""
    if not has_context:
        return 0
    counts = allocate_counts(cfg.cands_n, cfg.mix)
    if counts[2] + counts[3] == 0:
        return 0
    if cfg.paradigm == "fifo":
        return cfg.window * cfg.partitions  # ladder position of the queue top
    return schedule.num_ddim_steps


def predicted_beam_calls(cfg: SearchConfig, schedule: NoiseSchedule) -> int:
    """Exact denoiser-call budget of ``beam_search_generate``."""
    s = schedule.num_ddim_steps
    k, n = cfg.beam_k, cfg.cands_n
    if cfg.paradigm == "fifo":
        # A3/A4 (and their inversion calls) first fire once qlen frames
        # have been emitted; before that build_pool reverts them to A1
        qlen = cfg.window * cfg.partitions
        inv = _pool_inversion_cost(cfg, schedule, True)
        return s + cfg.steps * k * (1 + n) + max(cfg.steps - qlen, 0) * k * inv
    total = 0
    for step in range(cfg.steps):
        total += k * n + k * s + k * _pool_inversion_cost(cfg, schedule, step > 0)
    return total


def predicted_greedy_calls(cfg: SearchConfig, schedule: NoiseSchedule) -> int:
    """Exact denoiser-call budget of ``greedy_generate``."""
    s = schedule.num_ddim_steps
    if cfg.paradigm == "fifo":
        return s + cfg.steps
    return cfg.steps * s


def predicted_bon_calls(cfg: SearchConfig, schedule: NoiseSchedule, n_total: int) -> int:
    """Exact denoiser-call budget of ``best_of_n``."""
    return n_total * predicted_greedy_calls(cfg, schedule)
