"""Long-video generation paradigms: chunked windows and a rolling queue.

``chunk_step`` denoises one fixed-length window conditioned on the tail
of the video so far: at every reverse step the first ``overlap`` frames
are overwritten with the tail scaled to the current signal level (the
noiseless forward map), and the returned clip reproduces the tail
bit-exactly in those positions. With overlap 0 it reduces to a plain
full denoise of the window.

The queue paradigm keeps window*partitions frames at strictly increasing
strided noise levels (positions 1..Q of the ladder). One step denoises
every entry one level down with a single whole-queue call, emits the
front frame (now at the bottom level), and enqueues one fresh frame at
the top level. Initialization noises a clean warm-up clip onto the
ladder with the closed forward map.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sampler import ddim_step, forward_noise, full_denoise
from .schedule import NoiseSchedule


@dataclass(frozen=True)
class DenoisingQueue:
    """Rolling buffer of frames at strictly increasing noise levels."""

    frames: np.ndarray  # (window * partitions, H, W)
    levels: np.ndarray  # (window * partitions,) step indices, increasing
    window: int
    partitions: int

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        levels = np.asarray(self.levels, dtype=np.int64)
        if frames.ndim != 3:
            raise ValueError("queue frames must be (length, H, W)")
        if len(frames) != self.window * self.partitions:
            raise ValueError("queue length must equal window * partitions")
        if levels.shape != (len(frames),):
            raise ValueError("one level per queue entry required")
        if not np.all(np.diff(levels) > 0):
            raise ValueError("queue levels must be strictly increasing")
        if not np.all(np.isfinite(frames)):
            raise ValueError("queue frames must be finite")
        frames.flags.writeable = False
        levels.flags.writeable = False
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "levels", levels)

    def __len__(self) -> int:
        return len(self.frames)


@dataclass
class Trajectory:
    """One retained search path: its clean video plus paradigm state.

    ``video`` holds fully denoised frames in emission order. Anchors and
    candidate context are drawn from ``video`` only: the queue paradigm's
    warm-up previews (``base``) describe frames still inside the queue,
    so treating them as past output would hand the noise strategies a
    spliced sequence no real trajectory produced. ``base`` is kept purely
    as diagnostic metadata.
    """

    video: list = field(default_factory=list)
    anchor: np.ndarray | None = None
    queue: DenoisingQueue | None = None
    base: np.ndarray | None = None
    stream_label: str = ""

    def clone(self) -> "Trajectory":
        return Trajectory(
            video=list(self.video),
            anchor=self.anchor,
            queue=self.queue,
            base=self.base,
            stream_label=self.stream_label,
        )

    def context_frames(self, length: int) -> np.ndarray | None:
        """Up to ``length`` most recent emitted frames, or None if empty.

        May return fewer than ``length`` frames early in a run; callers
        that need a full-length clip must check and fall back.
        """
        if not self.video:
            return None
        return np.stack(self.video[-length:])

    def anchor_frame(self, lag: int = 0) -> np.ndarray | None:
        """Anchor policy: the most recent emitted frame, ``lag`` frames back.

        Lag reaching past the first emission clamps to it; an empty
        trajectory has no anchor (callers score anchorless).
        """
        if not self.video:
            return None
        idx = max(len(self.video) - 1 - lag, 0)
        return self.video[idx]


def chunk_step(
    traj: Trajectory,
    init_noise: np.ndarray,
    denoiser,
    schedule: NoiseSchedule,
    overlap: int = 1,
) -> np.ndarray:
    """Denoise one window conditioned on the trajectory tail.

    Consumes exactly schedule.num_ddim_steps denoiser calls. Requires
    overlap < window length, and a non-empty trajectory when overlap > 0.
    """
    init_noise = np.asarray(init_noise, dtype=np.float64)
    if init_noise.ndim != 3:
        raise ValueError("init_noise must be (window, H, W)")
    window = len(init_noise)
    if not 0 <= overlap < window:
        raise ValueError("overlap must satisfy 0 <= overlap < window")
    tail = None
    if overlap > 0:
        if len(traj.video) < overlap:
            raise ValueError("trajectory too short for the requested overlap")
        tail = np.stack(traj.video[-overlap:])

    times = schedule.ddim_times
    v = init_noise.copy()
    for i in range(len(times) - 1, 0, -1):
        hi, lo = int(times[i]), int(times[i - 1])
        if tail is not None:
            a_hi, _ = schedule.alpha_sigma(hi)
            v[:overlap] = a_hi * tail
        v = ddim_step(v, hi, lo, denoiser, schedule)
    if tail is not None:
        v[:overlap] = tail
    return v


def fifo_init(
    denoiser,
    schedule: NoiseSchedule,
    window: int,
    partitions: int,
    frame_shape: tuple[int, int],
    rng: np.random.Generator,
    base_clip: np.ndarray | None = None,
) -> tuple[DenoisingQueue, np.ndarray]:
    """Warm up the queue from a clean clip noised onto the ladder.

    When ``base_clip`` is None a clip is generated by fully denoising
    fresh noise (schedule.num_ddim_steps calls); otherwise the given
    clean clip is used as-is. Entry i lands at ladder level
    ddim_times[i + 1], so the queue needs window * partitions strided
    levels above the bottom one. Returns (queue, warm-up clip).
    """
    qlen = window * partitions
    if qlen < 1:
        raise ValueError("window and partitions must be positive")
    if qlen > schedule.num_ddim_steps:
        raise ValueError("queue length exceeds available strided levels")
    shape = (qlen,) + tuple(frame_shape)
    if base_clip is None:
        base = full_denoise(rng.standard_normal(shape), denoiser, schedule)
    else:
        base = np.asarray(base_clip, dtype=np.float64)
        if base.shape != shape:
            raise ValueError(f"base_clip must have shape {shape}")
    levels = schedule.ddim_times[1 : qlen + 1]
    eps = rng.standard_normal(shape)
    frames = forward_noise(base, levels, eps, schedule)
    queue = DenoisingQueue(frames=frames, levels=levels, window=window, partitions=partitions)
    return queue, base


def fifo_advance(
    queue: DenoisingQueue, denoiser, schedule: NoiseSchedule
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Diagonal update: every entry one strided level down, front emitted.

    One whole-queue denoiser call. Returns (remaining frames, remaining
    levels, emitted clean frame); the remaining entries are what the next
    fresh frame is enqueued behind.
    """
    pos = np.searchsorted(schedule.ddim_times, queue.levels)
    t_to = schedule.ddim_times[pos - 1]
    stepped = ddim_step(queue.frames, queue.levels, t_to, denoiser, schedule)
    return stepped[1:], t_to[1:], stepped[0]


def fifo_step(
    queue: DenoisingQueue,
    fresh_noise: np.ndarray,
    denoiser,
    schedule: NoiseSchedule,
) -> tuple[DenoisingQueue, np.ndarray]:
    """One full queue step: advance, dequeue the front, enqueue fresh noise.

    ``fresh_noise`` is a single frame placed at the queue's top level.
    The ladder of levels is unchanged by a completed step.
    """
    fresh_noise = np.asarray(fresh_noise, dtype=np.float64)
    if fresh_noise.shape != queue.frames.shape[1:]:
        raise ValueError("fresh_noise must be a single frame matching the queue")
    rest, rest_levels, emitted = fifo_advance(queue, denoiser, schedule)
    frames = np.concatenate([rest, fresh_noise[None]], axis=0)
    levels = np.append(rest_levels, queue.levels[-1])
    new_queue = DenoisingQueue(
        frames=frames, levels=levels, window=queue.window, partitions=queue.partitions
    )
    return new_queue, emitted
