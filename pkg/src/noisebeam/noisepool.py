"""Candidate initial-noise pools drawn from four tilted strategies.

Strategy tags (fixed vocabulary used in config mixes and traces):

* A1: independent standard Gaussian noise.
* A2: spectral blend; keep the low radial band of recent frames (already
  re-noised to the target level by the caller of the raw sampler, or by
  ``build_pool``) and take the high band from fresh noise, then rescale
  to unit per-entry RMS.
* A3: deterministic re-noising of recent clean frames by walking the
  strided ladder upward (inversion).
* A4: spherical resampling around the inversion:
  sqrt(1 - delta^2) * inversion + delta * fresh noise.

``build_pool`` allocates a requested pool size over the strategy mix by
largest remainder (ties to the lower strategy index) and falls back to
A1 for every seat when the trajectory has no generated frames yet; A3
and A4 seats additionally revert to A1 until a full context clip of
emitted frames exists, since the inversion runs the denoiser. Each
candidate's noise comes from a stream keyed by (seed, step, slot, index),
so pools are reproducible regardless of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import rng as rng_mod
from .paradigms import Trajectory
from .sampler import ddim_invert, forward_noise
from .schedule import NoiseSchedule

STRATEGIES = ("A1", "A2", "A3", "A4")


@dataclass(frozen=True)
class Candidate:
    """One scored or unscored pool entry."""

    noise: np.ndarray
    strategy: str
    slot: int
    index: int
    stream_label: str
    score: float | None = None


def sample_random(shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """A1: iid standard normal noise."""
    return rng.standard_normal(shape)


def _radial_low_mask(shape: tuple[int, ...], cutoff_r: float) -> np.ndarray:
    """Ideal low-band mask over normalized radial frequency.

    cutoff_r = 0 keeps nothing, cutoff_r = 1 keeps every bin; in between
    the kept region is the open disc radius < cutoff_r relative to the
    largest bin radius.
    """
    axes_freqs = [np.fft.fftfreq(n) for n in shape]
    grids = np.meshgrid(*axes_freqs, indexing="ij")
    radius = np.sqrt(sum(g**2 for g in grids))
    if cutoff_r >= 1.0:
        return np.ones(shape, dtype=bool)
    return radius < cutoff_r * radius.max()


def sample_fft_blend(
    prev_frames: np.ndarray,
    cutoff_r: float,
    rng: np.random.Generator,
    mode: str = "2d",
) -> np.ndarray:
    """A2: low band from prev_frames, high band from fresh noise.

    ``prev_frames`` must already sit at the target noise level; the
    output has the same shape and unit per-entry RMS. ``mode`` selects
    per-frame 2-D transforms or one 3-D transform over the whole stack.
    """
    prev_frames = np.asarray(prev_frames, dtype=np.float64)
    if prev_frames.ndim != 3 or prev_frames.shape[0] < 1:
        raise ValueError("prev_frames must be a non-empty (frames, H, W) stack")
    if not 0.0 <= cutoff_r <= 1.0:
        raise ValueError("cutoff_r must lie in [0, 1]")
    if mode not in ("2d", "3d"):
        raise ValueError("mode must be '2d' or '3d'")

    eta = rng.standard_normal(prev_frames.shape)
    if mode == "2d":
        low = _radial_low_mask(prev_frames.shape[1:], cutoff_r)[None]
        axes = (1, 2)
    else:
        low = _radial_low_mask(prev_frames.shape, cutoff_r)
        axes = (0, 1, 2)
    spec = np.where(
        low, np.fft.fftn(prev_frames, axes=axes), np.fft.fftn(eta, axes=axes)
    )
    blend = np.fft.ifftn(spec, axes=axes).real
    rms = math.sqrt(float(np.mean(blend**2)))
    if rms < 1e-30:
        return blend  # only reachable with an all-zero input at cutoff 1
    return blend / rms


def sample_inversion(
    prev_clip: np.ndarray,
    denoiser,
    schedule: NoiseSchedule,
    t_top: int | None = None,
) -> np.ndarray:
    """A3: walk the clean clip up the strided ladder to ``t_top``.

    Defaults to the topmost strided level. Deterministic; costs one
    denoiser call per interval crossed.
    """
    if t_top is None:
        t_top = int(schedule.ddim_times[-1])
    return ddim_invert(prev_clip, int(schedule.ddim_times[0]), int(t_top), denoiser, schedule)


def sample_inversion_resample(
    inverted: np.ndarray, delta: float, rng: np.random.Generator
) -> np.ndarray:
    """A4: spherical step of size delta away from an inverted clip."""
    if not 0.0 <= delta < 1.0:
        raise ValueError("delta must lie in [0, 1)")
    eta = rng.standard_normal(inverted.shape)
    return math.sqrt(1.0 - delta**2) * inverted + delta * eta


def allocate_counts(n: int, weights) -> tuple[int, ...]:
    """Largest-remainder split of n over the strategy weights.

    Fractional-part ties go to the lower strategy index, so allocation
    is fully deterministic.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or len(w) != len(STRATEGIES):
        raise ValueError(f"need {len(STRATEGIES)} weights")
    if np.any(w < 0) or w.sum() <= 0:
        raise ValueError("weights must be non-negative and not all zero")
    if n < 0:
        raise ValueError("n must be non-negative")
    quota = n * w / w.sum()
    counts = np.floor(quota).astype(int)
    remainder = n - counts.sum()
    order = sorted(range(len(w)), key=lambda i: (-(quota[i] - counts[i]), i))
    for i in order[:remainder]:
        counts[i] += 1
    return tuple(int(c) for c in counts)


def build_pool(
    n: int,
    traj: Trajectory,
    mix,
    denoiser,
    schedule: NoiseSchedule,
    master_seed: int,
    step: int,
    slot: int,
    noise_shape: tuple[int, ...],
    context_len: int,
    top_t: int,
    fft_r: float = 0.25,
    fft_mode: str = "2d",
    delta: float = 0.3,
) -> list[Candidate]:
    """Build one slot's candidate pool for one search step.

    ``noise_shape`` is (H, W) for the queue paradigm (single fresh frame)
    or (window, H, W) for the chunk paradigm. ``context_len`` is how many
    recent clean frames strategies A2..A4 look at; when the trajectory
    has no generated frames at all, every candidate falls back to A1.
    The shared inversion for A3/A4 is computed at most once per call.
    """
    context = traj.context_frames(context_len)
    if context is None:
        counts = (n, 0, 0, 0)
    else:
        counts = allocate_counts(n, mix)
        if len(context) < context_len:
            # the inversion denoiser only accepts full-length clips, so
            # A3/A4 seats revert to A1 until enough frames were emitted
            counts = (counts[0] + counts[2] + counts[3], counts[1], 0, 0)

    single_frame = len(noise_shape) == 2
    inverted = None
    if counts[2] + counts[3] > 0:
        inverted = sample_inversion(context, denoiser, schedule, t_top=top_t)

    pool: list[Candidate] = []
    index = 0
    for strat_i, count in enumerate(counts):
        tag = STRATEGIES[strat_i]
        for _ in range(count):
            gen = rng_mod.stream(master_seed, rng_mod.CANDIDATE, step, slot, index)
            label = rng_mod.stream_label(rng_mod.CANDIDATE, step, slot, index)
            if tag == "A1":
                noise = sample_random(noise_shape, gen)
            elif tag == "A2":
                ctx = context[-1:] if single_frame else context
                eta_fwd = gen.standard_normal(ctx.shape)
                at_top = forward_noise(ctx, top_t, eta_fwd, schedule)
                blended = sample_fft_blend(at_top, fft_r, gen, mode=fft_mode)
                noise = blended[0] if single_frame else blended
            elif tag == "A3":
                noise = inverted[-1] if single_frame else inverted
            else:
                src = inverted[-1] if single_frame else inverted
                noise = sample_inversion_resample(src, delta, gen)
            pool.append(
                Candidate(noise=noise, strategy=tag, slot=slot, index=index, stream_label=label)
            )
            index += 1
    return pool


def with_score(candidate: Candidate, score: float) -> Candidate:
    """Candidates are frozen; scoring returns a copy."""
    return replace(candidate, score=float(score))
