"""Noise schedule and the strided time subset used by the sampler.

The forward process at step t scales clean data by alpha_t = sqrt(abar_t)
and adds Gaussian noise with standard deviation sigma_t = sqrt(1 - abar_t),
so per-entry variance is preserved: alpha_t^2 + sigma_t^2 = 1. Sampling
visits only a strided subset of the full step range; that subset is stored
in ``ddim_times`` in increasing order and always starts at index 0 (the
cleanest state) and ends at the last step (pure noise, essentially).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NoiseSchedule:
    """Cumulative signal levels plus the strided sampling times.

    Attributes:
        total_steps: number of forward steps T; ``alpha_bar`` has this length.
        ddim_times: strictly increasing int64 array of S+1 step indices,
            with ddim_times[0] == 0 and ddim_times[-1] == total_steps - 1.
        alpha_bar: strictly decreasing float64 array in (0, 1].
    """

    total_steps: int
    ddim_times: np.ndarray
    alpha_bar: np.ndarray

    def __post_init__(self):
        ab = np.asarray(self.alpha_bar, dtype=np.float64)
        times = np.asarray(self.ddim_times, dtype=np.int64)
        if ab.ndim != 1 or len(ab) != self.total_steps:
            raise ValueError("alpha_bar must be 1-D with length total_steps")
        if not (np.all(ab > 0.0) and np.all(ab <= 1.0)):
            raise ValueError("alpha_bar values must lie in (0, 1]")
        if not np.all(np.diff(ab) < 0.0):
            raise ValueError("alpha_bar must be strictly decreasing")
        if times.ndim != 1 or len(times) < 2:
            raise ValueError("ddim_times must hold at least two step indices")
        if not np.all(np.diff(times) > 0):
            raise ValueError("ddim_times must be strictly increasing")
        if times[0] != 0 or times[-1] != self.total_steps - 1:
            raise ValueError("ddim_times must start at 0 and end at total_steps - 1")
        ab.flags.writeable = False
        times.flags.writeable = False
        object.__setattr__(self, "alpha_bar", ab)
        object.__setattr__(self, "ddim_times", times)

    @property
    def num_ddim_steps(self) -> int:
        """Number of strided sampling intervals S."""
        return len(self.ddim_times) - 1

    def alpha_sigma(self, t):
        """Signal and noise scales for step index t (scalar or array)."""
        t = np.asarray(t, dtype=np.int64)
        if np.any(t < 0) or np.any(t >= self.total_steps):
            raise ValueError("step index out of range")
        ab = self.alpha_bar[t]
        return np.sqrt(ab), np.sqrt(1.0 - ab)

    def is_ddim_time(self, t) -> bool:
        t = np.atleast_1d(np.asarray(t, dtype=np.int64))
        pos = np.searchsorted(self.ddim_times, t)
        ok = pos < len(self.ddim_times)
        ok &= self.ddim_times[np.minimum(pos, len(self.ddim_times) - 1)] == t
        return bool(np.all(ok))

    def require_ddim_times(self, t):
        if not self.is_ddim_time(t):
            raise ValueError(f"step index {t!r} is not in ddim_times")


def make_schedule(
    total_steps: int,
    ddim_steps: int,
    beta_min: float = 1e-4,
    beta_max: float = 2e-2,
) -> NoiseSchedule:
    """Build a linear-beta schedule with an evenly strided sampling subset.

    beta ramps linearly from beta_min at step 0 to beta_max at the last
    step; abar_t is the running product of (1 - beta_s) for s <= t. The
    strided subset holds ddim_steps + 1 evenly spaced indices including
    both endpoints, so total_steps must exceed ddim_steps (otherwise the
    rounded indices would collide).
    """
    if total_steps < 2:
        raise ValueError("total_steps must be at least 2")
    if ddim_steps < 1:
        raise ValueError("ddim_steps must be at least 1")
    if total_steps <= ddim_steps:
        raise ValueError("total_steps must exceed ddim_steps")
    if not (0.0 < beta_min <= beta_max < 1.0):
        raise ValueError("need 0 < beta_min <= beta_max < 1")

    t = np.arange(total_steps, dtype=np.float64)
    betas = beta_min + (beta_max - beta_min) * t / (total_steps - 1)
    alpha_bar = np.cumprod(1.0 - betas)
    times = np.round(np.linspace(0, total_steps - 1, ddim_steps + 1)).astype(np.int64)
    return NoiseSchedule(total_steps=total_steps, ddim_times=times, alpha_bar=alpha_bar)


def signal_noise(schedule: NoiseSchedule, t: int) -> tuple[float, float]:
    """(alpha_t, sigma_t) for a single step index."""
    a, s = schedule.alpha_sigma(int(t))
    return float(a), float(s)
