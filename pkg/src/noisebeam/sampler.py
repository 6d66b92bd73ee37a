"""Deterministic strided sampling: reverse steps, inversion, one-step preview.

All operations work on clips shaped (frames, H, W) in float64 and accept
either a single step index for the whole clip or one index per frame
(needed by the diagonal-denoising queue). Step indices must be members of
the schedule's strided subset. The reverse update is the deterministic
(eta = 0) rule:

    x0_hat = (v - sigma_from * eps_hat) / alpha_from
    v'     = alpha_to * x0_hat + sigma_to * eps_hat

Inversion walks the same intervals upward, re-anchoring eps_hat at each
current state. ``predict_x0`` applies the first line only, which costs a
single denoiser evaluation and is the cheap preview used to score noise
candidates.
"""

from __future__ import annotations

import threading

import numpy as np

from .schedule import NoiseSchedule


class CountingDenoiser:
    """Wrap an eps-prediction function with a thread-safe call counter.

    The wrapped function must be pure: (noisy clip, step index per frame)
    -> predicted noise clip, no hidden state. The counter is the only
    mutable part and increases by exactly one per evaluation, also under
    concurrent calls.
    """

    def __init__(self, fn):
        self._fn = fn
        self._lock = threading.Lock()
        self._calls = 0

    def __call__(self, v_t: np.ndarray, t) -> np.ndarray:
        with self._lock:
            self._calls += 1
        return self._fn(v_t, t)

    @property
    def calls(self) -> int:
        return self._calls


def _alpha_sigma(schedule: NoiseSchedule, t, ndim: int):
    # Broadcast per-frame coefficients over (frames, H, W) clips.
    a, s = schedule.alpha_sigma(t)
    if np.ndim(a) == 1 and ndim == 3:
        a = a[:, None, None]
        s = s[:, None, None]
    return a, s


def forward_noise(x: np.ndarray, t, eps: np.ndarray, schedule: NoiseSchedule) -> np.ndarray:
    """Closed-form forward map: alpha_t * x + sigma_t * eps."""
    a, s = _alpha_sigma(schedule, t, x.ndim)
    return a * x + s * eps


def ddim_step(v_t, t_from, t_to, denoiser, schedule: NoiseSchedule) -> np.ndarray:
    """One reverse update from t_from down to t_to (both in ddim_times)."""
    schedule.require_ddim_times(t_from)
    schedule.require_ddim_times(t_to)
    if not np.all(np.asarray(t_from) > np.asarray(t_to)):
        raise ValueError("t_from must be strictly greater than t_to")
    eps = denoiser(v_t, t_from)
    a_f, s_f = _alpha_sigma(schedule, t_from, v_t.ndim)
    a_t, s_t = _alpha_sigma(schedule, t_to, v_t.ndim)
    x0 = (v_t - s_f * eps) / a_f
    return a_t * x0 + s_t * eps


def predict_x0(v_t, t, denoiser, schedule: NoiseSchedule) -> np.ndarray:
    """One-step clean-clip preview; exactly one denoiser call.

    At sigma_t == 0 for every frame the clip is already clean and is
    returned unchanged with zero calls.
    """
    schedule.require_ddim_times(t)
    a, s = _alpha_sigma(schedule, t, v_t.ndim)
    if np.all(s == 0.0):
        return np.array(v_t, copy=True)
    eps = denoiser(v_t, t)
    return (v_t - s * eps) / a


def _ladder_between(schedule: NoiseSchedule, t_lo: int, t_hi: int) -> np.ndarray:
    times = schedule.ddim_times
    schedule.require_ddim_times(t_lo)
    schedule.require_ddim_times(t_hi)
    if t_lo >= t_hi:
        raise ValueError("need t_lo < t_hi")
    return times[(times >= t_lo) & (times <= t_hi)]


def ddim_invert(v, t_from: int, t_to: int, denoiser, schedule: NoiseSchedule) -> np.ndarray:
    """Walk the strided intervals upward, re-noising deterministically.

    Inverts the reverse update by applying it with the roles of the two
    levels swapped, anchoring eps_hat at the current (lower) state. Costs
    one denoiser call per interval crossed.
    """
    ladder = _ladder_between(schedule, int(t_from), int(t_to))
    out = np.array(v, dtype=np.float64, copy=True)
    for lo, hi in zip(ladder[:-1], ladder[1:]):
        eps = denoiser(out, int(lo))
        a_l, s_l = _alpha_sigma(schedule, int(lo), out.ndim)
        a_h, s_h = _alpha_sigma(schedule, int(hi), out.ndim)
        out = a_h * ((out - s_l * eps) / a_l) + s_h * eps
    return out


def full_denoise(init_noise, denoiser, schedule: NoiseSchedule) -> np.ndarray:
    """Run every strided interval from the top down to index 0.

    Consumes exactly ``schedule.num_ddim_steps`` denoiser calls.
    """
    times = schedule.ddim_times
    v = np.array(init_noise, dtype=np.float64, copy=True)
    for i in range(len(times) - 1, 0, -1):
        v = ddim_step(v, int(times[i]), int(times[i - 1]), denoiser, schedule)
    return v


def denoise_to_clean(frames, levels, denoiser, schedule: NoiseSchedule) -> np.ndarray:
    """Jointly denoise frames at mixed levels until all reach index 0.

    Each pass moves every not-yet-clean frame one strided level down with
    a single whole-clip denoiser call; frames already at the bottom are
    carried over bit-exactly. Call count equals the highest starting
    ladder position.
    """
    levels = np.asarray(levels, dtype=np.int64)
    schedule.require_ddim_times(levels)
    pos = np.searchsorted(schedule.ddim_times, levels)
    out = np.array(frames, dtype=np.float64, copy=True)
    while pos.max() > 0:
        active = pos > 0
        t_from = schedule.ddim_times[pos]
        t_to = schedule.ddim_times[np.maximum(pos - 1, 0)]
        eps = denoiser(out, t_from)
        a_f, s_f = _alpha_sigma(schedule, t_from, 3)
        a_t, s_t = _alpha_sigma(schedule, t_to, 3)
        stepped = a_t * ((out - s_f * eps) / a_f) + s_t * eps
        out[active] = stepped[active]
        pos = np.maximum(pos - 1, 0)
    return out
