"""Synthetic moving-subject clips and two exactly solvable denoisers.

Frames are (H, W) float64 arrays with intensities in [-1, 1]; clips stack
frames along axis 0. The world renders a single bright subject (square or
disc) translating with constant velocity over a flat background, wrapping
toroidally at the borders.

Both denoiser models return the exact posterior noise prediction for
their respective prior, which is what makes the whole sampling stack
checkable against closed forms:

* ``GaussianDenoiser``: clean data x ~ N(mu, s^2 I). Under
  v_t = alpha x + sigma eps the posterior mean of x is
  m = mu + (alpha s^2 / (alpha^2 s^2 + sigma^2)) (v_t - alpha mu)
  and eps_hat = (v_t - alpha m) / sigma.
* ``MixtureDenoiser``: clean data uniform over a finite corpus of clips.
  Posterior weights are softmax of -||v_t - alpha x_j||^2 / (2 sigma^2)
  (per-entry coefficients, log-sum-exp stabilized) and the posterior
  mean is the weighted corpus average.

At sigma == 0 for every frame the predicted noise is the zero clip.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .sampler import CountingDenoiser
from .schedule import NoiseSchedule


@dataclass(frozen=True)
class SubjectSpec:
    """Rendering parameters for the moving subject.

    ``position`` is the top-left corner for squares and the center for
    discs; ``velocity`` is (rows, cols) per frame and may be fractional
    (positions are rounded at render time). ``size`` is the square edge
    length or the disc diameter, in pixels.
    """

    shape: str = "square"
    size: int = 5
    intensity: float = 1.0
    position: tuple[float, float] = (5.0, 2.0)
    velocity: tuple[float, float] = (0.0, 1.0)
    background: float = -1.0

    def validate(self, height: int, width: int):
        if self.shape not in ("square", "disc"):
            raise ValueError(f"unknown subject shape {self.shape!r}")
        if self.size < 1 or self.size > min(height, width):
            raise ValueError("subject size must fit inside the frame")
        if abs(self.velocity[0]) >= height / 2 or abs(self.velocity[1]) >= width / 2:
            raise ValueError("per-frame displacement must stay below half the frame")


def _render(spec: SubjectSpec, row: float, col: float, height: int, width: int) -> np.ndarray:
    frame = np.full((height, width), spec.background, dtype=np.float64)
    r = int(round(row)) % height
    c = int(round(col)) % width
    if spec.shape == "square":
        rows = (r + np.arange(spec.size)) % height
        cols = (c + np.arange(spec.size)) % width
        frame[np.ix_(rows, cols)] = spec.intensity
    else:
        radius = spec.size / 2.0
        # toroidal displacement to the disc center
        dr = (np.arange(height) - r + height / 2.0) % height - height / 2.0
        dc = (np.arange(width) - c + width / 2.0) % width - width / 2.0
        mask = dr[:, None] ** 2 + dc[None, :] ** 2 <= radius**2
        frame[mask] = spec.intensity
    return frame


def gen_clip(
    spec: SubjectSpec,
    num_frames: int,
    height: int,
    width: int,
    rng: np.random.Generator | None = None,
    pixel_noise: float = 0.0,
) -> np.ndarray:
    """Render a clip of the subject translating with toroidal wrap.

    Frame 0 renders the spec exactly; when ``pixel_noise`` > 0, frames
    from index 1 on get additive Gaussian pixel noise from ``rng``.
    """
    spec.validate(height, width)
    if num_frames < 1:
        raise ValueError("num_frames must be at least 1")
    if pixel_noise > 0.0 and rng is None:
        raise ValueError("pixel_noise requires an rng")
    frames = np.empty((num_frames, height, width), dtype=np.float64)
    for f in range(num_frames):
        row = spec.position[0] + f * spec.velocity[0]
        col = spec.position[1] + f * spec.velocity[1]
        frames[f] = _render(spec, row, col, height, width)
        if pixel_noise > 0.0 and f > 0:
            frames[f] += pixel_noise * rng.standard_normal((height, width))
    return frames


def _per_frame(values, clip_ndim: int):
    v = np.asarray(values)
    if v.ndim == 1 and clip_ndim == 3:
        return v[:, None, None]
    return v


@dataclass(frozen=True)
class GaussianDenoiser:
    """Exact noise prediction under a Gaussian prior N(mean, prior_std^2 I)."""

    mean: np.ndarray
    prior_std: float

    def __post_init__(self):
        if self.prior_std <= 0.0:
            raise ValueError("prior_std must be positive")
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=np.float64))

    def posterior_mean(self, v_t: np.ndarray, t, schedule: NoiseSchedule) -> np.ndarray:
        a, s = schedule.alpha_sigma(t)
        a = _per_frame(a, v_t.ndim)
        s = _per_frame(s, v_t.ndim)
        s2 = self.prior_std**2
        gain = a * s2 / (a * a * s2 + s * s)  # denominator > 0: a > 0, s2 > 0
        return self.mean + gain * (v_t - a * self.mean)

    def predict_eps(self, v_t: np.ndarray, t, schedule: NoiseSchedule) -> np.ndarray:
        a, s = schedule.alpha_sigma(t)
        a = _per_frame(a, v_t.ndim)
        s = _per_frame(s, v_t.ndim)
        m = self.posterior_mean(v_t, t, schedule)
        with np.errstate(divide="ignore", invalid="ignore"):
            eps = np.where(s > 0, (v_t - a * m) / np.where(s > 0, s, 1.0), 0.0)
        return eps


@dataclass(frozen=True)
class MixtureDenoiser:
    """Exact noise prediction when clean clips are uniform over a corpus.

    ``corpus`` has shape (N, frames, H, W); inputs to ``predict_eps``
    must match the corpus clip shape.
    """

    corpus: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(np.asarray(self.corpus, dtype=np.float64))
        if c.ndim != 4 or c.shape[0] < 1:
            raise ValueError("corpus must be (N, frames, H, W) with N >= 1")
        c.flags.writeable = False
        object.__setattr__(self, "corpus", c)

    def posterior_weights(self, v_t: np.ndarray, t, schedule: NoiseSchedule):
        """(posterior mean, corpus weights) for a noisy clip."""
        if v_t.shape != self.corpus.shape[1:]:
            raise ValueError(
                f"clip shape {v_t.shape} does not match corpus clips {self.corpus.shape[1:]}"
            )
        a, s = schedule.alpha_sigma(t)
        entries = v_t.size
        per_frame = entries // v_t.shape[0]
        a_e = np.repeat(np.broadcast_to(a, (v_t.shape[0],)), per_frame).astype(np.float64)
        s_e = np.repeat(np.broadcast_to(s, (v_t.shape[0],)), per_frame).astype(np.float64)
        inv = np.zeros(entries, dtype=np.float64)
        nz = s_e > 0
        inv[nz] = 1.0 / (2.0 * s_e[nz] ** 2)
        flat = self.corpus.reshape(len(self.corpus), -1)
        m, w = kernels.posterior_mean(
            np.ascontiguousarray(v_t.reshape(-1), dtype=np.float64), flat, a_e, inv
        )
        return m.reshape(v_t.shape), w

    def posterior_mean(self, v_t: np.ndarray, t, schedule: NoiseSchedule) -> np.ndarray:
        return self.posterior_weights(v_t, t, schedule)[0]

    def predict_eps(self, v_t: np.ndarray, t, schedule: NoiseSchedule) -> np.ndarray:
        a, s = schedule.alpha_sigma(t)
        a_b = _per_frame(a, v_t.ndim)
        s_b = _per_frame(s, v_t.ndim)
        if np.all(s_b == 0.0):
            return np.zeros_like(v_t)
        m = self.posterior_mean(v_t, t, schedule)
        with np.errstate(divide="ignore", invalid="ignore"):
            eps = np.where(s_b > 0, (v_t - a_b * m) / np.where(s_b > 0, s_b, 1.0), 0.0)
        return eps


def make_denoiser(model, schedule: NoiseSchedule) -> CountingDenoiser:
    """Bind a model to a schedule behind the counting evaluation contract."""
    return CountingDenoiser(lambda v_t, t: model.predict_eps(v_t, t, schedule))
