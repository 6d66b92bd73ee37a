"""Desk-scale video quality metrics.

These are small analogs computed from the same block descriptors as the
rewards; they are not the large pretrained-feature benchmarks used for
published video models, and reports label them accordingly.
"""

from __future__ import annotations

import numpy as np

from .reward import extract_features

METRIC_NAMES = ("subject_consistency", "temporal_flicker")


def subject_consistency(video: np.ndarray, grid: int = 8) -> float:
    """Mean of (first-to-frame and adjacent-frame cosines) mapped to [0, 1].

    For each frame i >= 2 the raw score is (<d_1, d_i> + <d_{i-1}, d_i>) / 2;
    the mean over frames is mapped through (x + 1) / 2.
    """
    video = np.asarray(video, dtype=np.float64)
    if video.ndim != 3 or video.shape[0] < 2:
        raise ValueError("video must be (frames, H, W) with at least two frames")
    feats = [extract_features(f, grid) for f in video]
    first = feats[0]
    raw = np.mean(
        [0.5 * (np.dot(first, feats[i]) + np.dot(feats[i - 1], feats[i])) for i in range(1, len(feats))]
    )
    return float((raw + 1.0) / 2.0)


def temporal_flicker(video: np.ndarray) -> float:
    """One minus the mean absolute adjacent-frame pixel change, clamped to [0, 1]."""
    video = np.asarray(video, dtype=np.float64)
    if video.ndim != 3 or video.shape[0] < 2:
        raise ValueError("video must be (frames, H, W) with at least two frames")
    mean_change = float(np.mean(np.abs(video[1:] - video[:-1])))
    return float(np.clip(1.0 - mean_change, 0.0, 1.0))
