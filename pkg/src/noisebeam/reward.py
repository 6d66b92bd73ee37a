"""Frame descriptors and consistency rewards.

A frame descriptor is the grid of block means (default 8x8, so D = 64),
centered by subtracting its own mean and L2-normalized. Descriptors are
invariant to positive affine intensity changes of the frame. A constant
frame has no direction after centering; it maps to a fixed unit basis
vector (the degenerate case is documented rather than raised, so scoring
never aborts a run).

Rewards are averages of descriptor cosines and live in [-1, 1]:

* ``reward_full(anchor, clip)``: (1 / 2M) * sum_i (<d_a, d_i> + <d_i, d_{i-1}>)
  with d_0 taken to be the anchor descriptor.
* ``reward_local(clip)``: mean adjacent cosine, needs at least 2 frames.
* ``reward_anchor(anchor, clip)``: cosine between anchor and last frame.
"""

from __future__ import annotations

import numpy as np

_DEGENERATE_NORM = 1e-12


def extract_features(frame: np.ndarray, grid: int = 8) -> np.ndarray:
    """Pooled, centered, unit-norm descriptor of one frame."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2:
        raise ValueError("frame must be 2-D")
    h, w = frame.shape
    if h < grid or w < grid:
        raise ValueError(f"frame must be at least {grid}x{grid}")
    r_edges = (np.arange(grid + 1) * h) // grid
    c_edges = (np.arange(grid + 1) * w) // grid
    row_sums = np.add.reduceat(frame, r_edges[:-1], axis=0)
    block_sums = np.add.reduceat(row_sums, c_edges[:-1], axis=1)
    counts = np.outer(np.diff(r_edges), np.diff(c_edges))
    pooled = (block_sums / counts).reshape(-1)
    centered = pooled - pooled.mean()
    norm = np.linalg.norm(centered)
    if norm < _DEGENERATE_NORM:
        basis = np.zeros(grid * grid, dtype=np.float64)
        basis[0] = 1.0
        return basis
    return centered / norm


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Inner product of two unit-norm descriptors."""
    return float(np.dot(u, v))


def _clip_features(clip: np.ndarray, grid: int) -> list[np.ndarray]:
    clip = np.asarray(clip, dtype=np.float64)
    if clip.ndim != 3 or clip.shape[0] < 1:
        raise ValueError("clip must be (frames, H, W) with at least one frame")
    return [extract_features(f, grid) for f in clip]


def reward_full(anchor: np.ndarray, clip: np.ndarray, grid: int = 8) -> float:
    """Anchor-and-neighbor consistency, averaged over all frames."""
    d_a = extract_features(anchor, grid)
    feats = _clip_features(clip, grid)
    prev = d_a
    total = 0.0
    for d in feats:
        total += cosine(d_a, d) + cosine(d, prev)
        prev = d
    return total / (2.0 * len(feats))


def reward_local(clip: np.ndarray, grid: int = 8) -> float:
    """Mean adjacent-frame cosine; requires at least two frames."""
    feats = _clip_features(clip, grid)
    if len(feats) < 2:
        raise ValueError("reward_local needs at least two frames")
    total = sum(cosine(a, b) for a, b in zip(feats[:-1], feats[1:]))
    return total / (len(feats) - 1)


def reward_anchor(anchor: np.ndarray, clip: np.ndarray, grid: int = 8) -> float:
    """Cosine between the anchor and the clip's final frame."""
    d_a = extract_features(anchor, grid)
    feats = _clip_features(clip, grid)
    return cosine(d_a, feats[-1])


def make_reward(variant: str):
    """Scoring closure with the no-anchor fallback folded in.

    The returned function takes (anchor or None, clip). Variants needing
    an anchor fall back to the local reward when none exists yet, and to
    a neutral 0.0 when the clip is too short even for that.
    """
    if variant not in ("full", "local", "anchor"):
        raise ValueError(f"unknown reward variant {variant!r}")

    def score(anchor, clip) -> float:
        if variant == "local" or anchor is None:
            if len(clip) >= 2:
                return reward_local(clip)
            return 0.0
        if variant == "full":
            return reward_full(anchor, clip)
        return reward_anchor(anchor, clip)

    return score
