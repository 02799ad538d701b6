"""Multiscale multilevel-Otsu block map and the three-way moving trimap.

A saliency map is subdivided into 2x2, 3x3, and 4x4 blocks; each block is
quantized into 8 classes by 7-threshold Otsu, and the three per-scale class
rasters sum into a 21-level map that two global cuts split into definite
foreground (1), definite background (0), and ambiguous (0.5).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import BadThresholds

DEFAULT_GRIDS = ((2, 2), (3, 3), (4, 4))


@dataclass
class Trimap:
    """values in {0, 0.5, 1}; levels is the underlying integer block map."""

    values: np.ndarray
    levels: np.ndarray


def multilevel_otsu(values, n_thresholds: int) -> np.ndarray:
    """Thresholds maximizing between-class variance over a 256-level histogram.

    Values are quantized to levels 0..255 over their own range; candidate
    cuts live at levels 1..255 and the returned thresholds are mapped back
    to value units (vmin + level * range / 255), so `v >= threshold` matches
    the level-domain class split exactly. Exhaustive search for up to two
    thresholds, dynamic programming beyond. When several cuts tie (common
    with empty histogram runs), the middle tuple of the lexicographically
    sorted tying set is the canonical answer; a degenerate (constant) input
    yields all thresholds equal to that value.
    """
    if n_thresholds < 1:
        raise ValueError(f"n_thresholds must be >= 1, got {n_thresholds}")
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValueError("cannot threshold an empty value list")
    vmin, vmax = values.min(), values.max()
    if vmax == vmin:
        return np.full(n_thresholds, vmin)

    levels = np.clip(((values - vmin) * 255.0 / (vmax - vmin)).astype(int), 0, 255)
    hist = np.bincount(levels, minlength=256).astype(np.float64)
    if n_thresholds <= 2:
        cuts = _exhaustive_cuts(hist, n_thresholds)
    else:
        cuts = _dp_cuts(hist, n_thresholds)
    return vmin + np.asarray(cuts, dtype=np.float64) * (vmax - vmin) / 255.0


def _class_stats(hist):
    # Prefix sums over level counts and level-weighted counts; a class
    # covering levels [s, t) then reduces to two subtractions.
    cw = np.concatenate([[0.0], np.cumsum(hist)])
    cm = np.concatenate([[0.0], np.cumsum(hist * np.arange(256))])
    return cw, cm


def _between_class_variance(cw, cm, edges):
    total = cw[-1]
    mean = cm[-1] / total
    var = 0.0
    for s, t in zip(edges[:-1], edges[1:]):
        w = cw[t] - cw[s]
        if w > 0:
            mu = (cm[t] - cm[s]) / w
            var += (w / total) * (mu - mean) ** 2
    return var


def _exhaustive_cuts(hist, n_thresholds):
    cw, cm = _class_stats(hist)
    best_var = -1.0
    ties: list[tuple[int, ...]] = []
    if n_thresholds == 1:
        candidates = ((t,) for t in range(1, 256))
    else:
        candidates = ((t1, t2) for t1 in range(1, 255) for t2 in range(t1 + 1, 256))
    for cuts in candidates:
        var = _between_class_variance(cw, cm, (0, *cuts, 256))
        if var > best_var:
            best_var = var
            ties = [cuts]
        elif var == best_var:
            ties.append(cuts)
    return ties[(len(ties) - 1) // 2]


def _dp_cuts(hist, n_thresholds):
    cw, cm = _class_stats(hist)
    # Maximizing between-class variance == maximizing sum_c w_c * mu_c^2.
    counts = cw[None, :] - cw[:, None]
    sums = cm[None, :] - cm[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        contrib = np.where(counts > 0, sums * sums / np.where(counts > 0, counts, 1.0), 0.0)
    contrib = np.where(np.arange(257)[None, :] > np.arange(257)[:, None], contrib, -np.inf)

    n_classes = n_thresholds + 1
    best = contrib[0].copy()  # one class covering [0, t)
    back = np.zeros((n_classes, 257), dtype=int)
    for j in range(2, n_classes + 1):
        stacked = best[:, None] + contrib
        choice = np.argmax(stacked, axis=0)  # first argmax on ties
        best = stacked[choice, np.arange(257)]
        back[j - 1] = choice

    cuts = []
    t = 256
    for j in range(n_classes, 1, -1):
        t = int(back[j - 1][t])
        cuts.append(t)
    return tuple(reversed(cuts))


def block_level_map(saliency_values: np.ndarray, grids=DEFAULT_GRIDS) -> np.ndarray:
    """Sum of per-scale block class maps.

    Per scale and block, 7-threshold Otsu maps each pixel to its class index
    in 0..7 (a constant block is class 0 everywhere); the per-scale rasters
    add up to an integer map in [0, 3 * 7]. Blocks partition the frame
    exactly, with remainder rows/columns absorbed by the last block.
    """
    values = np.asarray(saliency_values, dtype=np.float64)
    height, width = values.shape
    out = np.zeros((height, width), dtype=np.int32)
    for rows, cols in grids:
        scale = np.zeros((height, width), dtype=np.int32)
        r_edges = [r * (height // rows) for r in range(rows)] + [height]
        c_edges = [c * (width // cols) for c in range(cols)] + [width]
        for r0, r1 in zip(r_edges[:-1], r_edges[1:]):
            for c0, c1 in zip(c_edges[:-1], c_edges[1:]):
                block = values[r0:r1, c0:c1]
                if block.max() == block.min():
                    continue  # degenerate block: class 0
                th = multilevel_otsu(block, 7)
                scale[r0:r1, c0:c1] = (block[:, :, None] >= th[None, None, :]).sum(axis=2)
        out += scale
    return out


def build_trimap(levels: np.ndarray, theta1: int, theta2: int) -> Trimap:
    """Three-way split of the block map: 1 where levels >= theta1, 0 where
    levels <= theta2, 0.5 otherwise."""
    if theta1 <= theta2:
        raise BadThresholds(f"need theta1 > theta2, got {theta1} <= {theta2}")
    levels = np.asarray(levels)
    values = np.full(levels.shape, 0.5)
    values[levels >= theta1] = 1.0
    values[levels <= theta2] = 0.0
    return Trimap(values=values, levels=levels)
