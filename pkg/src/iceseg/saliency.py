"""Appearance saliency by graph ranking on the superpixel adjacency graph
with boundary-background priors.

Stage 1 ranks all superpixels against each image border as background seeds
and multiplies the four complement maps; stage 2 thresholds that map at its
mean and re-ranks with the surviving superpixels as foreground seeds. The
result is piecewise constant on superpixels and min-max normalized to [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .superpixels import SuperpixelMap, spatial_neighbors

RANKING_ALPHA = 0.99


@dataclass
class SaliencyMap:
    values: np.ndarray
    source_tag: str = "rgb"


def superpixel_saliency(
    image: np.ndarray, sp: SuperpixelMap, source_tag: str = "rgb"
) -> SaliencyMap:
    """Two-stage boundary-prior saliency over a superpixel graph.

    A single-superpixel frame has no contrast to rank, so it degenerates to
    a uniform 0.5 map; the same value is used whenever all ranking scores
    coincide (e.g. a constant image).
    """
    n = sp.n_superpixels
    if n < 2:
        return SaliencyMap(np.full(sp.labels.shape, 0.5), source_tag)

    weights = _affinity_matrix(sp)
    degree = np.diag(weights.sum(axis=1))
    system = degree - RANKING_ALPHA * weights

    labels = sp.labels
    border_sets = [
        np.unique(labels[0, :]),
        np.unique(labels[-1, :]),
        np.unique(labels[:, 0]),
        np.unique(labels[:, -1]),
    ]
    stage1 = np.ones(n)
    for seeds in border_sets:
        y = np.zeros(n)
        y[seeds] = 1.0
        f = np.linalg.solve(system, y)
        stage1 *= 1.0 - _minmax(f, degenerate=0.5)

    fg_seeds = stage1 > stage1.mean()
    y2 = fg_seeds.astype(np.float64)
    f2 = np.linalg.solve(system, y2)
    scores = _minmax(f2, degenerate=0.5)
    return SaliencyMap(scores[labels], source_tag)


def _affinity_matrix(sp: SuperpixelMap) -> np.ndarray:
    n = sp.n_superpixels
    neigh = spatial_neighbors(sp)
    dist = np.zeros((n, n))
    mask = np.zeros((n, n), dtype=bool)
    for p in range(n):
        for q in neigh[p]:
            mask[p, q] = True
            dist[p, q] = np.linalg.norm(sp.mean_lab[p] - sp.mean_lab[q])
    adj_d = dist[mask]
    sigma = adj_d.mean() if adj_d.size else 0.0
    if sigma > 0:
        weights = np.exp(-(dist**2) / (2.0 * sigma * sigma))
    else:
        weights = np.ones((n, n))
    return np.where(mask, weights, 0.0)


def _minmax(values: np.ndarray, degenerate: float = 0.0) -> np.ndarray:
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.full_like(values, degenerate, dtype=np.float64)
    return (values - lo) / (hi - lo)
