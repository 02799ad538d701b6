"""SLIC superpixel segmentation and the spatial/temporal neighbor structure
used by the refinement graph."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from skimage.color import rgb2lab

from .exceptions import DimensionMismatch

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass
class SuperpixelMap:
    """A labeled partition of one frame into 4-connected superpixels.

    labels holds ids 0..n-1 for every pixel; centroids are (x, y) in pixel
    coordinates; perimeters count boundary edges (4-neighbor straddles plus
    image-border sides), the quantity used by the boundary-connectivity
    pairwise term.
    """

    labels: np.ndarray
    n_superpixels: int
    centroids: np.ndarray
    areas: np.ndarray
    mean_lab: np.ndarray
    perimeters: np.ndarray


def slic_segment(
    image: np.ndarray,
    regionsize: int = 20,
    regularizer: float = 0.1,
    n_iters: int = 10,
) -> SuperpixelMap:
    """Segment an RGB image into SLIC superpixels.

    Local k-means in LABxy space with seeds on a regionsize grid and the
    distance d = ||dLAB|| + (regularizer / regionsize) * ||dxy||, run for a
    fixed number of iterations and followed by connectivity enforcement
    (non-largest fragments of a cluster merge into the largest adjacent
    superpixel). Fully deterministic.
    """
    if regionsize < 2:
        raise ValueError(f"regionsize must be >= 2, got {regionsize}")
    lab = rgb2lab(image)
    height, width = lab.shape[:2]
    step = regionsize
    ny = max(1, height // step)
    nx = max(1, width // step)

    ys = ((np.arange(ny) + 0.5) * height / ny)
    xs = ((np.arange(nx) + 0.5) * width / nx)
    centers_xy = np.array([(x, y) for y in ys for x in xs])
    iy = np.minimum(centers_xy[:, 1].astype(int), height - 1)
    ix = np.minimum(centers_xy[:, 0].astype(int), width - 1)
    centers_lab = lab[iy, ix]

    # Initial assignment: the seed grid cell that contains each pixel.
    gy = np.minimum((np.arange(height) * ny) // height, ny - 1)
    gx = np.minimum((np.arange(width) * nx) // width, nx - 1)
    labels = (gy[:, None] * nx + gx[None, :]).astype(np.int32)

    yy = np.arange(height, dtype=np.float64)
    xx = np.arange(width, dtype=np.float64)
    spatial_w = regularizer / float(step)

    for _ in range(n_iters):
        dist = np.full((height, width), np.inf)
        new_labels = labels.copy()
        for k in range(len(centers_xy)):
            cx, cy = centers_xy[k]
            r0 = max(0, int(cy) - step)
            r1 = min(height, int(cy) + step + 1)
            c0 = max(0, int(cx) - step)
            c1 = min(width, int(cx) + step + 1)
            if r0 >= r1 or c0 >= c1:
                continue
            dlab = lab[r0:r1, c0:c1] - centers_lab[k]
            d_color = np.sqrt((dlab * dlab).sum(axis=2))
            dy = yy[r0:r1, None] - cy
            dx = xx[None, c0:c1] - cx
            d_xy = np.sqrt(dy * dy + dx * dx)
            d = d_color + spatial_w * d_xy
            win = dist[r0:r1, c0:c1]
            better = d < win  # strict: ties keep the lower cluster index
            win[better] = d[better]
            new_labels[r0:r1, c0:c1][better] = k
        labels = new_labels

        counts = np.bincount(labels.ravel(), minlength=len(centers_xy)).astype(np.float64)
        sums_lab = np.zeros((len(centers_xy), 3))
        for ch in range(3):
            sums_lab[:, ch] = np.bincount(
                labels.ravel(), weights=lab[:, :, ch].ravel(), minlength=len(centers_xy)
            )
        sum_x = np.bincount(labels.ravel(), weights=np.tile(xx, height), minlength=len(centers_xy))
        sum_y = np.bincount(labels.ravel(), weights=np.repeat(yy, width), minlength=len(centers_xy))
        nonempty = counts > 0
        centers_lab[nonempty] = sums_lab[nonempty] / counts[nonempty, None]
        centers_xy[nonempty, 0] = sum_x[nonempty] / counts[nonempty]
        centers_xy[nonempty, 1] = sum_y[nonempty] / counts[nonempty]

    labels = _enforce_connectivity(labels)
    return _build_map(labels, lab)


def _enforce_connectivity(labels: np.ndarray) -> np.ndarray:
    """Keep each cluster's largest 4-connected component; merge every other
    fragment into the largest adjacent superpixel."""
    # One connected-component pass over the whole raster: components of the
    # binary fragmentation are refined per cluster label afterwards.
    comp = np.zeros(labels.shape, dtype=np.int64)
    n_comp = 0
    for lbl in np.unique(labels):
        sub, n_sub = ndimage.label(labels == lbl, structure=_FOUR_CONN)
        comp[sub > 0] = sub[sub > 0] + n_comp
        n_comp += n_sub
    comp -= 1  # component ids 0..n_comp-1

    comp_sizes = np.bincount(comp.ravel(), minlength=n_comp)
    comp_label = np.full(n_comp, -1, dtype=np.int64)
    flat_comp = comp.ravel()
    flat_lbl = labels.ravel()
    first = np.full(n_comp, -1, dtype=np.int64)
    np.minimum.at(first, flat_comp, np.arange(flat_comp.size))  # wrong op for init -1
    first = np.zeros(n_comp, dtype=np.int64)
    order = np.argsort(flat_comp, kind="stable")
    starts = np.searchsorted(flat_comp[order], np.arange(n_comp))
    first = order[starts]
    comp_cluster = flat_lbl[first]

    # Largest component per cluster keeps the label; the rest are orphans.
    resolved = np.full(n_comp, -1, dtype=np.int64)
    label_area = {}
    for lbl in np.unique(labels):
        members = np.flatnonzero(comp_cluster == lbl)
        keep = members[int(np.argmax(comp_sizes[members]))]
        resolved[keep] = lbl
        label_area[int(lbl)] = int(comp_sizes[keep])

    # Component adjacency from straddling pixel pairs, computed once.
    adjacency = [set() for _ in range(n_comp)]
    for pairs in _straddling_pairs(comp):
        for a, b in np.unique(pairs, axis=0):
            adjacency[a].add(int(b))
            adjacency[b].add(int(a))

    orphans = [c for c in range(n_comp) if resolved[c] < 0]
    while orphans:
        deferred = []
        merged_any = False
        for c in orphans:
            neigh_labels = sorted({int(resolved[q]) for q in adjacency[c] if resolved[q] >= 0})
            if not neigh_labels:
                deferred.append(c)
                continue
            target = max(neigh_labels, key=lambda l: (label_area[l], -l))
            resolved[c] = target
            label_area[target] += int(comp_sizes[c])
            merged_any = True
        if not merged_any and deferred:
            resolved[deferred[0]] = int(comp_cluster[deferred[0]])
            deferred = deferred[1:]
        orphans = deferred

    out = resolved[comp]
    # Compact to consecutive ids preserving order.
    _, compact = np.unique(out, return_inverse=True)
    return compact.reshape(out.shape).astype(np.int32)


def _build_map(labels: np.ndarray, lab: np.ndarray) -> SuperpixelMap:
    height, width = labels.shape
    n = int(labels.max()) + 1
    flat = labels.ravel()
    areas = np.bincount(flat, minlength=n)

    xx = np.tile(np.arange(width, dtype=np.float64), height)
    yy = np.repeat(np.arange(height, dtype=np.float64), width)
    centroids = np.stack(
        [
            np.bincount(flat, weights=xx, minlength=n) / areas,
            np.bincount(flat, weights=yy, minlength=n) / areas,
        ],
        axis=1,
    )
    mean_lab = np.stack(
        [np.bincount(flat, weights=lab[:, :, ch].ravel(), minlength=n) / areas for ch in range(3)],
        axis=1,
    )

    perimeters = np.zeros(n, dtype=np.int64)
    for pairs in _straddling_pairs(labels):
        perimeters += np.bincount(pairs[:, 0], minlength=n)
        perimeters += np.bincount(pairs[:, 1], minlength=n)
    # Image-border sides count toward the perimeter too.
    for edge in (labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]):
        perimeters += np.bincount(edge, minlength=n)

    return SuperpixelMap(
        labels=labels,
        n_superpixels=n,
        centroids=centroids,
        areas=areas,
        mean_lab=mean_lab,
        perimeters=perimeters,
    )


def _straddling_pairs(labels):
    """Label pairs of 4-neighbor pixels that lie in different superpixels."""
    h_a, h_b = labels[:, :-1].ravel(), labels[:, 1:].ravel()
    v_a, v_b = labels[:-1, :].ravel(), labels[1:, :].ravel()
    out = []
    for a, b in ((h_a, h_b), (v_a, v_b)):
        diff = a != b
        out.append(np.stack([a[diff], b[diff]], axis=1))
    return out


def spatial_neighbors(sp: SuperpixelMap) -> list[set[int]]:
    """Adjacency sets: p and q are neighbors iff some pixel of p 4-neighbors
    a pixel of q. Symmetric and irreflexive."""
    neigh = [set() for _ in range(sp.n_superpixels)]
    for pairs in _straddling_pairs(sp.labels):
        for a, b in np.unique(pairs, axis=0):
            neigh[a].add(int(b))
            neigh[b].add(int(a))
    return neigh


def shared_boundary_lengths(sp: SuperpixelMap) -> dict[tuple[int, int], int]:
    """Count of straddling 4-neighbor pixel pairs per adjacent superpixel pair,
    keyed by (min_id, max_id)."""
    counts: dict[tuple[int, int], int] = {}
    for pairs in _straddling_pairs(sp.labels):
        lo = np.minimum(pairs[:, 0], pairs[:, 1])
        hi = np.maximum(pairs[:, 0], pairs[:, 1])
        keys, cnt = np.unique(np.stack([lo, hi], axis=1), axis=0, return_counts=True)
        for (a, b), c in zip(keys, cnt):
            key = (int(a), int(b))
            counts[key] = counts.get(key, 0) + int(c)
    return counts


def temporal_neighbors(
    sp_i: SuperpixelMap,
    sp_j: SuperpixelMap,
    flow: "FlowField | None" = None,
) -> dict[tuple[int, int], int]:
    """Cross-frame overlap map {(p in frame i, r in frame j): overlap px}.

    Overlap is computed at identical pixel coordinates; when a flow field is
    supplied, frame-i coordinates are first displaced by the (rounded) flow.
    """
    if sp_i.labels.shape != sp_j.labels.shape:
        raise DimensionMismatch(
            f"label rasters differ in shape: {sp_i.labels.shape} vs {sp_j.labels.shape}"
        )
    labels_i = sp_i.labels
    if flow is not None:
        height, width = labels_i.shape
        rr = np.clip(
            np.arange(height)[:, None] + np.round(flow.v).astype(int), 0, height - 1
        )
        cc = np.clip(
            np.arange(width)[None, :] + np.round(flow.u).astype(int), 0, width - 1
        )
        # Push each frame-i label to its displaced location before overlapping.
        pushed = np.full_like(labels_i, -1)
        pushed[rr.ravel(), np.broadcast_to(cc, rr.shape).ravel()] = labels_i.ravel()
        keep = pushed >= 0
        pairs = np.stack([pushed[keep], sp_j.labels[keep]], axis=1)
    else:
        pairs = np.stack([labels_i.ravel(), sp_j.labels.ravel()], axis=1)
    keys, cnt = np.unique(pairs, axis=0, return_counts=True)
    return {(int(a), int(b)): int(c) for (a, b), c in zip(keys, cnt)}
