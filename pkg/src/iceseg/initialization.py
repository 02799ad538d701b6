"""Coarse label initialization: adaptive binarization of the fused cue maps,
blob analysis, inter-occlusion episode detection, and proposal-level
bipartite ID re-assignment across occlusions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.optimize import linear_sum_assignment
from skimage.color import rgb2lab

from .descriptors import histogram_distance
from .exceptions import EmptyMatrix, NonFiniteValue
from .trimap import multilevel_otsu

_EIGHT_CONN = np.ones((3, 3), dtype=bool)


@dataclass
class OcclusionEpisode:
    """A frame span where the target count drops from n below n and later
    returns to exactly n (0-based, inclusive)."""

    start: int
    end: int
    n_before: int
    m_during: int


@dataclass
class Assignment:
    pairs: list[tuple[int, int]]
    total_cost: float


@dataclass
class Region:
    """A tracked foreground region: its mask and the frame it lives on."""

    region_id: int
    mask: np.ndarray
    frame_index: int


def adaptive_threshold(values: np.ndarray) -> float:
    """Binarization threshold 0.5 * (mean + single-threshold Otsu).

    A flat map degenerates to that constant value.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.max() == values.min():
        return float(values.max())
    otsu = multilevel_otsu(values, 1)[0]
    return float(0.5 * (values.mean() + otsu))


def binarize(values: np.ndarray, threshold: float, min_blob_area: int = 0) -> np.ndarray:
    """Pointwise `values >= threshold`, then removal of 8-connected
    components smaller than min_blob_area."""
    mask = np.asarray(values, dtype=np.float64) >= threshold
    if min_blob_area > 1 and mask.any():
        comp, ncomp = ndimage.label(mask, structure=_EIGHT_CONN)
        sizes = np.bincount(comp.ravel(), minlength=ncomp + 1)
        keep = sizes >= min_blob_area
        keep[0] = False
        mask = keep[comp]
    return mask


def initial_labels(values: np.ndarray, min_blob_frac: float = 0.0005) -> tuple[np.ndarray, float]:
    """Initialize one frame's labels from its fused cue map.

    A flat map (no motion evidence anywhere) yields an all-background frame
    rather than letting a zero threshold label everything foreground.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.max() == values.min():
        return np.zeros(values.shape, dtype=bool), float(values.max())
    t = adaptive_threshold(values)
    min_area = max(1, int(round(min_blob_frac * values.size)))
    return binarize(values, t, min_area), t


def label_blobs(mask: np.ndarray) -> tuple[np.ndarray, int]:
    """8-connected component labeling; returns (component raster, count)."""
    comp, ncomp = ndimage.label(np.asarray(mask, dtype=bool), structure=_EIGHT_CONN)
    return comp, int(ncomp)


def detect_occlusion_episodes(blob_counts) -> list[OcclusionEpisode]:
    """Maximal spans where the blob count drops from n, stays in [1, n), and
    returns to exactly n. Candidates are resolved left to right and never
    overlap; dips that end the sequence or fall to zero are not episodes."""
    counts = list(blob_counts)
    episodes = []
    i = 1
    while i < len(counts):
        n = counts[i - 1]
        if n >= 2 and 1 <= counts[i] < n:
            j = i
            while j < len(counts) and 1 <= counts[j] < n:
                j += 1
            if j < len(counts) and counts[j] == n:
                episodes.append(
                    OcclusionEpisode(start=i, end=j - 1, n_before=n, m_during=max(counts[i:j]))
                )
            i = j
        else:
            i += 1
    return episodes


def appearance_histogram(image: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """96-dim concatenated RGB+LAB histogram (16 bins per channel) of the
    masked pixels, L1-normalized as a whole."""
    pixels = image[mask].astype(np.float64)
    parts = []
    for ch in range(3):
        parts.append(_hist16(pixels[:, ch], 0.0, 256.0))
    lab = rgb2lab(pixels.reshape(-1, 1, 3).astype(np.uint8)).reshape(-1, 3)
    for ch, (lo, hi) in enumerate(((0.0, 100.0), (-128.0, 128.0), (-128.0, 128.0))):
        parts.append(_hist16(lab[:, ch], lo, hi))
    hist = np.concatenate(parts)
    total = hist.sum()
    return hist / total if total > 0 else hist


def _hist16(values, lo, hi):
    idx = np.clip(((values - lo) * 16.0 / (hi - lo)).astype(int), 0, 15)
    return np.bincount(idx, minlength=16).astype(np.float64)


def _bbox_area(mask):
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    return float((rows[-1] - rows[0] + 1) * (cols[-1] - cols[0] + 1))


def _centroid(mask):
    rows, cols = np.nonzero(mask)
    return np.array([cols.mean(), rows.mean()])


def edge_cost(
    mask_a: np.ndarray,
    image_a: np.ndarray,
    mask_b: np.ndarray,
    image_b: np.ndarray,
) -> float:
    """Matching cost between two regions from adjacent frames.

    Equal-weight sum of three terms, each in [0, 1]: the Hellinger distance
    of concatenated RGB+LAB histograms, the normalized bounding-box size
    difference, and the frame-diagonal-normalized centroid distance.
    """
    hist = histogram_distance(
        [appearance_histogram(image_a, mask_a)], [appearance_histogram(image_b, mask_b)]
    )
    area_a, area_b = _bbox_area(mask_a), _bbox_area(mask_b)
    size = abs(area_a - area_b) / max(area_a, area_b)
    height, width = mask_a.shape
    diag = float(np.hypot(width, height))
    cent = float(np.linalg.norm(_centroid(mask_a) - _centroid(mask_b))) / diag
    return float(hist + size + cent)


def hungarian_match(cost_matrix) -> Assignment:
    """Minimum-total-cost one-to-one assignment of min(n, m) pairs."""
    cost = np.asarray(cost_matrix, dtype=np.float64)
    if cost.ndim != 2 or cost.size == 0:
        raise EmptyMatrix(f"cost matrix must be a nonempty 2-D array, got shape {cost.shape}")
    if not np.isfinite(cost).all():
        raise NonFiniteValue("cost matrix contains non-finite entries")
    rows, cols = linear_sum_assignment(cost)
    pairs = [(int(r), int(c)) for r, c in zip(rows, cols)]
    return Assignment(pairs=pairs, total_cost=float(cost[rows, cols].sum()))


def _regions_of(id_raster: np.ndarray, frame_index: int) -> list[Region]:
    out = []
    for rid in np.unique(id_raster):
        if rid > 0:
            out.append(Region(int(rid), id_raster == rid, frame_index))
    return out


def _split_frame(
    id_raster: np.ndarray,
    prev_regions: list[Region],
    proposal_masks,
    image: np.ndarray,
    prev_image: np.ndarray,
) -> np.ndarray:
    """Split the merged blobs of one frame by matching interior proposals to
    the previous frame's regions; contested pixels go to the lower-cost pair,
    uncovered blob pixels keep the blob's id."""
    fg = id_raster > 0
    candidates = []
    for mask in proposal_masks:
        clipped = np.asarray(mask, dtype=bool) & fg
        if clipped.any():
            candidates.append(clipped)
    if not candidates or not prev_regions:
        return id_raster  # conservative: nothing to split with

    cost = np.array(
        [
            [edge_cost(reg.mask, prev_image, cand, image) for cand in candidates]
            for reg in prev_regions
        ]
    )
    assignment = hungarian_match(cost)
    out = id_raster.copy()
    # Paint in descending cost order so the cheapest pair wins contested pixels.
    for r, c in sorted(assignment.pairs, key=lambda rc: cost[rc], reverse=True):
        out[candidates[c]] = prev_regions[r].region_id
    return out


def reassign_ids(
    episode: OcclusionEpisode,
    frames: list[np.ndarray],
    id_rasters: list[np.ndarray],
    proposals_per_frame: dict[int, list[np.ndarray]],
) -> list[np.ndarray]:
    """Re-assign coarse ids through one occlusion episode.

    Chains bipartite matching frame to frame from the last pre-episode frame:
    each matched interior proposal inherits the id of its match; frames with
    no interior proposals are left unsplit. Returns a full-sequence copy of
    the id rasters with the episode span updated.
    """
    out = [r.copy() for r in id_rasters]
    if episode.start == 0:
        return out
    prev_regions = _regions_of(out[episode.start - 1], episode.start - 1)
    for f in range(episode.start, episode.end + 1):
        masks = proposals_per_frame.get(f, [])
        split = _split_frame(out[f], prev_regions, masks, frames[f], frames[f - 1])
        out[f] = split
        new_regions = _regions_of(split, f)
        if new_regions:
            prev_regions = new_regions
    return out


def assign_persistent_ids(
    frames: list[np.ndarray],
    masks: list[np.ndarray],
    proposals_per_frame: dict[int, list[np.ndarray]] | None = None,
) -> tuple[list[np.ndarray], list[OcclusionEpisode], list[int]]:
    """Track blob identities across a sequence.

    Components are matched frame to frame by `edge_cost` + Hungarian
    assignment; inside detected occlusion episodes the merged blobs are
    additionally split by interior proposals so identities survive the
    crossing. Returns (per-frame id rasters, episodes, per-frame counts).
    """
    proposals_per_frame = proposals_per_frame or {}
    comps = [label_blobs(m) for m in masks]
    counts = [c for _, c in comps]
    episodes = detect_occlusion_episodes(counts)
    in_episode = {}
    for ep in episodes:
        for f in range(ep.start, ep.end + 1):
            in_episode[f] = ep

    rasters: list[np.ndarray] = []
    prev_regions: list[Region] = []
    next_id = 1
    for f, (comp, ncomp) in enumerate(comps):
        ids = np.zeros_like(comp, dtype=np.int32)
        cur = [comp == c for c in range(1, ncomp + 1)]
        inherited = {}
        if cur and prev_regions:
            cost = np.array(
                [
                    [edge_cost(reg.mask, frames[reg.frame_index], m, frames[f]) for m in cur]
                    for reg in prev_regions
                ]
            )
            for r, c in hungarian_match(cost).pairs:
                inherited[c] = prev_regions[r].region_id
        for c, mask in enumerate(cur):
            if c in inherited:
                ids[mask] = inherited[c]
            else:
                ids[mask] = next_id
                next_id += 1
        if f in in_episode and prev_regions:
            ids = _split_frame(
                ids, prev_regions, proposals_per_frame.get(f, []), frames[f],
                frames[prev_regions[0].frame_index],
            )
        rasters.append(ids)
        regions = _regions_of(ids, f)
        if regions:
            prev_regions = regions
    return rasters, episodes, counts
