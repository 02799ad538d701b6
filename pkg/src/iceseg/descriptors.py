"""Per-superpixel appearance descriptors.

Each graph node carries a pool of L1-normalized histogram blocks: two
bag-of-words histograms (a gradient-patch descriptor quantized against a
200-word codebook and raw RGB values against a 150-word codebook), an
11-dimensional color-name histogram, and a 192-dimensional concatenation of
16-bin channel histograms in RGB, HSV, LAB, and YCbCr. Dictionaries and the
color-name lookup table are pluggable inputs with deterministic built-in
fallbacks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from skimage.color import rgb2hsv, rgb2lab, rgb2ycbcr

from .exceptions import BlockMismatch, EmptyDictionary, EmptyInput
from .superpixels import SuperpixelMap

COLOR_NAMES = (
    "black", "blue", "brown", "gray", "green", "orange",
    "pink", "purple", "red", "white", "yellow",
)

_COLOR_ANCHORS = np.array(
    [
        (0, 0, 0),        # black
        (0, 0, 255),      # blue
        (139, 69, 19),    # brown
        (128, 128, 128),  # gray
        (0, 128, 0),      # green
        (255, 165, 0),    # orange
        (255, 192, 203),  # pink
        (128, 0, 128),    # purple
        (255, 0, 0),      # red
        (255, 255, 255),  # white
        (255, 255, 0),    # yellow
    ],
    dtype=np.float64,
)

# Nominal per-channel value ranges of the four color spaces as produced by
# skimage converters (not data-driven: bins must be stable across regions).
_SPACE_RANGES = {
    "rgb": ((0.0, 256.0), (0.0, 256.0), (0.0, 256.0)),
    "hsv": ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)),
    "lab": ((0.0, 100.0), (-128.0, 128.0), (-128.0, 128.0)),
    "ycbcr": ((16.0, 236.0), (16.0, 241.0), (16.0, 241.0)),
}


@dataclass
class NodeHistogram:
    """The concatenated histogram pool for one superpixel."""

    bow_sift: np.ndarray
    bow_rgb: np.ndarray
    color_names: np.ndarray
    color_concat: np.ndarray

    def blocks(self) -> list[np.ndarray]:
        return [self.bow_sift, self.bow_rgb, self.color_names, self.color_concat]


def _l1(vec: np.ndarray) -> np.ndarray:
    total = vec.sum()
    return vec / total if total > 0 else vec


def color_name_index(pixels: np.ndarray, lut: np.ndarray | None = None) -> np.ndarray:
    """Color-name id per pixel, via the LUT when given, else nearest anchor."""
    pixels = np.asarray(pixels, dtype=np.float64).reshape(-1, 3)
    if lut is not None:
        q = (pixels.astype(int) >> 3)
        return lut[(q[:, 0] << 10) | (q[:, 1] << 5) | q[:, 2]]
    d2 = ((pixels[:, None, :] - _COLOR_ANCHORS[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def color_name_histogram(pixels: np.ndarray, lut: np.ndarray | None = None) -> np.ndarray:
    """11-dim L1-normalized histogram of semantic color names."""
    pixels = np.asarray(pixels).reshape(-1, 3)
    if pixels.shape[0] == 0:
        raise EmptyInput("color_name_histogram needs at least one pixel")
    idx = color_name_index(pixels, lut)
    return _l1(np.bincount(idx, minlength=len(COLOR_NAMES)).astype(np.float64))


def load_color_name_lut(path: str | Path) -> np.ndarray:
    """Load a 32768-entry color-name LUT (one uint8 name index per 5-bit RGB
    cell, R-major)."""
    data = np.fromfile(str(path), dtype=np.uint8)
    if data.size != 32 * 32 * 32:
        raise ValueError(f"color-name LUT must hold 32768 entries, got {data.size}")
    if data.max() >= len(COLOR_NAMES):
        raise ValueError("color-name LUT contains out-of-range name indices")
    return data


def bow_histogram(descriptors: np.ndarray, dictionary: np.ndarray) -> np.ndarray:
    """Hard-assign descriptors to their nearest centroid (Euclidean, ties to
    the lowest index) and return the L1-normalized word histogram."""
    dictionary = np.asarray(dictionary, dtype=np.float64)
    if dictionary.size == 0:
        raise EmptyDictionary("bag-of-words dictionary is empty")
    descriptors = np.asarray(descriptors, dtype=np.float64)
    if descriptors.ndim == 1:
        descriptors = descriptors[None, :]
    words = nearest_word(descriptors, dictionary)
    return _l1(np.bincount(words, minlength=len(dictionary)).astype(np.float64))


def nearest_word(descriptors: np.ndarray, dictionary: np.ndarray) -> np.ndarray:
    """Index of the nearest centroid per descriptor (ties -> lowest index)."""
    # ||x-c||^2 = ||x||^2 - 2 x.c + ||c||^2; the ||x||^2 term is constant per row.
    cross = descriptors @ dictionary.T
    d2 = (dictionary * dictionary).sum(axis=1)[None, :] - 2.0 * cross
    return np.argmin(d2, axis=1)


def load_dictionary(path: str | Path) -> np.ndarray:
    """Load a BoW dictionary: a JSON array of centroid vectors, or a flat
    float32 binary whose row length is inferred from a sidecar .json header."""
    path = Path(path)
    if path.suffix == ".json":
        with open(path, "r", encoding="utf-8") as fh:
            return np.asarray(json.load(fh), dtype=np.float64)
    raw = np.fromfile(str(path), dtype=np.float32)
    header = path.with_suffix(".json")
    if not header.exists():
        raise ValueError(f"binary dictionary {path} needs a {header.name} header with 'dims'")
    with open(header, "r", encoding="utf-8") as fh:
        dims = int(json.load(fh)["dims"])
    return raw.reshape(-1, dims).astype(np.float64)


def rgb_grid_codebook(n_words: int) -> np.ndarray:
    """Deterministic fallback RGB dictionary: a near-cubic uniform grid over
    [0, 255]^3, truncated to exactly n_words centroids."""
    best = None
    root = int(round(n_words ** (1.0 / 3.0)))
    for a in range(max(1, root - 2), root + 3):
        for b in range(max(1, root - 2), root + 3):
            c = -(-n_words // (a * b))  # ceil
            if a * b * c >= n_words:
                key = (a * b * c - n_words, abs(a - b) + abs(b - c))
                if best is None or key < best[0]:
                    best = (key, (a, b, c))
    a, b, c = best[1]
    ra = (np.arange(a) + 0.5) * 256.0 / a
    rb = (np.arange(b) + 0.5) * 256.0 / b
    rc = (np.arange(c) + 0.5) * 256.0 / c
    grid = np.array([(x, y, z) for x in ra for y in rb for z in rc])
    return grid[:n_words]


def gradient_codebook(n_words: int, dims: int = 128, seed: int = 8571) -> np.ndarray:
    """Deterministic fallback codebook for the gradient-patch descriptor
    space: seeded uniform points, L1-normalized like the descriptors."""
    rng = np.random.default_rng(seed)
    pts = rng.random((n_words, dims))
    return pts / pts.sum(axis=1, keepdims=True)


def gradient_patch_descriptor(patch: np.ndarray) -> np.ndarray:
    """128-dim descriptor of a grayscale patch: an 8-orientation gradient
    histogram over a 4x4 cell grid, L1-normalized."""
    patch = np.asarray(patch, dtype=np.float64)
    if patch.size == 0:
        raise EmptyInput("empty patch")
    if patch.shape[0] < 2 or patch.shape[1] < 2:
        return np.zeros(128)
    gy, gx = np.gradient(patch)
    mag = np.hypot(gx, gy)
    ori = (np.arctan2(gy, gx) % (2.0 * np.pi)) / (2.0 * np.pi)
    obin = np.minimum((ori * 8).astype(int), 7)
    desc = np.zeros((4, 4, 8))
    row_edges = np.linspace(0, patch.shape[0], 5).astype(int)
    col_edges = np.linspace(0, patch.shape[1], 5).astype(int)
    for i in range(4):
        for j in range(4):
            sl = (slice(row_edges[i], row_edges[i + 1]), slice(col_edges[j], col_edges[j + 1]))
            if sl[0].start == sl[0].stop or sl[1].start == sl[1].stop:
                continue
            desc[i, j] = np.bincount(obin[sl].ravel(), weights=mag[sl].ravel(), minlength=8)
    return _l1(desc.ravel())


def concat_color_histogram(pixels: np.ndarray) -> np.ndarray:
    """192-dim histogram: 16 bins per channel in RGB, HSV, LAB, and YCbCr,
    concatenated and L1-normalized as a whole."""
    pixels = np.asarray(pixels).reshape(-1, 3)
    if pixels.shape[0] == 0:
        raise EmptyInput("concat_color_histogram needs at least one pixel")
    img = pixels.reshape(-1, 1, 3).astype(np.uint8)
    spaces = {
        "rgb": pixels.astype(np.float64),
        "hsv": rgb2hsv(img).reshape(-1, 3),
        "lab": rgb2lab(img).reshape(-1, 3),
        "ycbcr": rgb2ycbcr(img).reshape(-1, 3),
    }
    parts = []
    for name, values in spaces.items():
        for ch in range(3):
            lo, hi = _SPACE_RANGES[name][ch]
            parts.append(_channel_hist(values[:, ch], lo, hi, 16))
    return _l1(np.concatenate(parts))


def _channel_hist(values, lo, hi, nbins):
    idx = np.clip(((values - lo) * nbins / (hi - lo)).astype(int), 0, nbins - 1)
    return np.bincount(idx, minlength=nbins).astype(np.float64)


def gaussian_weighting(
    hist: NodeHistogram,
    neighbors: list[NodeHistogram],
    distances: np.ndarray,
) -> NodeHistogram:
    """Smooth a node's histogram pool with its k nearest spatial neighbors.

    H' = normalize(H + sum_q w_q H_q) with w_q = exp(-d_q^2 / (2 sigma^2))
    and sigma the mean of the k centroid distances. k = 0 is the identity.
    Normalization is per block, so every block stays L1-normalized.
    """
    if len(neighbors) == 0:
        return NodeHistogram(*[blk.copy() for blk in hist.blocks()])
    distances = np.asarray(distances, dtype=np.float64)
    sigma = distances.mean()
    if sigma > 0:
        weights = np.exp(-(distances**2) / (2.0 * sigma * sigma))
    else:
        weights = np.ones_like(distances)
    out = []
    for b, blk in enumerate(hist.blocks()):
        acc = blk.astype(np.float64).copy()
        for w, nb in zip(weights, neighbors):
            acc += w * nb.blocks()[b]
        out.append(_l1(acc))
    return NodeHistogram(*out)


def histogram_distance(a, b) -> float:
    """Blockwise Hellinger distance, averaged over blocks.

    Per block the Bhattacharyya coefficient BC = sum_i sqrt(a_i b_i) maps to
    the distance sqrt(1 - BC), which stays in [0, 1] as the pairwise and
    unary terms require; the result is the mean over blocks.
    """
    blocks_a = a.blocks() if isinstance(a, NodeHistogram) else list(a)
    blocks_b = b.blocks() if isinstance(b, NodeHistogram) else list(b)
    if len(blocks_a) != len(blocks_b):
        raise BlockMismatch(f"block counts differ: {len(blocks_a)} vs {len(blocks_b)}")
    dists = []
    for blk_a, blk_b in zip(blocks_a, blocks_b):
        blk_a = np.asarray(blk_a, dtype=np.float64)
        blk_b = np.asarray(blk_b, dtype=np.float64)
        if blk_a.shape != blk_b.shape:
            raise BlockMismatch(f"block shapes differ: {blk_a.shape} vs {blk_b.shape}")
        bc = np.clip(np.sqrt(blk_a * blk_b).sum(), 0.0, 1.0)
        dists.append(np.sqrt(1.0 - bc))
    return float(np.mean(dists))


def pooled_histogram(hists: list[NodeHistogram]) -> NodeHistogram:
    """Blockwise mean of a set of node histograms, renormalized per block."""
    if not hists:
        raise EmptyInput("cannot pool zero histograms")
    blocks = []
    for b in range(4):
        acc = np.zeros_like(hists[0].blocks()[b])
        for h in hists:
            acc += h.blocks()[b]
        blocks.append(_l1(acc))
    return NodeHistogram(*blocks)


def build_node_histograms(
    image: np.ndarray,
    sp: SuperpixelMap,
    knn_k: int = 4,
    sift_dict: np.ndarray | None = None,
    rgb_dict: np.ndarray | None = None,
    lut: np.ndarray | None = None,
    bow_sift_dims: int = 200,
    bow_rgb_dims: int = 150,
) -> list[NodeHistogram]:
    """Extract and neighbor-weight the histogram pool of every superpixel in
    one frame. Per-pixel quantization runs once per frame; per-superpixel
    histograms then reduce to bincounts."""
    if sift_dict is None:
        sift_dict = gradient_codebook(bow_sift_dims)
    if rgb_dict is None:
        rgb_dict = rgb_grid_codebook(bow_rgb_dims)

    labels = sp.labels
    n = sp.n_superpixels
    flat = labels.ravel()
    pixels = image.reshape(-1, 3).astype(np.float64)

    rgb_words = nearest_word(pixels, np.asarray(rgb_dict, dtype=np.float64))
    name_idx = color_name_index(pixels, lut)

    hsv = rgb2hsv(image).reshape(-1, 3)
    labv = rgb2lab(image).reshape(-1, 3)
    ycc = rgb2ycbcr(image).reshape(-1, 3)
    channel_bins = []
    for space, values in (("rgb", pixels), ("hsv", hsv), ("lab", labv), ("ycbcr", ycc)):
        for ch in range(3):
            lo, hi = _SPACE_RANGES[space][ch]
            channel_bins.append(
                np.clip(((values[:, ch] - lo) * 16 / (hi - lo)).astype(int), 0, 15)
            )

    gray = pixels.mean(axis=1).reshape(labels.shape)
    rows = np.repeat(np.arange(labels.shape[0]), labels.shape[1])
    cols = np.tile(np.arange(labels.shape[1]), labels.shape[0])
    r_min = _group_reduce(np.minimum, rows, flat, n, labels.shape[0])
    r_max = _group_reduce(np.maximum, rows, flat, n, -1)
    c_min = _group_reduce(np.minimum, cols, flat, n, labels.shape[1])
    c_max = _group_reduce(np.maximum, cols, flat, n, -1)

    raw = []
    for s in range(n):
        member = flat == s
        bow_rgb = _l1(np.bincount(rgb_words[member], minlength=len(rgb_dict)).astype(np.float64))
        names = _l1(np.bincount(name_idx[member], minlength=len(COLOR_NAMES)).astype(np.float64))
        concat = _l1(
            np.concatenate(
                [np.bincount(cb[member], minlength=16).astype(np.float64) for cb in channel_bins]
            )
        )
        patch = gray[r_min[s] : r_max[s] + 1, c_min[s] : c_max[s] + 1]
        desc = gradient_patch_descriptor(patch)
        bow_sift = bow_histogram(desc, sift_dict)
        raw.append(NodeHistogram(bow_sift, bow_rgb, names, concat))

    if knn_k <= 0 or n < 2:
        return raw
    k = min(knn_k, n - 1)
    cents = sp.centroids
    d2 = ((cents[:, None, :] - cents[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    weighted = []
    for s in range(n):
        order = np.argsort(d2[s], kind="stable")[:k]
        weighted.append(
            gaussian_weighting(raw[s], [raw[q] for q in order], np.sqrt(d2[s][order]))
        )
    return weighted


def _group_reduce(op, values, groups, n, init):
    out = np.full(n, init, dtype=int)
    op.at(out, groups, values)
    return out
