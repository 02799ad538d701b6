"""Optical-flow rasters: magnitude, gradient, color rendering, and a
deterministic block-matching fallback estimator for when no precomputed
flow files are supplied.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .exceptions import DimensionMismatch, NonFiniteValue


@dataclass
class FlowField:
    """Per-pixel displacement field between two consecutive frames.

    u is the horizontal (column) displacement, v the vertical (row)
    displacement, both in pixels per frame.
    """

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=np.float64)
        self.v = np.asarray(self.v, dtype=np.float64)
        if self.u.shape != self.v.shape or self.u.ndim != 2:
            raise DimensionMismatch(
                f"u and v must be equal-shaped 2-D rasters, got {self.u.shape} and {self.v.shape}"
            )
        if not (np.isfinite(self.u).all() and np.isfinite(self.v).all()):
            raise NonFiniteValue("flow field contains non-finite values")

    @property
    def height(self) -> int:
        return self.u.shape[0]

    @property
    def width(self) -> int:
        return self.u.shape[1]


@dataclass
class MotionRasters:
    """Derived motion cues for one frame: intensity, gradient, color
    rendering, and the dilated gradient used when scoring color-space
    proposals."""

    intensity: np.ndarray
    gradient: np.ndarray
    color: np.ndarray
    dilated_gradient: np.ndarray = field(repr=False, default=None)


def flow_intensity(flow: FlowField) -> np.ndarray:
    """Pointwise displacement magnitude sqrt(u^2 + v^2)."""
    return np.hypot(flow.u, flow.v)


def flow_gradient_magnitude(flow: FlowField) -> np.ndarray:
    """Gradient magnitude of the two-channel flow field.

    Central differences in the interior, one-sided at the borders;
    the result is sqrt(ux^2 + uy^2 + vx^2 + vy^2) per pixel.
    """
    uy, ux = np.gradient(flow.u)
    vy, vx = np.gradient(flow.v)
    return np.sqrt(ux * ux + uy * uy + vx * vx + vy * vy)


def flow_to_color(flow: FlowField) -> np.ndarray:
    """Render a flow field as an 8-bit RGB image on the standard color wheel.

    Hue encodes direction (atan2(v, u)), saturation encodes magnitude
    normalized by the frame's 99th-percentile magnitude, value stays at 1,
    so zero motion renders as white. Pixels with equal (u, v) always get
    equal colors.
    """
    mag = flow_intensity(flow)
    scale = np.percentile(mag, 99.0)
    sat = np.clip(mag / scale, 0.0, 1.0) if scale > 0 else np.zeros_like(mag)
    hue = (np.arctan2(flow.v, flow.u) / (2.0 * np.pi)) % 1.0
    return _hsv_to_rgb_u8(hue, sat)


def _hsv_to_rgb_u8(hue, sat, val=1.0):
    h6 = hue * 6.0
    i = np.floor(h6).astype(int) % 6
    f = h6 - np.floor(h6)
    v = np.full_like(sat, val)
    p = v * (1.0 - sat)
    q = v * (1.0 - f * sat)
    t = v * (1.0 - (1.0 - f) * sat)
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    rgb = np.stack([r, g, b], axis=-1)
    return np.clip(np.round(rgb * 255.0), 0, 255).astype(np.uint8)


def dilate_edges(gradient: np.ndarray, radius: int) -> np.ndarray:
    """Grayscale-dilate a gradient raster with a disk of the given radius.

    The result dominates the input pointwise; radius 0 is the identity.
    """
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    if radius == 0:
        return np.array(gradient, copy=True)
    yy, xx = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    disk = (yy * yy + xx * xx) <= radius * radius
    return ndimage.grey_dilation(gradient, footprint=disk)


def compute_motion_rasters(flow: FlowField, dilation_radius: int = 3) -> MotionRasters:
    """All per-frame motion cues derived from one flow field."""
    grad = flow_gradient_magnitude(flow)
    return MotionRasters(
        intensity=flow_intensity(flow),
        gradient=grad,
        color=flow_to_color(flow),
        dilated_gradient=dilate_edges(grad, dilation_radius),
    )


def estimate_flow_fallback(
    frame1: np.ndarray,
    frame2: np.ndarray,
    levels: int = 3,
    block: int = 8,
    search: int = 4,
) -> FlowField:
    """Coarse-to-fine block-matching flow between two frames.

    A deliberately simple, fully deterministic stand-in used when no .flo
    files are supplied: a 3-level image pyramid, 8x8 blocks, +-4 px search
    per level, and a final 3x3 median filter. SAD ties prefer the smaller
    displacement (so identical frames yield an exactly zero field).
    """
    if frame1.shape != frame2.shape:
        raise DimensionMismatch(
            f"frame shapes differ: {frame1.shape} vs {frame2.shape}"
        )
    g1 = _to_gray(frame1)
    g2 = _to_gray(frame2)
    height, width = g1.shape

    # Pad to a block multiple with edge replication so every pixel has a block.
    pad_h = (-height) % block
    pad_w = (-width) % block
    g1p = np.pad(g1, ((0, pad_h), (0, pad_w)), mode="edge")
    g2p = np.pad(g2, ((0, pad_h), (0, pad_w)), mode="edge")

    pyramid = [(g1p, g2p)]
    for _ in range(levels - 1):
        a, b = pyramid[-1]
        if min(a.shape) // 2 < block:
            break
        pyramid.append((_downsample2(a), _downsample2(b)))

    u = v = None
    for a, b in reversed(pyramid):
        if u is None:
            u = np.zeros(a.shape)
            v = np.zeros(a.shape)
        else:
            u = 2.0 * np.repeat(np.repeat(u, 2, axis=0), 2, axis=1)[: a.shape[0], : a.shape[1]]
            v = 2.0 * np.repeat(np.repeat(v, 2, axis=0), 2, axis=1)[: a.shape[0], : a.shape[1]]
            if u.shape != a.shape:  # odd dimensions: replicate the last row/col
                u = np.pad(u, ((0, a.shape[0] - u.shape[0]), (0, a.shape[1] - u.shape[1])), mode="edge")
                v = np.pad(v, ((0, a.shape[0] - v.shape[0]), (0, a.shape[1] - v.shape[1])), mode="edge")
        u, v = _match_level(a, b, u, v, block, search)

    u = ndimage.median_filter(u, size=3)
    v = ndimage.median_filter(v, size=3)
    return FlowField(u[:height, :width], v[:height, :width])


def _to_gray(img):
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3:
        arr = arr.mean(axis=2)
    return arr


def _downsample2(img):
    h2, w2 = img.shape[0] // 2 * 2, img.shape[1] // 2 * 2
    c = img[:h2, :w2]
    return 0.25 * (c[0::2, 0::2] + c[1::2, 0::2] + c[0::2, 1::2] + c[1::2, 1::2])


def _match_level(g1, g2, prior_u, prior_v, block, search):
    height, width = g1.shape
    nby = max(1, height // block)
    nbx = max(1, width // block)
    rows = np.arange(height)
    cols = np.arange(width)

    # Integer per-block prior displacement, then a warped second image so the
    # residual search is uniform across blocks.
    bu = np.round(_block_mean(prior_u, block, nby, nbx)).astype(int)
    bv = np.round(_block_mean(prior_v, block, nby, nbx)).astype(int)
    warped = np.empty_like(g2)
    for by in range(nby):
        r0, r1 = by * block, min((by + 1) * block, height)
        for bx in range(nbx):
            c0, c1 = bx * block, min((bx + 1) * block, width)
            rr = np.clip(rows[r0:r1] + bv[by, bx], 0, height - 1)
            cc = np.clip(cols[c0:c1] + bu[by, bx], 0, width - 1)
            warped[r0:r1, c0:c1] = g2[np.ix_(rr, cc)]

    best_cost = np.full((nby, nbx), np.inf)
    best_dx = np.zeros((nby, nbx), dtype=int)
    best_dy = np.zeros((nby, nbx), dtype=int)
    candidates = sorted(
        ((dy, dx) for dy in range(-search, search + 1) for dx in range(-search, search + 1)),
        key=lambda d: (d[0] * d[0] + d[1] * d[1], d[0], d[1]),
    )
    for dy, dx in candidates:
        rr = np.clip(rows + dy, 0, height - 1)
        cc = np.clip(cols + dx, 0, width - 1)
        sad = np.abs(g1 - warped[np.ix_(rr, cc)])
        cost = _block_sum(sad, block, nby, nbx)
        better = cost < best_cost  # strict: earlier (smaller) candidates win ties
        best_cost[better] = cost[better]
        best_dy[better] = dy
        best_dx[better] = dx

    u = np.repeat(np.repeat(bu + best_dx, block, axis=0), block, axis=1)[:height, :width]
    v = np.repeat(np.repeat(bv + best_dy, block, axis=0), block, axis=1)[:height, :width]
    return u.astype(np.float64), v.astype(np.float64)


def _block_sum(img, block, nby, nbx):
    h, w = nby * block, nbx * block
    c = img[:h, :w]
    return c.reshape(nby, block, nbx, block).sum(axis=(1, 3))


def _block_mean(img, block, nby, nbx):
    return _block_sum(img, block, nby, nbx) / float(block * block)
