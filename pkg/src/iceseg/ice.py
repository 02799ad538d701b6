"""Cross-constrained cue fusion.

The appearance-constrained motion map sums the flow-space accumulated
proposal strengths with the saliency of the flow-color image and the
trimap; the motion-constrained appearance map sums the RGB-space
accumulated strengths (scored against the dilated flow gradient) with RGB
saliency. Their sum, min-max normalized, is the per-pixel foreground
likelihood that drives initialization and the refinement unaries.

The two strength rasters entering each sum are expected to be min-max
normalized per frame first (see `normalize_raster`), so all terms share the
[0, 1] scale of the saliency and trimap terms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch


@dataclass
class IceMap:
    """Fused foreground likelihood in [0, 1] with its two constituent maps."""

    values: np.ndarray
    constrained_motion: np.ndarray
    constrained_appearance: np.ndarray


def normalize_raster(raster: np.ndarray, degenerate: float = 0.0) -> np.ndarray:
    """Min-max normalize to [0, 1]; a flat raster maps to the degenerate
    value (no spatial evidence)."""
    raster = np.asarray(raster, dtype=np.float64)
    lo, hi = raster.min(), raster.max()
    if hi == lo:
        return np.full_like(raster, degenerate)
    return (raster - lo) / (hi - lo)


def _check_shapes(*rasters):
    shape = rasters[0].shape
    for r in rasters[1:]:
        if r.shape != shape:
            raise DimensionMismatch(f"raster shapes differ: {shape} vs {r.shape}")


def appearance_constrained_motion(
    boundary_acc: np.ndarray,
    intensity_acc: np.ndarray,
    saliency: np.ndarray,
    trimap_values: np.ndarray,
    alpha: float = 0.9,
    beta: float = 0.5,
) -> np.ndarray:
    """Pointwise G + I + alpha * Y + beta * T over the flow-space cues."""
    boundary_acc = np.asarray(boundary_acc, dtype=np.float64)
    _check_shapes(boundary_acc, intensity_acc, saliency, trimap_values)
    return boundary_acc + intensity_acc + alpha * saliency + beta * trimap_values


def motion_constrained_appearance(
    boundary_acc: np.ndarray,
    intensity_acc: np.ndarray,
    saliency: np.ndarray,
    alpha: float = 0.9,
) -> np.ndarray:
    """Pointwise G + I + alpha * Y over the RGB-space cues."""
    boundary_acc = np.asarray(boundary_acc, dtype=np.float64)
    _check_shapes(boundary_acc, intensity_acc, saliency)
    return boundary_acc + intensity_acc + alpha * saliency


def fuse_ice(constrained_motion: np.ndarray, constrained_appearance: np.ndarray) -> IceMap:
    """Equal-weight fusion of the two constrained maps, min-max normalized.

    A flat sum carries no motion evidence and maps to all zeros.
    """
    constrained_motion = np.asarray(constrained_motion, dtype=np.float64)
    constrained_appearance = np.asarray(constrained_appearance, dtype=np.float64)
    _check_shapes(constrained_motion, constrained_appearance)
    fused = normalize_raster(constrained_motion + constrained_appearance, degenerate=0.0)
    return IceMap(
        values=fused,
        constrained_motion=constrained_motion,
        constrained_appearance=constrained_appearance,
    )
