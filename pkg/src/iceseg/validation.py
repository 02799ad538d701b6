"""Input validation helpers for the estimator and CLI entry points."""

from __future__ import annotations

import numpy as np

from .exceptions import DimensionMismatch, MissingFrames
from .media_io import FrameSequence


def as_frame_array(frame) -> np.ndarray:
    """Coerce one frame to an (H, W, 3) uint8 array.

    Accepts uint8 arrays, integer arrays in [0, 255], and float arrays in
    [0, 1]; grayscale (H, W) input is broadcast to three channels.
    """
    arr = np.asarray(frame)
    if arr.ndim == 2:
        arr = np.stack([arr] * 3, axis=-1)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise DimensionMismatch(f"frames must be (H, W, 3), got shape {arr.shape}")
    if arr.dtype == np.uint8:
        return arr
    if np.issubdtype(arr.dtype, np.floating):
        if arr.min() < 0 or arr.max() > 1:
            raise ValueError("float frames must lie in [0, 1]")
        return np.round(arr * 255.0).astype(np.uint8)
    if np.issubdtype(arr.dtype, np.integer):
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError("integer frames must lie in [0, 255]")
        return arr.astype(np.uint8)
    raise ValueError(f"unsupported frame dtype {arr.dtype}")


def check_frame_sequence(X, y=None) -> FrameSequence:
    """Coerce estimator input to a validated FrameSequence.

    X may be a FrameSequence, a list of frames, or a (K, H, W, 3) array;
    y, when given, is an aligned list of ground-truth masks.
    """
    if isinstance(X, FrameSequence):
        return X
    if isinstance(X, np.ndarray) and X.ndim == 4:
        frames = [as_frame_array(X[i]) for i in range(X.shape[0])]
    elif isinstance(X, (list, tuple)):
        frames = [as_frame_array(f) for f in X]
    else:
        raise MissingFrames(
            f"cannot interpret {type(X).__name__} as a frame sequence"
        )
    gt = None
    if y is not None:
        gt = [np.asarray(m, dtype=bool) for m in y]
    return FrameSequence(frames=frames, gt_masks=gt)
