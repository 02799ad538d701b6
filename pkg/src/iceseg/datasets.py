"""Deterministic synthetic sequences for tests, demos, and the ablation
harness: textured moving squares over a textured static background."""

from __future__ import annotations

import numpy as np

from .media_io import FrameSequence


def _textured(base_rgb, shape, rng, amplitude=25):
    noise = rng.integers(-amplitude, amplitude + 1, size=(*shape, 3))
    return np.clip(np.asarray(base_rgb)[None, None, :] + noise, 0, 255).astype(np.uint8)


def make_moving_square(
    n_frames: int = 20,
    height: int = 120,
    width: int = 160,
    square: int = 40,
    start: tuple[int, int] = (10, 40),
    step: tuple[int, int] = (3, 0),
    seed: int = 0,
    name: str = "moving_square",
) -> FrameSequence:
    """One textured square translating over a static textured background.

    The square's texture moves rigidly with it, so block matching can see
    the motion. Ground-truth masks are attached to the returned sequence.
    """
    rng = np.random.default_rng(seed)
    background = _textured((60, 120, 60), (height, width), rng)
    patch = _textured((200, 60, 60), (square, square), rng)

    frames, masks = [], []
    for t in range(n_frames):
        x = start[0] + step[0] * t
        y = start[1] + step[1] * t
        if not (0 <= x and x + square <= width and 0 <= y and y + square <= height):
            raise ValueError(f"square leaves the frame at t={t}; shrink step or n_frames")
        frame = background.copy()
        frame[y : y + square, x : x + square] = patch
        mask = np.zeros((height, width), dtype=bool)
        mask[y : y + square, x : x + square] = True
        frames.append(frame)
        masks.append(mask)
    return FrameSequence(frames=frames, gt_masks=masks, name=name)


def make_crossing_squares(
    n_frames: int = 20,
    height: int = 120,
    width: int = 160,
    square: int = 30,
    seed: int = 1,
    name: str = "crossing_squares",
) -> tuple[FrameSequence, list[np.ndarray]]:
    """Two textured squares crossing paths, producing one occlusion episode.

    Square 1 (warm colors) moves right and passes in front of square 2 (cool
    colors) moving left; while they overlap, the combined foreground is a
    single blob. Returns the sequence (gt_masks = combined foreground) and
    per-frame identity rasters (0 background, 1 front square, 2 back square)
    for identity-consistency checks.
    """
    rng = np.random.default_rng(seed)
    background = _textured((90, 90, 90), (height, width), rng)
    patch1 = _textured((210, 70, 50), (square, square), rng)
    patch2 = _textured((50, 80, 210), (square, square), rng)

    y = (height - square) // 2
    x1_start, x2_start = 10, width - square - 10
    step = 4

    frames, masks, id_rasters = [], [], []
    for t in range(n_frames):
        x1 = x1_start + step * t
        x2 = x2_start - step * t
        if x1 + square > width or x2 < 0:
            raise ValueError(f"squares leave the frame at t={t}; shrink n_frames")
        frame = background.copy()
        ids = np.zeros((height, width), dtype=np.int32)
        # Back square first so the front square occludes it.
        frame[y : y + square, x2 : x2 + square] = patch2
        ids[y : y + square, x2 : x2 + square] = 2
        frame[y : y + square, x1 : x1 + square] = patch1
        ids[y : y + square, x1 : x1 + square] = 1
        frames.append(frame)
        masks.append(ids > 0)
        id_rasters.append(ids)
    seq = FrameSequence(frames=frames, gt_masks=masks, name=name)
    return seq, id_rasters


def visible_object_masks(id_rasters: list[np.ndarray]) -> dict[int, list[np.ndarray]]:
    """Per-frame visible mask of each object id in a raster list."""
    ids = sorted(set(int(v) for r in id_rasters for v in np.unique(r) if v > 0))
    return {i: [r == i for r in id_rasters] for i in ids}
