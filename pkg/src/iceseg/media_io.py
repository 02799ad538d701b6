"""Bit-exact loaders and writers for frames, Middlebury .flo flow files,
binary masks, proposal directories, and saliency overrides.

All loaders are pure: they return immutable-by-convention numpy values that
are safe to share across threads.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .exceptions import (
    BadMagic,
    DecodeError,
    DimensionMismatch,
    MissingFrames,
    NonFiniteValue,
    TruncatedFile,
)
from .flow import FlowField
from .proposals import ProposalSet, proposal_from_mask

FLO_MAGIC = 202021.25


@dataclass
class FrameSequence:
    """An ordered RGB frame sequence with optional aligned ground truth."""

    frames: list[np.ndarray]
    gt_masks: list[np.ndarray] | None = None
    name: str = "sequence"

    def __post_init__(self):
        if len(self.frames) < 2:
            raise MissingFrames(f"need at least 2 frames, got {len(self.frames)}")
        shape = self.frames[0].shape
        for i, f in enumerate(self.frames):
            if f.shape != shape:
                raise DimensionMismatch(
                    f"frame {i} has shape {f.shape}, expected {shape}"
                )
        if self.gt_masks is not None:
            if len(self.gt_masks) != len(self.frames):
                raise DimensionMismatch(
                    f"{len(self.gt_masks)} ground-truth masks for {len(self.frames)} frames"
                )
            for i, m in enumerate(self.gt_masks):
                if m.shape != shape[:2]:
                    raise DimensionMismatch(
                        f"gt mask {i} has shape {m.shape}, expected {shape[:2]}"
                    )

    @property
    def K(self) -> int:
        return len(self.frames)

    @property
    def frame_shape(self) -> tuple[int, int]:
        return self.frames[0].shape[:2]


def load_frame_sequence(
    dir_path: str | Path, pattern: str = "*.png", name: str | None = None
) -> FrameSequence:
    """Load all frames matching a glob pattern, in lexicographic order."""
    dir_path = Path(dir_path)
    if not dir_path.is_dir():
        raise MissingFrames(f"frame directory does not exist: {dir_path}")
    paths = sorted(dir_path.glob(pattern))
    if len(paths) < 2:
        raise MissingFrames(
            f"need at least 2 frames matching {pattern!r} in {dir_path}, found {len(paths)}"
        )
    frames = [_read_rgb(p) for p in paths]
    return FrameSequence(frames=frames, name=name or dir_path.name)


def _read_rgb(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"))
    except (UnidentifiedImageError, OSError) as exc:
        raise DecodeError(f"cannot decode image {path}: {exc}") from exc


def read_flo(path: str | Path) -> FlowField:
    """Read a little-endian Middlebury .flo file."""
    with open(path, "rb") as fh:
        head = fh.read(12)
        if len(head) < 12:
            raise TruncatedFile(f"{path}: header truncated")
        magic, width, height = struct.unpack("<fii", head)
        if magic != FLO_MAGIC:
            raise BadMagic(f"{path}: bad sanity constant {magic!r}")
        if width <= 0 or height <= 0:
            raise TruncatedFile(f"{path}: nonsensical dimensions {width}x{height}")
        payload = np.frombuffer(fh.read(8 * width * height), dtype="<f4")
        if payload.size != 2 * width * height:
            raise TruncatedFile(
                f"{path}: expected {2 * width * height} floats, got {payload.size}"
            )
    uv = payload.reshape(height, width, 2)
    return FlowField(u=uv[:, :, 0].astype(np.float64), v=uv[:, :, 1].astype(np.float64))


def write_flo(flow: FlowField, path: str | Path):
    """Write a flow field as little-endian Middlebury .flo (float32)."""
    u32 = flow.u.astype("<f4")
    v32 = flow.v.astype("<f4")
    if not (np.isfinite(u32).all() and np.isfinite(v32).all()):
        raise NonFiniteValue("cannot write non-finite flow values")
    height, width = u32.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack("<fii", FLO_MAGIC, width, height))
        fh.write(np.stack([u32, v32], axis=-1).tobytes())


def read_mask(path: str | Path) -> np.ndarray:
    """Read a grayscale PNG as a boolean mask (threshold at 128)."""
    try:
        with Image.open(path) as img:
            gray = np.asarray(img.convert("L"))
    except (UnidentifiedImageError, OSError) as exc:
        raise DecodeError(f"cannot decode mask {path}: {exc}") from exc
    return gray >= 128


def write_mask(mask: np.ndarray, path: str | Path):
    """Write a boolean mask as 0/255 grayscale PNG."""
    arr = (np.asarray(mask, dtype=bool) * np.uint8(255))
    Image.fromarray(arr, mode="L").save(path)


def load_proposals(
    dir_path: str | Path,
    frame_index: int,
    frame_shape: tuple[int, int] | None = None,
) -> ProposalSet:
    """Load the proposal masks of one frame from <dir>/<frame_index:05d>/*.png.

    An empty or missing per-frame directory is legal and yields an empty set,
    which triggers fallback proposal generation downstream.
    """
    frame_dir = Path(dir_path) / f"{frame_index:05d}"
    pset = ProposalSet(shape=frame_shape or (), space_tag="rgb")
    if not frame_dir.is_dir():
        return pset
    for p in sorted(frame_dir.glob("*.png")):
        mask = read_mask(p)
        if frame_shape is not None and mask.shape != tuple(frame_shape):
            raise DimensionMismatch(
                f"proposal {p} has shape {mask.shape}, frame is {frame_shape}"
            )
        if mask.any():
            pset.proposals.append(proposal_from_mask(mask))
        if not pset.shape:
            pset.shape = mask.shape
    return pset


def load_saliency_override(
    dir_path: str | Path, frame_index: int, frame_shape: tuple[int, int]
) -> np.ndarray | None:
    """Load a precomputed saliency map (grayscale PNG scaled to [0, 1]) for
    one frame if present: <dir>/<frame_index:05d>.png."""
    path = Path(dir_path) / f"{frame_index:05d}.png"
    if not path.exists():
        return None
    try:
        with Image.open(path) as img:
            gray = np.asarray(img.convert("L"), dtype=np.float64)
    except (UnidentifiedImageError, OSError) as exc:
        raise DecodeError(f"cannot decode saliency map {path}: {exc}") from exc
    if gray.shape != tuple(frame_shape):
        raise DimensionMismatch(
            f"saliency map {path} has shape {gray.shape}, frame is {frame_shape}"
        )
    return gray / 255.0


def write_gray(values: np.ndarray, path: str | Path):
    """Write a [0, 1] raster as 8-bit grayscale PNG (for debug dumps)."""
    arr = np.clip(np.round(np.asarray(values, dtype=np.float64) * 255.0), 0, 255)
    Image.fromarray(arr.astype(np.uint8), mode="L").save(path)


def write_label_png(labels: np.ndarray, path: str | Path):
    """Write an integer label raster as 16-bit grayscale PNG."""
    Image.fromarray(labels.astype(np.uint16), mode="I;16").save(path)


def write_indexed_png(ids: np.ndarray, path: str | Path):
    """Write a small-integer id raster as a palettized PNG with distinct
    colors per id (id 0 renders black)."""
    ids = np.asarray(ids)
    if ids.max() > 255:
        raise ValueError("indexed PNG supports at most 256 ids")
    img = Image.fromarray(ids.astype(np.uint8), mode="P")
    palette = [0, 0, 0]
    rng = np.random.default_rng(7)
    for _ in range(255):
        palette.extend(int(c) for c in rng.integers(40, 256, size=3))
    img.putpalette(palette)
    img.save(path)
