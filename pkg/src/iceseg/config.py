"""Run configuration shared by the pipeline stages.

A :class:`RunConfig` mirrors the JSON config document accepted by the CLI:
every field is optional in the file and falls back to the defaults below.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .exceptions import BadConfig


@dataclass
class RunConfig:
    """Tunable parameters for one segmentation run.

    alpha/beta weight the saliency and trimap terms of the fused cue maps;
    theta1/theta2 are the definite-foreground/background cuts on the
    21-level block map; lambda1/lambda2 weight spatial/temporal smoothness
    in the refinement energy.
    """

    alpha: float = 0.9
    beta: float = 0.5
    theta1: int = 18
    theta2: int = 6
    lambda1: float = 3.0
    lambda2: float = 2.0
    slic_regionsize: int = 20
    slic_regularizer: float = 0.1
    color_bins_per_channel: int = 16
    bow_sift_dims: int = 200
    bow_rgb_dims: int = 150
    knn_weighting_k: int = 4
    dilation_radius: int = 3
    clamp_eps: float = 1e-6
    # Minimum blob size kept by the initializer, as a fraction of frame pixels.
    min_blob_frac: float = 0.0005
    # Optional top-k proposal filter before accumulation (None = keep all).
    proposal_top_k: int | None = None
    # Number of merged groups targeted by the fallback proposal generator.
    fallback_proposal_groups: int = 8
    # Warp temporal overlaps by optical flow instead of same-coordinate overlap.
    temporal_flow_warp: bool = False
    # Pool foreground/background appearance models per "sequence" or per "frame".
    fg_model_scope: str = "sequence"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.theta1 > self.theta2 >= 0:
            raise BadConfig(
                f"need theta1 > theta2 >= 0, got theta1={self.theta1} theta2={self.theta2}"
            )
        for name in ("alpha", "beta", "lambda1", "lambda2"):
            if getattr(self, name) < 0:
                raise BadConfig(f"{name} must be >= 0, got {getattr(self, name)}")
        if not 0.0 < self.clamp_eps < 0.5:
            raise BadConfig(f"clamp_eps must lie in (0, 0.5), got {self.clamp_eps}")
        if self.slic_regionsize < 2:
            raise BadConfig(f"slic_regionsize must be >= 2, got {self.slic_regionsize}")
        if self.fg_model_scope not in ("sequence", "frame"):
            raise BadConfig(f"fg_model_scope must be 'sequence' or 'frame', got {self.fg_model_scope!r}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise BadConfig(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)


def load_config(path: str | Path) -> RunConfig:
    """Load a JSON config file; missing fields take their defaults."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise BadConfig(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise BadConfig(f"config {path} must hold a JSON object")
    return RunConfig.from_dict(data)


def save_config(config: RunConfig, path: str | Path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
