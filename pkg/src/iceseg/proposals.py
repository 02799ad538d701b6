"""Object-proposal scoring against motion rasters and accumulation into
per-pixel strength maps, plus a deterministic superpixel-agglomeration
fallback generator for when no proposal masks are supplied."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import pdist

from .exceptions import DimensionMismatch, EmptyBoundary, EmptyMask
from .superpixels import SuperpixelMap

_EIGHT_CONN = np.ones((3, 3), dtype=bool)


@dataclass
class Proposal:
    """One candidate region: a binary mask with its interior boundary and the
    flow-derived strengths filled in by scoring."""

    mask: np.ndarray
    boundary: np.ndarray
    g_strength: float = 0.0
    i_strength: float = 0.0

    @property
    def area(self) -> int:
        return int(self.mask.sum())

    @property
    def perim(self) -> int:
        return int(self.boundary.sum())


@dataclass
class ProposalSet:
    proposals: list[Proposal] = field(default_factory=list)
    shape: tuple = ()
    space_tag: str = "rgb"

    def __len__(self):
        return len(self.proposals)

    def __iter__(self):
        return iter(self.proposals)


@dataclass
class AccumulatedStrengths:
    """Per-pixel sums of proposal strengths over a proposal set."""

    boundary_acc: np.ndarray
    intensity_acc: np.ndarray
    space_tag: str


def extract_boundary(mask: np.ndarray) -> np.ndarray:
    """Interior boundary of a binary mask: mask pixels with an off-mask
    8-neighbor or lying on the image border."""
    mask = np.asarray(mask, dtype=bool)
    interior = ndimage.binary_erosion(mask, structure=_EIGHT_CONN, border_value=0)
    return mask & ~interior


def proposal_from_mask(mask: np.ndarray) -> Proposal:
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise EmptyMask("proposal mask has no foreground pixels")
    return Proposal(mask=mask, boundary=extract_boundary(mask))


def boundary_strength(p: Proposal, gradient: np.ndarray) -> float:
    """Mean flow-gradient magnitude over the proposal's boundary pixels."""
    if gradient.shape != p.mask.shape:
        raise DimensionMismatch(
            f"gradient raster {gradient.shape} does not match mask {p.mask.shape}"
        )
    perim = p.perim
    if perim == 0:
        raise EmptyBoundary("proposal has no boundary pixels")
    return float(gradient[p.boundary].sum() / perim)


def intensity_strength(p: Proposal, intensity: np.ndarray) -> float:
    """Mean flow magnitude over the proposal's mask pixels."""
    if intensity.shape != p.mask.shape:
        raise DimensionMismatch(
            f"intensity raster {intensity.shape} does not match mask {p.mask.shape}"
        )
    area = p.area
    if area == 0:
        raise EmptyMask("proposal mask has no foreground pixels")
    return float(intensity[p.mask].sum() / area)


def accumulate(
    proposals: ProposalSet,
    gradient: np.ndarray,
    intensity: np.ndarray,
    support: str = "region",
    top_k: int | None = None,
) -> AccumulatedStrengths:
    """Score every proposal and sum the per-proposal strengths into rasters.

    Each proposal contributes its scalar strength uniformly over its support
    pixels: the full region mask by default, or only the boundary map with
    support="boundary". An optional top-k filter (ranked by combined
    strength, off by default) limits how many proposals accumulate. An empty
    set yields zero rasters.
    """
    if support not in ("region", "boundary"):
        raise ValueError(f"support must be 'region' or 'boundary', got {support!r}")
    g_acc = np.zeros(gradient.shape, dtype=np.float64)
    i_acc = np.zeros(gradient.shape, dtype=np.float64)
    scored = []
    for p in proposals:
        p.g_strength = boundary_strength(p, gradient)
        p.i_strength = intensity_strength(p, intensity)
        scored.append(p)
    if top_k is not None:
        scored = sorted(
            scored, key=lambda q: q.g_strength + q.i_strength, reverse=True
        )[:top_k]
    for p in scored:
        pix = p.mask if support == "region" else p.boundary
        g_acc[pix] += p.g_strength
        i_acc[pix] += p.i_strength
    return AccumulatedStrengths(g_acc, i_acc, proposals.space_tag)


def generate_fallback_proposals(
    image: np.ndarray,
    sp: SuperpixelMap,
    n_target: int,
    space_tag: str = "rgb",
) -> ProposalSet:
    """Deterministic proposal generation from superpixels.

    Superpixels agglomerate by single-linkage similarity of their mean LAB
    colors until n_target groups remain; every merged group and every
    individual superpixel becomes one proposal (duplicates dropped).
    """
    if n_target < 1:
        raise ValueError(f"n_target must be >= 1, got {n_target}")
    n = sp.n_superpixels
    groups: list[tuple[int, ...]]
    if n <= n_target or n < 2:
        groups = [(s,) for s in range(n)]
    else:
        z = linkage(pdist(sp.mean_lab), method="single")
        assignment = fcluster(z, t=n_target, criterion="maxclust")
        groups = [
            tuple(np.flatnonzero(assignment == c))
            for c in np.unique(assignment)
        ]

    seen = set()
    members_list = []
    for grp in sorted(groups, key=lambda g: g[0]):
        key = frozenset(grp)
        if key not in seen:
            seen.add(key)
            members_list.append(grp)
    for s in range(n):
        key = frozenset((s,))
        if key not in seen:
            seen.add(key)
            members_list.append((s,))

    out = ProposalSet(shape=sp.labels.shape, space_tag=space_tag)
    for members in members_list:
        mask = np.isin(sp.labels, members)
        out.proposals.append(proposal_from_mask(mask))
    return out
