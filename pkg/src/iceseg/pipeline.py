"""End-to-end segmentation of one frame sequence.

Per frame: flow-derived rasters, superpixels on the RGB frame and on the
flow-color image, proposal scoring and accumulation in both spaces,
saliency, trimap, and the fused cue map. Per sequence: adaptive
initialization with occlusion-aware identity tracking, then refinement by
min-cut over the spatiotemporal superpixel graph.

Modes: "full" is the complete model; "ice_simplified" keeps the fused cue
map but drops the histogram unary and uses absolute node-value differences
as pairwise costs; "se" encodes motion and appearance separately (flow
magnitude + RGB saliency averaged at the end) under the same reduced energy.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .descriptors import build_node_histograms
from .flow import FlowField, MotionRasters, compute_motion_rasters, estimate_flow_fallback
from .ice import (
    IceMap,
    appearance_constrained_motion,
    fuse_ice,
    motion_constrained_appearance,
    normalize_raster,
)
from .initialization import assign_persistent_ids, initial_labels
from .media_io import FrameSequence
from .proposals import ProposalSet, accumulate, generate_fallback_proposals
from .refine import (
    build_graph,
    build_simplified_graph,
    labels_to_masks,
    minimize_energy,
    total_energy,
)
from .saliency import SaliencyMap, superpixel_saliency
from .superpixels import SuperpixelMap, slic_segment
from .trimap import Trimap, block_level_map, build_trimap

MODES = ("full", "ice_simplified", "se")

_TERMS = {
    "full": [
        "accumulated_boundary_strengths",
        "accumulated_intensity_strengths",
        "saliency_color",
        "saliency_rgb",
        "trimap",
        "map_unary",
        "histogram_unary",
        "histogram_connectivity_pairwise",
    ],
    "ice_simplified": [
        "accumulated_boundary_strengths",
        "accumulated_intensity_strengths",
        "saliency_color",
        "saliency_rgb",
        "trimap",
        "map_unary",
        "abs_diff_pairwise",
    ],
    "se": [
        "flow_intensity",
        "saliency_rgb",
        "map_unary",
        "abs_diff_pairwise",
    ],
}


@dataclass
class FrameCues:
    """Everything computed for one frame before initialization."""

    flow: FlowField
    motion: MotionRasters
    sp_rgb: SuperpixelMap
    saliency_rgb: SaliencyMap
    values: np.ndarray  # the likelihood map driving initialization/unaries
    sp_c: SuperpixelMap | None = None
    saliency_c: SaliencyMap | None = None
    proposals_rgb: ProposalSet | None = None
    proposals_c: ProposalSet | None = None
    trimap: Trimap | None = None
    ice: IceMap | None = None


@dataclass
class SegmentationResult:
    masks: list[np.ndarray]
    init_masks: list[np.ndarray]
    thresholds: list[float]
    cues: list[FrameCues]
    id_rasters: list[np.ndarray]
    episodes: list
    blob_counts: list[int]
    energy_trace: dict
    mode: str
    terms: list[str] = field(default_factory=list)


def run_pipeline(
    sequence: FrameSequence,
    config: RunConfig | None = None,
    mode: str = "full",
    flows: list[FlowField] | None = None,
    proposals_rgb: list[ProposalSet] | None = None,
    saliency_rgb: list[np.ndarray | None] | None = None,
    threads: int = 1,
) -> SegmentationResult:
    """Segment one sequence; results are identical at any thread count."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    config = config or RunConfig()
    frames = sequence.frames
    n_frames = len(frames)

    flow_list = _resolve_flows(frames, flows, threads)

    def frame_cues(i: int) -> FrameCues:
        return _compute_frame_cues(
            frames[i],
            flow_list[i],
            config,
            mode,
            proposals=proposals_rgb[i] if proposals_rgb else None,
            saliency_override=saliency_rgb[i] if saliency_rgb else None,
        )

    cues = _map_indexed(frame_cues, n_frames, threads)

    init_masks, thresholds = [], []
    for c in cues:
        mask, t = initial_labels(c.values, config.min_blob_frac)
        init_masks.append(mask)
        thresholds.append(t)

    proposal_masks = {
        f: [p.mask for p in cues[f].proposals_rgb] if cues[f].proposals_rgb else []
        for f in range(n_frames)
    }
    id_rasters, episodes, blob_counts = assign_persistent_ids(
        frames, init_masks, proposal_masks
    )

    sp_maps = [c.sp_rgb for c in cues]
    values = [c.values for c in cues]
    if mode == "full":
        histograms = _map_indexed(
            lambda i: build_node_histograms(
                frames[i],
                sp_maps[i],
                knn_k=config.knn_weighting_k,
                bow_sift_dims=config.bow_sift_dims,
                bow_rgb_dims=config.bow_rgb_dims,
            ),
            n_frames,
            threads,
        )
        graph = build_graph(sp_maps, values, init_masks, histograms, config, flows=flow_list)
    else:
        graph = build_simplified_graph(sp_maps, values, init_masks, config)

    initial_energy = total_energy(graph, graph.init_labels)
    labels = minimize_energy(graph)
    final_energy = total_energy(graph, labels)
    masks = labels_to_masks(graph, labels, sp_maps)

    return SegmentationResult(
        masks=masks,
        init_masks=init_masks,
        thresholds=thresholds,
        cues=cues,
        id_rasters=id_rasters,
        episodes=episodes,
        blob_counts=blob_counts,
        energy_trace={
            "initial_energy": initial_energy,
            "final_energy": final_energy,
            "n_nodes": int(graph.n_nodes),
            "n_spatial_edges": int(len(graph.spatial_edges)),
            "n_temporal_edges": int(len(graph.temporal_edges)),
        },
        mode=mode,
        terms=list(_TERMS[mode]),
    )


def _resolve_flows(frames, flows, threads):
    """One flow field per frame; the last frame reuses the previous pair's."""
    n_frames = len(frames)
    if flows is not None:
        if len(flows) not in (n_frames - 1, n_frames):
            raise ValueError(
                f"expected {n_frames - 1} or {n_frames} flow fields, got {len(flows)}"
            )
        out = list(flows)
    else:
        out = _map_indexed(
            lambda i: estimate_flow_fallback(frames[i], frames[i + 1]), n_frames - 1, threads
        )
    if len(out) == n_frames - 1:
        out.append(out[-1])
    return out


def _compute_frame_cues(frame, flow, config, mode, proposals=None, saliency_override=None):
    motion = compute_motion_rasters(flow, config.dilation_radius)
    sp_rgb = slic_segment(frame, config.slic_regionsize, config.slic_regularizer)
    sal_rgb = (
        SaliencyMap(saliency_override, "rgb")
        if saliency_override is not None
        else superpixel_saliency(frame, sp_rgb, "rgb")
    )

    if mode == "se":
        # Separate encoding: motion and appearance likelihoods are built
        # independently and only averaged at the end.
        se_values = 0.5 * (
            normalize_raster(motion.intensity) + normalize_raster(sal_rgb.values)
        )
        return FrameCues(
            flow=flow, motion=motion, sp_rgb=sp_rgb, saliency_rgb=sal_rgb, values=se_values
        )

    sp_c = slic_segment(motion.color, config.slic_regionsize, config.slic_regularizer)
    sal_c = superpixel_saliency(motion.color, sp_c, "flow_color")

    props_rgb = proposals
    if props_rgb is None or len(props_rgb) == 0:
        props_rgb = generate_fallback_proposals(
            frame, sp_rgb, config.fallback_proposal_groups, space_tag="rgb"
        )
    props_c = generate_fallback_proposals(
        motion.color, sp_c, config.fallback_proposal_groups, space_tag="flow_color"
    )

    acc_c = accumulate(
        props_c, motion.gradient, motion.intensity, top_k=config.proposal_top_k
    )
    acc_rgb = accumulate(
        props_rgb, motion.dilated_gradient, motion.intensity, top_k=config.proposal_top_k
    )

    tri = build_trimap(block_level_map(sal_c.values), config.theta1, config.theta2)

    constrained_motion = appearance_constrained_motion(
        normalize_raster(acc_c.boundary_acc),
        normalize_raster(acc_c.intensity_acc),
        sal_c.values,
        tri.values,
        alpha=config.alpha,
        beta=config.beta,
    )
    constrained_appearance = motion_constrained_appearance(
        normalize_raster(acc_rgb.boundary_acc),
        normalize_raster(acc_rgb.intensity_acc),
        sal_rgb.values,
        alpha=config.alpha,
    )
    ice_map = fuse_ice(constrained_motion, constrained_appearance)

    return FrameCues(
        flow=flow,
        motion=motion,
        sp_rgb=sp_rgb,
        saliency_rgb=sal_rgb,
        values=ice_map.values,
        sp_c=sp_c,
        saliency_c=sal_c,
        proposals_rgb=props_rgb,
        proposals_c=props_c,
        trimap=tri,
        ice=ice_map,
    )


def _map_indexed(fn, count, threads):
    if threads and threads > 1 and count > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, range(count)))
    return [fn(i) for i in range(count)]
