"""Spatiotemporal superpixel graph construction, unary/pairwise potentials,
and exact binary energy minimization by s-t min-cut.

The energy is a Potts model: pairwise terms vanish on equal labels and
charge a fixed nonnegative coefficient when the cut separates a pair, so the
min-cut labeling is the exact global minimum. Each unordered edge is counted
once with its full coefficient, which preserves the argmin of the symmetric
double-sum formulation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .descriptors import NodeHistogram, histogram_distance, pooled_histogram
from .maxflow import FlowNetwork
from .superpixels import (
    SuperpixelMap,
    shared_boundary_lengths,
    temporal_neighbors,
)


class NoForegroundEvidence(UserWarning):
    """Every unary favors background; the refined labeling is all-background."""


@dataclass
class SpatioTemporalGraph:
    """Binary MRF over superpixels of a whole sequence.

    unary0/unary1 hold the label-0/label-1 node costs; edges carry the
    label-difference coefficient (before the lambda weights). node_frame and
    node_local map global node ids back to (frame, superpixel) pairs.
    """

    unary0: np.ndarray
    unary1: np.ndarray
    spatial_edges: np.ndarray  # columns: i, j, coefficient
    temporal_edges: np.ndarray
    lambda1: float
    lambda2: float
    init_labels: np.ndarray
    node_frame: np.ndarray = field(default=None)
    node_local: np.ndarray = field(default=None)

    @property
    def n_nodes(self) -> int:
        return len(self.unary0)


def unary_ice(node_value: float, label: int, clamp_eps: float = 1e-6) -> float:
    """-log(1 - m) for label 0, -log(m) for label 1, with m clamped away
    from {0, 1} so the cost stays finite."""
    m = min(max(float(node_value), clamp_eps), 1.0 - clamp_eps)
    return -np.log1p(-m) if label == 0 else -np.log(m)


def unary_hist(
    hist: NodeHistogram,
    label: int,
    fg_model: NodeHistogram,
    bg_model: NodeHistogram,
) -> float:
    """1 - D(H, fg model) for label 0 and 1 - D(H, bg model) for label 1:
    calling a foreground-looking node background is expensive."""
    model = fg_model if label == 0 else bg_model
    return 1.0 - histogram_distance(hist, model)


def boundary_connectivity(
    shared_length: int, perim_p: int, perim_q: int, label_p: int, label_q: int
) -> float:
    """Overlapped perimeter fraction, charged only across the label boundary."""
    if label_p == label_q:
        return 0.0
    return shared_length / min(perim_p, perim_q)


def pairwise_spatial(distance: float, connectivity: float, label_p: int, label_q: int) -> float:
    """0 on equal labels, else (1 - D) + C in [0, 2]."""
    if label_p == label_q:
        return 0.0
    return (1.0 - distance) + connectivity


def pairwise_temporal(distance: float, label_p: int, label_r: int) -> float:
    """0 on equal labels, else 1 - D in [0, 1]."""
    if label_p == label_r:
        return 0.0
    return 1.0 - distance


def total_energy(graph: SpatioTemporalGraph, labels) -> float:
    """Unary sum plus lambda-weighted Potts pairwise sums, each unordered
    edge counted once. Deterministic summation order for a given labeling."""
    labels = np.asarray(labels, dtype=int)
    energy = float(np.where(labels == 0, graph.unary0, graph.unary1).sum())
    for edges, lam in ((graph.spatial_edges, graph.lambda1), (graph.temporal_edges, graph.lambda2)):
        if len(edges) == 0:
            continue
        i = edges[:, 0].astype(int)
        j = edges[:, 1].astype(int)
        cut = labels[i] != labels[j]
        energy += float(lam * edges[cut, 2].sum())
    return energy


def minimize_energy(graph: SpatioTemporalGraph) -> np.ndarray:
    """Exact global minimizer of the binary submodular energy via max-flow.

    t-links carry the unaries (source side = label 1), n-links the
    lambda-weighted pairwise coefficients. Never returns a labeling with
    higher energy than the initialization.
    """
    n = graph.n_nodes
    source, sink = n, n + 1
    net = FlowNetwork(n + 2)
    for p in range(n):
        if graph.unary0[p] > 0:
            net.add_edge(source, p, graph.unary0[p])
        if graph.unary1[p] > 0:
            net.add_edge(p, sink, graph.unary1[p])
    for edges, lam in ((graph.spatial_edges, graph.lambda1), (graph.temporal_edges, graph.lambda2)):
        for i, j, coef in edges:
            w = lam * coef
            if w > 0:
                net.add_edge(int(i), int(j), w, w)
    net.max_flow(source, sink)
    labels = net.source_side(source)[:n].astype(int)
    if not labels.any():
        warnings.warn(
            "all unaries favor background; refined labeling is all-background",
            NoForegroundEvidence,
            stacklevel=2,
        )
    return labels


def minimize_energy_with_flow(graph: SpatioTemporalGraph) -> tuple[np.ndarray, float]:
    """minimize_energy variant that also reports the max-flow value (equal to
    the min-cut capacity up to float rounding), for conservation audits."""
    n = graph.n_nodes
    source, sink = n, n + 1
    net = FlowNetwork(n + 2)
    offset = 0.0
    for p in range(n):
        if graph.unary0[p] > 0:
            net.add_edge(source, p, graph.unary0[p])
        else:
            offset += graph.unary0[p]
        if graph.unary1[p] > 0:
            net.add_edge(p, sink, graph.unary1[p])
        else:
            offset += graph.unary1[p]
    for edges, lam in ((graph.spatial_edges, graph.lambda1), (graph.temporal_edges, graph.lambda2)):
        for i, j, coef in edges:
            w = lam * coef
            if w > 0:
                net.add_edge(int(i), int(j), w, w)
    flow = net.max_flow(source, sink)
    labels = net.source_side(source)[:n].astype(int)
    return labels, flow + offset


def build_graph(
    sp_maps: list[SuperpixelMap],
    node_values: list[np.ndarray],
    init_masks: list[np.ndarray],
    histograms: list[list[NodeHistogram]] | None,
    config: RunConfig,
    flows=None,
) -> SpatioTemporalGraph:
    """Assemble the full-model graph for one sequence.

    node_values are the per-frame fused cue maps; histograms, when given,
    enable the appearance unary against pooled foreground/background models
    (dropped with a warning if the initialization has no foreground).
    """
    offsets, node_frame, node_local = _index_nodes(sp_maps)
    n = len(node_frame)

    node_m = np.empty(n)
    init = np.empty(n, dtype=int)
    for f, sp in enumerate(sp_maps):
        flat = sp.labels.ravel()
        m_mean = np.bincount(flat, weights=node_values[f].ravel(), minlength=sp.n_superpixels)
        x_mean = np.bincount(
            flat, weights=init_masks[f].ravel().astype(np.float64), minlength=sp.n_superpixels
        )
        sl = slice(offsets[f], offsets[f] + sp.n_superpixels)
        node_m[sl] = m_mean / sp.areas
        init[sl] = (x_mean / sp.areas) >= 0.5

    eps = config.clamp_eps
    clamped = np.clip(node_m, eps, 1.0 - eps)
    unary0 = -np.log1p(-clamped)
    unary1 = -np.log(clamped)

    flat_hists = None
    if histograms is not None:
        flat_hists = [h for per_frame in histograms for h in per_frame]
        fg_nodes = [flat_hists[p] for p in range(n) if init[p] == 1]
        bg_nodes = [flat_hists[p] for p in range(n) if init[p] == 0]
        if not fg_nodes or not bg_nodes:
            warnings.warn(
                "initialization lacks one class; appearance unary dropped",
                NoForegroundEvidence,
                stacklevel=2,
            )
        else:
            if config.fg_model_scope == "frame":
                for f, sp in enumerate(sp_maps):
                    sl = range(offsets[f], offsets[f] + sp.n_superpixels)
                    fg = [flat_hists[p] for p in sl if init[p] == 1] or fg_nodes
                    bg = [flat_hists[p] for p in sl if init[p] == 0] or bg_nodes
                    fg_model, bg_model = pooled_histogram(fg), pooled_histogram(bg)
                    for p in sl:
                        unary0[p] += unary_hist(flat_hists[p], 0, fg_model, bg_model)
                        unary1[p] += unary_hist(flat_hists[p], 1, fg_model, bg_model)
            else:
                fg_model = pooled_histogram(fg_nodes)
                bg_model = pooled_histogram(bg_nodes)
                for p in range(n):
                    unary0[p] += unary_hist(flat_hists[p], 0, fg_model, bg_model)
                    unary1[p] += unary_hist(flat_hists[p], 1, fg_model, bg_model)

    spatial = []
    for f, sp in enumerate(sp_maps):
        shared = shared_boundary_lengths(sp)
        for (a, b), length in sorted(shared.items()):
            pa, pb = offsets[f] + a, offsets[f] + b
            if flat_hists is not None:
                conn = length / min(sp.perimeters[a], sp.perimeters[b])
                coef = (1.0 - histogram_distance(flat_hists[pa], flat_hists[pb])) + conn
            else:
                coef = abs(node_m[pa] - node_m[pb])
            spatial.append((pa, pb, coef))

    temporal = []
    for f in range(len(sp_maps) - 1):
        flow = flows[f] if (config.temporal_flow_warp and flows is not None) else None
        overlaps = temporal_neighbors(sp_maps[f], sp_maps[f + 1], flow=flow)
        for (a, b), _count in sorted(overlaps.items()):
            pa, pb = offsets[f] + a, offsets[f + 1] + b
            if flat_hists is not None:
                coef = 1.0 - histogram_distance(flat_hists[pa], flat_hists[pb])
            else:
                coef = abs(node_m[pa] - node_m[pb])
            temporal.append((pa, pb, coef))

    return SpatioTemporalGraph(
        unary0=unary0,
        unary1=unary1,
        spatial_edges=np.asarray(spatial, dtype=np.float64).reshape(-1, 3),
        temporal_edges=np.asarray(temporal, dtype=np.float64).reshape(-1, 3),
        lambda1=config.lambda1,
        lambda2=config.lambda2,
        init_labels=init,
        node_frame=node_frame,
        node_local=node_local,
    )


def build_simplified_graph(
    sp_maps: list[SuperpixelMap],
    node_values: list[np.ndarray],
    init_masks: list[np.ndarray],
    config: RunConfig,
) -> SpatioTemporalGraph:
    """The reduced energy used by the encoding ablation: unaries come from
    the likelihood map alone and every pairwise coefficient is the absolute
    difference of the two node values."""
    return build_graph(sp_maps, node_values, init_masks, histograms=None, config=config)


def _index_nodes(sp_maps):
    offsets = []
    node_frame = []
    node_local = []
    total = 0
    for f, sp in enumerate(sp_maps):
        offsets.append(total)
        node_frame.extend([f] * sp.n_superpixels)
        node_local.extend(range(sp.n_superpixels))
        total += sp.n_superpixels
    return offsets, np.asarray(node_frame), np.asarray(node_local)


def labels_to_masks(
    graph: SpatioTemporalGraph, labels: np.ndarray, sp_maps: list[SuperpixelMap]
) -> list[np.ndarray]:
    """Rasterize per-node labels back to per-frame boolean masks."""
    masks = []
    cursor = 0
    for sp in sp_maps:
        node_lab = labels[cursor : cursor + sp.n_superpixels]
        masks.append(node_lab[sp.labels].astype(bool))
        cursor += sp.n_superpixels
    return masks
