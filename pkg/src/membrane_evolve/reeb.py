"""Multiresolution shape descriptors along the gripper axis.

The scalar field is the axial coordinate normalized to [0, 1] (revolved
grippers carry a canonical axis, so this replaces heavier geodesic-based
fields while keeping the construction deterministic and cheap). Level l
splits the range into 2^l equal intervals; connected surface pieces per
interval become nodes carrying their share of surface area and interval
width. Similarity between two graphs is a greedy coarse-to-fine matching
whose score lands in [0, 1] with self-similarity exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .mesh import (
    BASE_THICKNESS,
    MERGE_EPS,
    MeshError,
    PORT_RADIUS,
    TriangleMesh,
    _oriented_positive,
    revolve,
    triangle_areas,
)

DEFAULT_RESOLUTIONS = 4
DEFAULT_MATCH_WEIGHT = 0.5


@dataclass(frozen=True)
class MRGNode:
    """One connected surface piece within one interval of one level."""

    index: int
    level: int
    interval: int
    area: float
    span: float
    parent: int | None
    children: tuple[int, ...]
    adjacent: tuple[int, ...]


@dataclass(frozen=True)
class MRGraph:
    resolutions: int
    nodes: tuple[MRGNode, ...]

    def level_nodes(self, level: int) -> tuple[MRGNode, ...]:
        return tuple(n for n in self.nodes if n.level == level)


def _edge_table(triangles: np.ndarray):
    """Unique undirected edges and their two owner triangles (watertight)."""
    directed = triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
    owner = np.repeat(np.arange(len(triangles)), 3)
    und = np.sort(directed, axis=1)
    # Scalar edge keys: np.unique(axis=0) lexsorts void records, ~20x slower.
    # Key order equals lexicographic row order, so inverse/counts are the same.
    stride = np.int64(und.max()) + 1
    keys = und[:, 0].astype(np.int64) * stride + und[:, 1]
    uniq_keys, inverse, counts = np.unique(
        keys, return_inverse=True, return_counts=True
    )
    if (counts != 2).any():
        raise MeshError("multiresolution graph requires a watertight mesh")
    order = np.argsort(inverse, kind="stable")
    owners = owner[order].reshape(-1, 2)
    uniq = np.column_stack([uniq_keys // stride, uniq_keys % stride])
    return uniq, owners[:, 0], owners[:, 1]


def _fine_slab_areas(tz: np.ndarray, areas: np.ndarray, bounds: np.ndarray):
    """Exact area of each triangle inside each finest slab.

    Area-below-z of a triangle is piecewise quadratic between its sorted
    vertex heights; slab areas are differences at the slab bounds.
    Horizontal triangles are step functions and are assigned wholly to the
    slab containing their height (half-open intervals, last one closed).
    """
    z0, z1, z2 = tz[:, 0:1], tz[:, 1:2], tz[:, 2:3]
    a = areas[:, None]
    zz = bounds[None, :]
    d20 = z2 - z0
    d10 = z1 - z0
    d21 = z2 - z1
    with np.errstate(divide="ignore", invalid="ignore"):
        low = a * (zz - z0) ** 2 / (d10 * d20)
        high = a - a * (z2 - zz) ** 2 / (d21 * d20)
    cum = np.zeros((len(tz), len(bounds)))
    in_low = (zz > z0) & (zz <= z1)
    in_high = (zz > z1) & (zz < z2)
    np.copyto(cum, low, where=in_low)
    np.copyto(cum, high, where=in_high)
    np.copyto(cum, np.broadcast_to(a, cum.shape), where=zz >= z2)

    fine = np.diff(cum, axis=1)
    flat = (d20 == 0.0)[:, 0]
    if flat.any():
        fine[flat] = 0.0
        k = len(bounds) - 1
        span = bounds[-1] - bounds[0]
        idx = np.clip(
            ((tz[flat, 0] - bounds[0]) / span * k).astype(int), 0, k - 1
        )
        fine[np.nonzero(flat)[0], idx] = areas[flat]
    return fine


def build_mrg(mesh: TriangleMesh, resolutions: int = DEFAULT_RESOLUTIONS) -> MRGraph:
    """Nodes per (level, interval, connected piece), with parent links.

    Two triangles are joined within an interval when both have area there
    and their shared edge passes through it with positive length.
    """
    if resolutions < 1:
        raise ValueError("resolutions must be >= 1")
    tris = np.asarray(mesh.triangles)
    verts = np.asarray(mesh.vertices, dtype=float)
    if tris.ndim != 2 or tris.shape[1] != 3 or len(tris) == 0:
        raise MeshError("mesh has no triangles")
    edges, e_t1, e_t2 = _edge_table(tris)

    z = verts[:, 2]
    tz = np.sort(z[tris], axis=1)
    areas = triangle_areas(mesh)
    total = float(areas.sum())
    if total <= 0.0:
        raise MeshError("mesh has no surface area")
    zmin, zmax = float(tz.min()), float(tz.max())
    if zmax - zmin <= 0.0:
        raise MeshError("mesh is flat along the axis; field is degenerate")

    n_fine = 2 ** (resolutions - 1)
    bounds = zmin + (zmax - zmin) * np.arange(n_fine + 1) / n_fine
    bounds[-1] = zmax
    fine = _fine_slab_areas(tz, areas, bounds)

    ez = z[edges]
    e_lo, e_hi = ez.min(axis=1), ez.max(axis=1)
    e_flat = e_lo == e_hi

    n_tris = len(tris)
    nodes: list[dict] = []
    # per (level, interval): triangle -> node index, -1 outside
    node_of: dict[tuple[int, int], np.ndarray] = {}

    for level in range(resolutions):
        width = n_fine >> level
        slabs = fine.reshape(n_tris, 2**level, width).sum(axis=2)
        for k in range(2**level):
            lo, hi = bounds[k * width], bounds[(k + 1) * width]
            member = slabs[:, k] > 0.0
            cand = member[e_t1] & member[e_t2]
            through = np.where(
                e_flat,
                (e_lo >= lo) & (e_lo <= hi),
                np.minimum(e_hi, hi) - np.maximum(e_lo, lo) > 0.0,
            )
            glue = cand & through
            graph = coo_matrix(
                (np.ones(glue.sum()), (e_t1[glue], e_t2[glue])),
                shape=(n_tris, n_tris),
            )
            _, labels = connected_components(graph, directed=False)

            mapping = np.full(n_tris, -1, dtype=int)
            member_idx = np.nonzero(member)[0]
            comp_rep: dict[int, int] = {}
            for t in member_idx:
                comp_rep.setdefault(labels[t], int(t))
            for label, rep in sorted(comp_rep.items(), key=lambda kv: kv[1]):
                sel = member & (labels == label)
                parent = None
                if level > 0:
                    parent = int(node_of[(level - 1, k // 2)][rep])
                idx = len(nodes)
                nodes.append(
                    {
                        "index": idx,
                        "level": level,
                        "interval": k,
                        "area": float(slabs[sel, k].sum()) / total,
                        "span": 1.0 / 2**level,
                        "parent": parent,
                        "children": [],
                        "adjacent": set(),
                    }
                )
                mapping[sel] = idx
            node_of[(level, k)] = mapping

    for node in nodes:
        if node["parent"] is not None:
            nodes[node["parent"]]["children"].append(node["index"])

    # Same-level adjacency: consecutive intervals that share a triangle or
    # touch through an edge lying exactly on their common bound.
    for level in range(resolutions):
        for k in range(2**level - 1):
            a_map, b_map = node_of[(level, k)], node_of[(level, k + 1)]
            shared = (a_map >= 0) & (b_map >= 0)
            pairs = set(zip(a_map[shared].tolist(), b_map[shared].tolist()))
            width = n_fine >> level
            cut = bounds[(k + 1) * width]
            on_cut = e_flat & (e_lo == cut)
            for t1, t2 in zip(e_t1[on_cut], e_t2[on_cut]):
                left = a_map[t1] if a_map[t1] >= 0 else a_map[t2]
                right = b_map[t2] if b_map[t2] >= 0 else b_map[t1]
                if left >= 0 and right >= 0:
                    pairs.add((int(left), int(right)))
            for na, nb in pairs:
                nodes[na]["adjacent"].add(nb)
                nodes[nb]["adjacent"].add(na)

    return MRGraph(
        resolutions=resolutions,
        nodes=tuple(
            MRGNode(
                index=n["index"],
                level=n["level"],
                interval=n["interval"],
                area=n["area"],
                span=n["span"],
                parent=n["parent"],
                children=tuple(n["children"]),
                adjacent=tuple(sorted(n["adjacent"])),
            )
            for n in nodes
        ),
    )


def _finest_span_norm(graph: MRGraph) -> dict[int, float]:
    finest = graph.level_nodes(graph.resolutions - 1)
    total = sum(n.span for n in finest)
    return {n.index: n.span / total for n in finest}


def similarity(
    a: MRGraph, b: MRGraph, weight: float = DEFAULT_MATCH_WEIGHT
) -> float:
    """Greedy coarse-to-fine matching score in [0, 1].

    Candidate pairs start all-to-all at level 0; at finer levels only
    children of matched pairs are eligible. Pairs are taken largest
    shared-area first (ties resolved by the symmetric index pair), each
    node matched at most once. Only finest-level matches score:
    w*min(area) + (1-w)*min(span-hat), with span-hat normalized per graph
    so that similarity(X, X) = 1.
    """
    if a.resolutions != b.resolutions:
        raise ValueError(
            f"resolution mismatch: {a.resolutions} != {b.resolutions}"
        )
    if not 0.0 <= weight <= 1.0:
        raise ValueError("weight must lie in [0, 1]")
    lhat_a, lhat_b = _finest_span_norm(a), _finest_span_norm(b)

    candidates = [(m.index, n.index) for m in a.level_nodes(0) for n in b.level_nodes(0)]
    score = 0.0
    for level in range(a.resolutions):
        ranked = sorted(
            candidates,
            key=lambda mn: (
                -min(a.nodes[mn[0]].area, b.nodes[mn[1]].area),
                -max(a.nodes[mn[0]].area, b.nodes[mn[1]].area),
                min(mn),
                max(mn),
            ),
        )
        taken_a: set[int] = set()
        taken_b: set[int] = set()
        matched = []
        for m, n in ranked:
            if m in taken_a or n in taken_b:
                continue
            taken_a.add(m)
            taken_b.add(n)
            matched.append((m, n))
        if level == a.resolutions - 1:
            for m, n in matched:
                score += weight * min(a.nodes[m].area, b.nodes[n].area)
                score += (1.0 - weight) * min(lhat_a[m], lhat_b[n])
        else:
            candidates = [
                (cm, cn)
                for m, n in matched
                for cm in a.nodes[m].children
                for cn in b.nodes[n].children
            ]
    return float(min(score, 1.0))


def reference_bag(
    radius: float = 25.0,
    base_radius: float = 30.0,
    arc_segments: int = 256,
    angular_segments: int = 64,
) -> TriangleMesh:
    """The canonical bag silhouette: truncated sphere on a mounting plate.

    The sphere is cut where its cross-section equals the port radius; the
    cut circle sits at the plate's bottom plane, so the bag threads the
    mount hole and fuses with the plate in one simple revolved polygon.
    """
    if radius <= PORT_RADIUS + 1e-6:
        raise ValueError(f"bag radius {radius} must exceed the port radius")
    drop = float(np.sqrt(radius**2 - PORT_RADIUS**2))
    center = drop - BASE_THICKNESS
    top_x = float(np.sqrt(radius**2 - center**2)) if abs(center) < radius else 0.0
    if base_radius <= top_x + 1e-6:
        raise ValueError(
            f"base_radius {base_radius} must clear the bag waist {top_x:.2f}"
        )

    phi_end = np.pi - np.arcsin(PORT_RADIUS / radius)
    phi = np.linspace(0.0, phi_end, arc_segments + 1)
    arc = np.column_stack([radius * np.sin(phi), center + radius * np.cos(phi)])
    above = arc[arc[:, 1] > 0.0]
    while len(above) and np.linalg.norm(above[-1] - [top_x, 0.0]) < MERGE_EPS:
        above = above[:-1]
    profile = np.vstack(
        [
            above,
            [[top_x, 0.0]],
            [[base_radius, 0.0]],
            [[base_radius, -BASE_THICKNESS]],
            [[0.0, -BASE_THICKNESS]],
        ]
    )
    return _oriented_positive(revolve(profile, angular_segments))
