"""Printable gripper solids as indexed triangle meshes.

Grippers are solids of revolution. A membrane profile runs in the meridian
plane from the base contact (r, 0) to the apex (0, h); ``shell`` thickens
it into a closed 1 mm wall, ``make_base`` builds the mounting ring (outer
radius r, vacuum port radius 15 mm, 1 mm thick, occupying z in [-1, 0]),
and ``assemble`` fuses membrane and base into a single genus-0 solid by
revolving one combined cross-section polygon.

Axis convention: revolution around +z, profile coordinates are
(radial, axial). Closed solids are oriented outward (positive signed
volume); ``revolve`` of an ascending open profile has outward (+radial)
normals.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .curve import is_self_intersecting
from .genome import Genome, to_profile

WALL_THICKNESS = 1.0
BASE_THICKNESS = 1.0
PORT_RADIUS = 15.0
POLE_SNAP = 1e-6
MERGE_EPS = 1e-3
DEFAULT_ANGULAR_SEGMENTS = 64

_STL_RECORD = np.dtype(
    [("normal", "<f4", (3,)), ("verts", "<f4", (3, 3)), ("attr", "<u2")]
)


class MeshError(Exception):
    """Invalid geometry handed to a mesh builder."""


class OffsetCollisionError(MeshError):
    """Wall thickness exceeds the local feature size of the profile."""


class UnprintableDesignError(MeshError):
    """Genome cannot be realized as a watertight printable solid."""


@dataclass(frozen=True)
class TriangleMesh:
    """Indexed triangle soup: vertices (V, 3) float64, triangles (T, 3) int."""

    vertices: np.ndarray
    triangles: np.ndarray


@dataclass(frozen=True)
class GripperSolid:
    """Assembled gripper: membrane shell, base ring, and the fused solid."""

    membrane: TriangleMesh
    base: TriangleMesh
    combined: TriangleMesh


@dataclass(frozen=True)
class MeshReport:
    vertex_count: int
    triangle_count: int
    watertight: bool
    oriented: bool
    boundary_edges: int
    degenerate_triangles: int
    euler_characteristic: int
    volume: float
    area: float
    bbox_min: tuple[float, float, float]
    bbox_max: tuple[float, float, float]

    @property
    def is_solid(self) -> bool:
        return (
            self.watertight
            and self.oriented
            and self.degenerate_triangles == 0
            and self.volume > 0.0
        )


def _clean_profile(profile: np.ndarray, close_profile: bool) -> np.ndarray:
    pts = np.array(profile, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise MeshError(f"profile must be (n>=2, 2), got {pts.shape}")
    if not np.isfinite(pts).all():
        raise MeshError("profile contains non-finite coordinates")
    if (pts[:, 0] < -POLE_SNAP).any():
        raise MeshError("profile has a negative radial coordinate")
    pts[np.abs(pts[:, 0]) < POLE_SNAP, 0] = 0.0
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.linalg.norm(np.diff(pts, axis=0), axis=1) > 1e-9
    pts = pts[keep]
    if close_profile and len(pts) > 2 and np.linalg.norm(pts[0] - pts[-1]) <= 1e-9:
        pts = pts[:-1]
    if len(pts) < 2:
        raise MeshError("profile collapsed to fewer than 2 distinct points")
    return pts


def revolve(
    profile: np.ndarray,
    angular_segments: int = DEFAULT_ANGULAR_SEGMENTS,
    close_profile: bool = False,
) -> TriangleMesh:
    """Revolve a meridian profile 360 degrees around the z axis.

    Profile points within 1e-6 mm of the axis collapse to single pole
    vertices (triangle fans instead of quad rings). The result is an open
    surface unless the profile starts and ends on the axis (or is a closed
    loop with ``close_profile=True``).
    """
    if angular_segments < 3:
        raise MeshError(f"angular_segments must be >= 3, got {angular_segments}")
    pts = _clean_profile(profile, close_profile)
    radial, axial = pts[:, 0], pts[:, 1]
    s = angular_segments
    theta = np.linspace(0.0, 2.0 * np.pi, s, endpoint=False)
    cos_t, sin_t = np.cos(theta), np.sin(theta)

    vertices: list[np.ndarray] = []
    start_index = np.empty(len(pts), dtype=int)
    is_pole = radial == 0.0
    cursor = 0
    for k in range(len(pts)):
        start_index[k] = cursor
        if is_pole[k]:
            vertices.append(np.array([[0.0, 0.0, axial[k]]]))
            cursor += 1
        else:
            ring = np.column_stack(
                [radial[k] * cos_t, radial[k] * sin_t, np.full(s, axial[k])]
            )
            vertices.append(ring)
            cursor += s

    def ring_idx(k: int) -> np.ndarray:
        return start_index[k] + np.arange(s)

    bands = [(k, k + 1) for k in range(len(pts) - 1)]
    if close_profile:
        bands.append((len(pts) - 1, 0))

    tris: list[np.ndarray] = []
    jj = np.arange(s)
    nj = (jj + 1) % s
    for a, b in bands:
        if is_pole[a] and is_pole[b]:
            raise MeshError("profile band joins two axis points")
        if is_pole[a]:
            p = start_index[a]
            rb = ring_idx(b)
            tris.append(np.column_stack([np.full(s, p), rb[nj], rb[jj]]))
        elif is_pole[b]:
            p = start_index[b]
            ra = ring_idx(a)
            tris.append(np.column_stack([ra[jj], ra[nj], np.full(s, p)]))
        else:
            ra, rb = ring_idx(a), ring_idx(b)
            tris.append(np.column_stack([ra[jj], ra[nj], rb[nj]]))
            tris.append(np.column_stack([ra[jj], rb[nj], rb[jj]]))

    return TriangleMesh(
        vertices=np.vstack(vertices), triangles=np.vstack(tris).astype(np.int32)
    )


def triangle_areas(mesh: TriangleMesh) -> np.ndarray:
    v = mesh.vertices[mesh.triangles]
    cross = np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
    return 0.5 * np.linalg.norm(cross, axis=1)


def mesh_area(mesh: TriangleMesh) -> float:
    return float(triangle_areas(mesh).sum())


def mesh_volume(mesh: TriangleMesh) -> float:
    """Signed volume by the divergence theorem; positive = outward."""
    v = mesh.vertices[mesh.triangles]
    return float(
        np.einsum("ij,ij->i", v[:, 0], np.cross(v[:, 1], v[:, 2])).sum() / 6.0
    )


def _oriented_positive(mesh: TriangleMesh) -> TriangleMesh:
    if mesh_volume(mesh) < 0.0:
        return TriangleMesh(mesh.vertices, mesh.triangles[:, ::-1].copy())
    return mesh


def validate_mesh(mesh: TriangleMesh) -> MeshReport:
    """Audit edges, orientation, degeneracy and closedness."""
    tris = np.asarray(mesh.triangles)
    if tris.ndim != 2 or tris.shape[1] != 3 or len(tris) == 0:
        raise MeshError("mesh has no triangles")
    directed = tris[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
    undirected = np.sort(directed, axis=1)
    # Scalar edge keys: np.unique(axis=0) lexsorts void records, ~20x slower.
    stride = np.int64(directed.max()) + 1
    _, und_counts = np.unique(
        undirected[:, 0].astype(np.int64) * stride + undirected[:, 1],
        return_counts=True,
    )
    _, dir_counts = np.unique(
        directed[:, 0].astype(np.int64) * stride + directed[:, 1],
        return_counts=True,
    )
    watertight = bool((und_counts == 2).all())
    oriented = bool((dir_counts == 1).all())
    boundary = int((und_counts == 1).sum())
    areas = triangle_areas(mesh)
    degenerate = int((areas <= 1e-9).sum())
    referenced = np.unique(tris)
    euler = int(len(referenced) - len(und_counts) + len(tris))
    vol = mesh_volume(mesh) if watertight and oriented else float("nan")
    vb = mesh.vertices[referenced]
    return MeshReport(
        vertex_count=int(len(mesh.vertices)),
        triangle_count=int(len(tris)),
        watertight=watertight,
        oriented=oriented,
        boundary_edges=boundary,
        degenerate_triangles=degenerate,
        euler_characteristic=euler,
        volume=vol,
        area=float(areas.sum()),
        bbox_min=tuple(vb.min(axis=0).tolist()),
        bbox_max=tuple(vb.max(axis=0).tolist()),
    )


def _offset_inner_profile(profile: np.ndarray, thickness: float) -> np.ndarray:
    """Inward 2D offset of a base-to-apex membrane profile.

    The base endpoint slides along z=0 so the rim stays in the base plane.
    Interior points take miter offsets (factor capped at 3x thickness, the
    usual stroke miter limit). The offset chain is cut where it first
    reaches the revolution axis: that crossing is the apex of the parallel
    inner surface, and a revolved profile cannot carry negative radii. A
    chain that never reaches the axis is closed with the parallel-cone apex
    t * |d| / d_radial below the outer apex. A self-intersecting offset
    means the wall does not fit the local feature and raises
    OffsetCollisionError.
    """
    pts = _clean_profile(profile, close_profile=False)
    if len(pts) < 3:
        raise OffsetCollisionError("profile too short to shell")
    if pts[0, 0] <= 0.0 or abs(pts[0, 1]) > 1e-9:
        raise MeshError("membrane profile must start on the base plane (r, 0)")
    if pts[-1, 0] != 0.0:
        raise MeshError("membrane profile must end on the axis (0, h)")

    d = np.diff(pts, axis=0)
    lengths = np.linalg.norm(d, axis=1)
    tangents = d / lengths[:, None]
    # Inward normal: rotate the tangent -90 deg; for a curve climbing from
    # the outer base toward the axis this points into the enclosed volume.
    normals = np.column_stack([-tangents[:, 1], tangents[:, 0]])

    dy0 = tangents[0, 1]
    if dy0 <= 1e-9:
        raise OffsetCollisionError(
            "profile leaves the base plane horizontally; rim cannot be shelled"
        )
    chain = []
    for k in range(1, len(pts) - 1):
        miter = normals[k - 1] + normals[k]
        norm = np.linalg.norm(miter)
        if norm < 1e-9:
            # Full reversal; offset along the incoming normal and let the
            # self-intersection gate judge the neighborhood.
            miter, cos_half = normals[k - 1], 1.0
        else:
            miter = miter / norm
            cos_half = max(float(miter @ normals[k]), 1.0 / 3.0)
        chain.append(pts[k] + miter * (thickness / cos_half))

    # Rim endpoint: the chain enters through the base plane. Offsets of a
    # shallow launch start below z=0 and are cut at the z=0 crossing; a
    # chain that starts above it is extended back along the first offset
    # direction, which for a straight launch lands the rim at
    # (r - t / sin(launch angle), 0).
    start = 0
    while start < len(chain) and chain[start][1] <= 0.0:
        start += 1
    if start == len(chain):
        raise OffsetCollisionError("inner wall never rises above the base plane")
    if start > 0:
        lo, hi = chain[start - 1], chain[start]
        frac = -lo[1] / (hi[1] - lo[1])
        rim = np.array([float(lo[0] + frac * (hi[0] - lo[0])), 0.0])
    else:
        rim = np.array([pts[0, 0] - thickness / dy0, 0.0])
    chain = [rim] + chain[start:]

    # Cut at the first axis crossing, else close with the parallel-cone
    # apex. Sub-micron radii count as on-axis so the cut point stays the
    # only pole of the chain.
    inner = [chain[0]]
    closed_on_axis = False
    for k in range(1, len(chain)):
        prev, cur = inner[-1], chain[k]
        if cur[0] > MERGE_EPS:
            inner.append(cur)
            continue
        span = prev[0] - cur[0]
        frac = prev[0] / span if span > 0 else 0.0
        inner.append(np.array([0.0, float(prev[1] + frac * (cur[1] - prev[1]))]))
        closed_on_axis = True
        break
    if not closed_on_axis:
        approach = -tangents[-1, 0]
        if approach <= 1e-9:
            raise OffsetCollisionError(
                "profile meets the axis vertically; apex cannot be shelled"
            )
        inner.append(np.array([0.0, pts[-1, 1] - thickness / approach]))

    # Interior points within a micron of either endpoint would revolve
    # into sliver triangles; merge them into the endpoint.
    while len(inner) > 2 and np.linalg.norm(inner[-2] - inner[-1]) < MERGE_EPS:
        del inner[-2]
    while len(inner) > 2 and np.linalg.norm(inner[1] - inner[0]) < MERGE_EPS:
        del inner[1]

    inner_pts = np.array(inner)
    if len(inner_pts) < 2 or inner_pts[0, 0] <= 0.0:
        raise OffsetCollisionError("rim width is not positive")
    if is_self_intersecting(inner_pts):
        raise OffsetCollisionError("inner wall self-intersects")
    return inner_pts


def _membrane_cross_section(
    profile: np.ndarray, thickness: float
) -> tuple[np.ndarray, np.ndarray]:
    outer = _clean_profile(profile, close_profile=False)
    if is_self_intersecting(outer):
        raise MeshError("membrane profile self-intersects")
    inner = _offset_inner_profile(outer, thickness)
    if outer[0, 0] - inner[0, 0] < 1e-6:
        raise OffsetCollisionError("rim width is not positive")
    return outer, inner


def shell(
    profile: np.ndarray,
    thickness: float = WALL_THICKNESS,
    angular_segments: int = DEFAULT_ANGULAR_SEGMENTS,
) -> TriangleMesh:
    """Closed membrane solid: outer surface, inward offset wall, rim ring."""
    if thickness <= 0.0:
        raise MeshError("thickness must be positive")
    outer, inner = _membrane_cross_section(profile, thickness)
    loop = np.vstack([outer[::-1], inner])
    if is_self_intersecting(loop, closed=True):
        raise OffsetCollisionError("membrane cross-section is not a simple polygon")
    return _oriented_positive(revolve(loop, angular_segments))


def make_base(
    base_radius: float, angular_segments: int = DEFAULT_ANGULAR_SEGMENTS
) -> TriangleMesh:
    """Mounting ring: outer radius ``base_radius``, port radius 15, 1 mm thick."""
    if base_radius <= PORT_RADIUS + 1e-6:
        raise MeshError(
            f"base_radius {base_radius} must exceed the port radius {PORT_RADIUS}"
        )
    rect = np.array(
        [
            [PORT_RADIUS, -BASE_THICKNESS],
            [base_radius, -BASE_THICKNESS],
            [base_radius, 0.0],
            [PORT_RADIUS, 0.0],
        ]
    )
    return _oriented_positive(revolve(rect, angular_segments, close_profile=True))


def _gripper_loops(
    genome: Genome, profile_samples: int = 128
) -> tuple[np.ndarray, np.ndarray]:
    """Membrane and combined cross-section polygons, fully validity-checked.

    Everything that can make a design unprintable is 2D and decided here;
    revolving afterwards cannot fail. Raises UnprintableDesignError.
    """
    profile = to_profile(genome, profile_samples)
    try:
        outer, inner = _membrane_cross_section(profile, WALL_THICKNESS)
        if inner[0, 0] <= PORT_RADIUS + 1e-6:
            raise OffsetCollisionError("membrane rim reaches the vacuum port")
        membrane_loop = np.vstack([outer[::-1], inner])
        if is_self_intersecting(membrane_loop, closed=True):
            raise OffsetCollisionError(
                "membrane cross-section is not a simple polygon"
            )
        combined_loop = np.vstack(
            [
                outer[::-1],
                [
                    [outer[0, 0], -BASE_THICKNESS],
                    [PORT_RADIUS, -BASE_THICKNESS],
                    [PORT_RADIUS, 0.0],
                ],
                inner,
            ]
        )
        if is_self_intersecting(combined_loop, closed=True):
            raise OffsetCollisionError(
                "assembled cross-section is not a simple polygon"
            )
    except MeshError as exc:
        raise UnprintableDesignError(f"unprintable design: {exc}") from exc
    return membrane_loop, combined_loop


def check_printable(genome: Genome, profile_samples: int = 128) -> None:
    """Run every validity gate without building meshes.

    Same rejections as assemble (they share the cross-section pipeline);
    raises UnprintableDesignError on failure.
    """
    _gripper_loops(genome, profile_samples)


def assemble(
    genome: Genome,
    profile_samples: int = 128,
    angular_segments: int = DEFAULT_ANGULAR_SEGMENTS,
) -> GripperSolid:
    """Build the printable gripper for a genome.

    The combined solid is one revolved cross-section so the membrane and
    base fuse into a single watertight genus-0 surface. Any shelling
    failure surfaces as UnprintableDesignError.
    """
    membrane_loop, combined_loop = _gripper_loops(genome, profile_samples)
    membrane = _oriented_positive(revolve(membrane_loop, angular_segments))
    base = make_base(genome.base_radius, angular_segments)
    combined = _oriented_positive(revolve(combined_loop, angular_segments))
    return GripperSolid(membrane=membrane, base=base, combined=combined)


def export_stl(
    mesh: TriangleMesh,
    destination: str | Path | None = None,
    label: str = "membrane-evolve",
) -> bytes:
    """Serialize to binary STL (80-byte header, u32 count, 50-byte records).

    The header carries ``label`` space-padded; binary files must not start
    with the ASCII marker "solid". Normals are recomputed from the winding.
    """
    v = mesh.vertices[mesh.triangles].astype(np.float64)
    cross = np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
    norms = np.linalg.norm(cross, axis=1)
    unit = np.divide(
        cross, norms[:, None], out=np.zeros_like(cross), where=norms[:, None] > 0
    )
    records = np.zeros(len(v), dtype=_STL_RECORD)
    records["normal"] = unit.astype(np.float32)
    records["verts"] = v.astype(np.float32)

    header = label.encode("ascii", "replace")[:80]
    if header.startswith(b"solid"):
        header = b"bin_" + header[4:]
    blob = header.ljust(80, b" ") + struct.pack("<I", len(v)) + records.tobytes()
    if destination is not None:
        Path(destination).write_bytes(blob)
    return blob


def read_stl(source: str | Path | bytes) -> TriangleMesh:
    """Parse a binary STL and weld exactly-equal vertices."""
    blob = source if isinstance(source, bytes) else Path(source).read_bytes()
    if len(blob) < 84:
        raise MeshError(f"not a binary STL: only {len(blob)} bytes")
    if blob[:5] == b"solid" and b"facet" in blob[:400]:
        raise MeshError("ASCII STL is not supported")
    (count,) = struct.unpack_from("<I", blob, 80)
    expected = 84 + 50 * count
    if len(blob) != expected:
        raise MeshError(f"binary STL size mismatch: {len(blob)} != {expected}")
    records = np.frombuffer(blob, dtype=_STL_RECORD, count=count, offset=84)
    corners = records["verts"].reshape(-1, 3).astype(np.float64)
    vertices, inverse = np.unique(corners, axis=0, return_inverse=True)
    triangles = inverse.reshape(-1, 3).astype(np.int32)
    return TriangleMesh(vertices=vertices, triangles=triangles)
