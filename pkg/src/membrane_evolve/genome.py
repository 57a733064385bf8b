"""Gripper membrane genomes.

A genome is a 2D Bezier control polygon plus two physical scalars. The two
anchor points (1, 0) and (0, 1) are fixed contacts with the base rim and
the central axis and are not part of the genome; only the interior control
points evolve. All values live in the printable envelope:

    base_radius  25..40 mm
    height       30..60 mm
    points       2..6 interior control points, components in [0, 1]

A genome is accepted only if the sampled curve of its full control polygon
is non-self-intersecting.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .curve import is_self_intersecting, sample_curve

RADIUS_BOUNDS = (25.0, 40.0)
HEIGHT_BOUNDS = (30.0, 60.0)
POINT_COUNT_BOUNDS = (2, 6)
COMPONENT_BOUNDS = (0.0, 1.0)
ANCHOR_BASE = (1.0, 0.0)
ANCHOR_AXIS = (0.0, 1.0)
INTERSECTION_SAMPLES = 128
FORMAT_VERSION = 1

_MAX_RANDOM_ATTEMPTS = 1000


class GenomeFormatError(ValueError):
    """Raised when a genome document cannot be parsed."""


class GenomeBoundsError(ValueError):
    """Raised when a genome field falls outside the printable envelope."""


class GenomeSamplingError(RuntimeError):
    """Raised when random initialization cannot find a simple curve."""


@dataclass(frozen=True)
class Genome:
    """Immutable membrane design: scalars in mm, points unitless."""

    base_radius: float
    height: float
    control_points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        lo, hi = RADIUS_BOUNDS
        if not (lo <= self.base_radius <= hi):
            raise GenomeBoundsError(
                f"base_radius {self.base_radius} outside [{lo}, {hi}] mm"
            )
        lo, hi = HEIGHT_BOUNDS
        if not (lo <= self.height <= hi):
            raise GenomeBoundsError(f"height {self.height} outside [{lo}, {hi}] mm")
        vlo, vhi = POINT_COUNT_BOUNDS
        if not (vlo <= len(self.control_points) <= vhi):
            raise GenomeBoundsError(
                f"{len(self.control_points)} control points outside [{vlo}, {vhi}]"
            )
        clo, chi = COMPONENT_BOUNDS
        for x, y in self.control_points:
            if not (clo <= x <= chi and clo <= y <= chi):
                raise GenomeBoundsError(f"control point ({x}, {y}) outside unit square")
        object.__setattr__(
            self,
            "control_points",
            tuple((float(x), float(y)) for x, y in self.control_points),
        )
        object.__setattr__(self, "base_radius", float(self.base_radius))
        object.__setattr__(self, "height", float(self.height))


def full_polygon(genome: Genome) -> np.ndarray:
    """Control polygon with the fixed anchors prepended/appended, shape (v+2, 2)."""
    return np.array([ANCHOR_BASE, *genome.control_points, ANCHOR_AXIS], dtype=float)


def curve_is_simple(genome: Genome, samples: int = INTERSECTION_SAMPLES) -> bool:
    """True iff the sampled Bezier polyline does not self-intersect."""
    return not is_self_intersecting(sample_curve(full_polygon(genome), samples))


def random_genome(rng: np.random.Generator, samples: int = INTERSECTION_SAMPLES) -> Genome:
    """Draw a uniform random genome, redrawing until the curve is simple.

    Draw order per attempt: base_radius, height, point count, then point
    components row by row. Raises GenomeSamplingError after 1000 attempts.
    """
    for _ in range(_MAX_RANDOM_ATTEMPTS):
        base_radius = float(rng.uniform(*RADIUS_BOUNDS))
        height = float(rng.uniform(*HEIGHT_BOUNDS))
        count = int(rng.integers(POINT_COUNT_BOUNDS[0], POINT_COUNT_BOUNDS[1] + 1))
        pts = rng.random((count, 2))
        genome = Genome(base_radius, height, tuple(map(tuple, pts.tolist())))
        if curve_is_simple(genome, samples):
            return genome
    raise GenomeSamplingError(
        f"no simple curve found in {_MAX_RANDOM_ATTEMPTS} attempts"
    )


def random_control_points(
    rng: np.random.Generator, samples: int = INTERSECTION_SAMPLES
) -> tuple[tuple[float, float], ...]:
    """Fresh random interior points forming a simple curve (used as a repair)."""
    for _ in range(_MAX_RANDOM_ATTEMPTS):
        count = int(rng.integers(POINT_COUNT_BOUNDS[0], POINT_COUNT_BOUNDS[1] + 1))
        pts = tuple(map(tuple, rng.random((count, 2)).tolist()))
        poly = np.array([ANCHOR_BASE, *pts, ANCHOR_AXIS], dtype=float)
        if not is_self_intersecting(sample_curve(poly, samples)):
            return pts
    raise GenomeSamplingError(
        f"no simple control polygon found in {_MAX_RANDOM_ATTEMPTS} attempts"
    )


def to_profile(genome: Genome, samples: int = 128) -> np.ndarray:
    """Sampled meridian profile in mm, shape (samples+1, 2) = (radial, axial).

    Row 0 is the base contact (base_radius, 0), row -1 the apex (0, height).
    """
    if samples < 16:
        raise ValueError(f"profile needs at least 16 segments, got {samples}")
    unit = sample_curve(full_polygon(genome), samples)
    return unit * np.array([genome.base_radius, genome.height])


def genome_to_dict(genome: Genome) -> dict:
    """Plain-dict form used in documents and journal events."""
    return {
        "format_version": FORMAT_VERSION,
        "base_radius_mm": genome.base_radius,
        "height_mm": genome.height,
        "control_points": [[x, y] for x, y in genome.control_points],
    }


def genome_from_dict(doc: dict) -> Genome:
    if not isinstance(doc, dict):
        raise GenomeFormatError(f"expected a mapping, got {type(doc).__name__}")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise GenomeFormatError(f"unsupported format_version {version!r}")
    try:
        base_radius = float(doc["base_radius_mm"])
        height = float(doc["height_mm"])
        raw_points = doc["control_points"]
        points = tuple((float(p[0]), float(p[1])) for p in raw_points)
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise GenomeFormatError(f"malformed genome document: {exc}") from exc
    return Genome(base_radius, height, points)


def serialize(genome: Genome) -> str:
    """Versioned, diff-friendly text form (one JSON document, 2-space indent)."""
    return json.dumps(genome_to_dict(genome), indent=2) + "\n"


def deserialize(text: str) -> Genome:
    """Parse ``serialize`` output. Raises GenomeFormatError / GenomeBoundsError."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GenomeFormatError(f"invalid genome document: {exc}") from exc
    return genome_from_dict(doc)


def genome_id(genome: Genome) -> str:
    """Stable 12-hex content id of the canonical serialized form."""
    canonical = json.dumps(genome_to_dict(genome), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]
