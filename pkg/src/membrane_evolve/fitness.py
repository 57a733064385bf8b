"""Fitness bookkeeping plus the two evaluators.

The manual path mirrors the bench protocol: five peak retention forces per
gripper, fitness = their mean. The geometric proxy is a desk-scale
surrogate, clearly labeled as such in every output; it scores the same
three grip mechanisms the manual tests reward (surface contact, geometric
interlock, suction pocket) from the seated meridian geometry alone, with
no deformation model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .genome import Genome, to_profile
from .mesh import UnprintableDesignError, check_printable

DEFAULT_REPEATS = 5
CONTACT_BAND_MM = 2.0
POCKET_RADIUS_FRACTION = 0.4
_ARC_SAMPLES = 4096
_SEAT_STEP_MM = 0.05


class OverfullRecordError(ValueError):
    """A complete fitness record refused another repeat."""


class _Pending:
    __slots__ = ()

    def __repr__(self):
        return "PENDING"


PENDING = _Pending()


@dataclass(frozen=True)
class TargetObject:
    """What the gripper is lowered onto; size is the ball radius in mm."""

    shape: str = "ball"
    size: float = 25.0

    def __post_init__(self):
        if self.shape not in ("ball", "cube", "star", "coin"):
            raise ValueError(f"unknown target shape {self.shape!r}")
        if not self.size > 0:
            raise ValueError("target size must be positive")


@dataclass(frozen=True)
class ProxyWeights:
    contact_w: float = 1.0 / 3.0
    interlock_w: float = 1.0 / 3.0
    pocket_w: float = 1.0 / 3.0

    def __post_init__(self):
        ws = (self.contact_w, self.interlock_w, self.pocket_w)
        if any(not 0.0 <= w <= 1.0 for w in ws):
            raise ValueError(f"weights must lie in [0, 1], got {ws}")
        if abs(sum(ws) - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {sum(ws)}")


@dataclass(frozen=True)
class FitnessRecord:
    """Per-gripper force measurements in Newtons."""

    gripper_id: str
    repeats: tuple[float, ...] = ()
    required: int = DEFAULT_REPEATS

    def __post_init__(self):
        if self.required < 1:
            raise ValueError("required repeat count must be >= 1")
        for f in self.repeats:
            if not math.isfinite(f) or f < 0.0:
                raise ValueError(f"force must be finite and >= 0, got {f}")
        if len(self.repeats) > self.required:
            raise OverfullRecordError(
                f"{len(self.repeats)} repeats exceed the {self.required} required"
            )

    @property
    def complete(self) -> bool:
        return len(self.repeats) == self.required

    @property
    def mean(self) -> float | None:
        """Arithmetic mean force, only once the record is complete."""
        if not self.complete:
            return None
        return sum(self.repeats) / len(self.repeats)


def record_repeat(record: FitnessRecord, force: float) -> FitnessRecord:
    """Append one measured peak force; errors on overfull or negative."""
    if record.complete:
        raise OverfullRecordError(
            f"record for {record.gripper_id} already has {record.required} repeats"
        )
    if not math.isfinite(force) or force < 0.0:
        raise ValueError(f"force must be finite and >= 0, got {force}")
    return replace(record, repeats=record.repeats + (float(force),))


def _densify(points: np.ndarray, step: float) -> np.ndarray:
    """Resample a polyline so no segment exceeds ``step`` (vertices kept)."""
    out = [points[:1]]
    for a, b in zip(points[:-1], points[1:]):
        n = max(int(np.ceil(np.linalg.norm(b - a) / step)), 1)
        t = np.linspace(0.0, 1.0, n + 1)[1:, None]
        out.append(a + t * (b - a))
    return np.vstack(out)


def _min_distance_to_polyline(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Distance from each query point to the nearest polyline segment."""
    a = poly[None, :-1]
    ab = poly[None, 1:] - a
    ap = points[:, None] - a
    denom = np.maximum(np.einsum("psd,psd->ps", ab, ab), 1e-30)
    t = np.clip(np.einsum("psd,psd->ps", ap, ab) / denom, 0.0, 1.0)
    gap = ap - t[..., None] * ab
    return np.sqrt(np.einsum("psd,psd->ps", gap, gap).min(axis=1))


def seat_offset(profile: np.ndarray, radius: float) -> float:
    """Axial drop of the profile until it first touches the target ball.

    Ball circle centered at the origin of the meridian plane; contact is
    always on the upper half while descending, so the first touch is
    min(y - sqrt(radius^2 - x^2)) over the densified polyline.
    """
    pts = _densify(np.asarray(profile, dtype=float), _SEAT_STEP_MM)
    x, y = pts[:, 0], pts[:, 1]
    reach = x <= radius
    if not reach.any():
        raise ValueError("profile never crosses the target's radius")
    return float((y[reach] - np.sqrt(radius**2 - x[reach] ** 2)).min())


def proxy_components(
    profile: np.ndarray,
    target: TargetObject | None = None,
    band_mm: float = CONTACT_BAND_MM,
) -> tuple[float, float, float]:
    """(contact C, interlock I, pocket P), each in [0, 1].

    The profile is seated on the ball, then the ball's meridian
    half-circle is sampled at 4096 midpoint polar angles from the top
    pole. C = fraction of the upper quarter within the contact band
    (equals the upper-half fraction by mirror symmetry); I credits the
    largest contact angle beyond the equator; P measures the axial extent
    of the apex-adjacent region narrower than 0.4 ball radii.
    """
    if target is None:
        target = TargetObject()
    if target.shape != "ball":
        raise NotImplementedError(f"proxy supports ball targets, not {target.shape}")
    pts = np.asarray(profile, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise ValueError(f"profile must be (n>=2, 2), got {pts.shape}")
    rho = target.size

    seated = pts - np.array([0.0, seat_offset(pts, rho)])

    phi = (np.arange(_ARC_SAMPLES) + 0.5) * (np.pi / _ARC_SAMPLES)
    circle = rho * np.column_stack([np.sin(phi), np.cos(phi)])
    hits = _min_distance_to_polyline(circle, seated) <= band_mm

    upper = phi < np.pi / 2.0
    contact = float(hits[upper].mean())
    if hits.any():
        theta_max = float(phi[hits].max())
    else:
        theta_max = 0.0
    interlock = float(np.clip((theta_max - np.pi / 2.0) / (np.pi / 2.0), 0.0, 1.0))

    # Pocket: walk back from the apex while the profile stays inside the
    # 0.4*rho cylinder; interpolate the exact crossing for resample
    # stability.
    limit = POCKET_RADIUS_FRACTION * rho
    ys = [pts[-1, 1]]
    i = len(pts) - 2
    while i >= 0 and pts[i, 0] < limit:
        ys.append(pts[i, 1])
        i -= 1
    if i >= 0:
        a, b = pts[i], pts[i + 1]
        t = (limit - b[0]) / (a[0] - b[0])
        ys.append(float(b[1] + t * (a[1] - b[1])))
    pocket = float(np.clip((max(ys) - min(ys)) / rho, 0.0, 1.0))
    return contact, interlock, pocket


def proxy_fitness(
    profile: np.ndarray,
    target: TargetObject | None = None,
    weights: ProxyWeights | None = None,
    band_mm: float = CONTACT_BAND_MM,
) -> float:
    """Weighted sum of the three mechanism scores; always in [0, 1]."""
    if weights is None:
        weights = ProxyWeights()
    c, i, p = proxy_components(profile, target, band_mm)
    return weights.contact_w * c + weights.interlock_w * i + weights.pocket_w * p


class ManualEvaluator:
    """Bench-test bookkeeping: repeats trickle in, mean when complete."""

    def __init__(self, required: int = DEFAULT_REPEATS):
        if required < 1:
            raise ValueError("required repeat count must be >= 1")
        self.required = required
        self._records: dict[str, FitnessRecord] = {}

    def record(self, gripper_id: str) -> FitnessRecord:
        if gripper_id not in self._records:
            self._records[gripper_id] = FitnessRecord(gripper_id, required=self.required)
        return self._records[gripper_id]

    def record_repeat(self, gripper_id: str, force: float) -> FitnessRecord:
        updated = record_repeat(self.record(gripper_id), force)
        self._records[gripper_id] = updated
        return updated

    def evaluate(self, gripper_id: str):
        """Mean force once complete, else PENDING."""
        record = self.record(gripper_id)
        return record.mean if record.complete else PENDING


class ProxyEvaluator:
    """Deterministic surrogate: one synthetic measurement per design."""

    def __init__(
        self,
        target: TargetObject | None = None,
        weights: ProxyWeights | None = None,
        band_mm: float = CONTACT_BAND_MM,
        profile_samples: int = 128,
    ):
        self.target = target or TargetObject()
        self.weights = weights or ProxyWeights()
        self.band_mm = band_mm
        self.profile_samples = profile_samples

    def evaluate(self, genome: Genome) -> float:
        """Proxy score, or 0.0 for a design that cannot be printed."""
        try:
            check_printable(genome, self.profile_samples)
        except UnprintableDesignError:
            return 0.0
        profile = to_profile(genome, self.profile_samples)
        return proxy_fitness(profile, self.target, self.weights, self.band_mm)
