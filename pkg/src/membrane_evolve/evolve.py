"""Genetic operators over membrane genomes.

All randomness flows through a caller-owned numpy Generator so that whole
runs replay bit-identically from a seed. Every operator documents its draw
order; changing it is a breaking change for journaled campaigns.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .genome import (
    COMPONENT_BOUNDS,
    HEIGHT_BOUNDS,
    POINT_COUNT_BOUNDS,
    RADIUS_BOUNDS,
    Genome,
    curve_is_simple,
    random_control_points,
    random_genome,
)

_SIMPLE_CURVE_RETRIES = 100


@dataclass(frozen=True)
class GAConfig:
    """Knobs of the evolutionary loop; defaults are the standard run."""

    population_size: int = 5
    max_generations: int = 15
    crossover_prob: float = 0.8
    allele_mutation_prob: float = 0.2
    structural_mutation_prob: float = 0.25
    mutation_sigma_fraction: float = 0.10
    seed: int | None = None

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.max_generations < 1:
            raise ValueError("max_generations must be >= 1")
        for name in (
            "crossover_prob",
            "allele_mutation_prob",
            "structural_mutation_prob",
            "mutation_sigma_fraction",
        ):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")

    @classmethod
    def from_dict(cls, data: dict) -> "GAConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "GAConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class ScoredGenome:
    """A genome with its measured grip force in Newtons."""

    genome: Genome
    fitness: float

    def __post_init__(self):
        if not math.isfinite(self.fitness) or self.fitness < 0.0:
            raise ValueError(f"fitness must be finite and >= 0, got {self.fitness}")


@dataclass(frozen=True)
class Offspring:
    """Child genome plus the indices of its parents in the scored pool."""

    genome: Genome
    parents: tuple[int, ...]


def select_parent(population: list[ScoredGenome], rng: np.random.Generator) -> int:
    """Fitness-proportional pick; uniform when every fitness is zero.

    One uniform draw when mass exists, one integer draw otherwise.
    """
    if not population:
        raise ValueError("population is empty")
    f = np.array([s.fitness for s in population], dtype=float)
    total = f.sum()
    if total <= 0.0:
        return int(rng.integers(len(population)))
    cum = np.cumsum(f) / total
    idx = int(np.searchsorted(cum, rng.uniform(), side="right"))
    return min(idx, len(population) - 1)


def crossover(p1: Genome, p2: Genome, rng: np.random.Generator) -> Genome:
    """One-point recombination that never splits a control point.

    A child takes parent 1's first k points followed by parent 2's points
    from j on; (k, j) are uniform draws rejection-sampled until the suffix
    is non-empty and the total lands in [2, 6]. Scalars come from parent 1
    (the parent-1-first perturbation), and every child point is bit-equal
    to some parent point. Cuts whose curve self-intersects are redrawn up
    to 100 times before the points are reinitialized outright.
    """
    pts1, pts2 = p1.control_points, p2.control_points
    v1, v2 = len(pts1), len(pts2)
    lo, hi = POINT_COUNT_BOUNDS
    for _ in range(_SIMPLE_CURVE_RETRIES):
        k = int(rng.integers(0, v1 + 1))
        j = int(rng.integers(0, v2))
        if not lo <= k + (v2 - j) <= hi:
            continue
        child = Genome(p1.base_radius, p1.height, pts1[:k] + pts2[j:])
        if curve_is_simple(child):
            return child
    return Genome(p1.base_radius, p1.height, random_control_points(rng))


def perturb_value(
    value: float,
    bounds: tuple[float, float],
    sigma: float,
    prob: float,
    rng: np.random.Generator,
) -> tuple[float, float | None]:
    """Maybe-perturb one allele; returns (new value, pre-clamp step or None).

    Draws a trigger uniform, then (only on trigger) one Gaussian step. The
    raw step is returned so callers can audit the sampler.
    """
    if rng.uniform() >= prob:
        return value, None
    step = float(rng.normal(0.0, sigma))
    return float(np.clip(value + step, bounds[0], bounds[1])), step


def mutate(g: Genome, cfg: GAConfig, rng: np.random.Generator) -> Genome:
    """Allele-wise Gaussian mutation plus at most one structural event.

    Draw order per attempt: base_radius (trigger, step), height, each
    control point x then y, structural trigger, add/delete coin, then the
    event's own draws (new point x, y, insertion slot | deletion index).
    An add at 6 points or a delete at 2 is skipped. Self-intersecting
    mutants are retried from the original up to 100 times, after which the
    control points are reinitialized keeping the original scalars.
    """
    frac = cfg.mutation_sigma_fraction
    prob = cfg.allele_mutation_prob
    sigma_r = frac * (RADIUS_BOUNDS[1] - RADIUS_BOUNDS[0])
    sigma_h = frac * (HEIGHT_BOUNDS[1] - HEIGHT_BOUNDS[0])
    sigma_c = frac * (COMPONENT_BOUNDS[1] - COMPONENT_BOUNDS[0])
    for _ in range(_SIMPLE_CURVE_RETRIES):
        radius, _ = perturb_value(g.base_radius, RADIUS_BOUNDS, sigma_r, prob, rng)
        height, _ = perturb_value(g.height, HEIGHT_BOUNDS, sigma_h, prob, rng)
        pts = []
        for x, y in g.control_points:
            nx, _ = perturb_value(x, COMPONENT_BOUNDS, sigma_c, prob, rng)
            ny, _ = perturb_value(y, COMPONENT_BOUNDS, sigma_c, prob, rng)
            pts.append((nx, ny))
        if rng.uniform() < cfg.structural_mutation_prob:
            if rng.uniform() < 0.5:
                if len(pts) < POINT_COUNT_BOUNDS[1]:
                    point = (float(rng.uniform()), float(rng.uniform()))
                    pts.insert(int(rng.integers(0, len(pts) + 1)), point)
            elif len(pts) > POINT_COUNT_BOUNDS[0]:
                del pts[int(rng.integers(0, len(pts)))]
        mutant = Genome(radius, height, tuple(pts))
        if curve_is_simple(mutant):
            return mutant
    return Genome(g.base_radius, g.height, random_control_points(rng))


def next_generation(
    scored: list[ScoredGenome], cfg: GAConfig, rng: np.random.Generator
) -> list[Offspring]:
    """Breed a full replacement population from a scored one.

    Per child: select parent A; with probability crossover_prob select
    parent B (independently, possibly equal to A) and recombine; mutate.
    Parent indices are kept for the lineage graph.
    """
    if len(scored) != cfg.population_size:
        raise ValueError(
            f"expected {cfg.population_size} scored genomes, got {len(scored)}"
        )
    children = []
    for _ in range(cfg.population_size):
        a = select_parent(scored, rng)
        if rng.uniform() < cfg.crossover_prob:
            b = select_parent(scored, rng)
            child = crossover(scored[a].genome, scored[b].genome, rng)
            parents = (a, b)
        else:
            child = scored[a].genome
            parents = (a,)
        children.append(Offspring(genome=mutate(child, cfg, rng), parents=parents))
    return children


def initial_population(cfg: GAConfig, rng: np.random.Generator) -> list[Genome]:
    """Generation 0: independent uniform draws."""
    return [random_genome(rng) for _ in range(cfg.population_size)]
