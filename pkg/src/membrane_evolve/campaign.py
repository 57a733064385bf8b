"""Evolution campaign driver: an append-only journal plus a pure fold.

Every mutation appends self-describing JSON events; the in-memory state is
the fold of those events, so replaying a journal reproduces the state
exactly regardless of when a human typed forces in. Proxy-scored campaigns
write their synthetic measurements through the same events as manual ones,
which keeps replay free of any geometry recomputation.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .evolve import GAConfig, ScoredGenome, initial_population, next_generation
from .fitness import (
    DEFAULT_REPEATS,
    FitnessRecord,
    OverfullRecordError,
    ProxyEvaluator,
    record_repeat,
)
from .genome import Genome, genome_from_dict, genome_to_dict
from .mesh import (
    UnprintableDesignError,
    assemble,
    check_printable,
    export_stl,
)
from .reeb import build_mrg, reference_bag, similarity

JOURNAL_NAME = "journal.jsonl"
SNAPSHOT_NAME = "snapshot.json"
EVALUATORS = ("manual", "proxy")
PROXY_REPEATS = 1
EXPORT_SEGMENTS = 64
REPORT_SEGMENTS = 32
REPORT_RESOLUTIONS = 4


class CampaignError(Exception):
    """Command rejection with a stable machine-readable code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


def gripper_id(generation: int, child: int) -> str:
    return f"gen{generation}_child{child}"


@dataclass(frozen=True)
class ChildState:
    genome: Genome
    record: FitnessRecord
    parents: tuple[int, ...]
    unprintable: bool = False

    @property
    def complete(self) -> bool:
        return self.unprintable or self.record.complete

    @property
    def fitness(self) -> float | None:
        """Measured mean force; a flagged design is pinned to zero."""
        if self.unprintable:
            return 0.0
        return self.record.mean


@dataclass(frozen=True)
class GenerationState:
    index: int
    children: tuple[ChildState, ...]

    @property
    def complete(self) -> bool:
        return all(c.complete for c in self.children)


@dataclass(frozen=True)
class CampaignState:
    campaign_id: str
    config: GAConfig
    evaluator: str
    seed: int
    generations: tuple[GenerationState, ...] = ()
    rng_state: dict | None = None

    @property
    def current(self) -> GenerationState:
        return self.generations[-1]

    @property
    def status(self) -> str:
        if not self.generations:
            # only reachable through a journal truncated mid-creation
            return "awaiting-fitness"
        if not self.current.complete:
            return "awaiting-fitness"
        if len(self.generations) >= self.config.max_generations:
            return "complete"
        return "ready-to-advance"


def _required_repeats(evaluator: str) -> int:
    return PROXY_REPEATS if evaluator == "proxy" else DEFAULT_REPEATS


def apply_event(state: CampaignState | None, event: dict) -> CampaignState:
    """Pure transition; the journal is the single source of truth."""
    kind = event["event"]
    if kind == "campaign-created":
        if state is not None:
            raise CampaignError("corrupt-journal", "duplicate campaign-created")
        evaluator = event["evaluator"]
        if evaluator not in EVALUATORS:
            raise CampaignError(
                "corrupt-journal", f"unknown evaluator {evaluator!r}"
            )
        return CampaignState(
            campaign_id=event["campaign_id"],
            config=GAConfig.from_dict(event["config"]),
            evaluator=evaluator,
            seed=int(event["seed"]),
        )
    if state is None:
        raise CampaignError("corrupt-journal", "journal does not start a campaign")

    if kind == "generation-created":
        if event["generation"] != len(state.generations):
            raise CampaignError(
                "corrupt-journal",
                f"generation {event['generation']} out of sequence",
            )
        g = event["generation"]
        children = tuple(
            ChildState(
                genome=genome_from_dict(c["genome"]),
                record=FitnessRecord(
                    gripper_id=gripper_id(g, i),
                    required=_required_repeats(state.evaluator),
                ),
                parents=tuple(int(p) for p in c["parents"]),
            )
            for i, c in enumerate(event["children"])
        )
        gen = GenerationState(index=g, children=children)
        return replace(
            state,
            generations=state.generations + (gen,),
            rng_state=event["rng_state"],
        )

    if kind == "gripper-flagged-unprintable":
        g, i = event["generation"], event["child"]
        gen = state.generations[g]
        child = replace(gen.children[i], unprintable=True)
        children = gen.children[:i] + (child,) + gen.children[i + 1 :]
        gens = (
            state.generations[:g]
            + (replace(gen, children=children),)
            + state.generations[g + 1 :]
        )
        return replace(state, generations=gens)

    if kind == "repeat-recorded":
        g, i = event["generation"], event["child"]
        gen = state.generations[g]
        child = gen.children[i]
        if child.unprintable:
            raise CampaignError(
                "corrupt-journal", f"repeat recorded for flagged {g}/{i}"
            )
        child = replace(
            child, record=record_repeat(child.record, event["force_newtons"])
        )
        children = gen.children[:i] + (child,) + gen.children[i + 1 :]
        gens = (
            state.generations[:g]
            + (replace(gen, children=children),)
            + state.generations[g + 1 :]
        )
        return replace(state, generations=gens)

    if kind == "generation-advanced":
        gen = state.generations[event["generation"]]
        if not gen.complete:
            raise CampaignError(
                "corrupt-journal",
                f"advance recorded over incomplete generation {gen.index}",
            )
        return state

    raise CampaignError("corrupt-journal", f"unknown event {kind!r}")


def fold_events(events) -> CampaignState:
    state: CampaignState | None = None
    for event in events:
        state = apply_event(state, event)
    if state is None:
        raise CampaignError("corrupt-journal", "journal is empty")
    return state


def read_journal(directory: str | Path) -> list[dict]:
    path = Path(directory) / JOURNAL_NAME
    if not path.exists():
        raise CampaignError("not-found", f"no campaign journal in {directory}")
    with path.open("r", encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]


def replay_state(directory: str | Path) -> CampaignState:
    return fold_events(read_journal(directory))


def state_to_dict(state: CampaignState) -> dict:
    return {
        "campaign_id": state.campaign_id,
        "config": state.config.to_dict(),
        "evaluator": state.evaluator,
        "seed": state.seed,
        "status": state.status,
        "rng_state": state.rng_state,
        "generations": [
            {
                "index": gen.index,
                "complete": gen.complete,
                "children": [
                    {
                        "gripper_id": child.record.gripper_id,
                        "genome": genome_to_dict(child.genome),
                        "parents": list(child.parents),
                        "unprintable": child.unprintable,
                        "repeats": list(child.record.repeats),
                        "repeats_required": child.record.required,
                        "fitness": child.fitness,
                    }
                    for child in gen.children
                ],
            }
            for gen in state.generations
        ],
    }


def snapshot_bytes(state: CampaignState) -> bytes:
    return json.dumps(
        state_to_dict(state), sort_keys=True, separators=(",", ":")
    ).encode("utf-8")


def _rng_from_state(rng_state: dict) -> np.random.Generator:
    bit = np.random.PCG64()
    bit.state = rng_state
    return np.random.Generator(bit)


@dataclass(frozen=True)
class LineageNode:
    gripper_id: str
    generation: int
    child: int
    fitness: float | None
    unprintable: bool


@dataclass(frozen=True)
class LineageGraph:
    nodes: tuple[LineageNode, ...]
    edges: tuple[tuple[str, str], ...]

    def to_dot(self) -> str:
        lines = ["digraph lineage {", "  rankdir=TB;"]
        by_gen: dict[int, list[LineageNode]] = {}
        for node in self.nodes:
            by_gen.setdefault(node.generation, []).append(node)
        for gen in sorted(by_gen):
            names = []
            for node in by_gen[gen]:
                fit = "?" if node.fitness is None else f"{node.fitness:.3g}"
                mark = " (unprintable)" if node.unprintable else ""
                lines.append(
                    f'  "{node.gripper_id}" '
                    f'[label="{node.gripper_id}\\nf={fit}{mark}"];'
                )
                names.append(f'"{node.gripper_id}"')
            lines.append(f"  {{ rank=same; {' '.join(names)} }}")
        for parent, child in self.edges:
            lines.append(f'  "{parent}" -> "{child}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def lineage(state: CampaignState) -> LineageGraph:
    nodes = []
    edges = []
    for gen in state.generations:
        for i, child in enumerate(gen.children):
            cid = gripper_id(gen.index, i)
            nodes.append(
                LineageNode(
                    gripper_id=cid,
                    generation=gen.index,
                    child=i,
                    fitness=child.fitness,
                    unprintable=child.unprintable,
                )
            )
            for parent in child.parents:
                edges.append((gripper_id(gen.index - 1, parent), cid))
    return LineageGraph(nodes=tuple(nodes), edges=tuple(edges))


class Campaign:
    """Directory-backed campaign handle; one writer, serialized commands."""

    def __init__(self, directory: str | Path, state: CampaignState):
        self.directory = Path(directory)
        self._lock = threading.Lock()
        self._state = state
        self._proxy = ProxyEvaluator()
        self._similarity_cache: dict[str, float] = {}
        self._bag_graph = None

    # -- lifecycle -----------------------------------------------------

    @classmethod
    def create(
        cls,
        directory: str | Path,
        config: GAConfig,
        evaluator: str = "manual",
        seed: int | None = None,
        campaign_id: str | None = None,
    ) -> "Campaign":
        if evaluator not in EVALUATORS:
            raise CampaignError(
                "invalid-evaluator",
                f"evaluator must be one of {EVALUATORS}, got {evaluator!r}",
            )
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        if (directory / JOURNAL_NAME).exists():
            raise CampaignError(
                "already-exists", f"{directory} already holds a campaign"
            )
        if seed is None:
            seed = config.seed
        if seed is None:
            seed = int(np.random.SeedSequence().entropy % (2**63))
        campaign_id = campaign_id or uuid.uuid4().hex[:12]

        campaign = cls(
            directory,
            apply_event(
                None,
                {
                    "event": "campaign-created",
                    "campaign_id": campaign_id,
                    "config": config.to_dict(),
                    "evaluator": evaluator,
                    "seed": int(seed),
                },
            ),
        )
        with campaign._lock:
            campaign._append(
                {
                    "event": "campaign-created",
                    "campaign_id": campaign_id,
                    "config": config.to_dict(),
                    "evaluator": evaluator,
                    "seed": int(seed),
                },
                already_applied=True,
            )
            rng = np.random.default_rng(int(seed))
            genomes = initial_population(config, rng)
            campaign._journal_generation(
                0, [(g, ()) for g in genomes], rng.bit_generator.state
            )
            campaign._write_snapshot()
        return campaign

    @classmethod
    def open(cls, directory: str | Path) -> "Campaign":
        return cls(directory, replay_state(directory))

    # -- journal plumbing ----------------------------------------------

    def _append(self, event: dict, already_applied: bool = False) -> None:
        if not already_applied:
            self._state = apply_event(self._state, event)
        line = json.dumps(
            {**event, "timestamp": _utcnow()}, sort_keys=True
        )
        with (self.directory / JOURNAL_NAME).open("a", encoding="utf-8") as f:
            f.write(line + "\n")
            f.flush()
            os.fsync(f.fileno())

    def _write_snapshot(self) -> None:
        (self.directory / SNAPSHOT_NAME).write_bytes(
            snapshot_bytes(self._state)
        )

    def _journal_generation(self, index, children, rng_state) -> None:
        """children: list of (genome, parent index tuple)."""
        self._append(
            {
                "event": "generation-created",
                "generation": index,
                "children": [
                    {"genome": genome_to_dict(g), "parents": list(p)}
                    for g, p in children
                ],
                "rng_state": rng_state,
            }
        )
        for i, (genome, _) in enumerate(children):
            try:
                check_printable(genome)
            except UnprintableDesignError as err:
                self._append(
                    {
                        "event": "gripper-flagged-unprintable",
                        "generation": index,
                        "child": i,
                        "reason": str(err),
                    }
                )
                continue
            if self._state.evaluator == "proxy":
                self._append(
                    {
                        "event": "repeat-recorded",
                        "generation": index,
                        "child": i,
                        "force_newtons": float(self._proxy.evaluate(genome)),
                    }
                )

    # -- queries ---------------------------------------------------------

    @property
    def state(self) -> CampaignState:
        with self._lock:
            return self._state

    # -- commands --------------------------------------------------------

    def record(self, generation: int, child: int, force: float) -> CampaignState:
        with self._lock:
            state = self._state
            current = state.current.index
            if generation != current:
                raise CampaignError(
                    "wrong-generation",
                    f"generation {generation} is not the current "
                    f"generation {current}",
                )
            if not 0 <= child < len(state.current.children):
                raise CampaignError(
                    "not-found", f"no child {child} in generation {generation}"
                )
            target = state.current.children[child]
            if target.unprintable:
                raise CampaignError(
                    "overfull-record",
                    f"{target.record.gripper_id} is flagged unprintable; "
                    "its fitness is fixed at 0",
                )
            if target.record.complete:
                raise CampaignError(
                    "overfull-record",
                    f"{target.record.gripper_id} already has "
                    f"{target.record.required} repeats",
                )
            force = float(force)
            if not np.isfinite(force) or force < 0.0:
                raise CampaignError(
                    "invalid-force",
                    f"force must be finite and >= 0 N, got {force}",
                )
            try:
                self._append(
                    {
                        "event": "repeat-recorded",
                        "generation": generation,
                        "child": child,
                        "force_newtons": force,
                    }
                )
            except OverfullRecordError as err:
                raise CampaignError("overfull-record", str(err)) from err
            self._write_snapshot()
            return self._state

    def advance(self) -> CampaignState:
        with self._lock:
            state = self._state
            status = state.status
            if status == "complete":
                raise CampaignError(
                    "complete",
                    f"campaign finished after "
                    f"{state.config.max_generations} generations",
                )
            if status == "awaiting-fitness":
                pending = [
                    c.record.gripper_id
                    for c in state.current.children
                    if not c.complete
                ]
                raise CampaignError(
                    "pending-fitness",
                    f"generation {state.current.index} still needs "
                    f"fitness for: {', '.join(pending)}",
                )
            current = state.current
            self._append(
                {"event": "generation-advanced", "generation": current.index}
            )
            scored = [
                ScoredGenome(genome=c.genome, fitness=c.fitness)
                for c in current.children
            ]
            rng = _rng_from_state(state.rng_state)
            offspring = next_generation(scored, state.config, rng)
            self._journal_generation(
                current.index + 1,
                [(o.genome, o.parents) for o in offspring],
                rng.bit_generator.state,
            )
            self._write_snapshot()
            return self._state

    # -- artifacts -------------------------------------------------------

    def export_generation(
        self, generation: int, out_dir: str | Path | None = None
    ) -> dict:
        state = self.state
        if not 0 <= generation < len(state.generations):
            raise CampaignError(
                "not-found", f"campaign has no generation {generation}"
            )
        out = Path(out_dir) if out_dir else (
            self.directory / "exports" / f"gen{generation}"
        )
        out.mkdir(parents=True, exist_ok=True)
        manifest = {
            "campaign_id": state.campaign_id,
            "generation": generation,
            "files": [],
            "skipped": [],
        }
        for i, child in enumerate(state.generations[generation].children):
            cid = gripper_id(generation, i)
            if child.unprintable:
                manifest["skipped"].append(
                    {"child": i, "gripper_id": cid, "reason": "unprintable"}
                )
                continue
            solid = assemble(child.genome, angular_segments=EXPORT_SEGMENTS)
            blob = export_stl(solid.combined, label=cid)
            name = f"{cid}.stl"
            (out / name).write_bytes(blob)
            manifest["files"].append(
                {
                    "child": i,
                    "gripper_id": cid,
                    "file": name,
                    "sha256": hashlib.sha256(blob).hexdigest(),
                    "genome": genome_to_dict(child.genome),
                }
            )
        (out / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        return manifest

    def lineage(self) -> LineageGraph:
        return lineage(self.state)

    def _bag_similarity(self, generation: int, child: int) -> float:
        cid = gripper_id(generation, child)
        if cid not in self._similarity_cache:
            if self._bag_graph is None:
                self._bag_graph = build_mrg(
                    reference_bag(angular_segments=REPORT_SEGMENTS),
                    REPORT_RESOLUTIONS,
                )
            genome = self.state.generations[generation].children[child].genome
            solid = assemble(genome, angular_segments=REPORT_SEGMENTS)
            graph = build_mrg(solid.combined, REPORT_RESOLUTIONS)
            self._similarity_cache[cid] = similarity(graph, self._bag_graph)
        return self._similarity_cache[cid]

    def report_rows(self) -> list[dict]:
        """Per-generation stats over every fitness-complete generation."""
        state = self.state
        rows = []
        for gen in state.generations:
            if not gen.complete:
                continue
            fitnesses = [c.fitness for c in gen.children]
            best = max(range(len(fitnesses)), key=lambda i: (fitnesses[i], -i))
            sims = [
                self._bag_similarity(gen.index, i)
                for i, c in enumerate(gen.children)
                if not c.unprintable
            ]
            best_sim = (
                None
                if gen.children[best].unprintable
                else self._bag_similarity(gen.index, best)
            )
            rows.append(
                {
                    "generation": gen.index,
                    "max_f": max(fitnesses),
                    "mean_f": sum(fitnesses) / len(fitnesses),
                    "best_similarity": best_sim,
                    "mean_similarity": (
                        sum(sims) / len(sims) if sims else None
                    ),
                }
            )
        if not rows:
            raise CampaignError(
                "pending-fitness", "no generation has complete fitness yet"
            )
        return rows


REPORT_COLUMNS = (
    "generation",
    "max_f",
    "mean_f",
    "best_similarity",
    "mean_similarity",
)


def report_csv(rows: list[dict]) -> str:
    lines = [",".join(REPORT_COLUMNS)]
    for row in rows:
        cells = []
        for key in REPORT_COLUMNS:
            value = row[key]
            cells.append("" if value is None else repr(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def run_proxy_campaign(
    directory: str | Path,
    config: GAConfig,
    seed: int | None = None,
    campaign_id: str | None = None,
) -> Campaign:
    """Headless closed loop: proxy scores stand in for the test rig."""
    campaign = Campaign.create(
        directory, config, evaluator="proxy", seed=seed, campaign_id=campaign_id
    )
    while campaign.state.status == "ready-to-advance":
        campaign.advance()
    return campaign
