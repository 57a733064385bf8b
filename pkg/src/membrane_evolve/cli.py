"""Command-line surface; every subcommand maps onto one library operation.

Mutating commands go through the same ``Campaign`` handlers as the HTTP
API, so a campaign journal looks the same no matter which client wrote it.
Errors exit nonzero with a ``[code] message`` line on stderr.
"""

from __future__ import annotations

import functools
from pathlib import Path

import click

from .campaign import (
    Campaign,
    CampaignError,
    gripper_id,
    run_proxy_campaign,
)
from .evolve import GAConfig
from .genome import GenomeBoundsError, GenomeFormatError, deserialize
from .mesh import (
    DEFAULT_ANGULAR_SEGMENTS,
    MeshError,
    UnprintableDesignError,
    assemble,
    export_stl,
    read_stl,
    validate_mesh,
)
from .reeb import DEFAULT_RESOLUTIONS, build_mrg, reference_bag, similarity
from .report import write_report


def structured_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except CampaignError as err:
            raise click.ClickException(f"[{err.code}] {err.message}")
        except UnprintableDesignError as err:
            raise click.ClickException(f"[unprintable] {err}")
        except MeshError as err:
            raise click.ClickException(f"[mesh-error] {err}")
        except (GenomeFormatError, GenomeBoundsError) as err:
            raise click.ClickException(f"[genome-error] {err}")
        except ValueError as err:
            raise click.ClickException(f"[invalid-input] {err}")

    return wrapper


dir_option = click.option(
    "--dir",
    "directory",
    type=click.Path(path_type=Path),
    envvar="MEMBRANE_EVOLVE_DIR",
    required=True,
    help="Campaign directory (or set MEMBRANE_EVOLVE_DIR).",
)


def _load_config(path: Path | None) -> GAConfig:
    if path is None:
        return GAConfig()
    try:
        return GAConfig.load(path)
    except (OSError, ValueError) as err:
        raise click.ClickException(f"[invalid-config] {err}")


@click.group()
def main():
    """Evolve granular-jamming gripper membranes."""


# -- campaign --------------------------------------------------------------


@main.group()
def campaign():
    """Run and inspect a print/test/evolve campaign."""


@campaign.command("init")
@click.option("--config", type=click.Path(exists=True, path_type=Path))
@click.option(
    "--evaluator",
    type=click.Choice(["manual", "proxy"]),
    default="manual",
    show_default=True,
)
@click.option("--seed", type=int)
@dir_option
@structured_errors
def campaign_init(config, evaluator, seed, directory):
    """Create a campaign with a random initial generation."""
    cfg = _load_config(config)
    handle = Campaign.create(directory, cfg, evaluator=evaluator, seed=seed)
    state = handle.state
    click.echo(f"campaign {state.campaign_id} created in {directory}")
    click.echo(f"status: {state.status}")


@campaign.command("status")
@dir_option
@structured_errors
def campaign_status(directory):
    """Show campaign progress and per-child fitness records."""
    state = Campaign.open(directory).state
    click.echo(f"campaign:   {state.campaign_id}")
    click.echo(f"evaluator:  {state.evaluator}")
    click.echo(f"seed:       {state.seed}")
    click.echo(
        f"generation: {state.current.index + 1}"
        f" of {state.config.max_generations}"
    )
    click.echo(f"status:     {state.status}")
    for i, child in enumerate(state.current.children):
        cid = gripper_id(state.current.index, i)
        if child.unprintable:
            click.echo(f"  {cid}  unprintable (fitness 0)")
            continue
        done = len(child.record.repeats)
        line = f"  {cid}  repeats {done}/{child.record.required}"
        if child.record.complete:
            line += f"  mean {child.record.mean:.3f} N"
        click.echo(line)


@campaign.command("record")
@click.option("--gen", type=int, required=True)
@click.option("--child", type=int, required=True)
@click.option("--force", type=float, required=True, help="Retention force in N.")
@dir_option
@structured_errors
def campaign_record(gen, child, force, directory):
    """Record one measured repeat for a child of the current generation."""
    handle = Campaign.open(directory)
    state = handle.record(gen, child, force)
    record = state.generations[gen].children[child].record
    click.echo(
        f"{gripper_id(gen, child)}: {len(record.repeats)}"
        f"/{record.required} repeats"
    )
    click.echo(f"status: {state.status}")


@campaign.command("advance")
@dir_option
@structured_errors
def campaign_advance(directory):
    """Breed the next generation from the completed current one."""
    state = Campaign.open(directory).advance()
    click.echo(
        f"generation {state.current.index} created"
        f" ({len(state.current.children)} children)"
    )
    click.echo(f"status: {state.status}")


@campaign.command("report")
@click.option("--csv", "csv_path", type=click.Path(path_type=Path), required=True)
@dir_option
@structured_errors
def campaign_report(csv_path, directory):
    """Write per-generation stats as CSV plus trend figures."""
    rows = Campaign.open(directory).report_rows()
    for path in write_report(rows, csv_path):
        click.echo(f"wrote {path}")


@campaign.command("export-stl")
@click.option("--gen", type=int, required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@dir_option
@structured_errors
def campaign_export(gen, out, directory):
    """Export one STL per printable child plus a manifest."""
    manifest = Campaign.open(directory).export_generation(gen, out)
    for entry in manifest["files"]:
        click.echo(f"wrote {out / entry['file']}")
    for entry in manifest["skipped"]:
        click.echo(f"skipped {entry['gripper_id']} ({entry['reason']})")
    click.echo(f"wrote {out / 'manifest.json'}")


@campaign.command("lineage")
@click.option("--dot", "dot_path", type=click.Path(path_type=Path))
@dir_option
@structured_errors
def campaign_lineage(dot_path, directory):
    """Emit the parent/child graph in DOT form (stdout without --dot)."""
    text = Campaign.open(directory).lineage().to_dot()
    if dot_path is None:
        click.echo(text, nl=False)
    else:
        dot_path.write_text(text, encoding="utf-8")
        click.echo(f"wrote {dot_path}")


# -- evolve ------------------------------------------------------------------


@main.group()
def evolve():
    """Headless evolutionary runs."""


@evolve.command("run")
@click.option("--config", type=click.Path(exists=True, path_type=Path))
@click.option("--seed", type=int)
@dir_option
@structured_errors
def evolve_run(config, seed, directory):
    """Run a proxy-evaluated campaign to completion."""
    cfg = _load_config(config)
    handle = run_proxy_campaign(directory, cfg, seed=seed)
    state = handle.state
    total = sum(len(g.children) for g in state.generations)
    best = max(c.fitness for g in state.generations for c in g.children)
    click.echo(
        f"campaign {state.campaign_id}: {len(state.generations)}"
        f" generations, {total} genomes journaled"
    )
    click.echo(f"best proxy fitness: {best:.4f}")


# -- mesh ----------------------------------------------------------------


@main.group()
def mesh():
    """Build and validate printable meshes."""


@mesh.command("build")
@click.option("--genome", "genome_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--segments", type=int, default=DEFAULT_ANGULAR_SEGMENTS, show_default=True)
@structured_errors
def mesh_build(genome_path, out, segments):
    """Mesh a genome document into a binary STL."""
    genome = deserialize(genome_path.read_text(encoding="utf-8"))
    solid = assemble(genome, angular_segments=segments)
    export_stl(solid.combined, out, label=out.stem)
    click.echo(f"wrote {out} ({len(solid.combined.triangles)} triangles)")


@mesh.command("validate")
@click.argument("stl", type=click.Path(exists=True, path_type=Path))
@structured_errors
def mesh_validate(stl):
    """Check an STL for printability (watertight, oriented, positive volume)."""
    report = validate_mesh(read_stl(stl))
    click.echo(f"vertices:             {report.vertex_count}")
    click.echo(f"triangles:            {report.triangle_count}")
    click.echo(f"watertight:           {report.watertight}")
    click.echo(f"oriented:             {report.oriented}")
    click.echo(f"euler characteristic: {report.euler_characteristic}")
    click.echo(f"volume:               {report.volume:.3f} mm^3")
    click.echo(f"area:                 {report.area:.3f} mm^2")
    if not report.is_solid:
        raise click.ClickException(f"[invalid-mesh] {stl} is not a printable solid")


# -- reeb -----------------------------------------------------------------


@main.group()
def reeb():
    """Topology-based shape similarity."""


@reeb.command("compare")
@click.option("--a", "path_a", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--b", "path_b", type=click.Path(exists=True, path_type=Path), required=True)
@structured_errors
def reeb_compare(path_a, path_b):
    """Print the similarity score between two STL meshes."""
    graph_a = build_mrg(read_stl(path_a), DEFAULT_RESOLUTIONS)
    graph_b = build_mrg(read_stl(path_b), DEFAULT_RESOLUTIONS)
    # scores carry ~1e-16 summation noise; 12 decimals is plenty to display
    click.echo(repr(round(similarity(graph_a, graph_b), 12)))


@reeb.command("batch")
@click.option("--dir", "directory", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--ref", type=click.Choice(["bag"]), default="bag", show_default=True)
@click.option("--csv", "csv_path", type=click.Path(path_type=Path), required=True)
@structured_errors
def reeb_batch(directory, ref, csv_path):
    """Score every STL in a directory against the reference shape."""
    ref_graph = build_mrg(reference_bag(), DEFAULT_RESOLUTIONS)
    paths = sorted(directory.glob("*.stl"))
    if not paths:
        raise click.ClickException(f"[invalid-input] no .stl files in {directory}")
    lines = ["file,similarity"]
    for path in paths:
        try:
            graph = build_mrg(read_stl(path), DEFAULT_RESOLUTIONS)
        except MeshError as err:
            raise click.ClickException(f"[mesh-error] {path.name}: {err}")
        lines.append(f"{path.name},{round(similarity(graph, ref_graph), 12)!r}")
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    click.echo(f"wrote {csv_path} ({len(paths)} meshes)")


# -- serve -----------------------------------------------------------------


@main.command("serve")
@click.option("--addr", default="127.0.0.1:8000", show_default=True, help="host:port")
@dir_option
@structured_errors
def serve(addr, directory):
    """Serve the campaign HTTP API for the dashboard."""
    import uvicorn

    from .api import create_app

    host, _, port = addr.rpartition(":")
    if not host or not port.isdigit():
        raise click.ClickException(f"[invalid-input] --addr must be host:port, got {addr!r}")
    uvicorn.run(create_app(directory), host=host, port=int(port))


if __name__ == "__main__":
    main()
