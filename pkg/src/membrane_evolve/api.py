"""HTTP surface over a campaign directory.

Thin adapter: every route delegates to the same ``Campaign`` command
handlers the CLI uses, so a mutation is journaled identically no matter
which client issued it. One app serves one campaign directory.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .campaign import (
    Campaign,
    CampaignError,
    EXPORT_SEGMENTS,
    REPORT_COLUMNS,
    gripper_id,
    report_csv,
    state_to_dict,
)
from .genome import to_profile
from .mesh import UnprintableDesignError, assemble, export_stl

# campaign rejection code -> HTTP status
STATUS_BY_CODE = {
    "not-found": 404,
    "invalid-force": 400,
    "invalid-evaluator": 400,
    "wrong-generation": 409,
    "overfull-record": 409,
    "pending-fitness": 409,
    "complete": 409,
    "already-exists": 409,
    "unprintable": 409,
    "corrupt-journal": 500,
}


class RepeatIn(BaseModel):
    force_newtons: float


def _summary(state) -> dict:
    doc = state_to_dict(state)
    # rng checkpoints hold 128-bit ints; JS clients would corrupt them
    doc.pop("rng_state")
    return doc


def create_app(directory: str | Path) -> FastAPI:
    campaign = Campaign.open(directory)
    app = FastAPI(title="membrane-evolve campaign")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(CampaignError)
    async def campaign_error(request, exc: CampaignError):
        return JSONResponse(
            status_code=STATUS_BY_CODE.get(exc.code, 500),
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    def generation_or_404(g: int):
        state = campaign.state
        if not 0 <= g < len(state.generations):
            raise CampaignError("not-found", f"no generation {g}")
        return state.generations[g]

    def child_or_404(g: int, i: int):
        gen = generation_or_404(g)
        if not 0 <= i < len(gen.children):
            raise CampaignError(
                "not-found", f"no child {i} in generation {g}"
            )
        return gen.children[i]

    @app.get("/api/campaign")
    def campaign_summary():
        return _summary(campaign.state)

    @app.get("/api/generations/{g}")
    def generation_detail(g: int):
        generation_or_404(g)
        return _summary(campaign.state)["generations"][g]

    @app.get("/api/generations/{g}/children/{i}/profile")
    def child_profile(g: int, i: int, samples: int = Query(128, ge=16, le=2048)):
        child = child_or_404(g, i)
        points = to_profile(child.genome, samples)
        return {
            "gripper_id": gripper_id(g, i),
            "base_radius_mm": child.genome.base_radius,
            "height_mm": child.genome.height,
            "unprintable": child.unprintable,
            "points": points.tolist(),
        }

    @app.get("/api/generations/{g}/children/{i}/stl")
    def child_stl(g: int, i: int):
        child = child_or_404(g, i)
        cid = gripper_id(g, i)
        if child.unprintable:
            raise CampaignError(
                "unprintable", f"{cid} cannot be meshed; nothing to download"
            )
        try:
            solid = assemble(child.genome, angular_segments=EXPORT_SEGMENTS)
        except UnprintableDesignError as err:
            raise CampaignError("unprintable", str(err)) from err
        return Response(
            content=export_stl(solid.combined, label=cid),
            media_type="model/stl",
            headers={
                "Content-Disposition": f'attachment; filename="{cid}.stl"'
            },
        )

    @app.post("/api/generations/{g}/children/{i}/repeats")
    def record_repeat(g: int, i: int, body: RepeatIn):
        state = campaign.record(g, i, body.force_newtons)
        return _summary(state)

    @app.post("/api/advance")
    def advance():
        return _summary(campaign.advance())

    @app.get("/api/lineage")
    def lineage_graph():
        graph = campaign.lineage()
        return {
            "nodes": [
                {
                    "gripper_id": n.gripper_id,
                    "generation": n.generation,
                    "child": n.child,
                    "fitness": n.fitness,
                    "unprintable": n.unprintable,
                }
                for n in graph.nodes
            ],
            "edges": [list(edge) for edge in graph.edges],
        }

    @app.get("/api/report")
    def report(format: str = Query("json", pattern="^(json|csv)$")):
        rows = campaign.report_rows()
        if format == "csv":
            return PlainTextResponse(report_csv(rows), media_type="text/csv")
        return {"columns": list(REPORT_COLUMNS), "rows": rows}

    return app
