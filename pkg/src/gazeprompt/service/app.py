"""HTTP service exposing the pipeline's stateless operations.

Render endpoints read images from server-local paths (the service is
meant to run next to the data); batch inference stays in the CLI, which
is a long-running local job with file-based resume.
"""

from __future__ import annotations

import base64

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import PipelineError
from ..fixation_text import render_fixation_text
from ..frameplan import plan_frames
from ..frames import render_video
from ..heatmap import render_heatmap
from ..imaging import encode_png
from ..ingest import ingest_fixation_csv
from ..manifest import summarize_manifest
from ..scoring import COLUMN_ORDER, RawScore, aggregate_table, emit_csv, emit_markdown, scale_scores
from ..synth import synthesize_manifest
from ..types import DatasetManifest, Fixation, ScanPath
from .schemas import (
    FixationTextRequest,
    FixationTextResponse,
    HealthResponse,
    HeatmapRequest,
    HeatmapResponse,
    IngestRequest,
    IngestResponse,
    IngestReportModel,
    ManifestModel,
    PlanRequest,
    PlanResponse,
    ScanPathModel,
    ScoreRequest,
    ScoreResponse,
    StatsRequest,
    StatsResponse,
    SynthRequest,
    TableRowModel,
    VideoFrameModel,
    VideoRequest,
    VideoResponse,
)


def _scanpath_from_model(model: ScanPathModel) -> ScanPath:
    return ScanPath(
        image_id=model.image_id,
        reader_id=model.reader_id,
        split=model.split,
        fixations=tuple(
            Fixation(x=f.x, y=f.y, duration=f.duration, seq=f.seq) for f in model.fixations
        ),
    )


def create_app() -> FastAPI:
    app = FastAPI(title="gazeprompt", version=__version__)

    @app.exception_handler(PipelineError)
    async def pipeline_error_handler(request: Request, exc: PipelineError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/ingest", response_model=IngestResponse)
    def ingest(request: IngestRequest) -> IngestResponse:
        images = [m.to_domain() for m in request.images]
        index = {img.image_id: img for img in images}
        scanpaths, report = ingest_fixation_csv(
            request.csv_text, index, request.config.to_domain()
        )
        manifest = DatasetManifest(images=tuple(images), scanpaths=tuple(scanpaths))
        return IngestResponse(
            manifest=ManifestModel.from_domain(manifest),
            report=IngestReportModel.from_domain(report),
        )

    @app.post("/synth", response_model=ManifestModel)
    def synth(request: SynthRequest) -> ManifestModel:
        manifest = synthesize_manifest(
            seed=request.seed,
            n_images=request.n_images,
            n_scanpaths=request.n_scanpaths,
            width=request.width,
            height=request.height,
            fixation_count_range=request.fixation_count_range,
            duration_range_s=request.duration_range_s,
            split=request.split,
            image_dir=request.image_dir,
        )
        return ManifestModel.from_domain(manifest)

    @app.post("/stats", response_model=StatsResponse)
    def stats(request: StatsRequest) -> StatsResponse:
        summary = summarize_manifest(request.manifest.to_domain(), split=request.split)
        return StatsResponse(**summary.to_dict())

    @app.post("/render/plan", response_model=PlanResponse)
    def render_plan(request: PlanRequest) -> PlanResponse:
        plan = plan_frames(_scanpath_from_model(request.scanpath), request.config.to_domain())
        return PlanResponse(
            per_fixation_frames=list(plan.per_fixation_frames),
            total_frames=plan.total_frames,
            sampled_indices=list(plan.sampled_indices),
            source_fixation_of_frame=dict(plan.source_fixation_of_frame),
        )

    @app.post("/render/text", response_model=FixationTextResponse)
    def render_text(request: FixationTextRequest) -> FixationTextResponse:
        text = render_fixation_text(
            _scanpath_from_model(request.scanpath), request.image.to_domain(), request.ordering
        )
        return FixationTextResponse(text=text)

    @app.post("/render/heatmap", response_model=HeatmapResponse)
    def render_heatmap_endpoint(request: HeatmapRequest) -> HeatmapResponse:
        result = render_heatmap(
            request.image.to_domain(),
            _scanpath_from_model(request.scanpath),
            request.config.to_domain(),
        )
        return HeatmapResponse(
            png_base64=base64.b64encode(encode_png(result.image)).decode("ascii"),
            dots=result.dots_dict(),
        )

    @app.post("/render/video", response_model=VideoResponse)
    def render_video_endpoint(request: VideoRequest) -> VideoResponse:
        scanpath = _scanpath_from_model(request.scanpath)
        config = request.config.to_domain()
        plan = plan_frames(scanpath, config)
        frameset = render_video(request.image.to_domain(), scanpath, plan, config)
        manifest = frameset.manifest_dict()
        return VideoResponse(
            image_id=frameset.image_id,
            reader_id=frameset.reader_id,
            fps=frameset.fps,
            k=frameset.k,
            total_frames=frameset.total_frames,
            frames=[VideoFrameModel(**entry) for entry in manifest["frames"]],
            frames_base64=[
                base64.b64encode(encode_png(frame)).decode("ascii") for frame in frameset.frames
            ],
        )

    @app.post("/score", response_model=ScoreResponse)
    def score(request: ScoreRequest) -> ScoreResponse:
        raw = [RawScore(**row.model_dump()) for row in request.rows]
        cells = scale_scores(raw, request.baseline_model_id)
        table = aggregate_table(cells, base_method_id=request.base_method_id)
        rows = [
            TableRowModel(
                model_id=row.model_id,
                method_id=row.method_id,
                report_alpha=row.cells[COLUMN_ORDER[0]],
                report_beta=row.cells[COLUMN_ORDER[1]],
                diagnosis_alpha=row.cells[COLUMN_ORDER[2]],
                diagnosis_beta=row.cells[COLUMN_ORDER[3]],
                overall=row.overall,
                overall_delta=row.overall_delta,
            )
            for row in table.rows
        ]
        return ScoreResponse(
            rows=rows,
            markdown=emit_markdown(table, exclude_from_best=request.exclude_from_best),
            csv_text=emit_csv(table),
        )

    return app
