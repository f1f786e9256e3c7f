"""Pydantic request/response models wrapping the core types."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..frameplan import RenderConfig
from ..manifest import manifest_from_dict, manifest_to_dict
from ..types import DatasetManifest, ImageRecord, IngestConfig, IngestReport


class FixationModel(BaseModel):
    x: float
    y: float
    duration: float
    seq: int


class ScanPathModel(BaseModel):
    image_id: str
    reader_id: str
    split: str = "alpha"
    fixations: list[FixationModel]


class ImageRecordModel(BaseModel):
    image_id: str
    path: str
    width: int
    height: int

    def to_domain(self) -> ImageRecord:
        return ImageRecord(
            image_id=self.image_id, path=self.path, width=self.width, height=self.height
        )


class ReportEntryModel(BaseModel):
    image_id: str
    reader_id: str
    findings: str = ""
    impression: str = ""
    diagnosis: str = ""


class ManifestModel(BaseModel):
    manifest_version: int = 1
    images: list[ImageRecordModel] = Field(default_factory=list)
    scanpaths: list[ScanPathModel] = Field(default_factory=list)
    reports: list[ReportEntryModel] = Field(default_factory=list)

    def to_domain(self) -> DatasetManifest:
        return manifest_from_dict(self.model_dump())

    @classmethod
    def from_domain(cls, manifest: DatasetManifest) -> "ManifestModel":
        return cls.model_validate(manifest_to_dict(manifest))


class IngestConfigModel(BaseModel):
    columns: dict[str, str] = Field(default_factory=dict)
    normalized_coordinates: bool = False
    split: str = "alpha"

    def to_domain(self) -> IngestConfig:
        return IngestConfig(
            columns=self.columns,
            normalized_coordinates=self.normalized_coordinates,
            split=self.split,
        )


class IngestReportModel(BaseModel):
    rows: int
    kept: int
    clamped: int
    skipped_duration: int
    skipped_parse: int
    skipped_unknown_image: int

    @classmethod
    def from_domain(cls, report: IngestReport) -> "IngestReportModel":
        return cls.model_validate(report.to_dict())


class IngestRequest(BaseModel):
    csv_text: str
    images: list[ImageRecordModel]
    config: IngestConfigModel = Field(default_factory=IngestConfigModel)


class IngestResponse(BaseModel):
    manifest: ManifestModel
    report: IngestReportModel


class SynthRequest(BaseModel):
    seed: int = 0
    n_images: int = 1
    n_scanpaths: int = 1
    width: int = 128
    height: int = 128
    fixation_count_range: tuple[int, int] = (2, 8)
    duration_range_s: tuple[float, float] = (0.1, 1.5)
    split: str = "alpha"
    image_dir: str | None = None


class StatsRequest(BaseModel):
    manifest: ManifestModel
    split: str | None = None


class StatsResponse(BaseModel):
    images: int
    scanpaths: int
    reports: int
    readers_per_image: float


class RenderConfigModel(BaseModel):
    fps: int = 10
    k: int = 16
    dot_radius_px: int = 5
    dot_color: tuple[int, int, int] = (255, 0, 0)
    heatmap_alpha_min: float = 0.25

    def to_domain(self) -> RenderConfig:
        return RenderConfig(
            fps=self.fps,
            k=self.k,
            dot_radius_px=self.dot_radius_px,
            dot_color=self.dot_color,
            heatmap_alpha_min=self.heatmap_alpha_min,
        )


class PlanRequest(BaseModel):
    scanpath: ScanPathModel
    config: RenderConfigModel = Field(default_factory=RenderConfigModel)


class PlanResponse(BaseModel):
    per_fixation_frames: list[int]
    total_frames: int
    sampled_indices: list[int]
    source_fixation_of_frame: dict[int, int]


class FixationTextRequest(BaseModel):
    scanpath: ScanPathModel
    image: ImageRecordModel
    ordering: str = "duration_desc"


class FixationTextResponse(BaseModel):
    text: str


class HeatmapRequest(BaseModel):
    image: ImageRecordModel
    scanpath: ScanPathModel
    config: RenderConfigModel = Field(default_factory=RenderConfigModel)


class HeatmapDotModel(BaseModel):
    fixation_ordinal: int
    x: float
    y: float
    duration: float
    opacity: float


class HeatmapResponse(BaseModel):
    png_base64: str
    dots: list[HeatmapDotModel]


class VideoRequest(BaseModel):
    image: ImageRecordModel
    scanpath: ScanPathModel
    config: RenderConfigModel = Field(default_factory=RenderConfigModel)


class VideoFrameModel(BaseModel):
    file: str
    index: int
    fixation_ordinal: int
    x: float
    y: float
    duration: float


class VideoResponse(BaseModel):
    image_id: str
    reader_id: str
    fps: int
    k: int
    total_frames: int
    frames: list[VideoFrameModel]
    frames_base64: list[str]


class RawScoreModel(BaseModel):
    model_id: str
    method_id: str
    metric_id: str
    task: str
    split: str
    value: float


class ScoreRequest(BaseModel):
    rows: list[RawScoreModel]
    baseline_model_id: str
    base_method_id: str = "base"
    exclude_from_best: list[str] = Field(default_factory=list)


class TableRowModel(BaseModel):
    model_id: str
    method_id: str
    report_alpha: float
    report_beta: float
    diagnosis_alpha: float
    diagnosis_beta: float
    overall: float
    overall_delta: float | None = None


class ScoreResponse(BaseModel):
    rows: list[TableRowModel]
    markdown: str
    csv_text: str


class HealthResponse(BaseModel):
    status: str
    version: str
