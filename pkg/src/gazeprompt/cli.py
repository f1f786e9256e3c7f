"""Command-line entry point wiring the pipeline:
ingest -> render -> assemble -> run -> score.

Exit codes: 0 success, 1 runtime failure, 2 usage/validation error.
Credentials are taken from the environment variable named in the endpoint
config, never from flags.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import re
import subprocess
import sys
from concurrent.futures import ThreadPoolExecutor

import click

from . import __version__
from .config import build_dataclass, echo_resolved, load_config_file, section
from .errors import CsvSchemaError, PipelineError, ScoreValidationError
from .fixation_text import ORDERINGS, render_fixation_text
from .frameplan import RenderConfig, plan_frames
from .frames import render_video, write_frameset
from .heatmap import render_heatmap
from .imaging import save_png
from .ingest import ingest_fixation_csv
from .manifest import load_manifest, save_manifest, summarize_manifest
from .prompts import GazeMode, TaskKind, build_prompt, load_templates
from .runner import EndpointConfig, RecordSink, run_batch
from .scoring import aggregate_table, emit_csv, emit_markdown, read_scores_csv, scale_scores
from .synth import synthesize_manifest
from .types import DatasetManifest, ImageRecord, IngestConfig, IngestReport, ScanPath

logger = logging.getLogger(__name__)

EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    raise SystemExit(code)


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text)


def _scanpath_dir(out_dir: str, scanpath: ScanPath) -> str:
    return os.path.join(out_dir, f"{_slug(scanpath.image_id)}__{_slug(scanpath.reader_id)}")


def _load_image_records(path: str) -> list[ImageRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data.get("images", [])
    return [
        ImageRecord(
            image_id=item["image_id"],
            path=item["path"],
            width=int(item["width"]),
            height=int(item["height"]),
        )
        for item in data
    ]


def _resolve_out(ctx: click.Context, out: str | None) -> str:
    out = out or ctx.obj.get("out")
    if not out:
        _fail("an output directory is required (--out)", EXIT_USAGE)
    os.makedirs(out, exist_ok=True)
    return out


@click.group()
@click.version_option(version=__version__)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None, help="YAML config file with ingest/render/endpoint sections.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Default output directory for subcommands.")
@click.option("--verbose", is_flag=True, help="Enable debug logging.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None, out_dir: str | None, verbose: bool) -> None:
    """Gaze-scanpath prompt pipeline: ingest fixation data, render gaze
    prompts, run them against a vision-model endpoint, and score outputs."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if not verbose:
        logging.getLogger("httpx").setLevel(logging.WARNING)
    try:
        file_config = load_config_file(config_path)
    except Exception as exc:  # yaml errors included
        _fail(f"cannot read config file: {exc}", EXIT_USAGE)
    ctx.obj = {"config": file_config, "out": out_dir}


@main.command()
@click.option("--csv", "csv_paths", multiple=True, required=True, type=click.Path(exists=True, dir_okay=False), help="Fixation CSV file (repeatable).")
@click.option("--images", "images_path", required=True, type=click.Path(exists=True, dir_okay=False), help="JSON list of image records (image_id, path, width, height).")
@click.option("--out", "out", type=click.Path(file_okay=False), default=None)
@click.option("--split", type=click.Choice(["alpha", "beta"]), default=None, help="Split label assigned to ingested scanpaths.")
@click.option("--normalized-coords", "normalized", flag_value=True, default=None, help="Treat x/y as fractions of width/height.")
@click.pass_context
def ingest(ctx, csv_paths, images_path, out, split, normalized):
    """Parse fixation CSVs into a dataset manifest; print the ingest report."""
    out = _resolve_out(ctx, out)
    ingest_config = build_dataclass(
        IngestConfig,
        section(ctx.obj["config"], "ingest"),
        {"split": split, "normalized_coordinates": normalized},
    )
    images = _load_image_records(images_path)
    index = {img.image_id: img for img in images}
    all_scanpaths: list[ScanPath] = []
    total = IngestReport()
    for path in csv_paths:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                scanpaths, report = ingest_fixation_csv(fh, index, ingest_config)
        except CsvSchemaError as exc:
            _fail(str(exc), EXIT_USAGE)
        seen = {sp.key for sp in all_scanpaths}
        clash = [sp.key for sp in scanpaths if sp.key in seen]
        if clash:
            _fail(f"scanpath {clash[0]} appears in more than one CSV", EXIT_USAGE)
        all_scanpaths.extend(scanpaths)
        for field in dataclasses.fields(IngestReport):
            setattr(total, field.name, getattr(total, field.name) + getattr(report, field.name))
    manifest = DatasetManifest(images=tuple(images), scanpaths=tuple(all_scanpaths))
    manifest_path = os.path.join(out, "manifest.json")
    save_manifest(manifest, manifest_path)
    echo_resolved(out, {"command": "ingest", "ingest": dataclasses.asdict(ingest_config), "csv": list(csv_paths), "images": images_path})
    click.echo(json.dumps(total.to_dict(), sort_keys=True))
    logger.info("wrote %s with %d scanpaths", manifest_path, len(all_scanpaths))


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n-images", type=int, default=4, show_default=True)
@click.option("--n-scanpaths", type=int, default=8, show_default=True)
@click.option("--width", type=int, default=128, show_default=True)
@click.option("--height", type=int, default=128, show_default=True)
@click.option("--fixations", nargs=2, type=int, default=(2, 8), show_default=True, help="Min/max fixations per scanpath.")
@click.option("--durations", nargs=2, type=float, default=(0.1, 1.5), show_default=True, help="Min/max fixation duration in seconds.")
@click.option("--split", type=click.Choice(["alpha", "beta"]), default="alpha", show_default=True)
@click.option("--no-images", is_flag=True, help="Skip writing PNG files (geometry-only manifest).")
@click.option("--out", "out", type=click.Path(file_okay=False), default=None)
@click.pass_context
def synth(ctx, seed, n_images, n_scanpaths, width, height, fixations, durations, split, no_images, out):
    """Generate a deterministic synthetic dataset (images + manifest)."""
    out = _resolve_out(ctx, out)
    try:
        manifest = synthesize_manifest(
            seed=seed,
            n_images=n_images,
            n_scanpaths=n_scanpaths,
            width=width,
            height=height,
            fixation_count_range=tuple(fixations),
            duration_range_s=tuple(durations),
            split=split,
            image_dir=None if no_images else os.path.join(out, "images"),
        )
    except ValueError as exc:
        _fail(str(exc), EXIT_USAGE)
    manifest_path = os.path.join(out, "manifest.json")
    save_manifest(manifest, manifest_path)
    echo_resolved(out, {
        "command": "synth", "seed": seed, "n_images": n_images, "n_scanpaths": n_scanpaths,
        "width": width, "height": height, "fixations": list(fixations),
        "durations": list(durations), "split": split,
    })
    click.echo(json.dumps(summarize_manifest(manifest).to_dict(), sort_keys=True))


def _render_config(ctx, fps, k, radius) -> RenderConfig:
    return build_dataclass(
        RenderConfig,
        section(ctx.obj["config"], "render"),
        {"fps": fps, "k": k, "dot_radius_px": radius},
    )


@main.command()
@click.option("--mode", type=click.Choice(["video", "heatmap", "text"]), required=True)
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out", type=click.Path(file_okay=False), default=None)
@click.option("--fps", type=int, default=None, help="Frames per second of the virtual video.")
@click.option("--k", type=int, default=None, help="Sampled frame count.")
@click.option("--radius", type=int, default=None, help="Gaze dot radius in pixels.")
@click.option("--ordering", type=click.Choice(list(ORDERINGS)), default="duration_desc", show_default=True, help="Line order for text mode.")
@click.option("--workers", type=int, default=1, show_default=True, help="Worker threads; scanpaths render independently.")
@click.option("--encoder-cmd", default=None, help="External command run once per frame directory after video rendering; '{dir}' expands to the directory (frames themselves are never encoded in-process).")
@click.pass_context
def render(ctx, mode, manifest_path, out, fps, k, radius, ordering, workers, encoder_cmd):
    """Render every scanpath in the manifest as video frames, a heatmap,
    or fixation text."""
    out = _resolve_out(ctx, out)
    if workers < 1:
        _fail("--workers must be >= 1", EXIT_USAGE)
    if encoder_cmd and mode != "video":
        _fail("--encoder-cmd only applies to --mode video", EXIT_USAGE)
    try:
        config = _render_config(ctx, fps, k, radius)
    except ValueError as exc:
        _fail(str(exc), EXIT_USAGE)
    manifest = load_manifest(manifest_path)
    index = manifest.image_index()

    def render_one(scanpath: ScanPath) -> None:
        image = index[scanpath.image_id]
        target = _scanpath_dir(out, scanpath)
        os.makedirs(target, exist_ok=True)
        if mode == "video":
            plan = plan_frames(scanpath, config)
            write_frameset(render_video(image, scanpath, plan, config), target)
            if encoder_cmd:
                command = encoder_cmd.replace("{dir}", target)
                completed = subprocess.run(command, shell=True, capture_output=True, text=True)
                if completed.returncode != 0:
                    raise PipelineError(
                        f"encoder command failed for {target}: {completed.stderr.strip()}"
                    )
        elif mode == "heatmap":
            result = render_heatmap(image, scanpath, config)
            save_png(result.image, os.path.join(target, "heatmap.png"))
            with open(os.path.join(target, "heatmap.json"), "w", encoding="utf-8") as fh:
                json.dump(result.dots_dict(), fh, indent=2, sort_keys=True)
                fh.write("\n")
        else:
            text = render_fixation_text(scanpath, image, ordering)
            with open(os.path.join(target, "fixations.txt"), "w", encoding="utf-8") as fh:
                fh.write(text + "\n")

    scanpaths = sorted(manifest.scanpaths, key=lambda sp: sp.key)
    try:
        if workers == 1:
            for scanpath in scanpaths:
                render_one(scanpath)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(render_one, scanpaths))
    except PipelineError as exc:
        _fail(str(exc), EXIT_RUNTIME)
    echo_resolved(out, {
        "command": "render", "mode": mode, "manifest": manifest_path,
        "render": dataclasses.asdict(config), "ordering": ordering, "workers": workers,
    })
    click.echo(json.dumps({"rendered": len(scanpaths), "mode": mode}, sort_keys=True))


def _load_exemplars(path: str | None) -> list[str]:
    if path is None:
        return []
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list) or not all(isinstance(item, str) for item in data):
        raise ValueError(f"exemplar file {path!r} must be a JSON list of strings")
    return data


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--task", type=click.Choice([t.value for t in TaskKind]), required=True)
@click.option("--gaze-mode", type=click.Choice([m.value for m in GazeMode]), required=True)
@click.option("--endpoint-config", "endpoint_path", type=click.Path(exists=True, dir_okay=False), default=None, help="YAML/JSON file with endpoint settings (base_url, model_name, ...).")
@click.option("--exemplars", "exemplars_path", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON list of exemplar reports.")
@click.option("--templates", "templates_path", type=click.Path(exists=True, dir_okay=False), default=None, help="Instruction template file (key=multiline-value).")
@click.option("--resume", is_flag=True, help="Allow appending to an existing records file, skipping completed requests.")
@click.option("--strict-exemplars", is_flag=True, help="Fail when the exemplar count is not 3.")
@click.option("--out", "out", type=click.Path(file_okay=False), default=None)
@click.option("--fps", type=int, default=None)
@click.option("--k", type=int, default=None)
@click.option("--radius", type=int, default=None)
@click.pass_context
def run(ctx, manifest_path, task, gaze_mode, endpoint_path, exemplars_path, templates_path, resume, strict_exemplars, out, fps, k, radius):
    """Build prompt bundles for every scanpath and send them to the endpoint,
    recording one JSONL line per request."""
    out = _resolve_out(ctx, out)
    task = TaskKind(task)
    gaze_mode = GazeMode(gaze_mode)
    try:
        render_config = _render_config(ctx, fps, k, radius)
        endpoint_section = section(ctx.obj["config"], "endpoint")
        endpoint_section.update(load_config_file(endpoint_path))
        endpoint = build_dataclass(EndpointConfig, endpoint_section, {})
    except (ValueError, TypeError) as exc:
        _fail(f"invalid configuration: {exc}", EXIT_USAGE)
    try:
        exemplars = _load_exemplars(exemplars_path)
        templates = load_templates(templates_path) if templates_path else None
    except (ValueError, OSError) as exc:
        _fail(str(exc), EXIT_USAGE)

    manifest = load_manifest(manifest_path)
    index = manifest.image_index()
    scanpaths = sorted(manifest.scanpaths, key=lambda sp: sp.key)
    if task is TaskKind.impression_generation:
        missing = [sp.key for sp in scanpaths if not manifest.reports.get(sp.key) or not manifest.reports[sp.key].findings]
        if missing:
            _fail(
                f"impression generation needs findings in the manifest reports; missing for {missing[0]}",
                EXIT_USAGE,
            )

    records_path = os.path.join(out, "records.jsonl")
    if os.path.exists(records_path) and os.path.getsize(records_path) > 0 and not resume:
        _fail(
            f"records file {records_path} already exists; pass --resume to continue it",
            EXIT_USAGE,
        )

    def bundles():
        for scanpath in scanpaths:
            findings = None
            if task is TaskKind.impression_generation:
                findings = manifest.reports[scanpath.key].findings
            yield build_prompt(
                task,
                gaze_mode,
                scanpath,
                index[scanpath.image_id],
                exemplars,
                findings=findings,
                render_config=render_config,
                templates=templates,
                strict_exemplars=strict_exemplars,
            )

    echo_resolved(out, {
        "command": "run", "manifest": manifest_path, "task": task.value,
        "gaze_mode": gaze_mode.value, "render": dataclasses.asdict(render_config),
        "endpoint": dataclasses.asdict(endpoint), "exemplars": exemplars_path,
        "templates": templates_path, "resume": resume,
    })
    sink = RecordSink(records_path)
    try:
        summary = run_batch(bundles(), endpoint, sink)
    except PipelineError as exc:
        _fail(str(exc), EXIT_RUNTIME)
    click.echo(json.dumps(summary.to_dict(), sort_keys=True))
    if summary.failed:
        raise SystemExit(EXIT_RUNTIME)


@main.command()
@click.option("--scores-csv", "scores_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--baseline", "baseline_model", required=True, help="Model id whose scores define 100.")
@click.option("--base-method", default="base", show_default=True, help="Method id used as the no-gaze reference row.")
@click.option("--exclude-from-best", default="", help="Comma-separated model ids exempt from best-score flagging.")
@click.option("--out", "out", type=click.Path(file_okay=False), default=None)
@click.pass_context
def score(ctx, scores_path, baseline_model, base_method, exclude_from_best, out):
    """Scale raw scores against the baseline, aggregate the table, and emit
    markdown plus CSV reports."""
    out = _resolve_out(ctx, out)
    exclude = tuple(part.strip() for part in exclude_from_best.split(",") if part.strip())
    try:
        with open(scores_path, "r", encoding="utf-8") as fh:
            raw = read_scores_csv(fh)
        cells = scale_scores(raw, baseline_model)
        table = aggregate_table(cells, base_method_id=base_method)
        markdown = emit_markdown(table, exclude_from_best=exclude)
        csv_text = emit_csv(table)
    except ScoreValidationError as exc:
        _fail(str(exc), EXIT_USAGE)
    with open(os.path.join(out, "scores.md"), "w", encoding="utf-8") as fh:
        fh.write(markdown)
    with open(os.path.join(out, "scores.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text)
    echo_resolved(out, {
        "command": "score", "scores_csv": scores_path, "baseline": baseline_model,
        "base_method": base_method, "exclude_from_best": list(exclude),
    })
    click.echo(markdown, nl=False)


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--split", type=click.Choice(["alpha", "beta"]), default=None, help="Restrict to one split.")
def stats(manifest_path, split):
    """Print dataset statistics (overall and per split)."""
    manifest = load_manifest(manifest_path)
    if split:
        payload = summarize_manifest(manifest, split=split).to_dict()
    else:
        payload = {
            "overall": summarize_manifest(manifest).to_dict(),
            "alpha": summarize_manifest(manifest, split="alpha").to_dict(),
            "beta": summarize_manifest(manifest, split="beta").to_dict(),
        }
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8080, show_default=True)
def serve(host, port):
    """Run the HTTP service wrapping the pipeline operations."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


@main.command("mock-endpoint")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8081, show_default=True)
@click.option("--response-text", default=None, help="Canned completion text.")
@click.option("--reject-temperature", type=float, default=None, help="Reject requests carrying exactly this temperature.")
def mock_endpoint(host, port, response_text, reject_temperature):
    """Run the bundled mock chat-completions endpoint (for dry runs)."""
    import uvicorn

    from .service.mock_lvlm import DEFAULT_RESPONSE_TEXT, create_mock_app

    app = create_mock_app(
        response_text=response_text or DEFAULT_RESPONSE_TEXT,
        reject_temperature=reject_temperature,
    )
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
