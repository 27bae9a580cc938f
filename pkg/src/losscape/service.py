"""HTTP API over the experiment store plus asynchronous compute jobs.

All non-CSV payloads are JSON. Grid matrices are sent row-major with null
for masked/non-finite entries. The static web UI bundle, when present, is
served from the same origin as the API.
"""

from __future__ import annotations

import math
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import httpx
import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import datasets, landscape, nn, train
from .analysis import ClipSpec, contour_levels, clip_radius, summary_stats
from .csvio import CsvFormatError, Experiment, parse_csv
from .kernels import BACKEND
from .modelspec import ModelSpecError, model_from_dicts
from .store import ExperimentNotFound, ExperimentStore

DEFAULT_FETCH_CAP = 256 * 1024 * 1024
DEFAULT_FETCH_TIMEOUT = 30.0

DATASET_CLASSES = {"blobs": datasets.BLOB_CLASSES, "xor-image": datasets.XOR_CLASSES}


class DatasetSpec(BaseModel):
    kind: str
    size: int
    seed: int = 0


class TrainSpec(BaseModel):
    batch_size: int
    learning_rate: float
    epochs: int
    seed: int = 0


class GridSpecModel(BaseModel):
    x_min: float = -1.0
    x_max: float = 1.0
    y_min: float = -1.0
    y_max: float = 1.0
    resolution_x: int = 60
    resolution_y: int = 60


class EvalSpecModel(BaseModel):
    subsample: int | str = 100
    subsample_seed: int = 0
    loss_kind: str = "cross-entropy"


class JobRequest(BaseModel):
    name: str
    experiment_id: str | None = None
    model: list[dict]
    dataset: DatasetSpec
    train: TrainSpec | None = None
    init_seed: int = 0
    direction_seed: int = 0
    grid: GridSpecModel = Field(default_factory=GridSpecModel)
    eval: EvalSpecModel = Field(default_factory=EvalSpecModel)


class ComputeJob:
    """Lifecycle: queued -> running -> done | failed. Progress counts grid
    points and only reaches total when the job is done."""

    def __init__(self, job_id: str, total: int):
        self.job_id = job_id
        self.total = total
        self.state = "queued"
        self.done = 0
        self.result_id: str | None = None
        self.error: str | None = None
        self._lock = threading.Lock()

    def set_progress(self, count: int) -> None:
        with self._lock:
            self.done = max(self.done, min(count, self.total))

    def as_dict(self) -> dict:
        with self._lock:
            return {
                "job_id": self.job_id,
                "state": self.state,
                "progress": {"done": self.done, "total": self.total},
                "result_id": self.result_id,
                "error": self.error,
            }


def _json_losses(losses: np.ndarray) -> list[list[float | None]]:
    return [[float(v) if math.isfinite(v) else None for v in row] for row in losses]


def _entry(exp: Experiment) -> dict:
    return {
        "id": exp.id,
        "name": exp.name,
        "created_at": exp.created_at,
        "metadata": exp.metadata,
        "stats": summary_stats(exp.grid).as_dict(),
    }


def _validate_job(req: JobRequest) -> tuple:
    """Everything that can be rejected before any work happens."""
    try:
        model = model_from_dicts(req.model)
    except ModelSpecError as e:
        raise HTTPException(400, detail=str(e))
    if req.dataset.kind not in DATASET_CLASSES:
        raise HTTPException(400, detail=f"unknown dataset kind {req.dataset.kind!r}")
    if req.dataset.size < 1:
        raise HTTPException(400, detail="dataset size must be >= 1")
    input_shape = (1, datasets.IMAGE_SIDE, datasets.IMAGE_SIDE)
    try:
        out_shape = nn.model_output_shape(model, input_shape)
    except nn.ShapeError as e:
        raise HTTPException(400, detail=str(e))
    n_classes = DATASET_CLASSES[req.dataset.kind]
    if len(out_shape) != 1 or out_shape[0] < n_classes:
        raise HTTPException(
            400,
            detail=f"model output shape {out_shape} cannot score {n_classes} classes",
        )
    grid = landscape.GridSpec(
        req.grid.x_min, req.grid.x_max, req.grid.y_min, req.grid.y_max,
        req.grid.resolution_x, req.grid.resolution_y,
    )
    subsample = req.eval.subsample
    if isinstance(subsample, str) and subsample != landscape.FULL:
        try:
            subsample = int(subsample)
        except ValueError:
            raise HTTPException(400, detail=f"subsample must be a count or 'full', got {subsample!r}")
    cfg = landscape.EvalConfig(subsample, req.eval.subsample_seed, req.eval.loss_kind)
    try:
        grid.validate()
        cfg.validate()
        if cfg.subsample != landscape.FULL and cfg.subsample > req.dataset.size:
            raise ValueError(f"subsample {cfg.subsample} exceeds dataset size {req.dataset.size}")
        if req.train is not None:
            train.TrainConfig(
                req.train.batch_size, req.train.learning_rate, req.train.epochs, req.train.seed
            ).validate(req.dataset.size)
    except ValueError as e:
        raise HTTPException(400, detail=str(e))
    return model, grid, cfg


def create_app(
    data_dir: str | Path,
    workers: int = 2,
    fetch_cap_bytes: int = DEFAULT_FETCH_CAP,
    fetch_timeout_secs: float = DEFAULT_FETCH_TIMEOUT,
    static_dir: str | Path | None = None,
    eval_workers: int = 2,
) -> FastAPI:
    app = FastAPI(title="losscape", version="0.1.0")
    store = ExperimentStore(data_dir)
    jobs: dict[str, ComputeJob] = {}
    executor = ThreadPoolExecutor(max_workers=max(1, workers))
    app.state.store = store
    app.state.jobs = jobs
    app.state.executor = executor

    @app.exception_handler(RequestValidationError)
    async def invalid_payload(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc.errors())})

    def store_csv_bytes(body: bytes) -> JSONResponse:
        try:
            experiments = parse_csv(body)
        except CsvFormatError as e:
            raise HTTPException(400, detail=str(e))
        for exp in experiments:
            if exp.id in store:
                return JSONResponse(
                    status_code=409,
                    content={"detail": f"experiment id {exp.id!r} already exists", "id": exp.id},
                )
        created = [_entry(store.put(exp)) for exp in experiments]
        return JSONResponse(status_code=201, content=created)

    @app.post("/api/experiments")
    async def upload_experiments(request: Request):
        body = await request.body()
        return store_csv_bytes(body)

    # sync handler on purpose: it runs in the threadpool, so fetching a URL
    # served by this same process (e.g. the bundled sample) cannot deadlock
    # the event loop
    @app.post("/api/experiments/from-url")
    def upload_from_url(payload: dict):
        url = payload.get("url", "")
        if not isinstance(url, str) or not url.lower().startswith(("http://", "https://")):
            raise HTTPException(400, detail=f"url must be http(s), got {url!r}")
        chunks = []
        total = 0
        try:
            with httpx.Client(timeout=fetch_timeout_secs, follow_redirects=True) as client:
                with client.stream("GET", url) as response:
                    response.raise_for_status()
                    declared = response.headers.get("content-length")
                    if declared and int(declared) > fetch_cap_bytes:
                        raise HTTPException(413, detail=f"remote file exceeds cap of {fetch_cap_bytes} bytes")
                    for chunk in response.iter_bytes():
                        total += len(chunk)
                        if total > fetch_cap_bytes:
                            raise HTTPException(413, detail=f"remote file exceeds cap of {fetch_cap_bytes} bytes")
                        chunks.append(chunk)
        except HTTPException:
            raise
        except httpx.HTTPError as e:
            raise HTTPException(502, detail=f"fetch failed: {e}")
        return store_csv_bytes(b"".join(chunks))

    @app.get("/api/experiments")
    def list_experiments():
        return store.list()

    @app.get("/api/experiments/{exp_id}")
    def get_experiment(exp_id: str):
        try:
            return _entry(store.get(exp_id))
        except ExperimentNotFound:
            raise HTTPException(404, detail=f"no experiment with id {exp_id!r}")

    def _parse_radius(raw: str) -> float:
        try:
            radius = float(raw)
        except ValueError:
            raise HTTPException(400, detail=f"clip must be 'auto', 'off', or a radius, got {raw!r}")
        if not (math.isfinite(radius) and radius > 0):
            raise HTTPException(400, detail=f"clip radius must be positive, got {raw!r}")
        return radius

    @app.get("/api/experiments/{exp_id}/grid")
    def get_grid(exp_id: str, clip: str = "off", contours: str | None = None):
        try:
            exp = store.get(exp_id)
        except ExperimentNotFound:
            raise HTTPException(404, detail=f"no experiment with id {exp_id!r}")
        grid = exp.grid
        applied_radius = None
        if clip != "off":
            spec = ClipSpec(radius="auto" if clip == "auto" else _parse_radius(clip))
            applied_radius = spec.resolve(grid)
            grid = clip_radius(grid, spec)
        levels = None
        if contours is not None:
            try:
                n = int(contours)
            except ValueError:
                raise HTTPException(400, detail=f"contours must be an integer, got {contours!r}")
            try:
                levels = contour_levels(grid, n)
            except ValueError as e:
                raise HTTPException(400, detail=str(e))
        return {
            "id": exp.id,
            "x_values": [float(v) for v in grid.x_values],
            "y_values": [float(v) for v in grid.y_values],
            "losses": _json_losses(grid.losses),
            "contour_levels": levels,
            "clip_radius": applied_radius,
        }

    @app.delete("/api/experiments/{exp_id}", status_code=204)
    def delete_experiment(exp_id: str):
        store.delete(exp_id, missing_ok=True)
        return Response(status_code=204)

    def run_job(job: ComputeJob, req: JobRequest, model, grid, cfg, exp_id: str):
        job.state = "running"
        try:
            data = datasets.synth_dataset(req.dataset.kind, req.dataset.size, req.dataset.seed)
            params = nn.init_params(model, req.init_seed)
            metadata = {
                "loss_kind": cfg.loss_kind,
                "subsample": str(cfg.subsample),
                "subsample_seed": str(cfg.subsample_seed),
                "subsample_strategy": "seeded-permutation-prefix",
                "init_seed": str(req.init_seed),
                "direction_seed": str(req.direction_seed),
                "dataset": f"{req.dataset.kind}:{req.dataset.size}:{req.dataset.seed}",
                "model": nn.describe_model(model),
                "kernel_backend": BACKEND,
            }
            if req.train is not None:
                cfg_train = train.TrainConfig(
                    req.train.batch_size, req.train.learning_rate, req.train.epochs, req.train.seed
                )
                params = train.train_sgd(model, params, data, cfg_train, loss_kind=cfg.loss_kind)
                metadata["train"] = (
                    f"batch_size={cfg_train.batch_size},learning_rate={cfg_train.learning_rate},"
                    f"epochs={cfg_train.epochs},seed={cfg_train.seed}"
                )
            pair = landscape.filter_normalize(
                landscape.sample_directions(params, req.direction_seed), params
            )
            if pair.warnings:
                metadata["warnings"] = "; ".join(pair.warnings)
            result = landscape.evaluate_grid(
                model, params, pair, data, grid, cfg,
                progress=job.set_progress, workers=eval_workers,
            )
            exp = Experiment(id=exp_id, name=req.name, grid=result, metadata=metadata)
            store.put(exp)
            job.result_id = exp.id
            job.state = "done"
            job.set_progress(job.total)
        except Exception as e:  # job failures are reported, not raised
            job.error = str(e)
            job.state = "failed"

    @app.post("/api/jobs", status_code=201)
    def submit_job(req: JobRequest):
        model, grid, cfg = _validate_job(req)
        job_id = uuid.uuid4().hex
        exp_id = req.experiment_id or f"{req.name or 'job'}-{job_id[:8]}"
        if exp_id in store:
            raise HTTPException(400, detail=f"experiment id {exp_id!r} already exists")
        job = ComputeJob(job_id, total=grid.resolution_x * grid.resolution_y)
        jobs[job_id] = job
        executor.submit(run_job, job, req, model, grid, cfg, exp_id)
        return {"job_id": job_id}

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(404, detail=f"no job with id {job_id!r}")
        return job.as_dict()

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
