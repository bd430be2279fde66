"""HTTP service over pipeline jobs, backing the explorer UI.

Every response is JSON except the Turtle export. Reads hit artifact
files directly; mutations (job creation, stage runs, review decisions,
selection edits) serialize through the per-job lock, so concurrent
readers never observe a half-written state.
"""

import json
import logging
import threading
from pathlib import Path

from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse, PlainTextResponse, RedirectResponse
from fastapi.staticfiles import StaticFiles

from .pipeline import (
    Pipeline,
    PipelineConfig,
    PipelineError,
    ReviewConflict,
    StageOrderError,
)

log = logging.getLogger(__name__)


class JobManager:
    """Registry of jobs under one root directory."""

    def __init__(self, root, default_config: PipelineConfig = None):
        self.root = Path(root)
        self.jobs_dir = self.root / "jobs"
        self.jobs_dir.mkdir(parents=True, exist_ok=True)
        self.default_config = default_config
        self._pipelines: dict = {}
        self._lock = threading.Lock()

    def list_jobs(self) -> list:
        out = []
        for journal in sorted(self.jobs_dir.glob("*/job.json")):
            rec = json.loads(journal.read_text(encoding="utf-8"))
            out.append(
                {
                    "job_id": rec["job_id"],
                    "stage": rec["stage"],
                    "created": rec["created"],
                    "error": rec["error"],
                }
            )
        out.sort(key=lambda r: (r["created"], r["job_id"]))
        return out

    def get(self, job_id: str) -> Pipeline:
        with self._lock:
            if job_id in self._pipelines:
                return self._pipelines[job_id]
            job_dir = self.jobs_dir / job_id
            if not (job_dir / "job.json").is_file():
                raise KeyError(f"unknown job {job_id!r}")
            pipe = Pipeline(job_dir)
            self._pipelines[job_id] = pipe
            return pipe

    def resolve(self, job_id=None) -> Pipeline:
        """The named job, or the most recently created one."""
        if job_id:
            return self.get(job_id)
        jobs = self.list_jobs()
        if not jobs:
            raise KeyError("no jobs exist yet; POST /jobs first")
        return self.get(jobs[-1]["job_id"])

    def create(self, config_obj=None) -> Pipeline:
        with self._lock:
            if config_obj:
                config = PipelineConfig.from_obj(config_obj, base_dir=Path.cwd())
            elif self.default_config is not None:
                config = self.default_config
            else:
                raise ValueError("no config in request and no server default")
            n = 1
            while (self.jobs_dir / f"job-{n:03d}").exists():
                n += 1
            job_id = f"job-{n:03d}"
            pipe = Pipeline(self.jobs_dir / job_id, config=config, job_id=job_id)
            self._pipelines[job_id] = pipe
            return pipe


def create_app(manager: JobManager, ui_dir=None) -> FastAPI:
    app = FastAPI(title="techkg", docs_url=None, redoc_url=None)

    @app.exception_handler(StageOrderError)
    async def _conflict(request, exc):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(ReviewConflict)
    async def _review_conflict(request, exc):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(KeyError)
    async def _not_found(request, exc):
        detail = exc.args[0] if exc.args else str(exc)
        return JSONResponse(status_code=404, content={"detail": str(detail)})

    @app.exception_handler(ValueError)
    async def _bad_request(request, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(PipelineError)
    async def _stage_failed(request, exc):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    # -- jobs ------------------------------------------------------------

    @app.get("/jobs")
    def jobs():
        return manager.list_jobs()

    @app.post("/jobs", status_code=201)
    def create_job(config: dict = Body(default=None)):
        return manager.create(config).record()

    @app.get("/jobs/{job_id}")
    def job(job_id: str):
        return manager.get(job_id).record()

    @app.post("/jobs/{job_id}/stages/{stage}")
    def run_stage(job_id: str, stage: str):
        return manager.get(job_id).run_stage(stage)

    # -- topic map --------------------------------------------------------

    @app.get("/topicmap")
    def topicmap(job: str = None):
        return manager.resolve(job).topicmap()

    @app.get("/clusters")
    def clusters(job: str = None):
        return manager.resolve(job).clusters()

    @app.get("/documents")
    def documents(term: str = "", cluster: int = None, job: str = None):
        return manager.resolve(job).documents(term=term, cluster=cluster)

    @app.get("/scores")
    def scores(job: str = None):
        return manager.resolve(job).scores()

    # -- selection ----------------------------------------------------------

    @app.get("/selection")
    def selection(job: str = None):
        return manager.resolve(job).selection()

    @app.post("/selection")
    def amend_selection(payload: dict = Body(...), job: str = None):
        action = payload.get("action")
        doc_id = payload.get("doc_id", "")
        if action not in ("add", "remove") or not doc_id:
            raise ValueError("body must carry action: add|remove and doc_id")
        pipe = manager.resolve(job)
        if action == "add":
            return pipe.amend(add=doc_id)
        return pipe.amend(remove=doc_id)

    # -- review ------------------------------------------------------------

    @app.get("/review/queue")
    def review_queue(job: str = None):
        return manager.resolve(job).review_queue()

    @app.post("/review/{triple_id}/accept")
    def review_accept(triple_id: str, job: str = None):
        return manager.resolve(job).review_decide(triple_id, accept=True)

    @app.post("/review/{triple_id}/reject")
    def review_reject(triple_id: str, payload: dict = Body(default=None), job: str = None):
        reason = (payload or {}).get("reason", "")
        return manager.resolve(job).review_decide(triple_id, accept=False, reason=reason)

    # -- knowledge graph ----------------------------------------------------

    @app.get("/kg")
    def kg(job: str = None):
        return manager.resolve(job).kg_view()

    @app.get("/kg/stats")
    def kg_stats(job: str = None):
        return manager.resolve(job).kg_statistics()

    @app.get("/kg/report")
    def kg_report(job: str = None):
        return manager.resolve(job).report()

    @app.get("/kg/export.ttl")
    def kg_export(job: str = None):
        return PlainTextResponse(
            manager.resolve(job).kg_turtle(), media_type="text/turtle"
        )

    @app.get("/coverage")
    def coverage(dump: str, job: str = None):
        return manager.resolve(job).coverage(dump)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

        @app.get("/")
        def index():
            return RedirectResponse(url="/ui/")

        log.info("serving UI from %s", ui_dir)

    return app


def serve(manager: JobManager, host: str = "127.0.0.1", port: int = 8765, ui_dir=None):
    import uvicorn

    uvicorn.run(create_app(manager, ui_dir=ui_dir), host=host, port=port)
