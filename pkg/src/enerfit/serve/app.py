"""HTTP API: prediction services, model registry, pipeline runs, report
export. Static API-key auth on every /api/v1 route."""

from __future__ import annotations

import hmac
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path

from fastapi import APIRouter, Depends, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..errors import EnerfitError
from ..orchestrate import (
    ArtifactStore,
    Orchestrator,
    validate_run_config,
)
from .predictor import ModelCache, predict_pv, predict_retrofit, render_report_csv
from .schemas import (
    DeployRequest,
    LaunchRequest,
    LaunchResponse,
    PredictionResponse,
    PvPredictRequest,
    RetrofitPredictRequest,
)


class UnauthorizedError(EnerfitError):
    code = "Unauthorized"


class UnsupportedFormatError(EnerfitError):
    code = "UnsupportedFormat"


_STATUS_BY_CODE = {
    "Unauthorized": 401,
    "NotFound": 404,
    "NoModelDeployed": 503,
    "UnsupportedFormat": 400,
    "TaskMismatch": 400,
    "CorruptWeights": 400,
    "MissingArtifact": 400,
    "BadSteps": 400,
}


@dataclass
class ServeSettings:
    artifact_root: Path
    api_keys: tuple[str, ...] = ()
    auth_enabled: bool = True
    prediction_history: int = 1000
    static_dir: Path | None = None

    def __post_init__(self):
        self.artifact_root = Path(self.artifact_root)
        if self.auth_enabled and not self.api_keys:
            raise ValueError("auth is enabled but no API keys are configured")


class PredictionStore:
    """Keeps the most recent predictions so reports can be exported later."""

    def __init__(self, limit: int):
        self.limit = limit
        self._items: OrderedDict[str, dict] = OrderedDict()

    def put(self, prediction: dict) -> None:
        key = prediction["prediction_id"]
        self._items[key] = prediction
        self._items.move_to_end(key)
        while len(self._items) > self.limit:
            self._items.popitem(last=False)

    def get(self, prediction_id: str) -> dict | None:
        return self._items.get(prediction_id)


def create_app(settings: ServeSettings, orchestrator: Orchestrator | None = None) -> FastAPI:
    store = ArtifactStore(settings.artifact_root)
    orch = orchestrator or Orchestrator(store)
    models = ModelCache(store)
    predictions = PredictionStore(settings.prediction_history)

    app = FastAPI(title="enerfit", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.orchestrator = orch
    app.state.store = store

    def require_key(request: Request) -> None:
        if not settings.auth_enabled:
            return
        provided = request.headers.get("Authorization", "")
        # Constant-time check against every configured key.
        ok = False
        for key in settings.api_keys:
            ok |= hmac.compare_digest(provided.encode(), key.encode())
        if not ok:
            raise UnauthorizedError("missing or invalid API key")

    api = APIRouter(prefix="/api/v1", dependencies=[Depends(require_key)])

    @app.exception_handler(EnerfitError)
    async def enerfit_error_handler(request: Request, exc: EnerfitError):
        status = _STATUS_BY_CODE.get(exc.code, 422)
        return JSONResponse(status_code=status, content=exc.to_dict())

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        loc = [str(part) for part in first.get("loc", []) if part != "body"]
        content = {"code": "ValidationError", "message": first.get("msg", "invalid request body")}
        if loc:
            content["field"] = ".".join(loc)
        return JSONResponse(status_code=422, content=content)

    @api.post("/retrofit/predict", response_model=PredictionResponse)
    def retrofit_predict(body: RetrofitPredictRequest):
        loaded = models.active("retrofit")
        prediction = predict_retrofit(loaded, body.model_dump())
        predictions.put(prediction)
        return prediction

    @api.post("/pv/predict", response_model=PredictionResponse)
    def pv_predict(body: PvPredictRequest):
        loaded = models.active("pv")
        prediction = predict_pv(loaded, body.model_dump(exclude_none=True))
        predictions.put(prediction)
        return prediction

    @api.get("/retrofit/report")
    def retrofit_report(run: str, format: str = "csv"):
        if format != "csv":
            raise UnsupportedFormatError(f"unsupported report format {format!r}")
        prediction = predictions.get(run)
        if prediction is None:
            from ..orchestrate.store import NotFoundError

            raise NotFoundError(f"unknown prediction {run!r}")
        csv_text = render_report_csv(prediction)
        return Response(
            content=csv_text,
            media_type="text/csv",
            headers={"Content-Disposition": f'attachment; filename="report_{run}.csv"'},
        )

    @api.get("/models")
    def list_models():
        return store.list_models()

    @api.post("/models/{service}/deploy")
    def deploy_model(service: str, body: DeployRequest):
        info = orch.deploy(service, body.checkpoint_path)
        return info.to_dict()

    @api.post("/runs", status_code=202, response_model=LaunchResponse)
    def launch_run(body: LaunchRequest):
        try:
            config = validate_run_config(body.config)
        except EnerfitError as exc:
            return JSONResponse(status_code=400, content=exc.to_dict())
        run_id = orch.launch(config, body.steps)
        return LaunchResponse(run_id=run_id)

    @api.get("/runs/{run_id}")
    def run_status(run_id: str):
        return orch.run_status(run_id).to_dict()

    @api.get("/runs/{run_id}/artifacts/{artifact_path:path}")
    def run_artifact(run_id: str, artifact_path: str):
        from ..orchestrate.store import NotFoundError

        run_dir = store.run_dir(run_id).resolve()
        if not run_dir.is_dir():
            raise NotFoundError(f"unknown run {run_id!r}")
        target = (run_dir / artifact_path).resolve()
        if run_dir not in target.parents or not target.is_file():
            raise NotFoundError(f"no artifact {artifact_path!r} in run {run_id!r}")
        media = {
            ".json": "application/json",
            ".csv": "text/csv",
        }.get(target.suffix, "application/octet-stream")
        return Response(content=target.read_bytes(), media_type=media)

    app.include_router(api)

    if settings.static_dir is not None and Path(settings.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=settings.static_dir, html=True), name="static")

    return app
