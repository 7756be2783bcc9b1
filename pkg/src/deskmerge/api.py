"""HTTP front end: ``uvicorn deskmerge.api:app`` or ``deskmerge serve``."""

from __future__ import annotations

from typing import Any

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import service
from .mapping import MappingError
from .schema import GenRequest, MergeRequest, RetargetRequest, ValidateRequest
from .solver import OracleTooLarge
from .workspace import ScenarioError

app = FastAPI(title="deskmerge", version="0.1.0")


class MergeResponse(BaseModel):
    exit_code: int
    document: dict[str, Any]


class ValidateResponse(BaseModel):
    exit_code: int
    report: dict[str, Any]


class RetargetResponse(BaseModel):
    outputs: list[dict[str, Any]]


def _unprocessable(exc: Exception) -> HTTPException:
    detail: dict[str, Any] = {"message": str(exc)}
    if isinstance(exc, ScenarioError):
        detail = {"message": exc.message, "path": exc.path}
    return HTTPException(status_code=422, detail=detail)


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/merge", response_model=MergeResponse)
def merge(req: MergeRequest) -> MergeResponse:
    try:
        doc, code = service.merge(req.scenario.model_dump(), req.mode)
    except (ScenarioError, OracleTooLarge) as exc:
        raise _unprocessable(exc) from None
    return MergeResponse(exit_code=code, document=doc)


@app.post("/validate", response_model=ValidateResponse)
def validate(req: ValidateRequest) -> ValidateResponse:
    try:
        report, code = service.validate(req.scenario.model_dump())
    except ScenarioError as exc:
        raise _unprocessable(exc) from None
    return ValidateResponse(exit_code=code, report=report)


@app.post("/retarget", response_model=RetargetResponse)
def retarget(req: RetargetRequest) -> RetargetResponse:
    try:
        outputs = service.retarget(
            req.merged, [p.model_dump() for p in req.stream], req.params.model_dump(), req.source_user
        )
    except (MappingError, ValueError) as exc:
        raise _unprocessable(exc) from None
    return RetargetResponse(outputs=outputs)


@app.post("/gen")
def gen(req: GenRequest) -> dict:
    return service.gen(req.combination, req.seed)
