"""Pydantic request/response models for the HTTP service.

Geometry payloads travel as plain JSON objects in the file formats (rationals
as "p/q" strings); the handlers parse and validate them exactly.
"""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class ComplexPayload(BaseModel):
    ambient_dim: int
    vertices: dict[str, list[str | int]]
    simplices: list[list[str]]


class ValidateRequest(BaseModel):
    complex: ComplexPayload


class ValidateResponse(BaseModel):
    ok: bool
    violations: list[dict[str, str]] = Field(default_factory=list)


class SdRequest(BaseModel):
    complex: ComplexPayload
    k: int = 1
    budget_simplices: int = 200_000


class SdResponse(BaseModel):
    complex: dict[str, Any]
    simplex_count: int
    squared_mesh: str


class StarsRequest(BaseModel):
    complex: ComplexPayload
    kind: str = "open"  # open | closed | second | subcomplex
    vertex: Optional[str] = None
    cells: Optional[list[list[str]]] = None


class StarsResponse(BaseModel):
    center: str
    cells: list[list[str]]


class ApproxRequest(BaseModel):
    oracle: dict[str, Any]
    domain: Optional[ComplexPayload] = None
    codomain: Optional[ComplexPayload] = None
    eps_sq: Optional[str] = None
    kappa_max: int = 8
    depth: int = 4
    budget_simplices: int = 200_000
    order: Optional[list[str]] = None


class ResultResponse(BaseModel):
    result: dict[str, Any]


class SqueezeRequest(BaseModel):
    complex: ComplexPayload
    ratio: str | dict[str, str]
    points: list[list[str | int]]


class SqueezeResponse(BaseModel):
    images: list[list[str]]


class BudgetRequest(BaseModel):
    complex: ComplexPayload


class BudgetResponse(BaseModel):
    budget: dict[str, Any]


class SupnormRequest(BaseModel):
    f: dict[str, Any]
    g: dict[str, Any]
    budget_sq: Optional[str] = None
    max_depth: int = 6
    budget_simplices: int = 200_000


class SupnormResponse(BaseModel):
    interval: dict[str, Any]


class PipelineRequest(BaseModel):
    oracle: dict[str, Any]
    eps_sq: str
    g0: Optional[dict[str, Any]] = None
    density_depth: int = 3
    kappa_max: int = 8
    depth: int = 4
    budget_simplices: int = 200_000
    order: Optional[list[str]] = None


class VerifyRequest(BaseModel):
    result: dict[str, Any]
    depth: int = 2
    seed: int = 0
    budget_simplices: int = 200_000


class VerifyResponse(BaseModel):
    verdict: dict[str, Any]


class RenderRequest(BaseModel):
    complex: ComplexPayload
    labels: bool = True
    projection: Optional[tuple[int, int]] = None
    arrows: Optional[list[list[list[str | int]]]] = None


class RenderResponse(BaseModel):
    svg: str


class ErrorResponse(BaseModel):
    error: str
    message: str
