"""FastAPI application wrapping the geometry kernel.

Every endpoint is stateless: geometry travels in the request body using the
same JSON formats the CLI reads from disk. Kernel errors map to 422 with a
machine-readable code.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import PlapproxError
from . import handlers, models

app = FastAPI(
    title="plapprox",
    description="Exact piecewise-linear approximation kernel: simplicial "
                "approximation, surjectivization and epsilon-squeezing.",
    version="0.1.0",
)


@app.exception_handler(PlapproxError)
async def kernel_error_handler(request: Request, exc: PlapproxError):
    return JSONResponse(
        status_code=422,
        content={"error": exc.code, "message": str(exc),
                 "exit_code": exc.exit_code},
    )


@app.get("/api/health")
def health():
    return {"status": "ok"}


@app.post("/api/validate", response_model=models.ValidateResponse)
def validate(req: models.ValidateRequest):
    return handlers.handle_validate(req)


@app.post("/api/sd", response_model=models.SdResponse)
def sd(req: models.SdRequest):
    return handlers.handle_sd(req)


@app.post("/api/stars", response_model=models.StarsResponse)
def stars(req: models.StarsRequest):
    return handlers.handle_stars(req)


@app.post("/api/approx", response_model=models.ResultResponse)
def approx(req: models.ApproxRequest):
    return handlers.handle_approx(req)


@app.post("/api/surjectivize", response_model=models.ResultResponse)
def surjectivize(req: models.ApproxRequest):
    return handlers.handle_surjectivize(req)


@app.post("/api/squeeze", response_model=models.SqueezeResponse)
def squeeze(req: models.SqueezeRequest):
    return handlers.handle_squeeze(req)


@app.post("/api/budget", response_model=models.BudgetResponse)
def budget(req: models.BudgetRequest):
    return handlers.handle_budget(req)


@app.post("/api/supnorm", response_model=models.SupnormResponse)
def supnorm(req: models.SupnormRequest):
    return handlers.handle_supnorm(req)


@app.post("/api/pipeline", response_model=models.ResultResponse)
def run_pipeline(req: models.PipelineRequest):
    return handlers.handle_pipeline(req)


@app.post("/api/verify", response_model=models.VerifyResponse)
def verify(req: models.VerifyRequest):
    return handlers.handle_verify(req)


@app.post("/api/render-svg", response_model=models.RenderResponse)
def render(req: models.RenderRequest):
    return handlers.handle_render_svg(req)
