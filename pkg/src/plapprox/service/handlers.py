"""Service handlers: the single implementation behind both the HTTP app and
the CLI (which calls these in process)."""

from __future__ import annotations

from .. import exact, files
from ..approximation import (
    Budgets,
    surjective_simplicial_approximation,
    surjectivize,
)
from ..complexes import validate_complex
from ..errors import PlapproxError, UnknownVertex
from ..maps import certified_sup_distance
from ..pipeline import approx_result_to_json, pipeline, verify_report
from ..render import render_svg
from ..squeezing import epsilon_budget, squeeze_map
from . import models


def handle_validate(req: models.ValidateRequest) -> models.ValidateResponse:
    raw = req.complex.model_dump()
    report = validate_complex(raw["ambient_dim"], raw["vertices"],
                              raw["simplices"])
    payload = files.validation_report_to_json(report)
    return models.ValidateResponse(**payload)


def handle_sd(req: models.SdRequest) -> models.SdResponse:
    cx = files.complex_from_json(req.complex.model_dump())
    out = cx.sd_k(req.k, budget=req.budget_simplices)
    return models.SdResponse(
        complex=files.complex_to_json(out),
        simplex_count=len(out),
        squared_mesh=exact.fmt(out.squared_mesh()),
    )


def handle_stars(req: models.StarsRequest) -> models.StarsResponse:
    cx = files.complex_from_json(req.complex.model_dump())
    kind = req.kind
    if kind == "subcomplex":
        if not req.cells:
            raise UnknownVertex("kind=subcomplex needs `cells`")
        cells = [cx.requires_member([cx.id_of(n) for n in c])
                 for c in req.cells]
        star = cx.star_of_subcomplex(cells)
        out = star.cells()
        center = star.center
    else:
        if req.vertex is None:
            raise UnknownVertex(f"kind={kind} needs `vertex`")
        vid = cx.id_of(req.vertex)
        if kind == "open":
            star = cx.open_star(vid)
            out = star.cells()
            center = star.center
        elif kind == "closed":
            out = sorted(cx.closed_star(vid), key=lambda s: (len(s), s))
            center = req.vertex
        elif kind == "second":
            star = cx.second_star(vid)
            out = star.cells()
            center = star.center
        else:
            raise UnknownVertex(f"unknown star kind {kind!r}")
    return models.StarsResponse(
        center=center,
        cells=[[cx.name_of(v) for v in s] for s in out],
    )


def _approx_budgets(req) -> Budgets:
    return Budgets(
        kappa_max=req.kappa_max,
        sampling_depth=req.depth,
        simplex_budget=req.budget_simplices,
    )


def _oracle_and_complexes(req):
    fo = files.oracle_from_json(req.oracle)
    domain = fo.domain
    codomain = fo.codomain
    if getattr(req, "domain", None) is not None:
        domain = files.complex_from_json(req.domain.model_dump())
    if getattr(req, "codomain", None) is not None:
        codomain = files.complex_from_json(req.codomain.model_dump())
    return fo, domain, codomain


def handle_approx(req: models.ApproxRequest) -> models.ResultResponse:
    if req.eps_sq is None:
        raise PlapproxError("approx needs --eps (use surjectivize without)")
    fo, domain, codomain = _oracle_and_complexes(req)
    eps_sq = exact.rat(req.eps_sq)
    sr = surjective_simplicial_approximation(
        fo, domain, codomain, eps_sq, None, _approx_budgets(req),
        order_names=req.order,
    )
    result = approx_result_to_json(sr, req.oracle, domain, codomain, eps_sq)
    return models.ResultResponse(result=result)


def handle_surjectivize(req: models.ApproxRequest) -> models.ResultResponse:
    fo, domain, codomain = _oracle_and_complexes(req)
    order = files.order_from_json(req.order, codomain)
    sr = surjectivize(fo, domain, codomain, order, _approx_budgets(req))
    result = approx_result_to_json(sr, req.oracle, domain, codomain)
    return models.ResultResponse(result=result)


def handle_squeeze(req: models.SqueezeRequest) -> models.SqueezeResponse:
    cx = files.complex_from_json(req.complex.model_dump())
    if isinstance(req.ratio, dict):
        ratio = {}
        for key, val in req.ratio.items():
            ids = tuple(sorted(cx.id_of(n) for n in key.split("-")))
            ratio[ids] = exact.rat(val)
    else:
        ratio = exact.rat(req.ratio)
    sq = squeeze_map(cx, ratio)
    images = []
    for raw in req.points:
        y = sq.evaluate(files.point_from_json(raw))
        images.append(files.point_to_json(y))
    return models.SqueezeResponse(images=images)


def handle_budget(req: models.BudgetRequest) -> models.BudgetResponse:
    cx = files.complex_from_json(req.complex.model_dump())
    budget = epsilon_budget(cx)
    return models.BudgetResponse(budget=budget.as_dict(cx))


def handle_supnorm(req: models.SupnormRequest) -> models.SupnormResponse:
    f = files.oracle_from_json(req.f)
    g = files.oracle_from_json(req.g)
    budget_sq = None if req.budget_sq is None else exact.rat(req.budget_sq)
    itv = certified_sup_distance(
        f, g, budget_sq=budget_sq, max_depth=req.max_depth,
        simplex_budget=req.budget_simplices,
    )
    return models.SupnormResponse(interval=itv.as_dict())


def handle_pipeline(req: models.PipelineRequest) -> models.ResultResponse:
    fo = files.oracle_from_json(req.oracle)
    g0 = None
    if req.g0 is not None:
        g0 = files.plmap_from_json(req.g0)
    budgets = Budgets(
        kappa_max=req.kappa_max,
        sampling_depth=req.depth,
        simplex_budget=req.budget_simplices,
    )
    art = pipeline(
        fo, exact.rat(req.eps_sq), g0=g0, budgets=budgets,
        density_depth=req.density_depth, oracle_json=req.oracle,
        g0_json=req.g0, order_names=req.order,
    )
    return models.ResultResponse(result=art.report)


def handle_verify(req: models.VerifyRequest) -> models.VerifyResponse:
    verdict = verify_report(req.result, depth=req.depth, seed=req.seed,
                            simplex_budget=req.budget_simplices)
    return models.VerifyResponse(verdict=verdict)


def handle_render_svg(req: models.RenderRequest) -> models.RenderResponse:
    cx = files.complex_from_json(req.complex.model_dump())
    arrows = None
    if req.arrows:
        arrows = [(files.point_from_json(a), files.point_from_json(b))
                  for a, b in req.arrows]
    svg = render_svg(cx, labels=req.labels, projection=req.projection,
                     arrows=arrows)
    return models.RenderResponse(svg=svg)
