"""End-to-end image-preserving approximation and the independent verifier.

The pipeline runs surjective approximation, accepts an optional smoothed
stand-in g0 for the resulting simplicial map, and corrects it with the
squeezing map; the report combines the certified stage bounds by exact
interval arithmetic, so the final bound is recomputable from the report
alone. Reports are canonical JSON: identical inputs give identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import exact, files, sampling
from .approximation import Budgets, surjective_simplicial_approximation
from .complexes import Complex
from .errors import PlapproxError, SupBoundNotMet
from .maps import (
    PLMap,
    SimplicialMap,
    VertexOrder,
    as_oracle,
    is_surjective,
)
from .squeezing import coverage_check, restore_surjectivity


@dataclass
class PipelineArtifacts:
    report: dict
    h: SimplicialMap
    evaluator: object
    domain_fine: Complex
    codomain_fine: Complex


def approx_result_to_json(sr, oracle_json, domain: Complex,
                          codomain: Complex, eps_sq=None) -> dict:
    """Canonical result object for approx/surjectivize runs; the verifier
    reconstructs everything from it."""
    h = sr.h
    fine_cod = h.codomain
    if sr.sup_interval is not None:
        f_vs_h = sr.sup_interval.as_dict()
    else:
        f_vs_h = {
            "lo_sq": "0",
            "hi_sq": exact.fmt(sr.sup_bound_sq),
            "lo_decimal": "0.000000",
            "hi_decimal": exact.decimal_sqrt_str(sr.sup_bound_sq),
            "exact": False,
            "depth": 0,
        }
    out = {
        "kind": "surjective_approximation",
        "inputs": {
            "oracle": oracle_json,
            "domain": files.complex_to_json(domain),
            "codomain": files.complex_to_json(codomain),
            "eps_sq": None if eps_sq is None else exact.fmt(eps_sq),
        },
        "kappa": sr.kappa,
        "ell": sr.ell,
        "kappa_star": sr.kappa_star,
        "kappa_separation": sr.kappa_sep,
        "h_vertex_images": {
            h.domain.name_of(v): fine_cod.name_of(w)
            for v, w in h.vertex_map.items()
        },
        "stage_bounds": {
            "f_vs_h": f_vs_h,
            "star_chain_bound_sq": exact.fmt(sr.sup_bound_sq),
        },
        "surjectivity_witnesses": {
            "-".join(fine_cod.name_of(v) for v in t):
                [h.domain.name_of(v) for v in c]
            for t, c in sr.witnesses.items()
        },
        "reassigned_vertices": sorted(
            {h.domain.name_of(v) for c in sr.witnesses.values() for v in c}
        ),
        "second_star_certificates": {
            "total": len(sr.second_star_certificates),
            "chained": sum(1 for c in sr.second_star_certificates
                           if c.kind == "chained"),
        },
        "classical_map_was_surjective": sr.classical_surjective,
    }
    out["inputs_digest"] = files.digest(out["inputs"])
    return out


def pipeline(f, eps_sq, g0: PLMap | None = None,
             order: VertexOrder | None = None,
             budgets: Budgets | None = None,
             density_depth: int = 3,
             oracle_json=None, g0_json=None,
             order_names=None) -> PipelineArtifacts:
    """Surjectivize within eps/3, perturb (g0 defaults to the simplicial map
    itself), squeeze back, and certify the total bound below eps."""
    fo = as_oracle(f)
    b = Budgets.coerce(budgets)
    eps_sq = exact.rat(eps_sq)
    domain, codomain = fo.domain, fo.codomain
    stage = "surjective_approximation"
    sr = surjective_simplicial_approximation(
        fo, domain, codomain, eps_sq / 9, order, b, order_names=order_names
    )
    h = sr.h
    fine_codomain = h.codomain
    stage = "perturbation"
    if g0 is None:
        g = h
    else:
        g = g0
    stage = "squeeze_correction"
    rr = restore_surjectivity(h, g)
    stage = "density_check"
    cov = coverage_check(rr.evaluator, domain, fine_codomain,
                         depth=density_depth, reference_ell=1,
                         simplex_budget=b.simplex_budget)
    # final bound: |f - pi.g| <= |f - h| + |h - g| + |g - pi.g|
    f_h_sq = sr.sup_interval.hi_sq
    h_pig_sq = rr.certificate.sup_h_pig_bound_sq
    final_sq = exact.sum_sqrt_squared_upper(f_h_sq, h_pig_sq)
    if final_sq >= eps_sq:
        raise SupBoundNotMet(
            f"combined bound {final_sq} is not below epsilon^2 {eps_sq}"
        )
    report = {
        "kind": "pipeline",
        "inputs": {
            "oracle": oracle_json,
            "g0": g0_json,
            "domain": files.complex_to_json(domain),
            "codomain": files.complex_to_json(codomain),
            "eps_sq": exact.fmt(eps_sq),
        },
        "kappa": sr.kappa,
        "ell": sr.ell,
        "h_vertex_images": {
            h.domain.name_of(v): fine_codomain.name_of(w)
            for v, w in h.vertex_map.items()
        },
        "stage_bounds": {
            "f_vs_h": sr.sup_interval.as_dict(),
            "h_vs_g_sq": exact.fmt(rr.certificate.sup_h_g_sq),
            "h_vs_squeezed_g_bound_sq": exact.fmt(h_pig_sq),
            "final_bound_sq": exact.fmt(final_sq),
            "final_bound_decimal": exact.decimal_sqrt_str(final_sq),
            "eps_sq": exact.fmt(eps_sq),
        },
        "surjectivity_witnesses": {
            "-".join(fine_codomain.name_of(v) for v in t):
                [h.domain.name_of(v) for v in c]
            for t, c in sr.witnesses.items()
        },
        "reassigned_vertices": sorted(
            {h.domain.name_of(v) for c in sr.witnesses.values() for v in c}
        ),
        "squeeze_ratios": {
            "-".join(fine_codomain.name_of(v) for v in t): exact.fmt(r)
            for t, r in rr.certificate.ratios.items()
        },
        "hypothesis_checks": [
            {"name": c.name, "passed": c.passed, "detail": c.detail}
            for c in rr.certificate.checks
        ],
        "epsilon_budget": rr.certificate.budget.as_dict(fine_codomain),
        "density_check": {
            "depth": cov.depth,
            "reference_ell": cov.reference_ell,
            "covered": cov.covered_cells,
            "total": cov.total_cells,
            "complete": cov.complete,
            "uncovered": cov.uncovered,
        },
        "classical_map_was_surjective": sr.classical_surjective,
    }
    report["inputs_digest"] = files.digest(report["inputs"])
    return PipelineArtifacts(report, h, rr.evaluator, h.domain, fine_codomain)


# ---------------------------------------------------------------------------
# independent verification


def _check(checks, name, passed, detail=None):
    checks.append({"name": name, "passed": bool(passed),
                   "detail": detail or {}})


def verify_report(report: dict, depth: int = 2, seed: int = 0,
                  simplex_budget: int = 200_000) -> dict:
    """Recompute, independently of stored certificates: simpliciality, exact
    surjectivity, sampled sup norms, and sampled star and second-star
    memberships. Never raises; the verdict lists every recheck."""
    checks: list[dict] = []
    try:
        domain = files.complex_from_json(report["inputs"]["domain"],
                                         validate=False)
        codomain = files.complex_from_json(report["inputs"]["codomain"],
                                           validate=False)
        fine_dom = domain.sd_k(report["kappa"], budget=simplex_budget)
        fine_cod = codomain.sd_k(report["ell"], budget=simplex_budget)
        table = report["h_vertex_images"]
        vm = {fine_dom.id_of(n): fine_cod.id_of(w) for n, w in table.items()}
        _check(checks, "vertex_table_complete",
               set(vm) == set(fine_dom.vertex_ids()))
        h = SimplicialMap(fine_dom, fine_cod, vm)
        offenders = [s for s in fine_dom.simplices
                     if h.image_of_simplex(s) not in fine_cod.simplices]
        _check(checks, "simplicial", not offenders,
               {"offending": len(offenders)})
        rep = is_surjective(h)
        _check(checks, "surjective", rep.surjective,
               {"uncovered": len(rep.uncovered)})
        oracle_json = report["inputs"].get("oracle")
        if oracle_json is not None:
            from .maps import _evaluate_on

            fo = files.oracle_from_json(oracle_json)
            bound_sq = exact.rat(report["stage_bounds"]["f_vs_h"]["hi_sq"])
            worst = Fraction(0)
            samples = fine_dom
            for _ in range(depth):
                try:
                    nxt = samples.barycentric_subdivision(
                        budget=min(simplex_budget, 60_000))
                except PlapproxError:
                    break
                samples = nxt
            for v in samples.vertex_ids():
                x = samples.point(v)
                d = exact.sqdist(
                    _evaluate_on(fo, samples, v),
                    h.evaluate(x, carrier_hint=samples.ancestor_cell(
                        (v,), fine_dom)),
                )
                if d > worst:
                    worst = d
            _check(checks, "sampled_sup_f_vs_h_within_bound",
                   worst <= bound_sq,
                   {"sampled_max_sq": exact.fmt(worst),
                    "stored_hi_sq": exact.fmt(bound_sq)})
            # sampled memberships: the unmodified vertices must satisfy the
            # star condition, every vertex the second-star condition
            reassigned = {fine_dom.id_of(n)
                          for n in report.get("reassigned_vertices", [])}
            maximal = fine_dom.maximal_simplices()
            if len(maximal) > 400:
                import random as _random

                rng = _random.Random(seed)
                cells = sorted(rng.sample(maximal, 400))
            else:
                cells = maximal
            rng_points = sampling.rational_samples(fine_dom, 1, seed=seed,
                                                   cells=cells)
            star_ok = True
            second_ok = True
            for cell, x in rng_points:
                y = fo.evaluator(x)
                carrier = fine_cod.carrier(y)
                if carrier is None:
                    star_ok = False
                    break
                for nu in cell:
                    w = h.vertex_map[nu]
                    if nu not in reassigned and w not in carrier:
                        star_ok = False
                    near = set()
                    for t in fine_cod.vertex_cells(w):
                        near.update(t)
                    if not (set(carrier) & near):
                        second_ok = False
            _check(checks, "sampled_star_membership", star_ok)
            _check(checks, "sampled_second_star_membership", second_ok)
    except (PlapproxError, KeyError, ValueError) as e:
        _check(checks, "reconstruction", False,
               {"error": type(e).__name__, "message": str(e)})
    verdict = {
        "kind": "verification",
        "checks": checks,
        "all_passed": all(c["passed"] for c in checks),
        "depth": depth,
        "seed": seed,
    }
    return verdict
