"""JSON formats and canonical serialisation.

Complexes: {"ambient_dim": n, "vertices": {id: ["p/q", ...]}, "simplices":
[[id, ...], ...]} — listing maximal simplices is enough, faces are closed
over on load. Maps: {"domain": ref, "codomain": ref, "vertex_images":
{id: point-or-codomain-vertex-id}}. Oracles: a map object, {"chain": [map
refs]} evaluated left to right, or {"identity": true, "complex": ref}.
A ref is an inline object or a path string (resolved against the referring
file's directory). Canonical dumps sort keys and use tight separators, so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import os
from . import exact
from .complexes import Complex, ValidationReport, validate_complex
from .errors import PlapproxError, UnknownVertex
from .maps import MapOracle, PLMap, SimplicialMap, VertexOrder


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def digest(obj) -> str:
    return hashlib.sha256(canonical_dumps(obj).encode()).hexdigest()


def point_to_json(p) -> list:
    return [exact.fmt(c) for c in p]


def point_from_json(raw) -> tuple:
    return exact.vec(raw)


def complex_to_json(cx: Complex) -> dict:
    return {
        "ambient_dim": cx.ambient_dim,
        "vertices": {cx.name_of(v): point_to_json(cx.point(v))
                     for v in cx.vertex_ids()},
        "simplices": [[cx.name_of(v) for v in s]
                      for s in cx.maximal_simplices()],
    }


def complex_from_json(raw: dict, validate: bool = True) -> Complex:
    report = validate_complex(
        raw["ambient_dim"], raw["vertices"], raw["simplices"]
    )
    if validate and not report.ok:
        raise report.violations[0]
    if report.complex is None:
        raise report.violations[0]
    return report.complex


def validation_report_to_json(report: ValidationReport) -> dict:
    return {
        "ok": report.ok,
        "violations": [
            {"code": getattr(v, "code", "error"), "message": str(v)}
            for v in report.violations
        ],
    }


def plmap_to_json(m: PLMap) -> dict:
    if isinstance(m, SimplicialMap):
        images = {m.domain.name_of(v): m.codomain.name_of(w)
                  for v, w in m.vertex_map.items()}
    else:
        images = {m.domain.name_of(v): point_to_json(p)
                  for v, p in m.vertex_images.items()}
    return {
        "domain": complex_to_json(m.domain),
        "codomain": complex_to_json(m.codomain_carrier),
        "vertex_images": images,
    }


def _resolve(ref, base_dir: str | None):
    if isinstance(ref, str):
        path = ref if os.path.isabs(ref) or base_dir is None else \
            os.path.join(base_dir, ref)
        with open(path) as fh:
            return json.load(fh), os.path.dirname(path)
    return ref, base_dir


def plmap_from_json(raw: dict, base_dir: str | None = None,
                    domain: Complex | None = None,
                    codomain: Complex | None = None) -> PLMap:
    if domain is None:
        dom_raw, _ = _resolve(raw["domain"], base_dir)
        domain = complex_from_json(dom_raw)
    if codomain is None:
        cod_raw, _ = _resolve(raw["codomain"], base_dir)
        codomain = complex_from_json(cod_raw)
    images = {}
    simplicial = True
    for name, img in raw["vertex_images"].items():
        vid = domain.id_of(name)
        if isinstance(img, str):
            images[vid] = codomain.point(codomain.id_of(img))
        else:
            pt = point_from_json(img)
            images[vid] = pt
            simplicial = False
    missing = [domain.name_of(v) for v in domain.vertex_ids()
               if v not in images]
    if missing:
        raise UnknownVertex(f"vertex images missing for {missing}")
    if simplicial:
        point_to_vid = {codomain.point(w): w for w in codomain.vertex_ids()}
        try:
            vm = {v: point_to_vid[p] for v, p in images.items()}
            return SimplicialMap(domain, codomain, vm)
        except (KeyError, PlapproxError):
            pass
    return PLMap(domain, codomain, images)


def oracle_from_json(raw, base_dir: str | None = None) -> MapOracle:
    raw, base_dir = _resolve(raw, base_dir)
    if raw.get("identity"):
        cx_raw, _ = _resolve(raw["complex"], base_dir)
        cx = complex_from_json(cx_raw)
        return MapOracle.identity(cx)
    if "chain" in raw:
        maps = []
        for ref in raw["chain"]:
            mraw, mdir = _resolve(ref, base_dir)
            prev = maps[-1].codomain_carrier if maps else None
            maps.append(plmap_from_json(mraw, mdir, domain=None,
                                        codomain=None))
        return MapOracle.from_chain(maps)
    m = plmap_from_json(raw, base_dir)
    return MapOracle.from_plmap(m)


def order_from_json(raw, cx: Complex) -> VertexOrder:
    if raw is None:
        return VertexOrder.default(cx)
    return VertexOrder.from_names(cx, list(raw))


def load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def save_canonical(path: str, obj: dict):
    with open(path, "w") as fh:
        fh.write(canonical_dumps(obj))
