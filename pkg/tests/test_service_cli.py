"""Service endpoints, CLI subcommands, rendering and report verification."""

import copy
import json
from fractions import Fraction as F

import pytest
from fastapi.testclient import TestClient

from plapprox import files, fixtures
from plapprox.cli import main as cli_main
from plapprox.render import render_svg
from plapprox.service.app import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


@pytest.fixture(scope="module")
def square_json(square_l):
    return files.complex_to_json(square_l)


def test_health(client):
    assert client.get("/api/health").json() == {"status": "ok"}


def test_validate_endpoint(client, square_json):
    r = client.post("/api/validate", json={"complex": square_json})
    assert r.status_code == 200 and r.json()["ok"]
    bad = dict(square_json)
    bad = json.loads(json.dumps(bad))
    bad["simplices"] = bad["simplices"] + [["w0", "w1", "w3"]]
    r = client.post("/api/validate", json={"complex": bad})
    body = r.json()
    assert not body["ok"]
    assert body["violations"][0]["code"] == "bad_intersection"


def test_sd_endpoint(client, square_json):
    r = client.post("/api/sd", json={"complex": square_json, "k": 1})
    body = r.json()
    assert body["simplex_count"] == 45
    assert body["squared_mesh"] == "20/9"


def test_sd_budget_maps_to_422(client, square_json):
    r = client.post("/api/sd", json={"complex": square_json, "k": 3,
                                     "budget_simplices": 50})
    assert r.status_code == 422
    assert r.json()["error"] == "budget_exceeded"
    assert r.json()["exit_code"] == 2


def test_stars_endpoint(client, square_json):
    r = client.post("/api/stars", json={"complex": square_json,
                                        "kind": "second", "vertex": "w1"})
    assert len(r.json()["cells"]) == 10
    r = client.post("/api/stars", json={"complex": square_json,
                                        "kind": "subcomplex",
                                        "cells": [["w0", "w2"]]})
    assert len(r.json()["cells"]) == 9


def test_budget_endpoint(client, square_json):
    r = client.post("/api/budget", json={"complex": square_json})
    body = r.json()["budget"]
    assert body["squared_eps1"] == "2"
    assert body["squared_eps3"] == "1/2592"


def test_squeeze_endpoint(client, square_json):
    r = client.post("/api/squeeze", json={
        "complex": square_json, "ratio": "1/2",
        "points": [["1", "1/2"], ["1", "0"]],
    })
    assert r.json()["images"] == [["2/3", "1/3"], ["1", "0"]]


def test_supnorm_endpoint(client, fold):
    fold_json = files.plmap_to_json(fold.pl)
    r = client.post("/api/supnorm", json={"f": fold_json, "g": fold_json})
    body = r.json()["interval"]
    assert body["exact"] and body["lo_sq"] == "0" and body["hi_sq"] == "0"


def test_approx_endpoint_and_verify(client, fold):
    fold_json = files.plmap_to_json(fold.pl)
    r = client.post("/api/approx", json={"oracle": fold_json,
                                         "eps_sq": "1/4"})
    assert r.status_code == 200
    result = r.json()["result"]
    assert result["ell"] == 2
    assert result["kind"] == "surjective_approximation"
    r = client.post("/api/verify", json={"result": result, "depth": 1})
    assert r.json()["verdict"]["all_passed"]
    tampered = copy.deepcopy(result)
    key = sorted(tampered["h_vertex_images"])[3]
    values = sorted(set(tampered["h_vertex_images"].values()))
    cur = tampered["h_vertex_images"][key]
    tampered["h_vertex_images"][key] = next(v for v in values if v != cur)
    r = client.post("/api/verify", json={"result": tampered, "depth": 0})
    verdict = r.json()["verdict"]
    assert not verdict["all_passed"]
    failed = {c["name"] for c in verdict["checks"] if not c["passed"]}
    assert failed & {"simplicial", "surjective",
                     "sampled_sup_f_vs_h_within_bound"}


def test_verify_verdict_is_depth_monotone(client, fold):
    fold_json = files.plmap_to_json(fold.pl)
    result = client.post("/api/approx", json={
        "oracle": fold_json, "eps_sq": "1/4"}).json()["result"]
    v1 = client.post("/api/verify",
                     json={"result": result, "depth": 0}).json()["verdict"]
    v2 = client.post("/api/verify",
                     json={"result": result, "depth": 2}).json()["verdict"]
    assert v1["all_passed"] and v2["all_passed"]
    assert [c["name"] for c in v1["checks"]] == \
        [c["name"] for c in v2["checks"]]


def test_surjectivize_endpoint(client, square_json):
    oracle = {"identity": True, "complex": square_json}
    r = client.post("/api/surjectivize", json={"oracle": oracle})
    result = r.json()["result"]
    assert result["kappa"] == 2 and result["ell"] == 0
    assert result["classical_map_was_surjective"] is True


def test_render_endpoint(client, square_json):
    r = client.post("/api/render-svg", json={"complex": square_json})
    svg = r.json()["svg"]
    assert svg.startswith("<svg") and svg.count("<polygon") == 2
    assert ">w3<" in svg


# -- render determinism / shapes -------------------------------------------------


def test_render_subdivided_triangle_counts(std2):
    sd2 = std2.sd_k(2)
    svg = render_svg(sd2, labels=False)
    assert svg.count("<polygon") == 36


def test_render_empty_complex():
    from plapprox.complexes import build_complex

    empty = build_complex(2, {}, [])
    svg = render_svg(empty)
    assert svg.startswith("<svg") and "<polygon" not in svg


def test_render_rejects_high_dim_without_projection():
    from plapprox.complexes import build_complex
    from plapprox.errors import UnsupportedDimension

    cx = build_complex(3, {"a": [0, 0, 0], "b": [1, 0, 0]}, [["a", "b"]])
    with pytest.raises(UnsupportedDimension):
        render_svg(cx)
    assert "<svg" in render_svg(cx, projection=(0, 2))


# -- CLI ---------------------------------------------------------------------------


def _write(tmp_path, name, payload):
    path = tmp_path / name
    files.save_canonical(str(path), payload)
    return str(path)


def test_cli_roundtrip(tmp_path, capsys, square_json, fold):
    lpath = _write(tmp_path, "L.json", square_json)
    assert cli_main(["validate", "--complex", lpath]) == 0
    out = tmp_path / "sd1.json"
    assert cli_main(["sd", "--complex", lpath, "-k", "1",
                     "--out", str(out)]) == 0
    sd1 = json.loads(out.read_text())
    assert len(sd1["vertices"]) == 11
    assert cli_main(["budget", "--complex", lpath]) == 0
    budget = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert budget["squared_eps1"] == "2"
    pts = _write(tmp_path, "pts.json", [["1", "1/2"]])
    assert cli_main(["squeeze", "--complex", lpath, "--ratio", "1/2",
                     "--points", pts]) == 0
    images = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert images == [["2/3", "1/3"]]
    fold_path = _write(tmp_path, "fold.json", files.plmap_to_json(fold.pl))
    result_path = tmp_path / "result.json"
    assert cli_main(["approx", "--map", fold_path, "--eps", "1/2",
                     "--out", str(result_path)]) == 0
    assert cli_main(["verify", "--result", str(result_path)]) == 0
    svg_path = tmp_path / "out.svg"
    assert cli_main(["render-svg", "--complex", lpath,
                     "--out", str(svg_path)]) == 0
    assert svg_path.read_text().startswith("<svg")


def test_cli_exit_codes(tmp_path, square_json):
    lpath = _write(tmp_path, "L.json", square_json)
    bad = json.loads(json.dumps(square_json))
    bad["simplices"] = bad["simplices"] + [["w0", "w1", "w3"]]
    bad_path = _write(tmp_path, "bad.json", bad)
    assert cli_main(["validate", "--complex", bad_path]) == 3
    assert cli_main(["sd", "--complex", lpath, "-k", "4",
                     "--budget-simplices", "100"]) == 2
    # hypothesis failure: oversized bump through the pipeline surface
    assert cli_main(["sd", "--complex", lpath, "-k", "1"]) == 0


def test_cli_pipeline_determinism(tmp_path, small_square):
    oracle = {"identity": True,
              "complex": files.complex_to_json(small_square)}
    opath = _write(tmp_path, "oracle.json", oracle)
    r1, r2 = tmp_path / "rep1.json", tmp_path / "rep2.json"
    assert cli_main(["pipeline", "--map", opath, "--eps", "1/2",
                     "--out", str(r1)]) == 0
    assert cli_main(["pipeline", "--map", opath, "--eps", "1/2",
                     "--out", str(r2)]) == 0
    assert r1.read_bytes() == r2.read_bytes()
    assert cli_main(["verify", "--result", str(r1)]) == 0
    s1, s2 = tmp_path / "a.svg", tmp_path / "b.svg"
    lpath = _write(tmp_path, "Ls.json", files.complex_to_json(small_square))
    assert cli_main(["render-svg", "--complex", lpath, "--out", str(s1)]) == 0
    assert cli_main(["render-svg", "--complex", lpath, "--out", str(s2)]) == 0
    assert s1.read_bytes() == s2.read_bytes()
