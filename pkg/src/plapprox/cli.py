"""Command-line client for the kernel service.

Subcommands mirror the HTTP endpoints one to one. By default the service
handlers run in process; with --server the same request is POSTed to a
running instance instead. Exit codes: 0 success with certificate, 2 budget
exhaustion, 3 hypothesis or validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import exact, files
from .errors import BudgetExceeded, PlapproxError
from .service import handlers, models


def _load(path):
    return files.load_json(path)


def _eps_sq(text: str) -> str:
    eps = exact.rat(text)
    if eps <= 0:
        raise PlapproxError("--eps must be a positive rational p/q")
    return exact.fmt(eps * eps)


def _emit(payload, out: str | None, raw_text: str | None = None):
    if raw_text is not None:
        if out:
            with open(out, "w") as fh:
                fh.write(raw_text)
        else:
            sys.stdout.write(raw_text)
        return
    text = files.canonical_dumps(payload)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _call(args, endpoint: str, request_model):
    """In-process by default; HTTP when --server is given."""
    if args.server:
        import httpx

        resp = httpx.post(
            f"{args.server.rstrip('/')}/api/{endpoint}",
            json=json.loads(request_model.model_dump_json()),
            timeout=600.0,
        )
        if resp.status_code == 422 and "error" in resp.json():
            body = resp.json()
            raise SystemExit(
                _fail(body.get("message", "kernel error"),
                      body.get("exit_code", 3))
            )
        resp.raise_for_status()
        return resp.json()
    handler = getattr(handlers, f"handle_{endpoint.replace('-', '_')}")
    return json.loads(handler(request_model).model_dump_json())


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plapprox",
        description="Exact PL approximation kernel (thin client).",
    )
    parser.add_argument("--server", help="base URL of a running service; "
                        "default runs in process")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--budget-simplices", type=int, default=200_000)
        p.add_argument("--depth", type=int, default=4,
                       help="sampling depth for searches and checks")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for sampling patterns")

    p = sub.add_parser("validate", help="validate a complex file")
    p.add_argument("--complex", required=True)
    common(p)

    p = sub.add_parser("sd", help="barycentric subdivision")
    p.add_argument("--complex", required=True)
    p.add_argument("-k", type=int, default=1)
    common(p)

    p = sub.add_parser("stars", help="open/closed/second stars")
    p.add_argument("--complex", required=True)
    p.add_argument("--kind", default="open",
                   choices=["open", "closed", "second", "subcomplex"])
    p.add_argument("--vertex")
    p.add_argument("--cells", help="comma-separated vertex lists like "
                   "'w0-w2,w1' for kind=subcomplex")
    common(p)

    p = sub.add_parser("approx", help="surjective simplicial approximation "
                       "within a sup-norm budget")
    p.add_argument("--map", required=True, dest="map_path")
    p.add_argument("--domain")
    p.add_argument("--codomain")
    p.add_argument("--eps", required=True, help="rational bound p/q")
    p.add_argument("--kappa-max", type=int, default=8)
    common(p)

    p = sub.add_parser("surjectivize", help="surjectivity-preserving "
                       "modification against the unsubdivided codomain")
    p.add_argument("--map", required=True, dest="map_path")
    p.add_argument("--domain")
    p.add_argument("--codomain")
    p.add_argument("--kappa-max", type=int, default=8)
    common(p)

    p = sub.add_parser("squeeze", help="evaluate the squeezing map")
    p.add_argument("--complex", required=True)
    p.add_argument("--ratio", required=True)
    p.add_argument("--points", required=True,
                   help="JSON file: list of points")
    common(p)

    p = sub.add_parser("budget", help="squeezing constants of a complex")
    p.add_argument("--complex", required=True)
    common(p)

    p = sub.add_parser("supnorm", help="certified sup-distance interval")
    p.add_argument("--f", required=True, dest="f_path")
    p.add_argument("--g", required=True, dest="g_path")
    p.add_argument("--budget", help="squared-width target p/q")
    common(p)

    p = sub.add_parser("pipeline", help="approximate, perturb, squeeze, "
                       "certify")
    p.add_argument("--map", required=True, dest="map_path")
    p.add_argument("--eps", required=True)
    p.add_argument("--g0", help="optional smoothed stand-in map file")
    p.add_argument("--kappa-max", type=int, default=8)
    p.add_argument("--density-depth", type=int, default=3)
    common(p)

    p = sub.add_parser("verify", help="independently recheck a result file")
    p.add_argument("--result", required=True)
    common(p)

    p = sub.add_parser("render-svg", help="render a 2D complex")
    p.add_argument("--complex", required=True)
    p.add_argument("--no-labels", action="store_true")
    p.add_argument("--projection", help="axis pair like 0,2")
    p.add_argument("--arrows", help="JSON file: list of [tail, head] "
                   "point pairs drawn as map-image arrows")
    common(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8472)

    args = parser.parse_args(argv)
    t0 = time.time()
    try:
        code = _dispatch(args)
    except BudgetExceeded as e:
        return _fail(str(e), 2)
    except PlapproxError as e:
        return _fail(str(e), e.exit_code)
    print(f"[{args.command}] {time.time() - t0:.2f}s", file=sys.stderr)
    return code


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "serve":
        import uvicorn

        from .service.app import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0
    if cmd == "validate":
        req = models.ValidateRequest(complex=_load(args.complex))
        out = _call(args, "validate", req)
        _emit(out, args.out)
        return 0 if out["ok"] else 3
    if cmd == "sd":
        req = models.SdRequest(complex=_load(args.complex), k=args.k,
                               budget_simplices=args.budget_simplices)
        out = _call(args, "sd", req)
        _emit(out["complex"], args.out)
        print(f"simplices: {out['simplex_count']}  squared mesh: "
              f"{out['squared_mesh']}", file=sys.stderr)
        return 0
    if cmd == "stars":
        cells = None
        if args.cells:
            cells = [c.split("-") for c in args.cells.split(",")]
        req = models.StarsRequest(complex=_load(args.complex),
                                  kind=args.kind, vertex=args.vertex,
                                  cells=cells)
        out = _call(args, "stars", req)
        _emit(out, args.out)
        return 0
    if cmd in ("approx", "surjectivize"):
        req = models.ApproxRequest(
            oracle=_load(args.map_path),
            domain=None if not args.domain else _load(args.domain),
            codomain=None if not args.codomain else _load(args.codomain),
            eps_sq=_eps_sq(args.eps) if cmd == "approx" else None,
            kappa_max=args.kappa_max,
            depth=args.depth,
            budget_simplices=args.budget_simplices,
        )
        out = _call(args, cmd, req)
        _emit(out["result"], args.out)
        return 0
    if cmd == "squeeze":
        req = models.SqueezeRequest(complex=_load(args.complex),
                                    ratio=args.ratio,
                                    points=_load(args.points))
        out = _call(args, "squeeze", req)
        _emit(out["images"], args.out)
        return 0
    if cmd == "budget":
        req = models.BudgetRequest(complex=_load(args.complex))
        out = _call(args, "budget", req)
        _emit(out["budget"], args.out)
        return 0
    if cmd == "supnorm":
        req = models.SupnormRequest(
            f=_load(args.f_path), g=_load(args.g_path),
            budget_sq=None if not args.budget else
            exact.fmt(exact.rat(args.budget)),
            budget_simplices=args.budget_simplices,
        )
        out = _call(args, "supnorm", req)
        _emit(out["interval"], args.out)
        return 0
    if cmd == "pipeline":
        req = models.PipelineRequest(
            oracle=_load(args.map_path),
            eps_sq=_eps_sq(args.eps),
            g0=None if not args.g0 else _load(args.g0),
            density_depth=args.density_depth,
            kappa_max=args.kappa_max,
            depth=args.depth,
            budget_simplices=args.budget_simplices,
        )
        out = _call(args, "pipeline", req)
        _emit(out["result"], args.out)
        return 0
    if cmd == "verify":
        req = models.VerifyRequest(result=_load(args.result),
                                   depth=min(args.depth, 2), seed=args.seed,
                                   budget_simplices=args.budget_simplices)
        out = _call(args, "verify", req)
        _emit(out["verdict"], args.out)
        return 0 if out["verdict"]["all_passed"] else 3
    if cmd == "render-svg":
        proj = None
        if args.projection:
            a, b = args.projection.split(",")
            proj = (int(a), int(b))
        req = models.RenderRequest(complex=_load(args.complex),
                                   labels=not args.no_labels,
                                   projection=proj,
                                   arrows=None if not args.arrows else
                                   _load(args.arrows))
        out = _call(args, "render-svg", req)
        _emit(None, args.out, raw_text=out["svg"])
        return 0
    raise PlapproxError(f"unknown command {cmd}")


if __name__ == "__main__":
    sys.exit(main())
