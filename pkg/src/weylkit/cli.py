"""``weylkit`` command line.

Exit codes: 0 every named check passed, 1 a check failed (or a documented
precondition did not hold), 2 spec or expression parse error, 3 degenerate
geometry at a requested point.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .catalog import catalog as catalog_lookup, names as catalog_names
from .classify import (bel_debever, duality_residual, eh_reconstruction_residual, electric_magnetic,
                       petrov_type)
from .compat import (SymmetricField, VectorField, bridge_identity_residual, causal_character, compat_report,
                     vector_compat_residual)
from .constructs import (EmbeddingSpec, GeodesicMapSpec, geodesic_map_deform, hypersurface_compat_suite,
                         hypersurface_geometry)
from .errors import (DomainError, EvalError, GeometryError, ParseError, PreconditionError, SpecFileError,
                     WeylkitError)
from .expr import parse
from .geometry import (MetricSpec, bianchi_residual, compute_geometry, metricity_residual,
                       riemann_symmetry_residual, sample_points, weyl_divergence_residual, weyl_trace_residual)
from .specfile import dumps_spec, load_spec
from .tensor import fro, relative

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_DEGENERATE = 0, 1, 2, 3


# Bel-Debever level -> Petrov types it is consistent with.
_LEVEL_TYPES = {"O": {"O"}, "N": {"N", "O"}, "III": {"III", "N", "O"}, "II/D": {"II", "D", "III", "N", "O"},
                "I": set("I II D III N O".split()), "none": set("I II D III N O".split())}


# --- JSON ---------------------------------------------------------------------------------

def _clean(obj):
    """Make ``obj`` JSON-safe: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps_report(report: dict) -> str:
    # Python's float repr is the shortest string that round-trips exactly.
    return json.dumps(_clean(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


# --- argument helpers ---------------------------------------------------------------------

def _split_list(text: str) -> List[str]:
    return [t.strip() for t in text.split(",")]


def _parse_vector(text: str, n: int, label: str) -> List[object]:
    parts = _split_list(text)
    if len(parts) != n:
        raise PreconditionError(f"{label} needs {n} comma-separated components, got {len(parts)}")
    out = []
    for p in parts:
        try:
            out.append(float(p))
        except ValueError:
            parse(p)
            out.append(p)
    return out


def _parse_matrix(text: str, n: int) -> List[List[object]]:
    rows = [r for r in text.split(";")]
    if len(rows) != n:
        raise PreconditionError(f"--b needs {n} rows separated by ';'")
    return [_parse_vector(r, n, "each --b row") for r in rows]


def _load(args) -> object:
    if args.spec:
        return load_spec(args.spec)
    if args.catalog:
        try:
            return catalog_lookup(args.catalog)
        except KeyError as exc:
            raise SpecFileError(str(exc.args[0]), "<catalog>", 0, 0) from None
    raise SpecFileError("one of --spec or --catalog is required", "<args>", 0, 0)


def _points(args, spec) -> np.ndarray:
    if args.point:
        return np.array([[float(x) for x in _split_list(p)] for p in args.point])
    ranges = dict(spec.sample_ranges)
    for item in args.range or []:
        name, _, span = item.partition("=")
        lo, hi = (float(x) for x in _split_list(span))
        ranges[name.strip()] = (lo, hi)
    target = spec.metric_spec_sampler() if isinstance(spec, EmbeddingSpec) else spec
    return sample_points(target, args.points, seed=args.seed, ranges=ranges)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("WEYLKIT_THREADS", "1")))
    except ValueError:
        return 1


def _map_points(fn: Callable, points) -> List[dict]:
    n = _threads()
    if n == 1:
        return [fn(i, p) for i, p in enumerate(points)]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda ip: fn(*ip), enumerate(points)))


def _spec_echo(spec) -> dict:
    out = {"name": spec.name, "dim": spec.dim, "coords": list(spec.coords), "params": dict(spec.params),
           "kind": "embedding" if isinstance(spec, EmbeddingSpec) else "metric"}
    if isinstance(spec, MetricSpec) and spec.expected_signature is not None:
        out["signature"] = list(spec.expected_signature)
    if isinstance(spec, EmbeddingSpec):
        out["ambient"] = list(spec.ambient_diag)
    return out


def _assemble(command: str, args, spec, blocks: List[dict], checks: Dict[str, Callable[[dict], bool]],
              extra: Optional[dict] = None) -> dict:
    """Aggregate per-point blocks: max of every residual, and pass/fail for each named check."""
    agg: Dict[str, float] = {}
    for b in blocks:
        for k, v in b["residuals"].items():
            if v is not None and (isinstance(v, float) or isinstance(v, int)):
                agg[k] = max(agg.get(k, 0.0), float(v))
    verdicts = {name: all(fn(b) for b in blocks) for name, fn in checks.items()}
    report = {
        "tool": {"name": "weylkit", "version": __version__},
        "command": command,
        "spec": _spec_echo(spec),
        "config": {"seed": args.seed, "tol_identity": args.tol_identity, "tol_classify": args.tol_classify,
                   "points": len(blocks)},
        "points": blocks,
        "aggregate": agg,
        "checks": verdicts,
        "passed": all(verdicts.values()),
    }
    if extra:
        report.update(extra)
    return report


def _require_metric(spec) -> MetricSpec:
    if not isinstance(spec, MetricSpec):
        raise PreconditionError("this command needs a metric spec, not an embedding")
    return spec


# --- subcommands ------------------------------------------------------------------------------

def cmd_curvature(args) -> dict:
    spec = _require_metric(_load(args))
    pts = _points(args, spec)
    tol = args.tol_identity

    def one(i, p):
        G = compute_geometry(spec, p)
        res = {"bianchi": bianchi_residual(G), "riemann_symmetry": riemann_symmetry_residual(G),
               "metricity": metricity_residual(G),
               "ricci_norm": relative(G.ricci_at, fro(G.riemann_lowered))}
        if G.n >= 3:
            res["weyl_trace"] = weyl_trace_residual(G)
            res["weyl_divergence"] = weyl_divergence_residual(G)
        return {"index": i, "point": p, "scalar_curvature": G.scalar_at, "residuals": res}

    blocks = _map_points(one, pts)
    names = ["bianchi", "riemann_symmetry", "metricity", "weyl_trace", "weyl_divergence"]
    if args.vacuum:
        names.append("ricci_norm")
    checks = {n: (lambda b, n=n: b["residuals"].get(n, 0.0) < tol) for n in names}
    return _assemble("curvature", args, spec, blocks, checks)


def cmd_compat(args) -> dict:
    spec = _require_metric(_load(args))
    pts = _points(args, spec)
    n = spec.dim
    tol = args.tol_identity
    b_field = SymmetricField(_parse_matrix(args.b, n), "b") if args.b else None
    u_field = VectorField(_parse_vector(args.u, n, "--u"), description="u") if args.u else None
    if b_field is None and u_field is None:
        raise PreconditionError("compat needs --b and/or --u")

    def one(i, p):
        G = compute_geometry(spec, p)
        block = {"index": i, "point": p, "residuals": {}}
        if b_field is not None:
            rep = compat_report(b_field, G, tol, which=args.which)
            block["compat"] = rep.to_dict()
            block["residuals"].update({"riemann_compat": rep.residual_riemann, "weyl_compat": rep.residual_weyl,
                                       "ricci_commutator": rep.ricci_commutator_norm,
                                       "bridge_identity": bridge_identity_residual(b_field, G)})
        if u_field is not None:
            block["vector"] = {"causal_character": u_field.causal_character(G)}
            block["residuals"].update({"vector_riemann": vector_compat_residual(u_field, G, "riemann"),
                                       "vector_weyl": vector_compat_residual(u_field, G, "weyl")})
        return block

    blocks = _map_points(one, pts)

    def theorem(b):
        r = b["residuals"]
        if "riemann_compat" not in r:
            return True
        return (r["riemann_compat"] < tol) == (r["weyl_compat"] < tol and r["ricci_commutator"] < tol) or \
            min(abs(math.log10(max(x, 1e-300) / tol)) for x in (r["riemann_compat"], r["weyl_compat"],
                                                                r["ricci_commutator"])) < 1
    checks = {"bridge_identity": lambda b: b["residuals"].get("bridge_identity", 0.0) < tol,
              "compat_theorem_consistency": theorem}
    if args.expect:
        want = args.expect == "compatible"
        key = "riemann_compat" if args.which == "riemann" else "weyl_compat"
        vkey = "vector_" + args.which
        checks["expected_verdict"] = lambda b: all(
            (b["residuals"][k] < tol) == want for k in (key, vkey) if k in b["residuals"])
    return _assemble("compat", args, spec, blocks, checks)


def cmd_classify(args) -> dict:
    spec = _require_metric(_load(args))
    pts = _points(args, spec)
    tol = args.tol_identity
    obs = _parse_vector(args.observer, spec.dim, "--observer") if args.observer else None

    def one(i, p):
        G = compute_geometry(spec, p)
        rep = petrov_type(G, tol=args.tol_classify)
        block = {"index": i, "point": p, "petrov": rep.to_dict(),
                 "residuals": {"duality": duality_residual(G)}}
        u = None
        if obs is not None:
            vec = VectorField(obs)
            up = vec.upper(G)
            char = causal_character(up, G)
            block["observer"] = {"components": up, "causal_character": char}
            if char == "null":
                bd = bel_debever(G, up, tol)
                block["bel_debever"] = bd.to_dict()
                block["residuals"].update({"bel_debever_" + k: v for k, v in bd.to_dict().items() if k != "level"})
            elif char == "timelike":
                u = up / math.sqrt(-float(up @ G.g_at @ up))
        pair = electric_magnetic(G, u)
        e_norm, h_norm = pair.norms()
        inv = pair.invariant_residuals(G)
        block["electric_magnetic"] = {"observer": pair.observer, "E_norm": e_norm, "H_norm": h_norm,
                                      "E_frame": pair.E_frame, "H_frame": pair.H_frame}
        block["residuals"].update({"eh_invariants": max(inv.values()),
                                   "eh_reconstruction": eh_reconstruction_residual(G, pair.observer),
                                   "H_norm": h_norm,
                                   "weyl_vector_compat": vector_compat_residual(pair.observer, G, "weyl")})
        return block

    blocks = _map_points(one, pts)
    checks = {"duality": lambda b: b["residuals"]["duality"] < tol,
              "eh_invariants": lambda b: b["residuals"]["eh_invariants"] < tol,
              "eh_reconstruction": lambda b: b["residuals"]["eh_reconstruction"] < 10 * tol}
    if obs is not None:
        checks["bel_debever_consistent"] = lambda b: (
            "bel_debever" not in b or b["petrov"]["petrov_type"] in _LEVEL_TYPES[b["bel_debever"]["level"]])
    if args.expect_type:
        checks["expected_petrov_type"] = lambda b: b["petrov"]["petrov_type"] == args.expect_type
    return _assemble("classify", args, spec, blocks, checks)


def cmd_hypersurface(args) -> dict:
    spec = _load(args)
    if not isinstance(spec, EmbeddingSpec):
        raise PreconditionError("hypersurface needs an embedding spec")
    pts = _points(args, spec)
    tol = args.tol_identity

    def one(i, p):
        hs = hypersurface_geometry(spec, p)
        rep = hypersurface_compat_suite(hs)
        return {"index": i, "point": p, "epsilon": hs.epsilon, "omega": hs.omega,
                "scalar_curvature": hs.geometry.scalar_at, "suite": rep.to_dict(),
                "residuals": {"gauss": rep.gauss_residual, "codazzi": rep.codazzi_residual,
                              "ricci_form": rep.ricci_form_residual, "max_compat": rep.max_compat()}}

    blocks = _map_points(one, pts)
    checks = {"gauss": lambda b: b["residuals"]["gauss"] < tol,
              "codazzi": lambda b: b["residuals"]["codazzi"] < tol,
              "ricci_form": lambda b: b["residuals"]["ricci_form"] < tol,
              "compat_suite": lambda b: b["residuals"]["max_compat"] < 10 * tol}
    return _assemble("hypersurface", args, spec, blocks, checks)


def cmd_geodesic_map(args) -> dict:
    spec = _require_metric(_load(args))
    if not args.psi:
        raise PreconditionError("geodesic-map needs --psi")
    gm = GeodesicMapSpec(spec, args.psi)
    pts = _points(args, spec)
    tol = args.tol_identity

    def one(i, p):
        r = geodesic_map_deform(gm, p, panel=20, seed=args.seed + i)
        return {"index": i, "point": p, "X": r.X, "P": r.P,
                "residuals": {"closedness": r.closedness_residual, "symmetry": r.symmetry_residual,
                              "ricci_tilde": r.ricci_residual, "connection": r.connection_residual,
                              "cyclic_invariance": r.cyclic_invariance_residual}}

    blocks = _map_points(one, pts)
    checks = {k: (lambda b, k=k: b["residuals"][k] < tol)
              for k in ("closedness", "symmetry", "ricci_tilde", "connection", "cyclic_invariance")}
    return _assemble("geodesic-map", args, spec, blocks, checks, {"psi": args.psi})


def cmd_catalog(args) -> dict:
    if args.show:
        try:
            spec = catalog_lookup(args.show)
        except KeyError as exc:
            raise SpecFileError(str(exc.args[0]), "<catalog>", 0, 0) from None
        return {"command": "catalog", "name": args.show, "spec_file": dumps_spec(spec), "passed": True}
    entries = []
    for name in catalog_names():
        spec = catalog_lookup(name)
        entries.append({"name": name, "kind": "embedding" if isinstance(spec, EmbeddingSpec) else "metric",
                        "dim": spec.dim, "coords": list(spec.coords), "params": dict(spec.params)})
    return {"command": "catalog", "tool": {"name": "weylkit", "version": __version__},
            "entries": entries, "passed": True}


def cmd_verify_all(args) -> dict:
    from .acceptance import run_all
    # progress lines stream as criteria finish; the final summary repeats them
    log = None if args.quiet else (lambda line: print(line, file=sys.stderr))
    results = run_all(seed=args.seed, log=log)
    return {"command": "verify-all", "tool": {"name": "weylkit", "version": __version__},
            "criteria": [r.to_dict() for r in results], "passed": all(r.passed for r in results)}


COMMANDS = {
    "curvature": cmd_curvature,
    "compat": cmd_compat,
    "classify": cmd_classify,
    "hypersurface": cmd_hypersurface,
    "geodesic-map": cmd_geodesic_map,
    "catalog": cmd_catalog,
    "verify-all": cmd_verify_all,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weylkit", description="Curvature, compatibility and Petrov checks.")
    p.add_argument("--version", action="version", version=f"weylkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, points=True):
        src = sp.add_mutually_exclusive_group()
        src.add_argument("--spec", help="metric or embedding spec file")
        src.add_argument("--catalog", help="catalog entry name, e.g. schwarzschild or sphere_embedding(4)")
        if points:
            sp.add_argument("--points", type=int, default=5, help="number of sampled points (default 5)")
            sp.add_argument("--point", action="append", help="explicit point 'x0,x1,...' (repeatable)")
            sp.add_argument("--range", action="append", help="sampling range override 'coord=lo,hi'")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol-identity", type=float, default=1e-9)
        sp.add_argument("--tol-classify", type=float, default=1e-7)
        sp.add_argument("--out", help="write the JSON report here instead of stdout")
        sp.add_argument("--quiet", action="store_true", help="no summary on stderr")

    sp = sub.add_parser("curvature", help="curvature identities at sample points")
    common(sp)
    sp.add_argument("--vacuum", action="store_true", help="also require a vanishing Ricci tensor")
    sp = sub.add_parser("compat", help="compatibility of a symmetric tensor or a vector")
    common(sp)
    sp.add_argument("--b", help="symmetric tensor: rows separated by ';', entries by ','")
    sp.add_argument("--u", help="vector u^a as 'e0,e1,...'")
    sp.add_argument("--which", choices=("riemann", "weyl"), default="riemann")
    sp.add_argument("--expect", choices=("compatible", "incompatible"))
    sp = sub.add_parser("classify", help="Petrov type, Bel-Debever chain, electric/magnetic parts")
    common(sp)
    sp.add_argument("--observer", help="u^a; timelike gives E/H, null gives the Bel-Debever chain")
    sp.add_argument("--expect-type", choices=("I", "II", "D", "III", "N", "O"))
    sp = sub.add_parser("hypersurface", help="Gauss/Codazzi and the hypersurface compatibility suite")
    common(sp)
    sp = sub.add_parser("geodesic-map", help="geodesic-map deformation identities")
    common(sp)
    sp.add_argument("--psi", help="potential psi with X = d psi")
    sp = sub.add_parser("catalog", help="list catalog entries")
    sp.add_argument("--show", help="print the spec file of one entry")
    sp.add_argument("--out")
    sp.add_argument("--quiet", action="store_true")
    sp = sub.add_parser("verify-all", help="run the full acceptance suite")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--quiet", action="store_true")
    return p


def _summary(report: dict) -> str:
    lines = []
    if "checks" in report:
        for name, ok in report["checks"].items():
            lines.append(f"{'PASS' if ok else 'FAIL'} {name}")
    if "criteria" in report:
        for c in report["criteria"]:
            lines.append(f"{'PASS' if c['passed'] else 'FAIL'} criterion {c['number']}: {c['title']}")
    lines.append("passed" if report.get("passed") else "FAILED")
    return "\n".join(lines)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = COMMANDS[args.command](args)
    except (GeometryError, DomainError) as exc:
        print(f"weylkit: degenerate geometry: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (SpecFileError, ParseError, EvalError) as exc:
        print(f"weylkit: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (PreconditionError, WeylkitError, ValueError) as exc:
        print(f"weylkit: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = dumps_report(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not getattr(args, "quiet", False):
        print(_summary(report), file=sys.stderr)
    return EXIT_OK if report.get("passed") else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
