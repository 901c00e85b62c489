"""sinedyn command line: render, verify, report.

Exit codes: 0 when every check passes, 1 on a failed check, 2 on a usage
or configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .atlas import GridSpec, boundedness_verdict, classify_grid, write_fatl, report_json
from .core import FamilyParams, MagnitudeOverflow, evaluate, derivative, symmetry_check
from .escape import (
    EscapeChainConfig,
    extended_induction_verify,
    post_singular_probe,
    random_extended_config,
    sinh_chain_verify,
)
from .hairs import (
    Itinerary,
    hair_halfplane_check,
    hair_horizontal_extent,
    invariance_residuals,
    t_end_classify,
    trace_hair,
)
from .literals import LiteralError, parse_complex, parse_real
from .periodic import solve_periodic_points
from .render import COLORINGS, RenderJob, cmd_render

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _complex_arg(text: str) -> complex:
    try:
        return parse_complex(text)
    except LiteralError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _real_arg(text: str) -> float:
    try:
        return parse_real(text)
    except LiteralError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _box_arg(text: str) -> tuple[float, float, float, float]:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("box needs xmin,ymin,xmax,ymax")
    return tuple(_real_arg(s) for s in parts)  # type: ignore[return-value]


def _pair(z: complex) -> list[float]:
    return [z.real, z.imag]


# -- argument plumbing -----------------------------------------------------------

def _family(sp: argparse.ArgumentParser, lam: str = "1", a: str = "0") -> None:
    sp.add_argument("--lambda", dest="lam", type=_complex_arg, default=lam, metavar="Z",
                    help="multiplier lambda (re+imi or r e^{p pi i})")
    sp.add_argument("--a", type=_complex_arg, default=a, metavar="Z", help="additive parameter")
    sp.add_argument("--config", help="key=value file; command-line flags win")


def _grid(sp: argparse.ArgumentParser, budget: int) -> None:
    sp.add_argument("--center", type=_complex_arg, default="0")
    sp.add_argument("--width", type=_real_arg, default="4*pi")
    sp.add_argument("--height", type=_real_arg, default=None, help="defaults to square pixels")
    sp.add_argument("--cols", type=int, default=512)
    sp.add_argument("--rows", type=int, default=512)
    sp.add_argument("--budget", type=int, default=budget)
    sp.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sinedyn", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("render", help="write a dynamical-plane image")
    _family(r)
    _grid(r, 2000)
    r.add_argument("--coloring", choices=COLORINGS, default="basin-id")
    r.add_argument("--output", "-o", default="out.ppm")
    r.add_argument("--mark", type=_complex_arg, action="append", default=[])
    r.add_argument("--hair", action="append", default=[], metavar="ITIN")
    r.add_argument("--hair-depth", type=int, default=30)

    v = sub.add_parser("verify", help="run a property suite")
    v.add_argument("suite", choices=("symmetry", "multiplier", "escape-chain",
                                     "extended-induction", "hair", "post-singular"))
    _family(v)
    v.add_argument("--points", type=int, default=10_000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--box", type=_box_arg, default="-4,-3,4,3")
    v.add_argument("--N", type=int, default=4)
    v.add_argument("--c1", type=_real_arg, default="11")
    v.add_argument("--y0", type=_real_arg, default=None)
    v.add_argument("--steps", type=int, default=None)
    v.add_argument("--count", type=int, default=100)
    v.add_argument("--itinerary", default="0+")
    v.add_argument("--depth", type=int, default=40)
    v.add_argument("--horizon", type=int, default=100_000)
    v.add_argument("--expect", choices=("bounded-so-far", "escaped", "any"), default="bounded-so-far")

    p = sub.add_parser("report", help="emit records as JSON or CSV")
    p.add_argument("kind", choices=("fixpoints", "hairs", "atlas", "probe"))
    _family(p)
    p.add_argument("--box", type=_box_arg, default="-4,-3,4,3")
    p.add_argument("--period", type=int, default=1)
    p.add_argument("--itinerary", default="0+")
    p.add_argument("--depth", type=int, default=30)
    p.add_argument("--horizon", type=int, default=100_000)
    p.add_argument("--refinements", type=int, default=0)
    p.add_argument("--fatl", default=None, help="also write the binary raster here")
    _grid(p, 2000)
    return ap


# values that start with '-' would otherwise read as options
_NEG = re.compile(r"^-[\d.(]|^-i\b|^-pi")


def _glue_negative_values(argv: list[str]) -> list[str]:
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok.startswith("--") and "=" not in tok and i + 1 < len(argv) and _NEG.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _read_config(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val.strip("\"'")
    return out


def parse_args(argv: list[str]) -> argparse.Namespace:
    ap = build_parser()
    argv = _glue_negative_values(argv)
    ns = ap.parse_args(argv)
    if getattr(ns, "config", None):
        cfg = _read_config(ns.config)
        sp = ap._subparsers._group_actions[0].choices[ns.command]  # type: ignore[union-attr]
        dests = {a.dest for a in sp._actions}
        cfg = {("lam" if k == "lambda" else k): v for k, v in cfg.items()}
        unknown = sorted(set(cfg) - dests)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        for act in sp._actions:
            if act.dest not in cfg:
                continue
            try:
                if act.type is not None:
                    cfg[act.dest] = act.type(cfg[act.dest])
                elif act.default is not None and not isinstance(act.default, str):
                    cfg[act.dest] = type(act.default)(cfg[act.dest])
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"config key {act.dest}: {exc}") from exc
            if act.choices is not None and cfg[act.dest] not in act.choices:
                raise UsageError(f"config key {act.dest}: invalid choice {cfg[act.dest]!r}")
        sp.set_defaults(**cfg)
        ns = ap.parse_args(argv)
    return ns


def _header(ns: argparse.Namespace) -> dict:
    """Echo every parsed parameter exactly."""
    out = {"command": ns.command}
    for k, v in sorted(vars(ns).items()):
        if k in ("command", "config"):
            continue
        if isinstance(v, complex):
            out["lambda" if k == "lam" else k] = _pair(v)
        elif isinstance(v, (int, float, str)) or v is None:
            out[k] = v
        elif isinstance(v, (list, tuple)):
            out[k] = [_pair(x) if isinstance(x, complex) else x for x in v]
    return out


def _grid_of(ns) -> GridSpec:
    height = ns.height if ns.height is not None else ns.width * ns.rows / ns.cols
    try:
        return GridSpec(ns.center, ns.width, height, ns.cols, ns.rows)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")


# -- verify suites ---------------------------------------------------------------

def _verify_symmetry(p: FamilyParams, ns) -> dict:
    rng = np.random.default_rng(ns.seed)
    zs = rng.uniform(-10, 10, ns.points) + 1j * rng.uniform(-10, 10, ns.points)
    tol = 1e-12

    def worst(mode):
        m = 0.0
        for w in zs:
            u, v = symmetry_check(p, complex(w), mode)
            m = max(m, abs(u - v) / max(1.0, abs(u)))
        return m

    out = {"critical_mirror_max_rel": worst("critical")}
    checks = [out["critical_mirror_max_rel"] <= tol]
    if p.a == 0:
        out["central_max_rel"] = worst("central")
        checks.append(out["central_max_rel"] <= tol)
    out["tolerance"] = tol
    out["pass"] = all(checks)
    return out


def _verify_multiplier(p: FamilyParams, ns) -> dict:
    rng = np.random.default_rng(ns.seed)
    r = 20 * np.sqrt(rng.uniform(0, 1, ns.points))
    zs = r * np.exp(1j * rng.uniform(-math.pi, math.pi, ns.points))
    lam2 = p.lam * p.lam
    # relative to the size of the terms: in doubles the residual of
    # (f')^2 + (f-a)^2 - lam^2 carries rounding of order eps*|f'|^2
    worst = 0.0
    for z in zs:
        z = complex(z)
        d, fa = derivative(p, z), evaluate(p, z) - p.a
        scale = abs(d) ** 2 + abs(fa) ** 2 + abs(lam2)
        worst = max(worst, abs(d * d + fa * fa - lam2) / scale)
    recs = solve_periodic_points(p, 1, ns.box)
    pts = []
    ok = worst <= 1e-10 and bool(recs)
    for rec in recs:
        gap = abs(rec.multiplier_chain - rec.multiplier_identity)
        good = gap <= 1e-8 * max(1.0, abs(rec.multiplier_chain))
        ok &= good
        pts.append({**rec.to_dict(), "identity_gap": gap})
    return {"identity_max_rel": worst, "fixed_points": pts, "pass": bool(ok)}


def _verify_escape_chain(p: FamilyParams, ns) -> dict:
    steps = ns.steps or 3
    try:
        cfg = (EscapeChainConfig(ns.N, ns.c1, ns.y0) if ns.y0 is not None
               else EscapeChainConfig.minimal(ns.N, ns.c1))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rep = sinh_chain_verify(cfg, steps)
    rows = [{"n": r.n, "bound": r.lower_bound, "observed": r.observed,
             "log_observed": r.log_observed, "holds": r.holds} for r in rep.rows]
    return {"y0": cfg.y0, "rows": rows, "c": list(rep.c), "recursion_holds": list(rep.recursion_holds),
            "truncated": rep.truncated, "pass": rep.ok and len(rep.rows) == steps + 1}


def _verify_extended(p: FamilyParams, ns, explicit: bool) -> dict:
    rng = np.random.default_rng(ns.seed)
    steps = ns.steps or 4
    rows, ok = [], True
    for _ in range(ns.count):
        try:
            cfg = random_extended_config(rng, p if explicit else None)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        rep = extended_induction_verify(cfg, steps)
        recorded = len(rep.rows) - 1
        good = rep.ok and recorded >= 3
        ok &= good
        rows.append({"lambda": _pair(cfg.params.lam), "a": _pair(cfg.params.a), "y0": cfg.y0,
                     "v0": cfg.v0, "steps": recorded, "overflow_at": rep.overflow_at, "holds": good})
    return {"configs": rows, "pass": bool(ok)}


def _verify_hair(p: FamilyParams, ns) -> dict:
    try:
        itin = Itinerary.parse(ns.itinerary)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    h = trace_hair(p, itin, depth=ns.depth)
    t0, verdict, half = hair_halfplane_check(h)
    res = invariance_residuals(p, h)
    finite = res[np.isfinite(res)]
    worst = float(finite.max()) if finite.size else math.inf
    return {
        "itinerary": str(itin), "samples": len(h.samples),
        "landing_point": None if h.landing_point is None else _pair(h.landing_point),
        "horizontal_extent": hair_horizontal_extent(h), "end_class": t_end_classify(h),
        "halfplane": {"t0": t0, "verdict": verdict, "half": half},
        "invariance_max": worst, "diagnostics": list(h.diagnostics),
        "pass": bool(verdict and worst <= 1e-6),
    }


def _verify_post_singular(p: FamilyParams, ns) -> dict:
    pr = post_singular_probe(p, ns.horizon)
    doc = pr.to_dict()
    doc["pass"] = ns.expect == "any" or pr.verdict == ns.expect
    return doc


# -- commands --------------------------------------------------------------------

def _run(ns, argv) -> int:
    try:
        p = FamilyParams(ns.lam, ns.a)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    head = _header(ns)

    if ns.command == "render":
        g = _grid_of(ns)
        hairs = []
        for text in ns.hair:
            try:
                hairs.append(trace_hair(p, Itinerary.parse(text), depth=ns.hair_depth))
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
        job = RenderJob(p, g, ns.coloring, tuple(hairs), tuple(ns.mark), ns.output, ns.budget, ns.workers)
        atlas = cmd_render(job)
        _emit({"header": head, "output": ns.output, "counts": atlas.to_report()["counts"],
               "cycles": [c.to_dict() for c in atlas.cycles]})
        return EXIT_OK

    if ns.command == "verify":
        explicit = any(a.startswith(("--lambda", "--a")) for a in argv)
        suite = {
            "symmetry": lambda: _verify_symmetry(p, ns),
            "multiplier": lambda: _verify_multiplier(p, ns),
            "escape-chain": lambda: _verify_escape_chain(p, ns),
            "extended-induction": lambda: _verify_extended(p, ns, explicit),
            "hair": lambda: _verify_hair(p, ns),
            "post-singular": lambda: _verify_post_singular(p, ns),
        }[ns.suite]
        doc = suite()
        _emit({"header": head, "suite": ns.suite, **doc})
        return EXIT_OK if doc["pass"] else EXIT_FAIL

    # report
    if ns.kind == "fixpoints":
        if not 1 <= ns.period <= 8:
            raise UsageError("--period must lie in 1..8")
        recs = solve_periodic_points(p, ns.period, ns.box)
        _emit({"header": head, "records": [r.to_dict() for r in recs]})
    elif ns.kind == "hairs":
        try:
            h = trace_hair(p, Itinerary.parse(ns.itinerary), depth=ns.depth)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        sys.stdout.write("".join(f"# {k}={json.dumps(v)}\n" for k, v in head.items()))
        sys.stdout.write(h.to_csv())
    elif ns.kind == "atlas":
        g = _grid_of(ns)
        atlas = classify_grid(p, g, ns.budget, workers=ns.workers)
        verdicts = boundedness_verdict(atlas, ns.refinements, workers=ns.workers) if ns.refinements else None
        if ns.fatl:
            write_fatl(ns.fatl, atlas)
        doc = json.loads(report_json(atlas, verdicts))
        _emit({"header": head, **doc})
    elif ns.kind == "probe":
        _emit({"header": head, **post_singular_probe(p, ns.horizon).to_dict()})
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns = parse_args(argv)
        return _run(ns, argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    except (UsageError, LiteralError) as exc:
        print(f"sinedyn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"sinedyn: error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except MagnitudeOverflow as exc:
        print(f"sinedyn: magnitude overflow: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
