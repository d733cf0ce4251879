"""Command line interface: ``steinercover <command> [options]``.

Every run prints one JSON document holding the resolved job and its result.
The job can be fed back with ``--job`` to repeat the run exactly.

Exit codes: 0 success, 1 invalid input (the error names the field),
2 a verification check failed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from .coverings import covering_for, verify_covering
from .errors import EnumerationLimitError, UnsupportedSpaceError, VerificationFailure
from .quotient import smt_quotient
from .ratio import encode_point, repro, search_inf, steiner_ratio, verify_theorem
from .spaces import TWO_PI, Cone, Disphenoid, Plane, distance
from .spanning import Tree, mst
from .steiner import smt_plane

COMMANDS = ("dist", "mst", "smt", "sr", "search", "verify", "repro")
NEEDS_POINTS = ("dist", "mst", "smt", "sr")
SEED_ENV = "STEINERCOVER_SEED"


class JobError(Exception):
    def __init__(self, field, message):
        super().__init__(message)
        self.field = field


# -- parsing ----------------------------------------------------------------


def parse_space(text: str) -> dict:
    """``plane``, ``cone:<angle>``, ``cone:2pi/k`` or ``disphenoid:a,b,c``."""
    kind, _, arg = text.strip().partition(":")
    if kind == "plane" and not arg:
        return {"kind": "plane"}
    if kind == "cone" and arg:
        m = re.fullmatch(r"2pi/(\d+)", arg.replace(" ", ""))
        return {"kind": "cone", "total_angle": f"2pi/{m.group(1)}" if m else _number(arg, "space")}
    if kind == "disphenoid" and arg:
        return {"kind": "disphenoid", "sides": [_number(s, "space") for s in arg.split(",")]}
    raise JobError("space", f"cannot parse space {text!r}; use plane, cone:<angle>, cone:2pi/k "
                            "or disphenoid:a,b,c")


def _number(text, field) -> float:
    try:
        x = float(text)
    except (TypeError, ValueError):
        raise JobError(field, f"{text!r} is not a number") from None
    if not math.isfinite(x):
        raise JobError(field, f"{text!r} is not finite")
    return x


def build_space(spec: dict):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise JobError("space", "space must be an object with a 'kind'")
    try:
        kind = spec["kind"]
        if kind == "plane":
            return Plane()
        if kind == "cone":
            theta = spec.get("total_angle")
            if isinstance(theta, str):
                m = re.fullmatch(r"2pi/(\d+)", theta.replace(" ", ""))
                if not m:
                    raise JobError("space.total_angle", f"cannot parse angle {theta!r}")
                return Cone.from_k(int(m.group(1)))
            return Cone(_number(theta, "space.total_angle"))
        if kind == "disphenoid":
            sides = spec.get("sides")
            if not isinstance(sides, (list, tuple)) or len(sides) != 3:
                raise JobError("space.sides", "disphenoid needs exactly three side lengths")
            return Disphenoid(tuple(_number(s, "space.sides") for s in sides))
    except ValueError as exc:
        raise JobError("space", str(exc)) from None
    raise JobError("space.kind", f"unknown space kind {spec.get('kind')!r}")


def build_points(space, raw) -> list:
    if not isinstance(raw, list):
        raise JobError("points", "points must be a JSON list")
    pts = []
    for i, item in enumerate(raw):
        field = f"points[{i}]"
        try:
            if isinstance(space, Disphenoid):
                if isinstance(item, dict):
                    pts.append(space.point(item["face"], item["bary"]))
                elif isinstance(item, list) and len(item) == 2:
                    pts.append(space.point(item[0], item[1]))
                else:
                    raise JobError(field, 'expected {"face": f, "bary": [w0, w1, w2]}')
            else:
                if not isinstance(item, list) or len(item) != 2:
                    raise JobError(field, "expected a pair of numbers")
                pts.append(space.point(*item))
        except JobError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise JobError(field, str(exc)) from None
    return pts


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise JobError("seed", f"{SEED_ENV}={raw!r} is not an integer") from None


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="steinercover", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--space", help="plane | cone:<angle> | cone:2pi/k | disphenoid:a,b,c")
    p.add_argument("--points", help="JSON list of points in the space's chart")
    p.add_argument("--input", help='JSON file {"space": {...}, "points": [...]}')
    p.add_argument("--job", help="JSON file holding a job echoed by an earlier run")
    p.add_argument("--tol", type=float, default=None, help="solver tolerance (default 1e-10)")
    p.add_argument("--restarts", type=int, default=None, help="search restarts")
    p.add_argument("--seed", type=int, default=None, help=f"random seed (default ${SEED_ENV} or 0)")
    p.add_argument("--samples", type=int, default=None, help="verification samples")
    p.add_argument("--n", type=int, default=None, help="number of points for search/verify")
    p.add_argument("--no-search", action="store_true", help="repro: skip the infimum searches")
    p.add_argument("--svg", help="mst/smt: also draw the tree to this SVG file")
    return p


def resolve_job(args) -> dict:
    """Merge the command line with an optional job or input file into a full job."""
    job: dict = {}
    if args.job:
        job = _load_json(args.job, "job")
        if not isinstance(job, dict):
            raise JobError("job", "job file must hold a JSON object")
        if job.get("command", args.command) != args.command:
            raise JobError("command", f"job is for {job['command']!r}, not {args.command!r}")
    if args.input:
        data = _load_json(args.input, "input")
        if not isinstance(data, dict):
            raise JobError("input", "input file must hold a JSON object")
        for key in ("space", "points"):
            if key in data:
                job[key] = data[key]
    if args.space is not None:
        job["space"] = parse_space(args.space)
    if args.points is not None:
        try:
            job["points"] = json.loads(args.points)
        except json.JSONDecodeError as exc:
            raise JobError("points", f"invalid JSON: {exc}") from None
    job["command"] = args.command
    cmd = args.command
    for key, val in (("tol", args.tol), ("seed", args.seed), ("samples", args.samples),
                     ("restarts", args.restarts), ("n", args.n)):
        if val is not None:
            job[key] = val
    job.setdefault("tol", 1e-10)
    if cmd in ("search", "verify", "repro"):
        job.setdefault("seed", _default_seed() if cmd != "repro" else 1)
    if cmd == "search":
        job.setdefault("restarts", 20)
        job.setdefault("n", 3)
    if cmd == "verify":
        job.setdefault("samples", 1000)
        job.setdefault("theorem_samples", 100)
        job.setdefault("n", 3)
    if cmd == "repro":
        job.setdefault("restarts", 20)
        if args.no_search:
            job["search"] = False
        job.setdefault("search", True)
    if cmd != "repro" and "space" not in job:
        raise JobError("space", f"{cmd} needs --space, --input or --job")
    if cmd in NEEDS_POINTS and "points" not in job:
        raise JobError("points", f"{cmd} needs --points, --input or --job")
    for key in ("restarts", "samples", "theorem_samples", "n"):
        if key in job and (not isinstance(job[key], int) or job[key] < 1):
            raise JobError(key, f"{key} must be a positive integer")
    if not (isinstance(job["tol"], (int, float)) and job["tol"] > 0):
        raise JobError("tol", "tol must be positive")
    return {k: job[k] for k in sorted(job)}


def _load_json(path, field):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise JobError(field, f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise JobError(field, f"invalid JSON in {path}: {exc}") from None


# -- output -----------------------------------------------------------------


def tree_dict(tree: Tree) -> dict:
    return {
        "vertices": [encode_point(v) for v in tree.vertices],
        "roles": list(tree.roles),
        "edges": [list(e) for e in tree.edges],
        "edge_lengths": list(tree.edge_lengths),
        "total_length": tree.total_length,
    }


def drawing_coordinates(space, points) -> np.ndarray:
    """Plane positions used for drawing: cones unrolled to a disc, disphenoids developed."""
    if isinstance(space, Cone):
        scale = TWO_PI / space.total_angle
        return np.array([[r * math.cos(phi * scale), r * math.sin(phi * scale)] for r, phi in points])
    if isinstance(space, Disphenoid):
        return np.array([space.develop(p) for p in points])
    return np.array(points, dtype=float)


def tree_svg(space, tree: Tree, size: int = 400) -> str:
    """SVG with one line per tree edge and one circle per vertex."""
    xy = drawing_coordinates(space, tree.vertices)
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    pad = 20.0
    k = (size - 2 * pad) / span

    def sx(p):
        return pad + (p[0] - lo[0]) * k, size - pad - (p[1] - lo[1]) * k

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">']
    for u, v in tree.edges:
        (x1, y1), (x2, y2) = sx(xy[u]), sx(xy[v])
        out.append(f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}" '
                   'stroke="black" stroke-width="1.5"/>')
    for p, role in zip(xy, tree.roles):
        x, y = sx(p)
        fill = "black" if role == "terminal" else "red"
        out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="4" fill="{fill}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- commands ---------------------------------------------------------------


def run_job(job: dict, svg: str | None = None) -> tuple[dict, int]:
    cmd = job["command"]
    if cmd == "repro":
        res = repro(include_search=job["search"], search_restarts=job["restarts"], seed=job["seed"])
        return res, 0 if res["all_passed"] else 2
    space = build_space(job["space"])
    pts = build_points(space, job["points"]) if "points" in job else None
    tol = float(job["tol"])
    try:
        if cmd == "dist":
            if len(pts) != 2:
                raise JobError("points", "dist needs exactly 2 points")
            return {"distance": distance(space, pts[0], pts[1])}, 0
        if cmd in ("mst", "smt"):
            if cmd == "mst":
                tree = mst(space, pts)
            elif isinstance(space, Plane):
                tree = smt_plane(pts, tol)
            else:
                tree = smt_quotient(space, pts, tol)
            if svg:
                Path(svg).write_text(tree_svg(space, tree))
            return tree_dict(tree), 0
        if cmd == "sr":
            return steiner_ratio(space, pts, tol).to_dict(), 0
        if cmd == "search":
            init = [pts] if pts else None
            rep = search_inf(space, job["n"], job["restarts"], job["seed"], initial=init, tol=tol)
            return rep.to_dict(), 0
        if cmd == "verify":
            cover = covering_for(space)
            cov = verify_covering(cover, job["samples"], job["seed"])
            thm = verify_theorem(cover, job["theorem_samples"], job["seed"], job["n"], tol)
            ok = cov.passed and thm.passed
            return {"covering": cov.to_dict(), "theorem": thm.to_dict(), "passed": ok}, 0 if ok else 2
    except UnsupportedSpaceError as exc:
        raise JobError("space", str(exc)) from None
    except EnumerationLimitError as exc:
        raise JobError("points", str(exc)) from None
    except ValueError as exc:
        raise JobError("points", str(exc)) from None
    raise JobError("command", f"unknown command {cmd!r}")


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    job = None
    try:
        job = resolve_job(args)
        result, code = run_job(job, args.svg)
    except JobError as exc:
        doc = {"job": job, "error": {"field": exc.field, "message": str(exc)}}
        print(json.dumps(doc, indent=2))
        print(f"error in {exc.field}: {exc}", file=sys.stderr)
        return 1
    except VerificationFailure as exc:
        print(json.dumps({"job": job, "error": {"field": "verification", "message": str(exc)}}, indent=2))
        return 2
    print(json.dumps({"job": job, "result": result}, indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main())
