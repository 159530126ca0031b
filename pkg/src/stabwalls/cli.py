"""stabwalls command line.

    stabwalls <subcommand> --problem FILE [--out FILE] [--svg FILE]
              [--caps r1=..,den=..,dsq=..] [--canonical] [--cache FILE]

Exit codes: 0 ok, 2 bad input, 3 enumeration truncated by a cap, 1 internal error.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from dataclasses import replace
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from . import __version__
from .blowup import ChainResult, chamber_chain, min_s_window
from .charge import (
    StabilityPoint,
    beta_decompose,
    central_charge,
    strong_bogomolov_holds,
    support_property_holds,
)
from .lattice import (
    CharVector,
    InputError,
    SurfaceLattice,
    discriminant_and_square,
    euler_pair,
    mukai_pair,
    product,
    proportional,
    todd,
    todd_inverse,
    vadd,
    vscale,
)
from .linebundles import congruence_coefficient, gieseker_polarization, theta_class, wall_clearing_bound
from .serialize import (
    SCHEMA,
    ChartSpec,
    Problem,
    WallReport,
    caps_from,
    chamber_to,
    char_from,
    char_to,
    content_hash,
    dumps,
    parse_rat,
    point_to,
    problem_from,
    rat,
    report_to,
    rvec,
    surface_to,
    wall_to,
)
from .svg import render
from .walls import (
    Caps,
    Chamber,
    Enumeration,
    OnWall,
    Wall,
    chamber_of,
    enumerate_wall_classes,
    gieseker_threshold,
    locus_in_chart,
    mark_nested,
    nested_circles_check,
    on_wall,
    ray_crossing,
    window_walls,
)
from .ximap import FiberCircle, FiberRay, UndefinedFiber, fiber_circle, xi, xi_vector

OK, INTERNAL, BAD_INPUT, TRUNCATED = 0, 1, 2, 3


class Result:
    def __init__(self, body: dict, truncated: bool = False, svg: Optional[str] = None, failed: bool = False):
        self.body = body
        self.truncated = truncated
        self.svg = svg
        self.failed = failed


def parse_caps_flag(text: str, base: Caps) -> Caps:
    d = base.as_dict()
    for item in filter(None, (x.strip() for x in text.split(","))):
        if "=" not in item:
            raise InputError(f"--caps: expected key=value, got {item!r}")
        k, val = (x.strip() for x in item.split("=", 1))
        if k == "max":
            k = "max_classes"
        d[k] = None if val.lower() == "none" else val
    return caps_from(d)


def _beta(p: Problem) -> Tuple[Fraction, ...]:
    if p.beta is not None:
        return p.beta
    if p.point is not None:
        return p.point.beta
    raise InputError("this subcommand needs 'beta' (or a 'point') in the problem file")


def _point(p: Problem) -> StabilityPoint:
    if p.point is None:
        raise InputError("this subcommand needs a 'point' in the problem file")
    return p.point.validate(p.L)


class Runner:
    def __init__(self, problem: Problem, cache: Optional[str] = None):
        self.p = problem
        self.cache = cache

    # enumeration, optionally through the cache file

    def _cache_key(self, beta) -> str:
        p = self.p
        return content_hash({"surface": surface_to(p.L), "v": char_to(p.v), "beta": rvec(beta), "caps": p.caps.as_dict()})

    def enumerate(self, beta) -> Enumeration:
        p = self.p
        chart = p.chart.st_chart(p.L, beta)
        key = self._cache_key(beta)
        store = _read_cache(self.cache) if self.cache else {}
        hit = store.get(key)
        if hit is not None:
            v1s = [char_from(x, "cache") for x in hit["classes"]]
            walls = []
            for v1, tags in zip(v1s, hit["tags"]):
                walls.append(Wall(v1, locus_in_chart(p.v, v1, chart, p.L), frozenset(tags)))
            return Enumeration(walls, hit["truncated"], hit["bounds"], parse_rat(hit["d_beta"]), hit["degenerate"], hit["notes"])
        res = enumerate_wall_classes(p.v, beta, p.L.H, p.L, p.caps, chart=chart)
        if self.cache:
            store[key] = {
                "classes": [char_to(w.v1) for w in res.walls],
                "tags": [sorted(w.tags) for w in res.walls],
                "truncated": res.truncated,
                "bounds": res.bounds,
                "d_beta": rat(res.d_beta),
                "degenerate": res.degenerate_pairs,
                "notes": res.notes,
            }
            _write_cache(self.cache, store)
        return res

    # subcommands

    def pair(self) -> Result:
        p = self.p
        if p.w is None:
            raise InputError("pair needs 'w' in the problem file")
        disc_v, sq_v = discriminant_and_square(p.v, p.L)
        return Result({
            "mukai_pair": rat(mukai_pair(p.v, p.w, p.L)),
            "euler_pair": rat(euler_pair(p.v, p.w, p.L)),
            "v_sq": rat(sq_v),
            "discriminant": rat(disc_v),
        })

    def decompose(self) -> Result:
        p = self.p
        beta = _beta(p)
        dec = beta_decompose(p.v, beta, p.L.H, p.L)
        lhs = mukai_pair(p.v, p.v, p.L) - p.L.sq(dec.D_beta)
        rhs = dec.d_beta ** 2 * p.L.h - 2 * dec.r * dec.a_beta
        return Result({
            "beta": rvec(beta),
            "r": rat(dec.r),
            "d_beta": rat(dec.d_beta),
            "a_beta": rat(dec.a_beta),
            "D_beta": rvec(dec.D_beta),
            "bogomolov_excess": rat(lhs),
            "identity_holds": lhs == rhs,
        })

    def charge(self) -> Result:
        p = self.p
        sp = _point(p)
        z = central_charge(p.v, sp, p.L)
        body = {
            "point": point_to(sp),
            "re": rat(z.re),
            "im_over_sqrt_scale": rat(z.im),
            "scale_sq": rat(z.scale_sq),
            "vanishes": z.vanishes,
            "phase": None if z.phase is None else round(z.phase, 12),
        }
        if p.C_omega is not None:
            body["strong_bogomolov"] = strong_bogomolov_holds(p.v, sp, p.L, p.C_omega)
        if p.C_B is not None:
            body["support_property"] = support_property_holds(p.v, sp, p.L, p.C_B)
        return Result(body)

    def xi(self) -> Result:
        p = self.p
        sp = _point(p)
        u = xi(p.v, sp, p.L)
        body = {"point": point_to(sp), "xi": char_to(u.rep), "in_perp": u.in_perp(p.L)}
        if p.v.r != 0:
            body["degenerate_ray"] = u.is_degenerate_ray(p.L)
            body["in_positive_cone"] = u.in_positive_cone(p.L)
            if body["degenerate_ray"]:
                body["note"] = "xi is on the ray of H + (H, delta) rho (beta = delta, omega on the H ray)"
        return Result(body)

    def fiber(self) -> Result:
        p = self.p
        if p.u is not None:
            u = p.u
        else:
            u = xi(p.v, _point(p), p.L).rep
        H = p.chart.H_dir or p.L.H
        f = fiber_circle(p.v, u, H, p.L)
        return Result({"u": char_to(u), "fiber": _fiber_to(f)})

    def walls(self, with_svg: bool = False) -> Result:
        p = self.p
        beta = _beta(p)
        res = self.enumerate(beta)
        walls = mark_nested(res.walls) if p.L.rho == 1 else res.walls
        chambers = self._ray_chambers(beta, walls)
        rep = WallReport(walls, chambers, self._provenance(beta, res), res.truncated, None, list(res.notes))
        body = report_to(rep)
        body["nested"] = nested_circles_check(walls).ok if p.L.rho == 1 else None
        if p.r0 is not None:
            body["window"] = self._window()
        svg = render(walls, p.viewport) if with_svg else None
        return Result(body, res.truncated, svg)

    def _window(self) -> dict:
        p = self.p
        win = min_s_window(p.v, p.L.H, p.L, p.r0, p.mu)
        out = {"lo": rat(win.lo), "hi": rat(win.hi)}
        if p.L.rho == 1:
            wres = window_walls(p.v, win.lo, win.hi, p.L, p.caps)
            out["walls"] = [wall_to(w) for w in wres.walls]
            out["notes"] = wres.notes
        return out

    def _ray_chambers(self, beta, walls: List[Wall]) -> List[Chamber]:
        p = self.p
        H = p.L.H
        h = p.L.h
        crossings = sorted({c for c in (ray_crossing(p.v, w, beta, H, p.L) for w in walls) if c is not None})
        try:
            thr = gieseker_threshold(p.v, beta, H, p.L, p.d0, p.dmin) / h
        except InputError:
            thr = Fraction(0)
        top = max([thr] + crossings)
        ts: List[Fraction] = []
        if crossings:
            ts.append(crossings[0] / 2)
            ts.extend((a + b) / 2 for a, b in zip(crossings, crossings[1:]))
        ts.append(max(top, Fraction(0)) + 1)
        out = []
        for t_sq in ts:
            sp = StabilityPoint.on_ray(beta, H, t_sq, "ray")
            ch = chamber_of(p.v, sp, walls, p.L, H, p.d0, p.dmin)
            if isinstance(ch, OnWall):
                raise RuntimeError("a ray sample landed on a wall")
            out.append(ch)
        return out

    def _provenance(self, beta, res: Enumeration) -> dict:
        return {
            "tool": "stabwalls",
            "version": __version__,
            "beta": rvec(beta),
            "H": rvec(self.p.L.H),
            "caps": self.p.caps.as_dict(),
            "bounds": res.bounds,
            "d_beta": rat(res.d_beta),
            "degenerate_pairs": res.degenerate_pairs,
        }

    def chamber(self) -> Result:
        p = self.p
        sp = _point(p)
        res = self.enumerate(sp.beta)
        ch = chamber_of(p.v, sp, res.walls, p.L, None, p.d0, p.dmin)
        if isinstance(ch, OnWall):
            body = {"on_wall": wall_to(ch.wall), "label": ch.label, "point": point_to(sp)}
        else:
            body = {"chamber": chamber_to(ch)}
        body["wall_count"] = len(res.walls)
        return Result(body, res.truncated)

    def chain(self) -> Result:
        p = self.p
        beta0 = p.chart.beta0 if p.chart.beta0 is not None else (Fraction(0),) * p.L.rho
        res = chamber_chain(p.v, beta0, p.L, p.caps)
        return Result({"chain": chain_to(res)}, res.truncated)

    def theta(self) -> Result:
        p = self.p
        if p.u is not None:
            u = p.u
            beta = p.beta
        else:
            n = p.n if p.n is not None else 1
            u = gieseker_polarization(p.v, p.L.H, p.v.delta(), n, p.L).rep
            beta = p.v.delta()
        dc = theta_class(u, p.v, p.L)
        body = {"u": char_to(u), "alpha": char_to(dc.alpha), "chi_alpha_v": rat(dc.chi_with(p.v, p.L))}
        if p.v.r != 0 and beta is not None:
            c = congruence_coefficient(u, p.v, p.L.H, beta, p.L)
            body["xi1_coefficient"] = rat(c)
        if p.beta is not None and p.v.r > 0:
            try:
                res = self.enumerate(p.beta)
                b = wall_clearing_bound(p.v, p.L.H, res.walls, p.L)
                body["wall_clearing_bound"] = rat(b.bound)
            except InputError as e:
                body["wall_clearing_bound"] = None
                body["wall_clearing_note"] = str(e)
        return Result(body)

    def plot(self) -> Result:
        r = self.walls(with_svg=True)
        return r

    def check(self) -> Result:
        p = self.p
        L, v = p.L, p.v
        checks: List[dict] = []

        def add(name, fn: Callable[[], bool]):
            try:
                ok = bool(fn())
                checks.append({"name": name, "ok": ok})
            except InputError as e:
                checks.append({"name": name, "ok": None, "skipped": str(e)})

        add("td * td^-1 = 1", lambda: product(todd(L), todd_inverse(L), L) == CharVector.of(1, [0] * L.rho, 0))
        if p.beta is not None:
            def bog():
                dec = beta_decompose(v, p.beta, L.H, L)
                return mukai_pair(v, v, L) - L.sq(dec.D_beta) == dec.d_beta ** 2 * L.h - 2 * dec.r * dec.a_beta
            add("weak Bogomolov identity", bog)
        if p.point is not None and v.r != 0:
            def roundtrip():
                sp = _point(p)
                if not proportional(sp.omega, L.H):
                    raise InputError("round trip needs omega on the H ray")
                f = fiber_circle(v, xi_vector(v, sp, L), L.H, L)
                if not isinstance(f, FiberCircle):
                    raise InputError("the fiber is a ray")
                s = (L.dot(sp.beta, L.H) - L.dot(v.delta(), L.H)) / L.h
                t_sq = sp.scale_sq * L.sq(sp.omega) / L.h
                perp = vadd(L.perp_H(sp.beta), vscale(-1, L.perp_H(v.delta())))
                return f.contains(s, t_sq) and tuple(perp) == tuple(f.D_part)
            add("xi fiber round trip", roundtrip)
        if v.r > 0:
            def theta_orth():
                u = gieseker_polarization(v, L.H, v.delta(), 1, L)
                return theta_class(u, v, L).chi_with(v, L) == 0
            add("theta orthogonality", theta_orth)
        truncated = False
        if p.beta is not None:
            try:
                res = self.enumerate(p.beta)
                truncated = res.truncated

                def all_on_wall():
                    for w in res.walls:
                        if not _witness_on_wall(v, w, p.beta, L):
                            return False
                    return True
                add("enumerated classes define walls on the ray", all_on_wall)
                if L.rho == 1:
                    add("walls are nested", lambda: nested_circles_check(res.walls).ok)
            except InputError as e:
                checks.append({"name": "enumeration", "ok": None, "skipped": str(e)})
        failed = any(c["ok"] is False for c in checks)
        return Result({"checks": checks, "all_ok": not failed}, truncated, failed=failed)


def _witness_on_wall(v: CharVector, w: Wall, beta, L: SurfaceLattice) -> bool:
    t_sq = ray_crossing(v, w, beta, L.H, L)
    if t_sq is None:
        return False
    return on_wall(v, w.v1, StabilityPoint.on_ray(beta, L.H, t_sq), L)


def _fiber_to(f) -> dict:
    if isinstance(f, FiberCircle):
        return {
            "kind": "circle",
            "center_s": rat(f.center_s),
            "radius_sq": rat(f.radius_sq),
            "beta0": rvec(f.beta0),
            "H_dir": rvec(f.H_dir),
            "D_part": rvec(f.D_part),
        }
    return {
        "kind": "ray",
        "beta0": rvec(f.beta0),
        "H_dir": rvec(f.H_dir),
        "connected": f.connected,
        "empty": f.empty,
        "re_sign": f.re_sign,
        "note": f.note,
    }


def chain_to(res: ChainResult) -> dict:
    return {
        "v": char_to(res.v),
        "twist": res.twist,
        "k": res.k,
        "N": res.N,
        "chambers": [chamber_to(c) for c in res.chambers],
        "walls": [
            {
                "n": w.n,
                "w": char_to(w.w),
                "slope": rat(w.slope),
                "genuine": w.genuine,
                "witness_p": w.witness_p,
                "verified_on_wall": w.verified,
            }
            for w in res.walls
        ],
        "annotations": list(res.annotations),
        "truncated": res.truncated,
        "notes": list(res.notes),
    }


def _read_cache(path: str) -> Dict[str, dict]:
    if not os.path.exists(path):
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, ValueError):
        return {}
    if not isinstance(data, dict) or data.get("schema") != SCHEMA:
        return {}
    return data.get("entries", {})


def _write_cache(path: str, entries: Dict[str, dict]):
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(dumps({"schema": SCHEMA, "entries": entries}))
    os.replace(tmp, path)


SUBCOMMANDS = ("pair", "decompose", "charge", "xi", "fiber", "walls", "chamber", "chain", "theta", "plot", "check")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stabwalls", description="Exact wall and chamber computations for stability conditions on surfaces")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--problem", required=True, help="problem file (JSON)")
    ap.add_argument("--out", help="write the JSON result here instead of stdout")
    ap.add_argument("--svg", help="write the wall diagram here (walls, plot)")
    ap.add_argument("--caps", help="override caps, e.g. r1=3,den=1,dsq=10")
    ap.add_argument("--canonical", action="store_true", help="byte-stable output: no timestamp")
    ap.add_argument("--cache", help="single-file enumeration cache")
    ap.add_argument("--version", action="version", version=f"stabwalls {__version__}")
    return ap


def run(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        try:
            with open(args.problem, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as e:
            raise InputError(f"cannot read problem file: {e}") from None
        except ValueError as e:
            raise InputError(f"problem file is not valid JSON: {e}") from None
        problem = problem_from(raw)
        if args.caps:
            problem = replace(problem, caps=parse_caps_flag(args.caps, problem.caps))
        runner = Runner(problem, args.cache)
        if args.subcommand == "walls":
            result = runner.walls(with_svg=bool(args.svg))
        else:
            result = getattr(runner, args.subcommand)()
    except (InputError, UndefinedFiber) as e:
        print(f"stabwalls: input error: {e}", file=stderr)
        return BAD_INPUT
    except Exception as e:  # noqa: BLE001
        print(f"stabwalls: internal error: {type(e).__name__}: {e}", file=stderr)
        return INTERNAL

    if args.subcommand == "plot":
        # the diagram is the primary output; --svg writes a second copy
        text = result.svg
        if args.svg:
            with open(args.svg, "w", encoding="utf-8") as fh:
                fh.write(result.svg)
    else:
        body = dict(result.body)
        body.setdefault("schema", SCHEMA)
        body["subcommand"] = args.subcommand
        if not args.canonical:
            body["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        text = dumps(body)
        if result.svg is not None and args.svg:
            with open(args.svg, "w", encoding="utf-8") as fh:
                fh.write(result.svg)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if result.failed:
        return INTERNAL
    return TRUNCATED if result.truncated else OK


def main() -> None:
    sys.exit(run())
