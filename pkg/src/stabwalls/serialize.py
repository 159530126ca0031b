"""JSON forms of problems and reports.  Rationals travel as "p/q" strings."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from .charge import StabilityPoint
from .lattice import CharVector, InputError, SurfaceLattice, Vec, frac
from .walls import Caps, Chamber, STChart, Wall, WallLocus

SCHEMA = 1


def rat(x: Optional[Fraction]) -> Optional[str]:
    return None if x is None else str(Fraction(x))


def parse_rat(x: Any, what: str = "value") -> Fraction:
    if isinstance(x, bool) or isinstance(x, float):
        raise InputError(f"{what}: give rationals as integers or 'p/q' strings, not {x!r}")
    try:
        return frac(Fraction(x) if isinstance(x, str) else x)
    except (ValueError, ZeroDivisionError, TypeError):
        raise InputError(f"{what}: cannot read {x!r} as a rational") from None


def rvec(xs) -> Optional[List[str]]:
    return None if xs is None else [rat(x) for x in xs]


def parse_vec(xs: Any, what: str) -> Vec:
    if not isinstance(xs, list):
        raise InputError(f"{what}: expected a list")
    return tuple(parse_rat(x, what) for x in xs)


def char_to(x: Optional[CharVector]) -> Optional[dict]:
    if x is None:
        return None
    return {"r": rat(x.r), "c1": rvec(x.c1), "s": rat(x.s)}


def char_from(d: Any, what: str = "class") -> CharVector:
    if isinstance(d, list) and len(d) >= 3:
        return CharVector(parse_rat(d[0], what), parse_vec(d[1:-1], what), parse_rat(d[-1], what))
    if not isinstance(d, dict) or not {"r", "c1", "s"} <= set(d):
        raise InputError(f"{what}: expected {{'r', 'c1', 's'}}")
    return CharVector(parse_rat(d["r"], what), parse_vec(d["c1"], what), parse_rat(d["s"], what))


def surface_to(L: SurfaceLattice) -> dict:
    return {
        "gram": [rvec(row) for row in L.gram],
        "H": rvec(L.H),
        "K": rvec(L.K),
        "chiO": rat(L.chiO),
        "C": rvec(L.C),
        "pullback": None if L.pullback is None else list(L.pullback),
    }


def surface_from(d: Any) -> SurfaceLattice:
    if not isinstance(d, dict):
        raise InputError("surface: expected an object")
    for key in ("gram", "H", "K", "chiO"):
        if key not in d:
            raise InputError(f"surface: missing '{key}'")
    gram = d["gram"]
    if not isinstance(gram, list):
        raise InputError("surface.gram: expected a list of rows")
    pullback = d.get("pullback")
    return SurfaceLattice(
        tuple(parse_vec(row, "surface.gram") for row in gram),
        parse_vec(d["H"], "surface.H"),
        parse_vec(d["K"], "surface.K"),
        parse_rat(d["chiO"], "surface.chiO"),
        None if d.get("C") is None else parse_vec(d["C"], "surface.C"),
        None if pullback is None else tuple(bool(b) for b in pullback),
    )


def point_to(sp: Optional[StabilityPoint]) -> Optional[dict]:
    if sp is None:
        return None
    return {"beta": rvec(sp.beta), "omega": rvec(sp.omega), "scale_sq": rat(sp.scale_sq), "tag": sp.chart_tag}


def point_from(d: Any) -> StabilityPoint:
    if not isinstance(d, dict) or "beta" not in d or "omega" not in d:
        raise InputError("point: expected {'beta', 'omega'}")
    return StabilityPoint(
        parse_vec(d["beta"], "point.beta"),
        parse_vec(d["omega"], "point.omega"),
        parse_rat(d.get("scale_sq", 1), "point.scale_sq"),
        d.get("tag"),
    )


def caps_from(d: Any) -> Caps:
    if d is None:
        return Caps()
    if not isinstance(d, dict):
        raise InputError("caps: expected an object")
    unknown = set(d) - {"r1", "den", "dsq", "ch2", "max_classes"}
    if unknown:
        raise InputError(f"caps: unknown keys {sorted(unknown)}")
    r1 = d.get("r1")
    dsq = d.get("dsq")
    return Caps(
        r1=None if r1 is None else int(parse_rat(r1, "caps.r1")),
        den=int(parse_rat(d.get("den", 1), "caps.den")),
        dsq=None if dsq is None else parse_rat(dsq, "caps.dsq"),
        ch2=d.get("ch2", "chern"),
        max_classes=int(parse_rat(d.get("max_classes", 100000), "caps.max_classes")),
    )


@dataclass(frozen=True)
class ChartSpec:
    """kind "st": beta0 + D_part + s H_dir with omega = t H_dir.
    kind "sq": (delta + sH + pC, H - qC) on a blow-up."""

    kind: str = "st"
    beta0: Optional[Vec] = None
    H_dir: Optional[Vec] = None
    D_part: Optional[Vec] = None
    p: Fraction = Fraction(0)

    def st_chart(self, L: SurfaceLattice, beta=None) -> STChart:
        if self.kind != "st":
            raise InputError("this subcommand needs an st-chart")
        H = L.H if self.H_dir is None else self.H_dir
        if self.beta0 is None:
            if beta is None:
                return STChart.make((Fraction(0),) * L.rho, H, self.D_part)
            return STChart.through(beta, L, H)
        return STChart.make(self.beta0, H, self.D_part)


def chart_to(c: ChartSpec) -> dict:
    return {"kind": c.kind, "beta0": rvec(c.beta0), "H_dir": rvec(c.H_dir), "D_part": rvec(c.D_part), "p": rat(c.p)}


def chart_from(d: Any) -> ChartSpec:
    if d is None:
        return ChartSpec()
    if not isinstance(d, dict):
        raise InputError("chart: expected an object")
    kind = d.get("kind", "st")
    if kind not in ("st", "sq"):
        raise InputError("chart.kind must be 'st' or 'sq'")
    opt = lambda k: None if d.get(k) is None else parse_vec(d[k], f"chart.{k}")  # noqa: E731
    return ChartSpec(kind, opt("beta0"), opt("H_dir"), opt("D_part"), parse_rat(d.get("p", 0), "chart.p"))


@dataclass(frozen=True)
class Problem:
    L: SurfaceLattice
    v: CharVector
    beta: Optional[Vec] = None
    chart: ChartSpec = ChartSpec()
    point: Optional[StabilityPoint] = None
    w: Optional[CharVector] = None
    u: Optional[CharVector] = None
    caps: Caps = Caps()
    C_omega: Optional[Fraction] = None
    C_B: Optional[Fraction] = None
    d0: Optional[Fraction] = None
    dmin: Optional[Fraction] = None
    r0: Optional[int] = None
    mu: Optional[Fraction] = None
    n: Optional[int] = None
    viewport: Optional[Vec] = None  # (s_min, s_max, t_max)


def problem_to(p: Problem) -> dict:
    return {
        "schema": SCHEMA,
        "surface": surface_to(p.L),
        "v": char_to(p.v),
        "beta": rvec(p.beta),
        "chart": chart_to(p.chart),
        "point": point_to(p.point),
        "w": char_to(p.w),
        "u": char_to(p.u),
        "caps": p.caps.as_dict(),
        "constants": {"C_omega": rat(p.C_omega), "C_B": rat(p.C_B)},
        "lv": {"d0": rat(p.d0), "dmin": rat(p.dmin)},
        "window": {"r0": p.r0, "mu": rat(p.mu)},
        "n": p.n,
        "viewport": rvec(p.viewport),
    }


def problem_from(d: Any) -> Problem:
    if not isinstance(d, dict):
        raise InputError("problem: expected a JSON object")
    if d.get("schema", SCHEMA) != SCHEMA:
        raise InputError(f"problem: unsupported schema {d.get('schema')!r}")
    if "surface" not in d or "v" not in d:
        raise InputError("problem: 'surface' and 'v' are required")
    L = surface_from(d["surface"])
    v = L.check(char_from(d["v"], "v"))

    def opt_rat(section, key):
        sec = d.get(section) or {}
        return None if sec.get(key) is None else parse_rat(sec[key], f"{section}.{key}")

    def opt_int(x, what):
        if x is None:
            return None
        val = parse_rat(x, what)
        if val.denominator != 1:
            raise InputError(f"{what} must be an integer")
        return int(val)

    window = d.get("window") or {}
    return Problem(
        L=L,
        v=v,
        beta=None if d.get("beta") is None else parse_vec(d["beta"], "beta"),
        chart=chart_from(d.get("chart")),
        point=None if d.get("point") is None else point_from(d["point"]),
        w=None if d.get("w") is None else L.check(char_from(d["w"], "w")),
        u=None if d.get("u") is None else L.check(char_from(d["u"], "u")),
        caps=caps_from(d.get("caps")),
        C_omega=opt_rat("constants", "C_omega"),
        C_B=opt_rat("constants", "C_B"),
        d0=opt_rat("lv", "d0"),
        dmin=opt_rat("lv", "dmin"),
        r0=opt_int(window.get("r0"), "window.r0"),
        mu=opt_rat("window", "mu"),
        n=opt_int(d.get("n"), "n"),
        viewport=None if d.get("viewport") is None else parse_vec(d["viewport"], "viewport"),
    )


def locus_to(loc: WallLocus) -> dict:
    return {
        "kind": loc.kind,
        "chart": {"beta0": rvec(loc.chart.beta0), "H_dir": rvec(loc.chart.H_dir), "D_part": rvec(loc.chart.D_part)},
        "center": rat(loc.center),
        "radius_sq": rat(loc.radius_sq),
        "line_s": rat(loc.line_s),
        "scale": rat(loc.scale),
    }


def locus_from(d: dict) -> WallLocus:
    c = d["chart"]
    chart = STChart(parse_vec(c["beta0"], "chart"), parse_vec(c["H_dir"], "chart"), parse_vec(c["D_part"], "chart"))
    opt = lambda k: None if d.get(k) is None else parse_rat(d[k], k)  # noqa: E731
    return WallLocus(d["kind"], chart, opt("center"), opt("radius_sq"), opt("line_s"), parse_rat(d["scale"], "scale"))


def wall_to(w: Wall) -> dict:
    return {"v1": char_to(w.v1), "locus": locus_to(w.locus), "tags": sorted(w.tags)}


def wall_from(d: dict) -> Wall:
    return Wall(char_from(d["v1"], "v1"), locus_from(d["locus"]), frozenset(d["tags"]))


def chamber_to(c: Chamber) -> dict:
    return {
        "id": c.id,
        "sample_point": point_to(c.sample_point),
        "is_gieseker": c.is_gieseker,
        "signs": [[list(k), s] for k, s in c.signs],
        "digest": c.digest,
    }


def chamber_from(d: dict) -> Chamber:
    signs = tuple((tuple(k), s) for k, s in d["signs"])
    return Chamber(d["id"], point_from(d["sample_point"]), d["is_gieseker"], signs, d["digest"])


@dataclass
class WallReport:
    walls: List[Wall]
    chambers: List[Chamber]
    provenance: Dict[str, Any]
    truncated: bool = False
    chain: Optional[Dict[str, Any]] = None
    notes: List[str] = field(default_factory=list)


def report_to(rep: WallReport) -> dict:
    return {
        "schema": SCHEMA,
        "walls": [wall_to(w) for w in rep.walls],
        "chambers": [chamber_to(c) for c in rep.chambers],
        "provenance": rep.provenance,
        "truncated": rep.truncated,
        "chain": rep.chain,
        "notes": list(rep.notes),
    }


def report_from(d: dict) -> WallReport:
    if d.get("schema") != SCHEMA:
        raise InputError(f"report: unsupported schema {d.get('schema')!r}")
    return WallReport(
        [wall_from(w) for w in d["walls"]],
        [chamber_from(c) for c in d["chambers"]],
        d["provenance"],
        d["truncated"],
        d.get("chain"),
        list(d.get("notes", [])),
    )


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def content_hash(obj: Any) -> str:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()
