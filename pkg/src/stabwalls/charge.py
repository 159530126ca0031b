"""Central charges, beta-decompositions and the large-volume threshold."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

from .lattice import (
    CharVector,
    InputError,
    SurfaceLattice,
    Vec,
    exp_class,
    exp_twist,
    frac,
    mukai_pair,
    vec,
    vscale,
    vsub,
)


@dataclass(frozen=True)
class StabilityPoint:
    """A parameter (beta, omega) with omega = sqrt(scale_sq) * omega_dir.

    ``scale_sq`` lets a point sit on a ray at an irrational height t while
    all arithmetic stays rational: every quantity used downstream depends on
    t only through t^2 or through an overall positive factor t.
    """

    beta: Vec
    omega: Vec
    scale_sq: Fraction = Fraction(1)
    chart_tag: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "beta", vec(self.beta))
        object.__setattr__(self, "omega", vec(self.omega))
        object.__setattr__(self, "scale_sq", frac(self.scale_sq))
        if self.scale_sq <= 0:
            raise InputError("scale_sq must be positive")

    @classmethod
    def on_ray(cls, beta, H, t_sq, chart_tag=None) -> "StabilityPoint":
        """(beta, tH) with t = sqrt(t_sq)."""
        return cls(vec(beta), vec(H), frac(t_sq), chart_tag)

    def omega_sq(self, L: SurfaceLattice) -> Fraction:
        return self.scale_sq * L.sq(self.omega)

    def validate(self, L: SurfaceLattice) -> "StabilityPoint":
        if len(self.beta) != L.rho or len(self.omega) != L.rho:
            raise InputError("stability point has the wrong dimension")
        if L.sq(self.omega) <= 0:
            raise InputError("omega must satisfy (omega, omega) > 0")
        if L.dot(self.omega, L.H) <= 0:
            raise InputError("omega must satisfy (omega, H) > 0")
        return self

    def categorical_wall(self, L: SurfaceLattice) -> bool:
        """True on the blow-up boundary (omega, C) = 0 with (beta, C) in 1/2 + Z."""
        if L.C is None or L.dot(self.omega, L.C) != 0:
            return False
        return (L.dot(self.beta, L.C) - Fraction(1, 2)).denominator == 1


@dataclass(frozen=True)
class BetaDecomposition:
    """v = e^beta (r + a_beta rho + d_beta H + D_beta) with D_beta in H^perp."""

    r: Fraction
    d_beta: Fraction
    a_beta: Fraction
    D_beta: Vec
    beta: Vec
    H: Vec

    def reassemble(self, L: SurfaceLattice) -> CharVector:
        c1 = tuple(self.d_beta * h + D for h, D in zip(self.H, self.D_beta))
        inner = CharVector(self.r, c1, self.a_beta)
        return exp_twist(inner, self.beta, L)


def beta_decompose(v: CharVector, beta: Sequence, H: Sequence, L: SurfaceLattice) -> BetaDecomposition:
    L.check(v)
    beta, H = vec(beta), vec(H)
    h = L.dot(H, H)
    if h <= 0:
        raise InputError("(H, H) must be positive")
    shifted = vsub(v.c1, vscale(v.r, beta))
    d = L.dot(shifted, H) / h
    a = -mukai_pair(exp_class(beta, L), v, L)
    D = vsub(shifted, vscale(d, H))
    return BetaDecomposition(v.r, d, a, D, beta, H)


def weak_bogomolov_holds(v: CharVector, beta, H, L: SurfaceLattice) -> bool:
    """The inequality (v^2) - (D_beta^2) >= 0 as a predicate."""
    dec = beta_decompose(v, beta, H, L)
    return mukai_pair(v, v, L) - L.sq(dec.D_beta) >= 0


@dataclass(frozen=True)
class ChargeValue:
    re: Fraction
    im: Fraction  # Z = re + i * sqrt(scale_sq) * im
    scale_sq: Fraction = Fraction(1)

    @property
    def vanishes(self) -> bool:
        return self.re == 0 and self.im == 0

    @property
    def phase(self) -> Optional[float]:
        """arg(Z)/pi in (0, 1] when Im Z >= 0 and Z != 0; display only."""
        if self.vanishes:
            return None
        im = float(self.im) * math.sqrt(float(self.scale_sq))
        if self.im < 0:
            return None
        if self.im == 0:
            return 1.0 if self.re < 0 else None
        return cmath.phase(complex(float(self.re), im)) / math.pi


def central_charge(v: CharVector, sp: StabilityPoint, L: SurfaceLattice) -> ChargeValue:
    """Z = (e^{beta + i omega}, v).

    Real part -a_beta + r (omega^2)/2, imaginary part (c1 - r beta, omega);
    on omega in R_{>0} H the latter is d_beta (H, omega).
    """
    L.check(v)
    a = -mukai_pair(exp_class(sp.beta, L), v, L)
    re = -a + v.r * sp.omega_sq(L) / 2
    im = L.dot(vsub(v.c1, vscale(v.r, sp.beta)), sp.omega)
    return ChargeValue(re, im, sp.scale_sq)


def gieseker_compare(v1: CharVector, v2: CharVector, beta, H, L: SurfaceLattice) -> str:
    """Lexicographic comparison of (d_beta/r, a_beta/r)."""
    if v1.r <= 0 or v2.r <= 0:
        raise InputError("twisted slope comparison needs positive ranks")
    a = beta_decompose(v1, beta, H, L)
    b = beta_decompose(v2, beta, H, L)
    ka = (a.d_beta / a.r, a.a_beta / a.r)
    kb = (b.d_beta / b.r, b.a_beta / b.r)
    if ka < kb:
        return "less"
    if ka > kb:
        return "greater"
    return "equal"


def d0_closed_form(L: SurfaceLattice, H=None) -> Fraction:
    """min{(D, H) > 0 : D in NS(X)} / (H^2)."""
    H = L.H if H is None else vec(H)
    mu = _degree_gcd(L, H)
    return Fraction(mu) / L.dot(H, H)


def dmin_closed_form(L: SurfaceLattice, beta, H=None) -> Fraction:
    """min{d_beta(E) > 0}: the degrees (c1 - r beta, H) form the group
    mu Z + (beta, H) Z, generated by gcd(mu q, p)/q when (beta, H) = p/q."""
    H = L.H if H is None else vec(H)
    mu = _degree_gcd(L, H)
    bh = L.dot(vec(beta), H)
    g = Fraction(gcd(mu * bh.denominator, bh.numerator), bh.denominator)
    return g / L.dot(H, H)


def _degree_gcd(L: SurfaceLattice, H) -> int:
    g = 0
    for row in L.gram:
        g = gcd(g, abs(int(sum(x * y for x, y in zip(row, H)))))
    return g


def large_volume_threshold(v: CharVector, beta, H, L: SurfaceLattice, d0, dmin) -> Fraction:
    """Bound on (omega^2) above which the ray (beta, tH) meets no wall for v.

    For negative rank ``dmin`` is the minimal positive degree at -beta.
    """
    d0, dmin = frac(d0), frac(dmin)
    if d0 <= 0 or dmin <= 0:
        raise InputError("d0 and dmin must be positive")
    dec = beta_decompose(v, beta, H, L)
    excess = mukai_pair(v, v, L) - L.sq(dec.D_beta)
    d = dec.d_beta
    if v.r > 0:
        return (d - dmin) / (v.r * d0) * excess
    if v.r == 0:
        if d == 0:
            raise InputError("rank 0 with d_beta = 0 has no positive slope direction")
        return (d - dmin) / d0 * excess + 2 * d * abs(dec.a_beta) / d0
    return (-d + dmin) / (v.r * d0) * excess


def strong_bogomolov_holds(v: CharVector, sp: StabilityPoint, L: SurfaceLattice, C_omega) -> bool:
    """(v^2) + C_omega (c1(E(-beta)), omega)^2 / (omega^2) >= -1 for a user-given C_omega."""
    C_omega = frac(C_omega)
    pair = L.dot(vsub(v.c1, vscale(v.r, sp.beta)), sp.omega)
    return mukai_pair(v, v, L) + C_omega * pair * pair / L.sq(sp.omega) >= -1


def support_property_holds(v: CharVector, sp: StabilityPoint, L: SurfaceLattice, C_B) -> bool:
    """||v|| <= C_B |Z(v)| with the coordinate Euclidean norm, compared squared."""
    C_B = frac(C_B)
    z = central_charge(v, sp, L)
    norm_sq = sum(x * x for x in v.entries())
    return norm_sq <= C_B * C_B * (z.re * z.re + z.scale_sq * z.im * z.im)
