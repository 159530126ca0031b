"""Characters of determinant line bundles on moduli of objects with vector v."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from .lattice import (
    CharVector,
    InputError,
    SurfaceLattice,
    dual,
    euler_pair,
    exp_class,
    mukai_pair,
    product,
    proportional,
    todd_inverse,
    vec,
    vscale,
    vsub,
)
from .walls import Wall
from .ximap import XiClass


def todd_inverse_dual(L: SurfaceLattice) -> CharVector:
    """(td^-1)^vee = (1, -K/2, (K^2)/4 - chi(O_X))."""
    return dual(todd_inverse(L))


@dataclass(frozen=True)
class DeterminantClass:
    """alpha with ch(alpha) = u (td^-1)^vee."""

    alpha: CharVector
    source_u: XiClass

    def chi_with(self, v: CharVector, L: SurfaceLattice) -> Fraction:
        return euler_pair(self.alpha, v, L)


def _as_xi(u: Union[XiClass, CharVector], v: CharVector) -> XiClass:
    if isinstance(u, XiClass):
        return u
    return XiClass(u, v, False)


def theta_class(u: Union[XiClass, CharVector], v: CharVector, L: SurfaceLattice) -> DeterminantClass:
    """The class attached to u in v^perp; chi(alpha, v) = -(u, v) = 0."""
    ux = _as_xi(u, v)
    L.check(ux.rep)
    if mukai_pair(ux.rep, v, L) != 0:
        raise InputError("u must lie in v^perp")
    return DeterminantClass(product(ux.rep, todd_inverse_dual(L), L), ux)


def _x0(delta, H, L: SurfaceLattice) -> CharVector:
    return CharVector(Fraction(0), H, L.dot(H, delta))


def _y0(v: CharVector, L: SurfaceLattice) -> CharVector:
    e = exp_class(v.delta(), L)
    return CharVector(e.r, e.c1, e.s + mukai_pair(v, v, L) / (2 * v.r * v.r))


def gieseker_polarization(v: CharVector, H, delta, n: int, L: SurfaceLattice) -> XiClass:
    """u_H = n (H + (H, delta) rho) - (e^delta + (v^2)/(2 r^2) rho).

    ``delta`` must be c1(v)/r; it is taken as an argument so that callers
    state which normalization they mean.  The representative is kept as is
    (not rescaled) because the congruence below is not projective.
    """
    if v.r == 0:
        raise InputError("u_H needs nonzero rank")
    if int(n) != n or n <= 0:
        raise InputError("n must be a positive integer")
    H, delta = vec(H), vec(delta)
    if tuple(delta) != v.delta():
        raise InputError("delta must equal c1(v)/r")
    u = _x0(delta, H, L).scale(n) - _y0(v, L)
    return XiClass(u, v, False)


def xi1_char(v: CharVector, H, L: SurfaceLattice) -> CharVector:
    """ch(xi_1) = H + (H, delta - K/2) rho."""
    H = vec(H)
    return CharVector(Fraction(0), H, L.dot(H, vsub(v.delta(), vscale(Fraction(1, 2), L.K))))


def xi2_char(v: CharVector, beta, L: SurfaceLattice) -> CharVector:
    """ch(xi_2) = -(e^{beta - K/2} - chi(e^{beta - K/2}, v)/r rho)."""
    if v.r == 0:
        raise InputError("xi_2 needs nonzero rank")
    e = exp_class(vsub(vec(beta), vscale(Fraction(1, 2), L.K)), L)
    chi = euler_pair(e, v, L)
    return -CharVector(e.r, e.c1, e.s - chi / v.r)


def congruence_coefficient(u: Union[XiClass, CharVector], v: CharVector, H, beta, L: SurfaceLattice) -> Optional[Fraction]:
    """c with u (td^-1)^vee - ch(xi_2) = c ch(xi_1), or None if no such c."""
    ux = _as_xi(u, v)
    diff = product(ux.rep, todd_inverse_dual(L), L) - xi2_char(v, beta, L)
    x1 = xi1_char(v, H, L)
    if diff.is_zero():
        return Fraction(0)
    if not proportional(diff, x1):
        return None
    for a, b in zip(diff.entries(), x1.entries()):
        if b != 0:
            return a / b
    return None


@dataclass(frozen=True)
class ClearingBound:
    bound: Fraction  # u_H is off every counted wall's far side once n > bound
    parallel: Tuple[CharVector, ...]  # walls through the ray point x0 itself


def wall_clearing_bound(v: CharVector, H, walls: Iterable[Wall], L: SurfaceLattice) -> ClearingBound:
    """max over walls of (y0, v1)/(x0, v1).

    For n beyond it, (u_H, v1) has the sign of (x0, v1) on every wall with
    (x0, v1) != 0, which is the side of the large-volume limit.
    """
    H = vec(H)
    x0 = _x0(v.delta(), H, L)
    y0 = _y0(v, L)
    best = Fraction(0)
    parallel: List[CharVector] = []
    for w in walls:
        a = mukai_pair(x0, w.v1, L)
        if a == 0:
            parallel.append(w.v1)
            continue
        best = max(best, mukai_pair(y0, w.v1, L) / a)
    return ClearingBound(best, tuple(parallel))


def ample_annotation(chamber_label: str, gieseker: bool) -> str:
    """Annotation only; nefness and ampleness are never checked here."""
    if gieseker:
        return f"{chamber_label}: theta_v of this chamber is ample on the Gieseker moduli (by wall position)"
    return f"{chamber_label}: theta_v of this chamber is nef on its moduli (by wall position)"
