"""Denominator clearing through the one-parameter homotopy ``t^-1 F(tX)``.

Specializing at ``t = r`` multiplies the degree-``i`` homogeneous part of each
coordinate by ``r^(i-1)``. A suitable ``r`` turns a rational map of the form
``X + H`` into an integer one, and inverses travel back by the opposite
scaling ``r^(1-i)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .poly import PolyError, PolyMap, Polynomial, compose_map
from .ring import QQ, ZZ, Ring


class ClearingError(ValueError):
    pass


@dataclass(frozen=True)
class ClearingCertificate:
    r: int
    original: PolyMap
    cleared: PolyMap


def _scale(c, r, e):
    # c * r**e for possibly negative e, exactly
    if e >= 0:
        return c * r ** e
    return Fraction(c) / r ** (-e)


def specialize_homotopy(F: PolyMap, r, ring: Ring | None = None) -> PolyMap:
    """``r^-1 F(rX)``: degree-``i`` parts scaled by ``r^(i-1)``.

    The result lives in ``ring`` (default: ``F.ring``, or QQ when scaling
    introduces denominators).
    """
    if r == 0:
        raise ClearingError("r must be nonzero")
    target = ring
    if target is None:
        target = F.ring
        if F.ring == ZZ and (not isinstance(r, int) or (abs(r) != 1 and _has_constant(F))):
            target = QQ
    return F.map_coefficients(lambda c, deg: _scale(c, r, deg - 1), target)


def _has_constant(F: PolyMap) -> bool:
    return any(f.coefficient((0,) * F.nvars) for f in F)


def _check_form(F: PolyMap) -> None:
    n = F.nvars
    for i, f in enumerate(F):
        for exps, c in f.terms():
            deg = sum(exps)
            if deg == 0:
                raise ClearingError(f"coordinate {i + 1} has a constant term")
            if deg == 1 and Fraction(c).denominator != 1:
                raise ClearingError(f"coordinate {i + 1}: linear part must be integral, "
                                    f"got {Polynomial.monomial(F.ring, exps, c).render()}")
    if len(F) != n:
        raise PolyError("map must have one coordinate per variable")


def denominator_lcm(F: PolyMap) -> int:
    """lcm of the denominators of all coefficients of degree >= 2."""
    r = 1
    for f in F:
        for exps, c in f.terms():
            if sum(exps) >= 2:
                r = lcm(r, Fraction(c).denominator)
    return r


def clear_denominators(F: PolyMap, r: int | None = None) -> ClearingCertificate:
    """Specialize ``F`` at an ``r`` that makes every coefficient an integer.

    Without ``r`` the lcm of denominators of the nonlinear terms is used;
    every degree-``i >= 2`` coefficient is multiplied by ``r^(i-1)``, a
    multiple of ``r``, so this always clears. A supplied ``r`` is validated.
    """
    _check_form(F)
    if r is None:
        r = denominator_lcm(F)
    if not isinstance(r, int) or isinstance(r, bool) or r <= 0:
        raise ClearingError(f"r must be a positive integer, got {r!r}")
    bad = []
    for i, f in enumerate(F):
        for exps, c in f.terms():
            v = _scale(Fraction(c), r, sum(exps) - 1)
            if Fraction(v).denominator != 1:
                bad.append(f"F{i + 1}: {Polynomial.monomial(QQ, exps, c).render()} -> "
                           f"{Polynomial.monomial(QQ, exps, v).render()}")
    if bad:
        raise ClearingError(f"r = {r} does not clear denominators: " + "; ".join(bad))
    cleared = specialize_homotopy(F.change_ring(QQ), r).change_ring(ZZ)
    return ClearingCertificate(r, F, cleared)


def transport_inverse(cert: ClearingCertificate, G_cleared: PolyMap, verify: bool = True) -> PolyMap:
    """Inverse of ``cert.original`` from the inverse of ``cert.cleared``.

    ``G(X) = r G_r(X / r)``, i.e. degree-``i`` parts scaled by ``r^(1-i)``.
    """
    r = cert.r
    G = G_cleared.change_ring(QQ).map_coefficients(lambda c, deg: _scale(c, r, 1 - deg), QQ)
    if verify:
        original = cert.original.change_ring(QQ)
        if not compose_map(G, original).is_identity():
            raise ClearingError("transported map is not an inverse of the original map")
    if cert.original.ring == ZZ and all(Fraction(c).denominator == 1
                                         for g in G for _, c in g.terms()):
        G = G.change_ring(ZZ)
    return G

