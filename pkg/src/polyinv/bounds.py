"""Worst-case length and coefficient bounds for the Δ sequence and the inverse.

With ``L = l(F)``, ``B`` the largest |coefficient| of ``F`` and ``D`` its degree:

* ``l_0 = 1``, ``l_k = (L-1) * prod_{j=1}^{k-1} (L^(D^j) + 1)`` bounds ``l(P_k)``;
* ``b_k = B^(1+D+...+D^(k-1)) * (L-1)^(k-1) * prod_{j=1}^{k-1} (L^(D^j) + 1)^(k-j)``
  bounds the coefficients of ``P_k``;
* ``C = b_(μ-1) * sum_{i=0}^{μ-1} l_i`` bounds every coefficient of the inverse.

``C`` is astronomically large as soon as ``D^(μ-2)`` is; it is then not
materialized and only certified bit-size bounds are reported.
"""

from __future__ import annotations

from dataclasses import dataclass

from .inversion import step_bound_mu
from .poly import MapShape

# numbers with more bits than this are not materialized
MAX_EXACT_BITS = 1 << 22
# above this step bound even the bit-size bounds are not computed
MAX_MU_FOR_LOG = 1 << 20


class BoundTooLarge(OverflowError):
    pass


def _geom(D: int, k: int) -> int:
    """sum_{j=0}^{k-1} D^j."""
    if k <= 0:
        return 0
    return (D ** k - 1) // (D - 1) if D != 1 else k


def _weighted_geom(D: int, k: int) -> int:
    """sum_{j=1}^{k-1} (k-j) D^j."""
    if k <= 1:
        return 0
    if D == 1:
        return k * (k - 1) // 2
    return ((D ** (k + 1) - D * D) // (D - 1) - (k - 1) * D) // (D - 1)


def _up(x: int) -> int:
    # log2(x) < _up(x) for x >= 1
    return x.bit_length()


def _lo(x: int) -> int:
    # log2(x) >= _lo(x) for x >= 1
    return x.bit_length() - 1


def _params(shape: MapShape):
    if shape.is_identity:
        raise BoundTooLarge("the identity has no H; bounds are trivial")
    return shape.B, shape.D, shape.length


def length_bound_log2(k: int, shape: MapShape) -> int:
    """An integer ``u`` with ``l_k < 2**u``."""
    B, D, L = _params(shape)
    if k == 0:
        return 1
    return _up(L - 1) + _geom(D, k)*_up(L) - _up(L) + (k - 1)


def coeff_bound_log2(k: int, shape: MapShape) -> int:
    """An integer ``u`` with ``b_k < 2**u``."""
    B, D, L = _params(shape)
    return (_geom(D, k) * _up(B) + (k - 1) * _up(L - 1)
            + _weighted_geom(D, k) * _up(L) + k * (k - 1) // 2)


def length_bound_l(k: int, shape: MapShape) -> int:
    """``l_k``; ``k = 0`` gives 1."""
    if k < 0:
        raise ValueError("k must be >= 0")
    B, D, L = _params(shape)
    if k == 0:
        return 1
    if length_bound_log2(k, shape) > MAX_EXACT_BITS:
        raise BoundTooLarge(f"l_{k} has more than {MAX_EXACT_BITS} bits")
    out = L - 1
    for j in range(1, k):
        out *= L ** (D ** j) + 1
    return out


def coeff_bound_b(k: int, shape: MapShape) -> int:
    """``b_k`` for ``k >= 1``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    B, D, L = _params(shape)
    if coeff_bound_log2(k, shape) > MAX_EXACT_BITS:
        raise BoundTooLarge(f"b_{k} has more than {MAX_EXACT_BITS} bits")
    out = B ** _geom(D, k) * (L - 1) ** (k - 1)
    for j in range(1, k):
        out *= (L ** (D ** j) + 1) ** (k - j)
    return out


@dataclass(frozen=True)
class BoundReport:
    """Inputs, step bound and the coefficient bound ``C`` for one map.

    ``C`` is ``None`` when too large to materialize; ``log2_lower <= log2(C) <
    log2_upper`` always holds when those are not ``None``.
    """

    B: int
    D: int | None
    d: int | None
    n: int
    length: int
    mu: int
    C: int | None
    log2_lower: int | None
    log2_upper: int | None
    l_terms: tuple[int, ...] | None = None
    b_terms: tuple[int, ...] | None = None

    @property
    def threshold(self) -> int | None:
        return None if self.C is None else 2 * self.C + 1

    def at_least(self, value: int) -> bool | None:
        """Is ``C >= value``? ``None`` when it cannot be decided from the bounds."""
        value = abs(value)
        if self.C is not None:
            return self.C >= value
        if self.log2_lower is not None and value.bit_length() <= self.log2_lower:
            return True
        if self.log2_upper is not None and value.bit_length() - 1 >= self.log2_upper:
            return False
        return None

    def certifies(self, N: int) -> bool:
        """True when ``N > 2C`` is established."""
        if self.C is not None:
            return N > 2 * self.C
        if self.log2_upper is None:
            return False
        return N.bit_length() - 1 >= self.log2_upper + 1


def global_bound_C(shape: MapShape, keep_terms: bool = False) -> BoundReport:
    """The bound ``C`` on the inverse's coefficients, via ``b_(μ-1) * sum l_i``."""
    mu = step_bound_mu(shape)
    if shape.is_identity or mu < 2:
        # the identity's inverse is itself; with μ = 1 no inverse beyond X exists
        return BoundReport(shape.B, shape.D, shape.d, shape.n, shape.length, mu,
                           C=max(shape.B, 1), log2_lower=0, log2_upper=_up(max(shape.B, 1)))
    B, D, L = _params(shape)
    if mu > MAX_MU_FOR_LOG:
        return BoundReport(B, D, shape.d, shape.n, L, mu, None, None, None)
    k = mu - 1
    sum_l_upper = _up(mu) + length_bound_log2(k, shape)
    upper = coeff_bound_log2(k, shape) + sum_l_upper
    lower = _geom(D, k) * _lo(B) + (k - 1) * _lo(L - 1) + _weighted_geom(D, k) * _lo(L)
    if upper > MAX_EXACT_BITS:
        return BoundReport(B, D, shape.d, shape.n, L, mu, None, lower, upper)
    l_terms = [1]
    cur = L - 1
    for i in range(1, mu):
        if i > 1:
            cur *= L ** (D ** (i - 1)) + 1
        l_terms.append(cur)
    b = coeff_bound_b(k, shape)
    C = b * sum(l_terms)
    b_terms = tuple(coeff_bound_b(i, shape) for i in range(1, mu)) if keep_terms else None
    return BoundReport(B, D, shape.d, shape.n, L, mu, C, _lo(C), _up(C),
                       tuple(l_terms) if keep_terms else None, b_terms)
