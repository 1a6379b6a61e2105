"""The Δ_F iteration and the invertibility test built on it.

For ``F = Id + H`` the sequence ``P_0 = Id, P_{k+1} = P_k∘F - P_k`` either
reaches zero (``F`` is Pascal finite and ``G = Σ_{l<m} (-1)^l P_l``) or is
run up to the step bound ``μ``; then ``S = Σ_{l<μ} (-1)^l P_l`` splits into a
part ``G`` of degree ``<= D^(n-1)`` and a remainder ``R``, and ``F`` is
invertible exactly when ``R∘F = (-1)^(μ+1) P_μ``.

Each coordinate evolves on its own (``P^i_{k+1} = P^i_k∘F - P^i_k``), so the
iteration runs coordinate by coordinate and only the current ``P^i_k`` and the
running alternating sum are kept in memory.
"""

from __future__ import annotations

import csv
import enum
import io
import time
from dataclasses import dataclass, field
from typing import Iterator

from .poly import Composer, MapShape, PolyError, PolyMap, Polynomial, compose_map, shape_of

STATS_HEADER = ("step", "coordinate", "monomials", "degree", "ldegree")


class Status(str, enum.Enum):
    PASCAL_FINITE = "pascal-finite"
    INVERTIBLE_NOT_PF = "invertible-not-pascal-finite"
    # truncated runs certify invertibility but cannot see whether P_m = 0
    INVERTIBLE = "invertible"
    NOT_INVERTIBLE = "not-invertible"
    INCONCLUSIVE = "inconclusive"

    def __str__(self):
        return self.value

    @property
    def invertible(self) -> bool:
        return self in (Status.PASCAL_FINITE, Status.INVERTIBLE_NOT_PF, Status.INVERTIBLE)


@dataclass(frozen=True)
class StepStats:
    step: int
    coordinate: int
    monomials: int
    degree: int | None
    ldegree: int | None

    @classmethod
    def of(cls, step: int, coordinate: int, P: Polynomial) -> StepStats:
        return cls(step, coordinate, len(P), P.degree, P.ldegree)

    def row(self) -> tuple:
        return (self.step, self.coordinate, self.monomials,
                "" if self.degree is None else self.degree,
                "" if self.ldegree is None else self.ldegree)


def stats_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STATS_HEADER)
    for r in rows:
        w.writerow(r.row())
    return buf.getvalue()


@dataclass
class InversionResult:
    status: Status
    inverse: PolyMap | None
    mu: int
    steps: int
    shape: MapShape
    report: list[StepStats] = field(default_factory=list)
    peak_terms: int = 0
    seconds: float = 0.0
    truncated: bool = False
    message: str = ""

    @property
    def invertible(self) -> bool:
        return self.status.invertible


class InversionError(RuntimeError):
    pass


def delta_step(P: PolyMap, F: PolyMap) -> PolyMap:
    """``Δ_F(P) = P∘F - P``."""
    return compose_map(P, F) - P


def step_bounds(shape: MapShape) -> tuple[int, dict[int, int]]:
    """Return ``(μ, {coordinate: m_i})`` with ``m_i = ⌊(D^(n-1) - d_i)/(d-1) + 1⌋ + 1``.

    Coordinates with ``H_i = 0`` are omitted; the identity gets ``μ = 1``.
    """
    if shape.is_identity:
        return 1, {}
    D, d, n = shape.D, shape.d, shape.n
    if d < 2:
        raise PolyError("step bound needs lower degree d >= 2")
    top = D ** (n - 1)
    per = {i + 1: (top - di) // (d - 1) + 2
           for i, di in enumerate(shape.ldegrees) if di is not None}
    return max(per.values()), per


def step_bound_mu(shape: MapShape) -> int:
    return step_bounds(shape)[0]


def _lower_degree_floor(k: int, d: int, di: int) -> int:
    return (k - 1) * (d - 1) + di


def delta_sequence(F: PolyMap, coordinate: int, *, truncate: int | None = None,
                   composer: Composer | None = None) -> Iterator[Polynomial]:
    """Yield ``P^i_0, P^i_1, ...`` for one 1-based coordinate, forever."""
    n = F.nvars
    if not 1 <= coordinate <= n:
        raise PolyError(f"coordinate {coordinate} out of range 1..{n}")
    comp = composer or Composer(F, truncate=truncate)
    P = Polynomial.variable(F.ring, n, coordinate - 1)
    yield P
    while True:
        P = comp(P) - (P if truncate is None else P.truncate(truncate))
        yield P


def stats_stream(F: PolyMap, coordinate: int, steps: int) -> list[StepStats]:
    """Exact ``(monomials, degree, ldegree)`` of ``P^i_k`` for ``k = 0 .. steps-1``.

    The stream stops after the first zero row: the sequence stays zero from there.
    """
    shape_of(F)
    out = []
    for k, P in enumerate(delta_sequence(F, coordinate)):
        if k >= steps:
            break
        out.append(StepStats.of(k, coordinate, P))
        if P.is_zero():
            break
    return out


def invert(F: PolyMap, max_steps: int | None = None, *, truncate: bool = False,
           stats: bool = False, verify: bool = True, check_growth: bool = True) -> InversionResult:
    """Decide invertibility of ``F`` and return its inverse when it exists.

    ``truncate=True`` runs the iteration modulo terms of degree ``> D^(n-1)``:
    the inverse is the same, memory and time drop sharply, but whether
    ``P_m = 0`` for the untruncated sequence is no longer observed, so an
    invertible map is reported as ``Status.INVERTIBLE``. In that mode the
    remainder identity is checked in its equivalent form ``G∘F = Id``
    (``S∘F = X + (-1)^(m+1) P_m`` telescopes).
    """
    t0 = time.perf_counter()
    shape = shape_of(F)
    n = shape.n
    if shape.is_identity:
        return InversionResult(Status.PASCAL_FINITE, F, 1, 1, shape,
                               [StepStats.of(0, i + 1, F[i]) for i in range(n)] if stats else [],
                               n, time.perf_counter() - t0)
    mu, per_coord = step_bounds(shape)
    limit = mu if max_steps is None else min(mu, max_steps)
    top = shape.D ** (n - 1)
    trunc = top if truncate else None
    comp = Composer(F, truncate=trunc)
    ring = F.ring
    report: list[StepStats] = []
    sums: list[Polynomial] = []
    lasts: list[Polynomial] = []
    stops: list[int | None] = []
    peak = 0
    sizes = [0] * n
    for i in range(n):
        X = Polynomial.variable(ring, n, i)
        P = X
        S = X
        if stats:
            report.append(StepStats.of(0, i + 1, P))
        stop = None
        di = shape.ldegrees[i]
        for k in range(1, limit + 1):
            P = comp(P) - (P if trunc is None else P.truncate(trunc))
            if stats:
                report.append(StepStats.of(k, i + 1, P))
            if P.is_zero():
                stop = k
                break
            if check_growth and di is not None and P.ldegree < _lower_degree_floor(k, shape.d, di):
                raise InversionError(f"lower degree of P^{i + 1}_{k} is {P.ldegree}, "
                                     f"below {(k - 1) * (shape.d - 1) + di}")
            sizes[i] = len(P)
            peak = max(peak, sum(sizes))
            if k < mu:
                S = S + P if k % 2 == 0 else S - P
        sizes[i] = 0
        sums.append(S)
        lasts.append(P)
        stops.append(stop)
    elapsed = lambda: time.perf_counter() - t0  # noqa: E731

    if all(s is not None for s in stops):
        m = max(stops)
        G = PolyMap(sums)
        if truncate and not _exact_under_truncation(shape, m, top):
            status = Status.INVERTIBLE
        else:
            status = Status.PASCAL_FINITE
        if verify and not compose_map(G, F).is_identity():
            if truncate:
                return InversionResult(Status.NOT_INVERTIBLE, None, mu, m, shape, report, peak,
                                       elapsed(), True, "G∘F != Id")
            raise InversionError("Pascal finite sum failed the composition check")
        return InversionResult(status, G, mu, m, shape, report, peak, elapsed(), truncate)

    if limit < mu:
        return InversionResult(Status.INCONCLUSIVE, None, mu, limit, shape, report, peak, elapsed(),
                               truncate, f"max_steps={max_steps} below the step bound {mu}")

    G = PolyMap(S.truncate(top) for S in sums)
    if truncate:
        ok = compose_map(G, F).is_identity()
    else:
        ok = _remainder_identity(F, sums, G, lasts, mu, comp)
        if ok and verify and not compose_map(G, F).is_identity():
            raise InversionError("remainder identity held but G∘F != Id")
    if not ok:
        return InversionResult(Status.NOT_INVERTIBLE, None, mu, mu, shape, report, peak, elapsed(),
                               truncate, "remainder identity fails")
    status = Status.INVERTIBLE if truncate else Status.INVERTIBLE_NOT_PF
    return InversionResult(status, G, mu, mu, shape, report, peak, elapsed(), truncate)


def _exact_under_truncation(shape: MapShape, m: int, top: int) -> bool:
    # deg P_k <= D^k, so nothing was cut if D^m <= top
    return shape.D ** m <= top


def _remainder_identity(F, sums, G, lasts, mu, comp) -> bool:
    sign = 1 if (mu + 1) % 2 == 0 else -1
    for S, g, P in zip(sums, G, lasts):
        R = S - g
        if comp(R) != (P if sign == 1 else -P):
            return False
    return True


def remainder(F: PolyMap, m: int) -> tuple[PolyMap, PolyMap, PolyMap]:
    """Return ``(G, R_m, P_m)`` from the untruncated sums at step ``m``.

    ``G`` keeps the homogeneous parts of degree ``<= D^(n-1)``; used to check
    that ``G`` does not depend on ``m`` and that ``R_m∘F = (-1)^(m+1) P_m``.
    """
    shape = shape_of(F)
    top = shape.D ** (shape.n - 1)
    comp = Composer(F)
    Ss, Ps = [], []
    for i in range(shape.n):
        S = Polynomial.zero(F.ring, F.nvars)
        for k, P in enumerate(delta_sequence(F, i + 1, composer=comp)):
            if k == m:
                Ps.append(P)
                break
            S = S + P if k % 2 == 0 else S - P
        Ss.append(S)
    S = PolyMap(Ss)
    G = S.truncate(top)
    return G, S - G, PolyMap(Ps)
