"""Modular inversion and Chinese-remainder reconstruction of integer inverses.

An integer map ``F = X + H`` is reduced modulo several primes, each reduction
is inverted independently over ``GF(p)`` (possibly in worker processes), and
the balanced residues of the modular inverses are merged by the CRT in
ascending prime order. Once the modulus ``N`` exceeds ``2C`` (``C`` from
:mod:`polyinv.bounds`) the balanced lift is the integer inverse; with fewer
primes the lift is only accepted after it passes an explicit composition check,
which is run in every case before a result is returned.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .bounds import BoundReport, global_bound_C
from .inversion import Status, invert
from .poly import PolyError, PolyMap, Polynomial, compose_map, shape_of
from .ring import ZZ, PrimeField, balanced, check_prime, next_prime

log = logging.getLogger(__name__)

REPORT_HEADER = ("prime", "status", "stop_step", "seconds", "peak_terms")
TRACE_HEADER = ("coordinate", "monomial", "p_or_N", "residue")

# prime budget for the automatic policy when C is out of reach
DEFAULT_MAX_PRIMES = 64


class CrtError(ValueError):
    pass


def reduce_map(F: PolyMap, p: int) -> PolyMap:
    """Coefficient-wise balanced reduction of an integer map modulo ``p``."""
    p = check_prime(p)
    if F.ring != ZZ:
        raise CrtError(f"reduction expects an integer map, got one over {F.ring}")
    return F.change_ring(PrimeField(p))


@dataclass(frozen=True)
class ModularWitness:
    p: int
    inverse: PolyMap | None
    stop_step: int
    status: Status
    mu: int
    seconds: float = 0.0
    peak_terms: int = 0

    @property
    def invertible(self) -> bool:
        return self.inverse is not None

    def row(self) -> tuple:
        return (self.p, self.status.value, self.stop_step, f"{self.seconds:.3f}", self.peak_terms)


def invert_mod_p(F: PolyMap, p: int) -> ModularWitness:
    """Invert the reduction of ``F`` modulo ``p``; μ comes from the reduced shape."""
    Fp = reduce_map(F, p)
    res = invert(Fp)
    if res.status is Status.INCONCLUSIVE:
        # cannot happen without a step limit
        raise CrtError(f"inversion modulo {p} was inconclusive")
    return ModularWitness(p, res.inverse, res.steps, res.status, res.mu, res.seconds, res.peak_terms)


# -- prime selection ------------------------------------------------------------


@dataclass(frozen=True)
class PrimeSelection:
    primes: tuple[int, ...]
    sufficient: bool | None
    warning: str = ""


def select_primes(C: int | BoundReport | None, policy: str | Sequence[int] = "smallest-first",
                  max_primes: int | None = None) -> PrimeSelection:
    """Primes whose product is at least ``2C + 1``.

    ``policy`` is ``"smallest-first"`` (2, 3, 5, ...) or an explicit list; an
    explicit list whose product is too small is returned with a warning, and
    so is a truncated smallest-first list when ``max_primes`` runs out first.
    ``C`` may be a :class:`BoundReport`; when its ``C`` is not materialized
    sufficiency is decided from its bit bounds (``None`` if undecidable).
    """
    report = C if isinstance(C, BoundReport) else None
    if report is None and C is not None and C < 0:
        raise ValueError("C must be >= 0")

    def enough(N: int) -> bool | None:
        if report is not None:
            if report.C is not None:
                return report.certifies(N)
            return True if report.certifies(N) else None
        if C is None:
            return None
        return N >= 2 * C + 1

    if not isinstance(policy, str):
        primes = tuple(sorted(check_prime(p) for p in policy))
        if len(set(primes)) != len(primes):
            raise CrtError(f"duplicate primes in {list(policy)}")
        if not primes:
            raise CrtError("empty prime list")
        N = _product(primes)
        ok = enough(N)
        warn = "" if ok else f"product of primes {N} does not exceed 2C; relying on the composition check"
        return PrimeSelection(primes, ok, warn)
    if policy != "smallest-first":
        raise ValueError(f"unknown prime policy {policy!r}")
    primes: list[int] = []
    N = 1
    p = 2
    while True:
        primes.append(p)
        N *= p
        ok = enough(N)
        if ok:
            return PrimeSelection(tuple(primes), True)
        if max_primes is not None and len(primes) >= max_primes:
            return PrimeSelection(tuple(primes), ok,
                                  f"prime budget of {max_primes} reached before N > 2C")
        p = next_prime(p)


def _product(xs: Iterable[int]) -> int:
    N = 1
    for x in xs:
        N *= x
    return N


# -- CRT --------------------------------------------------------------------------


@dataclass(frozen=True)
class CrtAccumulator:
    """Balanced residues modulo ``N`` keyed by ``(coordinate, exponents)``."""

    nvars: int
    ncoords: int
    N: int = 1
    coefficients: dict = field(default_factory=dict)
    merged_primes: frozenset = frozenset()

    @classmethod
    def empty(cls, nvars: int, ncoords: int | None = None) -> CrtAccumulator:
        return cls(nvars, nvars if ncoords is None else ncoords)

    def residue(self, coordinate: int, exps: tuple[int, ...]) -> int:
        return self.coefficients.get((coordinate, tuple(exps)), 0)

    def lift(self) -> PolyMap:
        polys = [dict() for _ in range(self.ncoords)]
        for (i, exps), r in self.coefficients.items():
            polys[i - 1][exps] = r
        return PolyMap(Polynomial(ZZ, self.nvars, t) for t in polys)


def _crt_pair(r: int, N: int, s: int, p: int) -> int:
    # x ≡ r (mod N), x ≡ s (mod p), balanced mod N*p
    t = ((s - r) * pow(N, -1, p)) % p
    return balanced(r + N * t, N * p)


def crt_merge(acc: CrtAccumulator, w: ModularWitness) -> CrtAccumulator:
    """Fold one witness into the accumulator; absent monomials count as residue 0."""
    if w.inverse is None:
        raise CrtError(f"witness for p = {w.p} carries no inverse ({w.status})")
    p = w.p
    if p in acc.merged_primes:
        raise CrtError(f"prime {p} already merged")
    if acc.N % p == 0:
        raise CrtError(f"prime {p} divides the current modulus {acc.N}")
    G = w.inverse
    if G.nvars != acc.nvars or len(G) != acc.ncoords:
        raise CrtError("witness arity does not match the accumulator")
    incoming: dict = {}
    for i, g in enumerate(G, start=1):
        for exps, c in g.terms():
            incoming[(i, exps)] = c
    N = acc.N
    out = {}
    for key in acc.coefficients.keys() | incoming.keys():
        x = _crt_pair(acc.coefficients.get(key, 0), N, incoming.get(key, 0), p)
        if x:
            out[key] = x
    return CrtAccumulator(acc.nvars, acc.ncoords, N * p, out, acc.merged_primes | {p})


def crt_lift(residues: Sequence[tuple[int, int]]) -> tuple[int, int]:
    """Balanced lift of ``[(residue, modulus), ...]`` with pairwise coprime moduli."""
    x, N = 0, 1
    for s, p in residues:
        x = _crt_pair(x, N, s, p)
        N *= p
    return x, N


class Stability(str, enum.Enum):
    CERTIFIED = "certified"
    STABLE = "stable"
    UNSTABLE = "unstable"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class StabilizationResult:
    kind: Stability
    monomials: tuple = ()


def stabilization_check(history: Sequence[CrtAccumulator],
                        bound: BoundReport | None) -> StabilizationResult:
    """Certified when ``N > 2C``; otherwise compare the last two snapshots."""
    if len(history) < 2:
        raise CrtError("stabilization needs at least two snapshots")
    last, prev = history[-1], history[-2]
    if bound is not None and bound.certifies(last.N):
        return StabilizationResult(Stability.CERTIFIED)
    changed = sorted(k for k in last.coefficients.keys() | prev.coefficients.keys()
                     if last.coefficients.get(k, 0) != prev.coefficients.get(k, 0))
    if changed:
        return StabilizationResult(Stability.UNSTABLE, tuple(changed))
    return StabilizationResult(Stability.STABLE)


# -- pipeline ----------------------------------------------------------------------


class PipelineStatus(str, enum.Enum):
    INVERTIBLE = "invertible"
    NOT_INVERTIBLE = "not-invertible"
    INCONCLUSIVE = "inconclusive"

    def __str__(self):
        return self.value


@dataclass
class PipelineReport:
    status: PipelineStatus
    inverse: PolyMap | None
    bound: BoundReport | None
    selection: PrimeSelection | None
    witnesses: list[ModularWitness] = field(default_factory=list)
    history: list[CrtAccumulator] = field(default_factory=list)
    certified_by: str = ""
    stability: StabilizationResult | None = None
    message: str = ""

    @property
    def N(self) -> int:
        return self.history[-1].N if self.history else 1

    def report_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for wit in self.witnesses:
            w.writerow(wit.row())
        return buf.getvalue()

    def trace_rows(self, coordinates: Iterable[int] | None = None) -> list[tuple]:
        """Residues per prime, then per partial modulus once two primes are merged."""
        coords = set(coordinates) if coordinates is not None else None
        keys = set()
        for wit in self.witnesses:
            if wit.inverse is not None:
                for i, g in enumerate(wit.inverse, start=1):
                    keys.update((i, e) for e in g.monomials())
        for snap in self.history:
            keys.update(snap.coefficients)
        if coords is not None:
            keys = {k for k in keys if k[0] in coords}
        ordered = sorted(keys, key=lambda k: (k[0], [-x for x in _grlex(k[1])]))
        rows = []
        for wit in self.witnesses:
            if wit.inverse is None:
                continue
            for i, e in ordered:
                rows.append((i, _mono(e), wit.p, wit.inverse[i - 1].coefficient(e)))
        for snap in self.history[1:]:
            for i, e in ordered:
                rows.append((i, _mono(e), snap.N, snap.residue(i, e)))
        return rows

    def trace_csv(self, coordinates: Iterable[int] | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        w.writerows(self.trace_rows(coordinates))
        return buf.getvalue()


def _grlex(e):
    return (sum(e),) + tuple(e)


def _mono(exps) -> str:
    return Polynomial.monomial(ZZ, exps, 1).render()


def _run_witnesses(F: PolyMap, primes: Sequence[int], jobs: int):
    """Yield witnesses in ascending prime order, computed by ``jobs`` workers."""
    primes = sorted(primes)
    if jobs <= 1 or len(primes) <= 1:
        for p in primes:
            yield invert_mod_p(F, p)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(invert_mod_p, F, p) for p in primes]
        try:
            for fut in futures:
                yield fut.result()
        finally:
            for fut in futures:
                fut.cancel()


def verify_inverse(F: PolyMap, G: PolyMap) -> bool:
    """``G∘F = Id`` and ``F∘G = Id``."""
    try:
        return compose_map(G, F).is_identity() and compose_map(F, G).is_identity()
    except PolyError:
        return False


def pipeline_invert_crt(F: PolyMap, primes: str | Sequence[int] = "auto", jobs: int = 1,
                        early_exit: bool = False, max_primes: int = DEFAULT_MAX_PRIMES) -> PipelineReport:
    """Reconstruct the integer inverse of ``F`` from modular inverses.

    ``primes`` is ``"auto"`` (smallest-first until ``N > 2C``, or until the
    coefficients stabilize and verify when ``C`` is out of reach) or an
    explicit list. With ``early_exit`` an explicit list is cut short as soon
    as two consecutive merges agree and the lift verifies.
    """
    if F.ring != ZZ:
        raise CrtError(f"CRT inversion expects an integer map, got one over {F.ring}")
    shape = shape_of(F)
    n = shape.n
    if shape.is_identity:
        return PipelineReport(PipelineStatus.INVERTIBLE, F, global_bound_C(shape), None,
                              certified_by="composition", message="identity map")
    bound = global_bound_C(shape)
    auto = isinstance(primes, str)
    if auto:
        if primes != "auto":
            raise ValueError(f"unknown prime policy {primes!r}")
        selection = select_primes(bound, "smallest-first", max_primes=max_primes)
        early_exit = early_exit or not selection.sufficient
    else:
        selection = select_primes(bound, primes)
    if selection.warning:
        log.warning(selection.warning)

    report = PipelineReport(PipelineStatus.INCONCLUSIVE, None, bound, selection)
    acc = CrtAccumulator.empty(n)
    verified_at = None
    for wit in _run_witnesses(F, selection.primes, jobs):
        report.witnesses.append(wit)
        if not wit.invertible:
            others = [w.p for w in report.witnesses if w.invertible]
            report.status = PipelineStatus.NOT_INVERTIBLE
            report.message = (f"reduction modulo {wit.p} is not invertible ({wit.status}); "
                              "F is not invertible over the integers"
                              + (f" (primes {others} did invert)" if others else ""))
            return report
        acc = crt_merge(acc, wit)
        report.history.append(acc)
        if len(report.history) < 2:
            continue
        stab = stabilization_check(report.history, bound)
        report.stability = stab
        if stab.kind is Stability.CERTIFIED or (early_exit and stab.kind is Stability.STABLE):
            G = acc.lift()
            verified_at = acc.N
            if verify_inverse(F, G):
                report.status = PipelineStatus.INVERTIBLE
                report.inverse = G
                report.certified_by = ("bound and composition" if stab.kind is Stability.CERTIFIED
                                       else "composition")
                return report
            if stab.kind is Stability.CERTIFIED:
                report.status = PipelineStatus.NOT_INVERTIBLE
                report.message = "lift with N > 2C fails the composition check"
                return report

    if acc.N != verified_at and report.history:
        G = acc.lift()
        if verify_inverse(F, G):
            report.status = PipelineStatus.INVERTIBLE
            report.inverse = G
            report.certified_by = "composition"
            return report
    report.message = (f"lift modulo N = {acc.N} fails the composition check; "
                      "more primes are needed")
    return report
