"""Sparse multivariate polynomials and polynomial maps.

A monomial ``X1^a1 ... Xn^an`` is packed into one Python int::

    key = deg << (n*BITS) | a1 << ((n-1)*BITS) | ... | an

so monomial multiplication is integer addition, the total degree is
``key >> (n*BITS)`` and integer order on keys *is* graded lexicographic order
with ``X1 > X2 > ... > Xn``. Terms live in a plain ``dict`` key -> coefficient;
zero coefficients are never stored.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .ring import QQ, ZZ, PrimeField, Ring, RingError

BITS = 24
MASK = (1 << BITS) - 1
MAX_DEGREE = MASK


class PolyError(ValueError):
    pass


class ShapeError(PolyError):
    """The map is not of the form ``F_i = X_i + H_i`` with ``ldegree(H_i) >= 2``."""

    def __init__(self, coordinate: int, term: str, reason: str):
        self.coordinate = coordinate
        self.term = term
        super().__init__(f"coordinate {coordinate}: term {term} {reason}")


# -- monomial packing ---------------------------------------------------------


def pack(exps: Sequence[int]) -> int:
    n = len(exps)
    key = 0
    deg = 0
    for e in exps:
        if e < 0:
            raise PolyError(f"negative exponent in {tuple(exps)}")
        key = (key << BITS) | e
        deg += e
    if deg > MAX_DEGREE:
        raise PolyError(f"total degree {deg} exceeds {MAX_DEGREE}")
    return (deg << (n * BITS)) | key


def unpack(key: int, n: int) -> tuple[int, ...]:
    out = [0] * n
    for i in range(n - 1, -1, -1):
        out[i] = key & MASK
        key >>= BITS
    return tuple(out)


def key_degree(key: int, n: int) -> int:
    return key >> (n * BITS)


def degree_limit(k: int, n: int) -> int:
    """Smallest key whose monomial has total degree ``> k``."""
    return (k + 1) << (n * BITS)


def _normalizer(ring: Ring):
    """Return ``f(raw_dict) -> canonical_dict`` for ``ring``."""
    if isinstance(ring, PrimeField):
        p, half = ring.p, ring.half

        def norm(raw):
            out = {}
            for k, c in raw.items():
                r = c % p
                if r:
                    out[k] = r - p if r > half else r
            return out

        return norm
    if ring == QQ:

        def norm(raw):
            out = {}
            for k, c in raw.items():
                if c:
                    if type(c) is Fraction and c.denominator == 1:
                        c = int(c.numerator)
                    out[k] = c
            return out

        return norm

    def norm(raw):
        return {k: c for k, c in raw.items() if c}

    return norm


def _mul_into(acc: dict, a: dict, b: dict, scale=1, limit: int | None = None) -> None:
    """acc += scale * a * b, dropping monomials with key >= limit."""
    if len(a) > len(b):
        a, b = b, a
    bitems = list(b.items())
    get = acc.get
    if limit is None:
        for ka, ca in a.items():
            if scale != 1:
                ca = ca * scale
            for kb, cb in bitems:
                k = ka + kb
                acc[k] = get(k, 0) + ca * cb
    else:
        bitems.sort()
        for ka, ca in a.items():
            if ka >= limit:
                continue
            if scale != 1:
                ca = ca * scale
            bound = limit - ka
            for kb, cb in bitems:
                if kb >= bound:
                    break
                k = ka + kb
                acc[k] = get(k, 0) + ca * cb


# -- polynomials ----------------------------------------------------------------


class Polynomial:
    """Immutable sparse polynomial over ``ring`` in ``nvars`` variables."""

    __slots__ = ("ring", "nvars", "_terms", "_hash")

    def __init__(self, ring: Ring, nvars: int, terms: Mapping[Sequence[int], object] | None = None):
        self.ring = ring
        self.nvars = nvars
        raw: dict = {}
        if terms:
            for exps, c in terms.items():
                if len(exps) != nvars:
                    raise PolyError(f"monomial {tuple(exps)} does not have {nvars} exponents")
                k = pack(exps)
                raw[k] = raw.get(k, 0) + ring.convert(c)
        self._terms = _normalizer(ring)(raw)
        self._hash = None

    @classmethod
    def _make(cls, ring: Ring, nvars: int, terms: dict) -> Polynomial:
        obj = cls.__new__(cls)
        obj.ring = ring
        obj.nvars = nvars
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, ring: Ring, nvars: int) -> Polynomial:
        return cls._make(ring, nvars, {})

    @classmethod
    def constant(cls, ring: Ring, nvars: int, c) -> Polynomial:
        c = ring.convert(c)
        return cls._make(ring, nvars, {0: c} if c else {})

    @classmethod
    def monomial(cls, ring: Ring, exps: Sequence[int], c=1) -> Polynomial:
        c = ring.convert(c)
        return cls._make(ring, len(exps), {pack(exps): c} if c else {})

    @classmethod
    def variable(cls, ring: Ring, nvars: int, index: int) -> Polynomial:
        """The generator ``X_{index+1}`` (``index`` is 0-based)."""
        if not 0 <= index < nvars:
            raise PolyError(f"variable index {index} out of range for {nvars} variables")
        exps = [0] * nvars
        exps[index] = 1
        return cls._make(ring, nvars, {pack(exps): 1})

    # -- inspection

    def __len__(self) -> int:
        return len(self._terms)

    length = property(__len__, doc="Number of stored monomials, l(T).")

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int | None:
        """Maximal total degree; ``None`` for the zero polynomial."""
        if not self._terms:
            return None
        return max(self._terms) >> (self.nvars * BITS)

    @property
    def ldegree(self) -> int | None:
        """Minimal total degree (order of vanishing at 0); ``None`` for zero."""
        if not self._terms:
            return None
        return min(self._terms) >> (self.nvars * BITS)

    def terms(self) -> Iterator[tuple[tuple[int, ...], object]]:
        """(exponents, coefficient) pairs in descending graded-lex order."""
        n = self.nvars
        for k in sorted(self._terms, reverse=True):
            yield unpack(k, n), self._terms[k]

    def monomials(self) -> list[tuple[int, ...]]:
        return [e for e, _ in self.terms()]

    def coefficient(self, exps: Sequence[int]):
        return self._terms.get(pack(exps), 0)

    def as_dict(self) -> dict[tuple[int, ...], object]:
        n = self.nvars
        return {unpack(k, n): c for k, c in self._terms.items()}

    def max_abs_coeff(self) -> int:
        """max |c| over coefficients (balanced lift for GF(p)); 0 for zero."""
        if not self._terms:
            return 0
        return max(abs(c) for c in self._terms.values())

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            if isinstance(other, (int, Fraction)) and self.ring is not None:
                return self == Polynomial.constant(self.ring, self.nvars, other)
            return NotImplemented
        return self.nvars == other.nvars and self.ring == other.ring and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, self.nvars, frozenset(self._terms.items())))
        return self._hash

    def __reduce__(self):
        return (Polynomial._make, (self.ring, self.nvars, self._terms))

    # -- arithmetic

    def _coerce(self, other) -> Polynomial:
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise PolyError(f"arity mismatch: {self.nvars} vs {other.nvars}")
            if other.ring != self.ring:
                raise RingError(f"ring mismatch: {self.ring} vs {other.ring}")
            return other
        return Polynomial.constant(self.ring, self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        raw = dict(self._terms)
        get = raw.get
        for k, c in other._terms.items():
            raw[k] = get(k, 0) + c
        return Polynomial._make(self.ring, self.nvars, _normalizer(self.ring)(raw))

    __radd__ = __add__

    def __neg__(self):
        raw = {k: -c for k, c in self._terms.items()}
        if isinstance(self.ring, PrimeField):
            raw = _normalizer(self.ring)(raw)
        return Polynomial._make(self.ring, self.nvars, raw)

    def __sub__(self, other):
        other = self._coerce(other)
        raw = dict(self._terms)
        get = raw.get
        for k, c in other._terms.items():
            raw[k] = get(k, 0) - c
        return Polynomial._make(self.ring, self.nvars, _normalizer(self.ring)(raw))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return self.scale(other)
        other = self._coerce(other)
        raw: dict = {}
        _mul_into(raw, self._terms, other._terms)
        return Polynomial._make(self.ring, self.nvars, _normalizer(self.ring)(raw))

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, e: int):
        if e < 0:
            raise PolyError("negative power")
        result = Polynomial.constant(self.ring, self.nvars, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def scale(self, c) -> Polynomial:
        c = self.ring.convert(c)
        raw = {k: v * c for k, v in self._terms.items()}
        return Polynomial._make(self.ring, self.nvars, _normalizer(self.ring)(raw))

    # -- structure

    def truncate(self, k: int) -> Polynomial:
        """Keep exactly the terms of total degree <= k."""
        if k < 0:
            raise PolyError("truncation degree must be >= 0")
        limit = degree_limit(k, self.nvars)
        return Polynomial._make(self.ring, self.nvars,
                                {m: c for m, c in self._terms.items() if m < limit})

    def homogeneous_components(self) -> dict[int, Polynomial]:
        parts: dict[int, dict] = {}
        shift = self.nvars * BITS
        for k, c in self._terms.items():
            parts.setdefault(k >> shift, {})[k] = c
        return {d: Polynomial._make(self.ring, self.nvars, t) for d, t in sorted(parts.items())}

    def map_coefficients(self, fn, ring: Ring | None = None) -> Polynomial:
        """Apply ``fn(coeff, degree)`` to every term and re-canonicalize in ``ring``."""
        ring = ring or self.ring
        shift = self.nvars * BITS
        raw = {k: ring.convert(fn(c, k >> shift)) for k, c in self._terms.items()}
        return Polynomial._make(ring, self.nvars, _normalizer(ring)(raw))

    def change_ring(self, ring: Ring) -> Polynomial:
        return self.map_coefficients(lambda c, _d: c, ring)

    def compose(self, F: PolyMap) -> Polynomial:
        return compose(self, F)

    # -- text

    def render(self) -> str:
        if not self._terms:
            return "0"
        out = []
        for exps, c in self.terms():
            mono = "*".join(f"X{i + 1}" if e == 1 else f"X{i + 1}^{e}"
                            for i, e in enumerate(exps) if e)
            neg = c < 0
            a = -c if neg else c
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            if not out:
                out.append(f"-{body}" if neg else body)
            else:
                out.append(f" - {body}" if neg else f" + {body}")
        return "".join(out)

    __str__ = render

    def __repr__(self):
        return f"Polynomial({self.ring}, {self.nvars}, {self.render()!r})"


def gens(ring: Ring, nvars: int) -> list[Polynomial]:
    return [Polynomial.variable(ring, nvars, i) for i in range(nvars)]


# -- maps -------------------------------------------------------------------------


class PolyMap:
    """The tuple ``(F_1, ..., F_n)`` of polynomials in ``n`` variables."""

    __slots__ = ("coords", "ring", "nvars")

    def __init__(self, coords: Iterable[Polynomial]):
        coords = tuple(coords)
        if not coords:
            raise PolyError("a polynomial map needs at least one coordinate")
        ring, n = coords[0].ring, coords[0].nvars
        for c in coords:
            if c.nvars != n:
                raise PolyError(f"arity mismatch: {c.nvars} vs {n}")
            if c.ring != ring:
                raise RingError(f"ring mismatch: {c.ring} vs {ring}")
        self.coords = coords
        self.ring = ring
        self.nvars = n

    @classmethod
    def identity(cls, ring: Ring, n: int) -> PolyMap:
        return cls(gens(ring, n))

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __eq__(self, other):
        if not isinstance(other, PolyMap):
            return NotImplemented
        return self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def __reduce__(self):
        return (PolyMap, (self.coords,))

    def _zip(self, other, op):
        if len(other) != len(self):
            raise PolyError("maps have different numbers of coordinates")
        return PolyMap(op(a, b) for a, b in zip(self.coords, other.coords))

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self):
        return PolyMap(-c for c in self.coords)

    def scale(self, c) -> PolyMap:
        return PolyMap(p.scale(c) for p in self.coords)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coords)

    def is_identity(self) -> bool:
        return len(self) == self.nvars and self == PolyMap.identity(self.ring, self.nvars)

    @property
    def length(self) -> int:
        """l(F) = max over coordinates of the number of monomials."""
        return max(len(c) for c in self.coords)

    @property
    def degree(self) -> int | None:
        degs = [c.degree for c in self.coords if c]
        return max(degs) if degs else None

    def max_abs_coeff(self) -> int:
        return max(c.max_abs_coeff() for c in self.coords)

    def truncate(self, k: int) -> PolyMap:
        return PolyMap(c.truncate(k) for c in self.coords)

    def map_coefficients(self, fn, ring: Ring | None = None) -> PolyMap:
        return PolyMap(c.map_coefficients(fn, ring) for c in self.coords)

    def change_ring(self, ring: Ring) -> PolyMap:
        return PolyMap(c.change_ring(ring) for c in self.coords)

    def compose(self, other: PolyMap) -> PolyMap:
        """``self ∘ other``."""
        return compose_map(self, other)

    def render(self, name: str = "F") -> str:
        return "\n".join(f"{name}{i + 1} = {c.render()}" for i, c in enumerate(self.coords))

    __str__ = render

    def __repr__(self):
        return f"PolyMap({self.ring}, [{', '.join(repr(c.render()) for c in self.coords)}])"


# -- composition -------------------------------------------------------------------


class Composer:
    """Substitutes a fixed map ``F`` into many polynomials: ``P -> P∘F``.

    Powers ``F_i^e`` are memoized across calls, which is what makes repeated
    composition with the same ``F`` (the Δ iteration) affordable. Variables
    with ``F_i = X_i`` are handled as monomial shifts. With ``truncate=k``
    every intermediate product is cut to total degree ``<= k``; this is exact
    for the truncated result because every ``F_i`` has no constant term, so
    substitution never lowers degree.
    """

    def __init__(self, F: PolyMap, truncate: int | None = None):
        if len(F) != F.nvars:
            raise PolyError("composition needs a map with as many coordinates as variables")
        n = F.nvars
        self.F = F
        self.ring = F.ring
        self.n = n
        self.limit = None if truncate is None else degree_limit(truncate, n)
        self._norm = _normalizer(F.ring)
        self._shift = [(n - 1 - i) * BITS for i in range(n)]
        ident = PolyMap.identity(F.ring, n)
        self.identity_vars = [i for i in range(n) if F[i] == ident[i]]
        self.subst_vars = [i for i in range(n) if F[i] != ident[i]]
        for i in self.subst_vars:
            if F[i]._terms and min(F[i]._terms) == 0:
                # a constant term would make substitution lower degrees
                if self.limit is not None:
                    raise PolyError("truncated composition requires F(0) = 0")
        self._powers: list[dict[int, dict]] = [{0: {0: 1}, 1: self._cut(F[i]._terms)}
                                               for i in range(n)]

    def _cut(self, terms: dict) -> dict:
        if self.limit is None:
            return terms
        lim = self.limit
        return {k: c for k, c in terms.items() if k < lim}

    def power(self, i: int, e: int) -> dict:
        cache = self._powers[i]
        got = cache.get(e)
        if got is not None:
            return got
        base = max(x for x in cache if x < e)
        cur = cache[base]
        fi = cache[1]
        for x in range(base + 1, e + 1):
            nxt = cache.get(x)
            if nxt is None:
                raw: dict = {}
                _mul_into(raw, cur, fi, limit=self.limit)
                nxt = self._norm(raw)
                cache[x] = nxt
            cur = nxt
        return cur

    def clear_cache(self) -> None:
        for i, cache in enumerate(self._powers):
            self._powers[i] = {0: cache[0], 1: cache[1]}

    def cached_terms(self) -> int:
        return sum(len(t) for cache in self._powers for t in cache.values())

    def _order(self, terms: dict) -> list[int]:
        # variables with large exponents go innermost (substituted first) so the
        # expensive multiplications by large images happen once, on merged groups
        shift = self._shift
        maxe = {i: 0 for i in self.subst_vars}
        for k in terms:
            for i in self.subst_vars:
                e = (k >> shift[i]) & MASK
                if e > maxe[i]:
                    maxe[i] = e
        return sorted(self.subst_vars, key=lambda i: (-maxe[i], len(self.F[i]), i))

    def compose_terms(self, terms: dict) -> dict:
        n, shift = self.n, self._shift
        limit = self.limit
        if limit is not None:
            terms = {k: c for k, c in terms.items() if k < limit}
        if not terms:
            return {}
        order = self._order(terms)
        dshift = n * BITS
        # level 0: identity variables become a packed shift; group by the
        # exponents of the substituted variables
        groups: dict[tuple, dict] = {}
        for k, c in terms.items():
            exps = tuple((k >> shift[i]) & MASK for i in order)
            idkey = k
            for i, e in zip(order, exps):
                if e:
                    idkey -= (e << shift[i]) + (e << dshift)
            g = groups.get(exps)
            if g is None:
                groups[exps] = {idkey: c}
            else:
                g[idkey] = g.get(idkey, 0) + c
        # substitute one variable per level, innermost first
        for i in order:
            nxt: dict[tuple, dict] = {}
            for exps, poly in groups.items():
                e, rest = exps[0], exps[1:]
                acc = nxt.get(rest)
                if acc is None:
                    acc = nxt[rest] = {}
                if e == 0:
                    get = acc.get
                    for k, c in poly.items():
                        acc[k] = get(k, 0) + c
                else:
                    _mul_into(acc, poly, self.power(i, e), limit=limit)
            groups = nxt
        (result,) = groups.values()
        return self._norm(result)

    def __call__(self, P: Polynomial) -> Polynomial:
        if P.nvars != self.n:
            raise PolyError(f"arity mismatch: polynomial in {P.nvars} variables, map of arity {self.n}")
        if P.ring != self.ring:
            raise RingError(f"ring mismatch: {P.ring} vs {self.ring}")
        return Polynomial._make(self.ring, self.n, self.compose_terms(P._terms))

    def map(self, P: PolyMap) -> PolyMap:
        return PolyMap(self(c) for c in P.coords)


def compose(P: Polynomial, F: PolyMap) -> Polynomial:
    """``P∘F``: substitute ``F_i`` for ``X_i``."""
    if P.nvars != len(F):
        raise PolyError(f"arity mismatch: polynomial in {P.nvars} variables, map with {len(F)} coordinates")
    if len(F) != F.nvars:
        # general substitution into a map of different arity
        return _compose_general(P, F)
    return Composer(F)(P)


def _compose_general(P: Polynomial, F: PolyMap) -> Polynomial:
    acc = Polynomial.zero(F.ring, F.nvars)
    for exps, c in P.terms():
        t = Polynomial.constant(F.ring, F.nvars, c)
        for f, e in zip(F.coords, exps):
            if e:
                t = t * f ** e
        acc = acc + t
    return acc


def compose_map(P: PolyMap, F: PolyMap) -> PolyMap:
    """``P∘F`` coordinate-wise."""
    if P.nvars != len(F):
        raise PolyError(f"arity mismatch: map in {P.nvars} variables, map with {len(F)} coordinates")
    if len(F) != F.nvars:
        return PolyMap(_compose_general(c, F) for c in P.coords)
    comp = Composer(F)
    return comp.map(P)


def truncate_degree(P: Polynomial, k: int) -> Polynomial:
    return P.truncate(k)


# -- shape ----------------------------------------------------------------------


@dataclass(frozen=True)
class MapShape:
    """Structural measures of ``F = Id + H``.

    ``degrees``/``ldegrees`` hold ``D_i``/``d_i`` per coordinate (``None`` where
    ``H_i = 0``); ``D``/``d`` are their max/min over nonzero ``H_i`` and are
    ``None`` for the identity.
    """

    n: int
    D: int | None
    d: int | None
    degrees: tuple[int | None, ...]
    ldegrees: tuple[int | None, ...]
    B: int
    length: int
    zero_coordinates: tuple[int, ...]

    @property
    def is_identity(self) -> bool:
        return self.D is None


def shape_of(F: PolyMap) -> MapShape:
    n = F.nvars
    if len(F) != n:
        raise PolyError(f"map has {len(F)} coordinates but {n} variables")
    X = gens(F.ring, n)
    degrees, ldegrees, zero = [], [], []
    for i, (f, x) in enumerate(zip(F.coords, X)):
        h = f - x
        for exps, c in sorted(h.terms()):
            if sum(exps) >= 2:
                break
            term = Polynomial.monomial(F.ring, exps, c).render()
            what = "is constant" if sum(exps) == 0 else "is linear"
            raise ShapeError(i + 1, term, f"{what}; H_i must have lower degree >= 2")
        if h.is_zero():
            degrees.append(None)
            ldegrees.append(None)
            zero.append(i + 1)
        else:
            degrees.append(h.degree)
            ldegrees.append(h.ldegree)
    nz_deg = [x for x in degrees if x is not None]
    nz_ldeg = [x for x in ldegrees if x is not None]
    B = F.max_abs_coeff() if F.ring == ZZ or isinstance(F.ring, PrimeField) else _rational_height(F)
    return MapShape(
        n=n,
        D=max(nz_deg) if nz_deg else None,
        d=min(nz_ldeg) if nz_ldeg else None,
        degrees=tuple(degrees),
        ldegrees=tuple(ldegrees),
        B=B,
        length=F.length,
        zero_coordinates=tuple(zero),
    )


def _rational_height(F: PolyMap) -> int:
    # for QQ maps: ceiling of max |c|; only informative
    best = 0
    for f in F.coords:
        for c in f._terms.values():
            a = abs(Fraction(c))
            v = -(-a.numerator // a.denominator)
            best = max(best, v)
    return best
