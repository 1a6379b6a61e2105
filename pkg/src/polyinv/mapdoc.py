"""Text format for polynomial maps.

A map document is UTF-8 text, one coordinate per line::

    # optional comments
    ring: rational          (optional: integer | rational | gf(p))
    arity: 4                (optional: defaults to the number of coordinates)
    F1 = X1
    F2 = -1/3*X1^3 + X2
    F3 = X3 - X1^2*X2
         - X1*X2^2          (continuation lines start with + or -)

Any alphabetic name may replace ``F`` (inverses are written with ``G``).
Grammar of an expression::

    expr := term (("+"|"-") term)*          (a leading sign is allowed)
    term := coef? ("*"? "X" INT ("^" INT)?)*
    coef := INT | INT "/" INT

Without a ``ring:`` header the ring is rational if any literal has a
denominator, integer otherwise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .poly import PolyMap, Polynomial
from .ring import QQ, ZZ, Ring, RingError, parse_ring


class MapSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


@dataclass
class MapDocument:
    polymap: PolyMap
    ring: Ring
    arity: int
    name: str = "F"


_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<op>[-+*/^])|(?P<var>X)|(?P<bad>\S))")
_HEAD = re.compile(r"^\s*([A-Za-z]+)(\d+)\s*=")
_META = re.compile(r"^\s*(ring|arity)\s*:\s*(.*?)\s*$", re.IGNORECASE)


def _tokens(text: str, lineno: int, col0: int):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.lastgroup is None:
            break
        col = col0 + m.start(m.lastgroup) + 1
        kind = m.lastgroup
        if kind == "bad":
            raise MapSyntaxError(f"unexpected character {m.group('bad')!r}", lineno, col)
        out.append((kind, m.group(kind), col))
        pos = m.end()
    return out


class _ExprParser:
    def __init__(self, toks, lineno: int, end_col: int):
        self.toks = toks
        self.i = 0
        self.lineno = lineno
        self.end_col = end_col

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, self.end_col)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def error(self, msg, col=None):
        raise MapSyntaxError(msg, self.lineno, col if col is not None else self.peek()[2])

    def expect_int(self, what):
        kind, val, col = self.take()
        if kind != "int":
            self.error(f"expected {what}", col)
        return int(val), col

    def expr(self):
        terms = []
        sign = 1
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        terms.append(self.term(sign))
        while self.peek()[0] is not None:
            kind, val, col = self.take()
            if kind != "op" or val not in "+-":
                self.error(f"expected '+' or '-', got {val!r}", col)
            terms.append(self.term(-1 if val == "-" else 1))
        return terms

    def term(self, sign):
        coef = None
        kind, val, col = self.peek()
        if kind == "int":
            num, _ = self.expect_int("integer")
            coef = Fraction(num)
            if self.peek()[:2] == ("op", "/"):
                self.take()
                den, dcol = self.expect_int("denominator")
                if den == 0:
                    self.error("zero denominator", dcol)
                coef = Fraction(num, den)
        powers: list[tuple[int, int, int]] = []
        while True:
            kind, val, col = self.peek()
            if kind == "op" and val == "*":
                self.take()
                kind, val, col = self.peek()
                if kind != "var":
                    self.error("expected a variable after '*'", col)
            if kind != "var":
                break
            self.take()
            idx, icol = self.expect_int("variable index")
            exp = 1
            if self.peek()[:2] == ("op", "^"):
                self.take()
                exp, _ = self.expect_int("exponent")
            powers.append((idx, exp, icol))
        if coef is None and not powers:
            self.error("expected a term")
        return sign * (coef if coef is not None else Fraction(1)), powers


def _logical_lines(text: str):
    """Yield (lineno, name, index, expr_text, expr_col) joining continuation lines."""
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        meta = _META.match(line)
        if meta:
            if current:
                yield current
                current = None
            yield (lineno, meta.group(1).lower(), None, meta.group(2), 0)
            continue
        head = _HEAD.match(line)
        if head:
            if current:
                yield current
            current = [lineno, head.group(1), int(head.group(2)), line[head.end():], head.end()]
            continue
        if current and line.lstrip()[:1] in ("+", "-"):
            current[3] += " " + line.strip()
            continue
        col = len(line) - len(line.lstrip()) + 1
        raise MapSyntaxError("expected '<name><index> = <expr>'", lineno, col)
    if current:
        yield current


def parse_map(text: str, ring: Ring | str | None = None) -> MapDocument:
    """Parse a map document; ``ring`` overrides any ``ring:`` header."""
    if isinstance(ring, str):
        ring = parse_ring(ring)
    declared_ring = None
    arity = None
    coords: dict[int, tuple[int, list]] = {}
    name = None
    for lineno, kind, idx, body, col0 in _logical_lines(text):
        if idx is None:
            if kind == "ring":
                try:
                    declared_ring = parse_ring(body)
                except RingError as exc:
                    raise MapSyntaxError(str(exc), lineno, col0 + 1) from None
            else:
                if not body.isdigit() or int(body) < 1:
                    raise MapSyntaxError(f"bad arity {body!r}", lineno, 1)
                arity = int(body)
            continue
        if idx < 1:
            raise MapSyntaxError("coordinate index must be >= 1", lineno, 1)
        if idx in coords:
            raise MapSyntaxError(f"coordinate {idx} defined twice", lineno, 1)
        name = name or kind
        toks = _tokens(body, lineno, col0)
        parser = _ExprParser(toks, lineno, col0 + len(body) + 1)
        coords[idx] = (lineno, parser.expr())
    if not coords:
        raise MapSyntaxError("no coordinates found", 1, 1)
    n = arity if arity is not None else max(coords)
    missing = [i for i in range(1, n + 1) if i not in coords]
    if missing or max(coords) > n:
        bad = missing[0] if missing else max(coords)
        raise MapSyntaxError(f"expected exactly one line per coordinate 1..{n}; problem at coordinate {bad}",
                             coords[max(coords)][0] if not missing else 1, 1)
    target = ring or declared_ring
    if target is None:
        rational = any(c.denominator != 1 for _, terms in coords.values() for c, _ in terms)
        target = QQ if rational else ZZ
    polys = []
    for i in range(1, n + 1):
        lineno, terms = coords[i]
        acc: dict[tuple[int, ...], Fraction] = {}
        for c, powers in terms:
            exps = [0] * n
            for idx, e, col in powers:
                if not 1 <= idx <= n:
                    raise MapSyntaxError(f"variable X{idx} out of range for arity {n}", lineno, col)
                exps[idx - 1] += e
            key = tuple(exps)
            acc[key] = acc.get(key, 0) + c
        try:
            polys.append(Polynomial(target, n, acc))
        except RingError as exc:
            raise MapSyntaxError(f"coordinate {i}: {exc}", lineno, 1) from None
    return MapDocument(PolyMap(polys), target, n, name or "F")


def parse_polynomial(text: str, nvars: int, ring: Ring = QQ) -> Polynomial:
    doc = parse_map(f"arity: {nvars}\nP1 = {text}\n" + "".join(
        f"P{i} = 0\n" for i in range(2, nvars + 1)), ring)
    return doc.polymap[0]


def render_map(F: PolyMap, name: str = "F", ring_header: bool = False) -> str:
    head = f"ring: {_ring_tag(F.ring)}\n" if ring_header else ""
    return head + F.render(name) + "\n"


def _ring_tag(ring: Ring) -> str:
    if ring == ZZ:
        return "integer"
    if ring == QQ:
        return "rational"
    return f"gf({ring.p})"


def read_map(path, ring: Ring | str | None = None) -> MapDocument:
    with open(path, encoding="utf-8") as fh:
        return parse_map(fh.read(), ring)
