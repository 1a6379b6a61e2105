"""Shared helpers for the test suite: random maps and independent oracles."""

import random

from polyinv import ZZ, PolyMap, Polynomial, bundled_map, compose_map


def load(name):
    return bundled_map(name).polymap


def random_poly(rng, ring, n, allowed, max_deg=4, max_coeff=9, max_terms=4, min_deg=2):
    """Random polynomial in the variables with 0-based indices ``allowed``."""
    terms = {}
    if not allowed:
        return Polynomial.zero(ring, n)
    for _ in range(rng.randint(0, max_terms)):
        deg = rng.randint(min_deg, max_deg)
        exps = [0] * n
        for _ in range(deg):
            exps[rng.choice(allowed)] += 1
        c = rng.randint(-max_coeff, max_coeff)
        if c:
            terms[tuple(exps)] = c
    return Polynomial(ring, n, terms)


def random_triangular(rng, n=None, max_deg=4, max_coeff=9, ring=ZZ):
    """``F_i = X_i + h_i(X_1..X_{i-1})``, optionally conjugated by a coordinate permutation."""
    n = n or rng.randint(2, 4)
    hs = [random_poly(rng, ring, n, list(range(i)), max_deg, max_coeff) for i in range(n)]
    perm = list(range(n))
    rng.shuffle(perm)
    # relabel variables by perm: still triangular with respect to another order
    coords = []
    for i in range(n):
        coords.append(None)
    for i in range(n):
        h = hs[i]
        moved = {}
        for exps, c in h.terms():
            new = [0] * n
            for j, e in enumerate(exps):
                new[perm[j]] = e
            moved[tuple(new)] = c
        coords[perm[i]] = Polynomial(ring, n, moved) + Polynomial.variable(ring, n, perm[i])
    return PolyMap(coords), perm


def triangular_inverse(F, perm):
    """Inverse by back substitution along the triangular order; no Δ iteration."""
    n = F.nvars
    ring = F.ring
    X = [Polynomial.variable(ring, n, i) for i in range(n)]
    G = list(X)
    for i in range(n):
        v = perm[i]
        h = F[v] - X[v]
        # h only involves variables perm[0..i-1], whose inverse images are known
        img = PolyMap([G[j] if j in perm[:i] else X[j] for j in range(n)])
        G[v] = X[v] - compose_map(PolyMap([h] + [X[0]] * (n - 1)), img)[0]
    return PolyMap(G)


def random_maps(seed, count, **kw):
    rng = random.Random(seed)
    return [random_triangular(rng, **kw) for _ in range(count)]
