"""Brute-force reference computations on plain tuples, independent of the package."""
from __future__ import annotations

from itertools import permutations, product


def comp(f: tuple, g: tuple) -> tuple:
    return tuple(f[g[x]] for x in range(len(g)))


def closure(gens) -> set:
    got = set(gens)
    frontier = list(got)
    while frontier:
        nxt = []
        for f in frontier:
            for g in gens:
                for h in (comp(f, g), comp(g, f)):
                    if h not in got:
                        got.add(h)
                        nxt.append(h)
        frontier = nxt
    return got


def transpositions(n: int) -> list:
    out = []
    for a in range(n):
        for b in range(a + 1, n):
            t = list(range(n))
            t[a], t[b] = b, a
            out.append(tuple(t))
    return out


def catalog_sizes(n: int, budget: int = 3000) -> list:
    """Orders of Sym(n) and of Sym(n) plus all maps of rank <= r, by enumerating every map."""
    maps = list(product(range(n), repeat=n))
    perms = sum(1 for m in maps if len(set(m)) == n)
    sizes = [perms]
    for r in range(1, n):
        sizes.append(perms + sum(1 for m in maps if len(set(m)) <= r))
    return [s for s in sizes if s <= budget]


def perm_order(p: tuple) -> int:
    ident = tuple(range(len(p)))
    q, k = p, 1
    while q != ident:
        q, k = comp(q, p), k + 1
    return k


def involution_classes(n: int) -> dict:
    """Cycle type (number of 2-cycles) -> list of involutions of Sym(n)."""
    out: dict = {}
    for p in permutations(range(n)):
        if p != tuple(range(n)) and comp(p, p) == tuple(range(n)):
            k = sum(1 for x in range(n) if p[x] > x)
            out.setdefault(k, []).append(p)
    return out


def fixed_image(f) -> set:
    return {x for x in range(len(f)) if f[f[x]] == f[x]}


def one_one_pairs(f) -> set:
    return {(x, f[x]) for x in range(len(f)) if sum(1 for y in f if y == f[x]) == 1}


def in_range(f) -> set:
    return set(f)
