"""Concrete self-maps of a point domain and their per-function classifiers.

Points are dense integers.  A finite domain is ``range(size)``.  A finitary
domain stands in for a countable set: functions move only points inside a
window ``range(window)`` and fix everything else, and a handful of fresh
points past the window serve as witnesses when quantifying over points.

Composition is f-after-g throughout: ``compose(f, g)(x) == f(g(x))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np

EXCLUDED_SIZES = frozenset({1, 2, 6})
MIN_WINDOW = 8


class DomainError(ValueError):
    """Raised for excluded domain sizes or mixing functions on different domains."""


class InvalidTransposition(ValueError):
    pass


@dataclass(frozen=True)
class DomainSpec:
    size: int
    finitary: bool = False
    fresh_points: int = 0
    # escape hatch for negative controls that must build Sym(6)
    allow_excluded: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.size < 1:
            raise DomainError(f"domain size must be positive, got {self.size}")
        if self.finitary:
            if self.size < MIN_WINDOW:
                raise DomainError(f"finitary window must be >= {MIN_WINDOW}, got {self.size}")
            if self.fresh_points < 2:
                raise DomainError("finitary mode needs at least 2 fresh points")
        elif self.size in EXCLUDED_SIZES and not self.allow_excluded:
            raise DomainError(f"domain size {self.size} is excluded (sizes 1, 2, 6 are not treated)")

    @classmethod
    def finite(cls, size: int, allow_excluded: bool = False) -> DomainSpec:
        return cls(size, False, 0, allow_excluded)

    @classmethod
    def open(cls, window: int, fresh_points: int = 4) -> DomainSpec:
        return cls(window, True, fresh_points)

    @property
    def window(self) -> int:
        return self.size

    @property
    def universe(self) -> int:
        """Number of points enumerated by quantifiers: window plus fresh points."""
        return self.size + self.fresh_points

    def points(self) -> range:
        return range(self.universe)

    def widened(self, window: int | None = None, fresh_points: int | None = None) -> DomainSpec:
        if not self.finitary:
            raise DomainError("only finitary domains can be widened")
        return DomainSpec.open(
            max(self.size, window or self.size),
            self.fresh_points if fresh_points is None else fresh_points,
        )

    def to_json(self) -> dict:
        if self.finitary:
            return {"mode": "finitary", "window": self.size, "fresh_points": self.fresh_points}
        return {"mode": "finite", "size": self.size}

    @classmethod
    def from_json(cls, data: dict, allow_excluded: bool = False) -> DomainSpec:
        if data["mode"] == "finitary":
            return cls.open(data["window"], data["fresh_points"])
        return cls.finite(data["size"], allow_excluded)


def _join(d1: DomainSpec, d2: DomainSpec) -> DomainSpec:
    if d1 == d2:
        return d1
    if d1.finitary and d2.finitary:
        return DomainSpec.open(max(d1.size, d2.size), max(d1.fresh_points, d2.fresh_points))
    raise DomainError(f"cannot combine functions on {d1} and {d2}")


class FinitaryFn:
    """An immutable self-map given by its values on the window (identity beyond it)."""

    __slots__ = ("domain", "map", "__dict__")

    def __init__(self, domain: DomainSpec, values):
        values = tuple(int(v) for v in values)
        if len(values) != domain.size:
            raise DomainError(f"expected {domain.size} values, got {len(values)}")
        if any(v < 0 or v >= domain.size for v in values):
            raise DomainError(f"image outside domain: {values}")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "map", values)

    def __setattr__(self, name, value):
        if name in ("domain", "map"):
            raise AttributeError("FinitaryFn is immutable")
        object.__setattr__(self, name, value)

    def __call__(self, x: int) -> int:
        return self.map[x] if x < len(self.map) else x

    def __eq__(self, other):
        return isinstance(other, FinitaryFn) and self.domain == other.domain and self.map == other.map

    def __hash__(self):
        return hash((self.domain, self.map))

    def __repr__(self):
        return f"FinitaryFn({list(self.map)})"

    def __len__(self):
        return len(self.map)

    @cached_property
    def array(self) -> np.ndarray:
        a = np.array(self.map, dtype=np.int64)
        a.flags.writeable = False
        return a

    def extended(self, n: int) -> np.ndarray:
        """Values on ``range(n)``, padding with the identity tail."""
        if n < len(self.map):
            raise DomainError("cannot truncate a function below its window")
        out = np.arange(n, dtype=np.int64)
        out[: len(self.map)] = self.map
        return out

    def widened(self, domain: DomainSpec) -> FinitaryFn:
        return FinitaryFn(domain, self.extended(domain.size))

    def rank(self) -> int:
        return len(set(self.map))

    def is_bijective(self) -> bool:
        return len(set(self.map)) == len(self.map)

    def inverse(self) -> FinitaryFn:
        if not self.is_bijective():
            raise ValueError("function is not a bijection")
        inv = [0] * len(self.map)
        for x, y in enumerate(self.map):
            inv[y] = x
        return FinitaryFn(self.domain, inv)


def identity(domain: DomainSpec) -> FinitaryFn:
    return FinitaryFn(domain, range(domain.size))


def constant(domain: DomainSpec, value: int) -> FinitaryFn:
    if domain.finitary:
        raise DomainError("constants are not finitary")
    return FinitaryFn(domain, [value] * domain.size)


def semi_constant(domain: DomainSpec, block, value: int) -> FinitaryFn:
    """Constant with the given value on ``block``, identity elsewhere."""
    block = set(block)
    if len(block) < 2:
        raise ValueError("a semi-constant block needs at least two points")
    return FinitaryFn(domain, [value if x in block else x for x in range(domain.size)])


def transposition(domain: DomainSpec, a: int, b: int) -> FinitaryFn:
    if a == b:
        raise InvalidTransposition(f"transposition needs two distinct points, got ({a},{b})")
    values = list(range(domain.size))
    values[a], values[b] = b, a
    return FinitaryFn(domain, values)


def compose(f: FinitaryFn, g: FinitaryFn) -> FinitaryFn:
    dom = _join(f.domain, g.domain)
    fa, ga = f.extended(dom.size), g.extended(dom.size)
    return FinitaryFn(dom, fa[ga])


def all_transpositions(domain: DomainSpec):
    return [transposition(domain, a, b) for a, b in combinations(range(domain.size), 2)]


def all_maps(domain: DomainSpec):
    """Every self-map of a finite domain, in lexicographic order of value tuples."""
    n = domain.size
    grid = np.indices((n,) * n).reshape(n, -1).T
    return [FinitaryFn(domain, row) for row in grid]


@dataclass(frozen=True)
class FnClassification:
    """Point sets attached to a function, computed over its window.

    Points beyond a finitary window are fixed one-to-one points; they belong to
    fxd, fxd_img, idp, oo_pre and oo_img implicitly and are not listed.
    """

    fxd: frozenset
    fxd_img: frozenset
    idp: frozenset
    mo_pre: frozenset
    mo_img: frozenset
    oo_pre: frozenset
    oo_img: frozenset
    blocks: tuple
    is_constant: bool
    is_semi_constant: bool
    is_projection: bool
    is_bijective: bool
    cnst_value: int | None = None
    cnst_dom: frozenset | None = None


def fibres(f: FinitaryFn) -> dict:
    out: dict[int, list[int]] = {}
    for x, y in enumerate(f.map):
        out.setdefault(y, []).append(x)
    return out


def classify(f: FinitaryFn) -> FnClassification:
    m = f.map
    pts = range(len(m))
    fib = fibres(f)
    fxd = frozenset(x for x in pts if m[x] == x)
    fxd_img = frozenset(x for x in pts if m[x] in fxd)
    blocks = tuple(sorted(tuple(v) for v in fib.values() if len(v) >= 2))
    mo_pre = frozenset(x for b in blocks for x in b)
    oo_pre = frozenset(pts) - mo_pre
    idp = frozenset(x for x in pts if fib.get(x) == [x])
    is_projection = all(m[m[x]] == m[x] for x in pts)
    is_constant = len(fib) == 1 and not f.domain.finitary
    # semi-constant: exactly one nontrivial block, mapped into itself, identity elsewhere
    semi = (
        len(blocks) == 1
        and m[blocks[0][0]] in blocks[0]
        and all(m[x] == x for x in oo_pre)
    )
    cval = m[blocks[0][0]] if semi else None
    cdom = frozenset(blocks[0]) if semi else None
    return FnClassification(
        fxd=fxd,
        fxd_img=fxd_img,
        idp=idp,
        mo_pre=mo_pre,
        mo_img=frozenset(m[x] for x in mo_pre),
        oo_pre=oo_pre,
        oo_img=frozenset(m[x] for x in oo_pre),
        blocks=blocks,
        is_constant=is_constant,
        is_semi_constant=semi,
        is_projection=is_projection,
        is_bijective=not blocks,
        cnst_value=cval,
        cnst_dom=cdom,
    )


def long_triple(f: FinitaryFn, b: int, a: int, c: int) -> bool:
    return f(b) == a and f(a) == c and b != a and a != c


def long_wide_quadruple(f: FinitaryFn, r: int, p: int, q: int, t: int) -> bool:
    return f(p) == t and f(q) == t and len({p, q, t}) == 3 and f(r) == q


def one_one_pairs(f: FinitaryFn) -> list:
    """Pairs (p, q) with f^-1[{q}] = {p}, over the window."""
    return sorted((v[0], q) for q, v in fibres(f).items() if len(v) == 1)


def simple_pairs(f: FinitaryFn) -> list:
    return [(p, q) for p, q in one_one_pairs(f) if p != q]
