"""Fully-transpositional semigroups: closure, the finite catalog, and classification."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import permutations

import numpy as np

from .functions import (
    DomainError,
    DomainSpec,
    FinitaryFn,
    all_maps,
    all_transpositions,
    classify,
    compose,
)

CATALOG_SIZES = (3, 4, 5, 7)
DEFAULT_MAX_ELEMENTS = 3000


class BudgetExceeded(RuntimeError):
    pass


class BranchError(ValueError):
    """A classifier was asked about a semigroup outside its branch."""


class SemigroupKind(str, Enum):
    EXISTS_CNST = "ExistsCnst"
    EXISTS_SCNST = "ExistsScnst"
    NO_SCNST = "NoScnst"


class PairClass(str, Enum):
    J1 = "J1"
    J2 = "J2"
    J3 = "J3"
    J4 = "J4"


def _codes(arr: np.ndarray, base: int) -> np.ndarray:
    weights = base ** np.arange(arr.shape[-1] - 1, -1, -1, dtype=np.int64)
    return arr @ weights


def composition_table(elements: list) -> np.ndarray:
    """Index table with ``table[i, j]`` the index of ``elements[i] o elements[j]``."""
    n = len(elements)
    width = len(elements[0])
    E = np.array([e.map for e in elements], dtype=np.int64)
    table = np.empty((n, n), dtype=np.int32)
    if width ** width < 2**62:
        codes = _codes(E, width)
        order = np.argsort(codes)
        sorted_codes = codes[order]
        for i in range(n):
            rc = _codes(E[i][E], width)
            pos = np.searchsorted(sorted_codes, rc)
            pos = np.minimum(pos, n - 1)
            if not np.array_equal(sorted_codes[pos], rc):
                raise ValueError("element set is not closed under composition")
            table[i] = order[pos]
    else:
        index = {e.map: k for k, e in enumerate(elements)}
        for i in range(n):
            for j, row in enumerate(E[i][E]):
                try:
                    table[i, j] = index[tuple(row.tolist())]
                except KeyError:
                    raise ValueError("element set is not closed under composition") from None
    return table


@dataclass
class SemigroupTable:
    domain: DomainSpec
    table: np.ndarray
    elements: list | None = None
    label: str = ""
    gr: frozenset = field(init=False)

    def __post_init__(self):
        self.table = np.asarray(self.table, dtype=np.int32)
        n = self.table.shape[0]
        if self.table.shape != (n, n):
            raise ValueError("composition table must be square")
        if self.elements is not None and len(self.elements) != n:
            raise ValueError("backing does not match table size")
        self.gr = frozenset(group_part(self.table))

    @property
    def size(self) -> int:
        return self.table.shape[0]

    def __len__(self):
        return self.size

    def mul(self, i: int, j: int) -> int:
        return int(self.table[i, j])

    def index_of(self, f: FinitaryFn) -> int:
        return self._index[f.map]

    def __contains__(self, f: FinitaryFn) -> bool:
        return f.map in self._index

    @property
    def _index(self) -> dict:
        if not hasattr(self, "_idx_cache"):
            self._idx_cache = {e.map: k for k, e in enumerate(self.elements or [])}
        return self._idx_cache

    @property
    def has_constant(self) -> bool:
        return any(classify(e).is_constant for e in self.elements)

    @property
    def has_semi_constant(self) -> bool:
        return any(classify(e).is_semi_constant for e in self.elements)

    @property
    def is_ft(self) -> bool:
        return all(t in self for t in all_transpositions(self.domain))

    def check_backing(self) -> bool:
        """Table agrees with pointwise composition of the backing functions."""
        return np.array_equal(self.table, composition_table(self.elements))


def identity_index(table: np.ndarray) -> int | None:
    n = table.shape[0]
    ar = np.arange(n)
    hits = np.flatnonzero((table == ar[None, :]).all(axis=1) & (table == ar[:, None]).all(axis=0))
    return int(hits[0]) if len(hits) else None


def group_part(table: np.ndarray) -> list:
    """Indices g having a two-sided table inverse relative to the identity."""
    e = identity_index(table)
    if e is None:
        return []
    inv = (table == e) & (table.T == e)
    return [int(g) for g in np.flatnonzero(inv.any(axis=1))]


def close(generators: list, max_size: int = DEFAULT_MAX_ELEMENTS, label: str = "") -> SemigroupTable:
    if not generators:
        raise ValueError("need at least one generator")
    dom = generators[0].domain
    for g in generators:
        if g.domain != dom:
            raise DomainError("generators live on different domains")
    seen = {}
    elements = []
    for g in generators:
        if g.map not in seen:
            seen[g.map] = len(elements)
            elements.append(g)
    frontier = list(elements)
    while frontier:
        nxt = []
        for f in frontier:
            for g in generators:
                h = compose(f, g)
                if h.map not in seen:
                    if len(elements) >= max_size:
                        raise BudgetExceeded(f"closure exceeds {max_size} elements")
                    seen[h.map] = len(elements)
                    elements.append(h)
                    nxt.append(h)
        frontier = nxt
    elements.sort(key=lambda e: e.map)
    return SemigroupTable(dom, composition_table(elements), elements, label)


def symmetric_group(domain: DomainSpec) -> list:
    return [FinitaryFn(domain, p) for p in permutations(range(domain.size))]


def catalog_member_size(size: int, rank_cap: int | None) -> int:
    """|Sym(A) u {f : |Rng f| <= rank_cap}| without building it."""
    from math import comb, factorial

    total = factorial(size)
    if rank_cap is None:
        return total
    stirling = [[0] * (size + 1) for _ in range(size + 1)]
    stirling[0][0] = 1
    for n in range(1, size + 1):
        for k in range(1, n + 1):
            stirling[n][k] = k * stirling[n - 1][k] + stirling[n - 1][k - 1]
    for r in range(1, min(rank_cap, size - 1) + 1):
        total += comb(size, r) * stirling[size][r] * factorial(r)
    return total


def catalog_member(size: int, rank_cap: int | None, allow_excluded: bool = False) -> SemigroupTable:
    """Sym(A), or Sym(A) together with all maps of rank at most ``rank_cap``."""
    dom = DomainSpec.finite(size, allow_excluded)
    elements = symmetric_group(dom)
    if rank_cap is not None:
        if size ** size > 10**6:
            raise BudgetExceeded(f"rank-capped members over {size} points are out of budget")
        elements += [f for f in all_maps(dom) if f.rank() <= rank_cap and f.rank() < size]
    elements.sort(key=lambda e: e.map)
    label = f"Sym({size})" if rank_cap is None else f"Sym({size})+rank<={rank_cap}"
    return SemigroupTable(dom, composition_table(elements), elements, label)


def catalog_finite_ft(size: int, max_elements: int = DEFAULT_MAX_ELEMENTS) -> list:
    """All finite FT semigroups over ``size`` points whose order fits the budget.

    Members are Sym(A) and, for each rank cap n < |A|, Sym(A) plus every map of
    rank at most n.  Members larger than ``max_elements`` are skipped.
    """
    DomainSpec.finite(size)  # rejects excluded sizes
    out = []
    for cap in [None, *range(1, size)]:
        if catalog_member_size(size, cap) <= max_elements:
            out.append(catalog_member(size, cap))
    return out


@dataclass
class OpenSemigroup:
    """An unclosed finitary element set standing in for an infinite FT semigroup.

    It implicitly holds every finitary permutation, and every semi-constant when
    ``semi_constants`` is set; ``members`` lists designated extra functions.
    No constants are ever present.
    """

    domain: DomainSpec
    semi_constants: bool
    members: tuple = ()

    def in_group(self, f: FinitaryFn) -> bool:
        return f.is_bijective()


def classify_semigroup(S) -> SemigroupKind:
    if isinstance(S, OpenSemigroup):
        if S.semi_constants:
            return SemigroupKind.EXISTS_SCNST
        if any(classify(f).is_semi_constant for f in S.members):
            raise BranchError("member is a semi-constant but the set is declared without them")
        return SemigroupKind.NO_SCNST
    if S.elements is None:
        raise BranchError("classification needs backing functions")
    if not S.is_ft:
        raise BranchError("semigroup is not fully transpositional")
    if S.has_constant:
        return SemigroupKind.EXISTS_CNST
    if S.has_semi_constant:
        return SemigroupKind.EXISTS_SCNST
    return SemigroupKind.NO_SCNST


def classify_pair(S, f: FinitaryFn) -> PairClass:
    kind = classify_semigroup(S)
    if kind is SemigroupKind.EXISTS_CNST:
        raise BranchError("pair classes are defined only for semigroups without constants")
    if kind is SemigroupKind.EXISTS_SCNST:
        return PairClass.J1
    if isinstance(S, OpenSemigroup):
        in_gr = S.in_group(f)
    else:
        in_gr = S.index_of(f) in S.gr
    if len(classify(f).blocks) >= 3:
        return PairClass.J2
    return PairClass.J4 if in_gr else PairClass.J3


def act_structure(S: SemigroupTable) -> np.ndarray:
    """``app[i, x] = elements[i](x)``."""
    return np.array([e.map for e in S.elements], dtype=np.int32)


def act_gr_structure(S: SemigroupTable) -> np.ndarray:
    """Application restricted to the group part; rows outside it are -1."""
    app = act_structure(S)
    mask = np.zeros(S.size, dtype=bool)
    mask[list(S.gr)] = True
    app[~mask] = -1
    return app
