"""Anonymous composition tables, scrambled copies, and isomorphism search.

Reconstruction code only ever sees ``OpaqueAlgebra.table``.  The concrete
functions behind each id are kept in a private provenance slot that only
``reveal_provenance`` reads, for comparing results against ground truth.
"""
from __future__ import annotations

import numpy as np

from .catalog import BudgetExceeded, SemigroupTable, composition_table
from .functions import DomainSpec, FinitaryFn

FULL_ASSOC_LIMIT = 64
ASSOC_SAMPLES = 20000


class NotAssociative(ValueError):
    pass


def associativity_violations(table: np.ndarray, rng: np.random.Generator | None = None,
                             full_limit: int = FULL_ASSOC_LIMIT, samples: int = ASSOC_SAMPLES) -> int:
    n = table.shape[0]
    if n <= full_limit:
        left = table[table]  # left[a, b, c] = (ab)c
        right = table[:, table]  # right[a, b, c] = a(bc)
        return int((left != right).sum())
    rng = rng or np.random.default_rng(0)
    a, b, c = rng.integers(0, n, size=(3, samples))
    return int((table[table[a, b], c] != table[a, table[b, c]]).sum())


class OpaqueAlgebra:
    """A semigroup given only by its composition table over ids ``0..size-1``."""

    def __init__(self, table, provenance=None, check: bool = True):
        table = np.asarray(table, dtype=np.int32)
        n = table.shape[0]
        if table.shape != (n, n):
            raise ValueError("table must be square")
        if table.min() < 0 or table.max() >= n:
            raise ValueError("table entries must be valid ids")
        if check and associativity_violations(table):
            raise NotAssociative("composition table is not associative")
        table.flags.writeable = False
        self.table = table
        self.__provenance = provenance

    @property
    def size(self) -> int:
        return self.table.shape[0]

    def __len__(self):
        return self.size

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def _provenance(self):
        return self.__provenance


def reveal_provenance(M: OpaqueAlgebra):
    """Hidden ground truth: (domain, list of backing functions by id).  Test use only."""
    return M._provenance()


def relabel_table(table: np.ndarray, new_of_old: np.ndarray) -> np.ndarray:
    old_of_new = np.argsort(new_of_old)
    return new_of_old[table[np.ix_(old_of_new, old_of_new)]].astype(np.int32)


def strip(S: SemigroupTable, permutation_seed=None) -> OpaqueAlgebra:
    """Forget the backing functions and shuffle ids.  ``None`` keeps ids as they are."""
    n = S.size
    new_of_old = scramble_permutation(n, permutation_seed)
    table = relabel_table(S.table, new_of_old)
    prov = None
    if S.elements is not None:
        backing = [None] * n
        for old, new in enumerate(new_of_old):
            backing[new] = S.elements[old]
        prov = (S.domain, backing)
    return OpaqueAlgebra(table, prov, check=True)


def conjugate_copy(S: SemigroupTable, tau) -> tuple:
    """``T = {tau f tau^-1}`` and the induced id map ``phi`` (index in S -> index in T)."""
    tau = FinitaryFn(S.domain, tau) if not isinstance(tau, FinitaryFn) else tau
    inv = tau.inverse()
    t, ti = tau.array, inv.array
    images = [FinitaryFn(S.domain, t[f.array[ti]]) for f in S.elements]
    order = sorted(range(len(images)), key=lambda k: images[k].map)
    elements = [images[k] for k in order]
    phi = np.empty(len(images), dtype=np.int64)
    phi[order] = np.arange(len(images))
    T = SemigroupTable(S.domain, composition_table(elements), elements, S.label + "^tau")
    return T, phi


def is_isomorphism(M, N, phi) -> bool:
    phi = np.asarray(phi)
    if M.table.shape != N.table.shape or len(set(phi.tolist())) != len(phi):
        return False
    return np.array_equal(phi[M.table], N.table[np.ix_(phi, phi)])


def element_invariants(table: np.ndarray) -> list:
    """Isomorphism-invariant fingerprint of each element."""
    n = table.shape[0]
    ar = np.arange(n)
    idem = table[ar, ar] == ar
    right_fix = (table == ar[:, None]).sum(axis=1)  # |{g : f g = f}|
    left_fix = (table == ar[None, :]).sum(axis=0)  # |{g : g f = f}|
    acts_left_id = (table == ar[None, :]).sum(axis=1)  # |{g : f g = g}|
    acts_right_id = (table == ar[:, None]).sum(axis=0)  # |{g : g f = g}|
    commutant = (table == table.T).sum(axis=1)
    squares = np.bincount(table[ar, ar], minlength=n)
    out = []
    for f in range(n):
        # index and period of the monogenic subsemigroup
        seen = {}
        x, k = f, 1
        while x not in seen:
            seen[x] = k
            x = int(table[x, f])
            k += 1
        index, period = seen[x], k - seen[x]
        out.append((bool(idem[f]), index, period, int(right_fix[f]), int(left_fix[f]),
                    int(acts_left_id[f]), int(acts_right_id[f]), int(commutant[f]), int(squares[f])))
    return out


def _generated(table: np.ndarray, gens: list) -> set:
    got = set(gens)
    frontier = list(gens)
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                for c in (int(table[a, g]), int(table[g, a])):
                    if c not in got:
                        got.add(c)
                        nxt.append(c)
        frontier = nxt
    return got


def _generating_set(table: np.ndarray, invariants: list) -> list:
    n = table.shape[0]
    class_size: dict = {}
    for inv in invariants:
        class_size[inv] = class_size.get(inv, 0) + 1
    order = sorted(range(n), key=lambda f: (class_size[invariants[f]], invariants[f], f))
    gens: list = []
    got: set = set()
    for f in order:
        if f not in got:
            gens.append(f)
            got = _generated(table, gens)
            if len(got) == n:
                break
    return gens


def find_isomorphism(M, N, max_size: int = 200):
    """A table isomorphism ``phi`` (array, M id -> N id) or ``None``."""
    if M.size != N.size:
        return None
    if M.size > max_size:
        raise BudgetExceeded(f"isomorphism search limited to {max_size} elements")
    A, B = M.table, N.table
    inv_a, inv_b = element_invariants(A), element_invariants(B)
    if sorted(inv_a) != sorted(inv_b):
        return None
    gens = _generating_set(A, inv_a)
    candidates = [[y for y in range(N.size) if inv_b[y] == inv_a[g]] for g in gens]

    def extend(phi: dict, assigned: list):
        # propagate phi through products of already-mapped elements
        phi = dict(phi)
        used = {v: k for k, v in phi.items()}
        frontier = list(phi)
        while frontier:
            nxt = []
            for a in frontier:
                for g in assigned:
                    for src, img in ((int(A[a, g]), int(B[phi[a], phi[g]])),
                                     (int(A[g, a]), int(B[phi[g], phi[a]]))):
                        if src in phi:
                            if phi[src] != img:
                                return None
                        else:
                            if img in used or inv_a[src] != inv_b[img]:
                                return None
                            phi[src] = img
                            used[img] = src
                            nxt.append(src)
            frontier = nxt
        return phi

    def search(k: int, phi: dict):
        if k == len(gens):
            arr = np.array([phi[i] for i in range(M.size)])
            return arr if is_isomorphism(M, N, arr) else None
        g = gens[k]
        if g in phi:
            return search(k + 1, phi)
        for y in candidates[k]:
            if y in phi.values():
                continue
            trial = dict(phi)
            trial[g] = y
            ext = extend(trial, gens[: k + 1])
            if ext is not None:
                found = search(k + 1, ext)
                if found is not None:
                    return found
        return None

    return search(0, {})


def opaque_from_functions(domain: DomainSpec, elements: list, seed=None) -> OpaqueAlgebra:
    S = SemigroupTable(domain, composition_table(elements), list(elements))
    return strip(S, seed)


def scramble_permutation(size: int, permutation_seed=None) -> np.ndarray:
    """The ``new_of_old`` id map ``strip`` applies for this seed."""
    if permutation_seed is None:
        return np.arange(size)
    return np.random.default_rng(permutation_seed).permutation(size)


def point_labels(M: OpaqueAlgebra, reps: list) -> np.ndarray:
    """True point behind each (t, s) transposition pair, read from provenance.  Test use only."""
    prov = reveal_provenance(M)
    if prov is None:
        raise ValueError("algebra carries no provenance")
    _, backing = prov
    labels = []
    for t, s in reps:
        ft, fs = backing[t].array, backing[s].array
        ar = np.arange(len(ft))
        common = np.flatnonzero((ft != ar) & (fs != ar))
        if len(common) != 1:
            raise ValueError("pair does not share exactly one moved point")
        labels.append(int(common[0]))
    return np.array(labels, dtype=np.int64)
