"""Arity-capped clones on finite sets and recovery of their action from composition alone.

An n-ary operation is a flat array of length size**n indexed by the mixed-radix
code of its argument tuple (row-major, last coordinate fastest).  Composition
tables ``cmp[(n, k)]`` have shape ``(count_n, count_k ** n)``: row f, column the
code of the tuple (g_1, ..., g_n) of k-ary indices, entry the k-ary index of
f(g_1, ..., g_n).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .catalog import BudgetExceeded
from .functions import DomainSpec, FinitaryFn
from .opaque import OpaqueAlgebra
from .reconstruct import ReconstructedAction, extract_tau, reconstruct

MAX_ARITY_CAP = 3
DEFAULT_CLONE_BUDGET = 200


class CloneError(RuntimeError):
    pass


class CannotRecover(CloneError):
    pass


class TableIncoherence(CloneError):
    pass


class TruncationIncomplete(CloneError):
    pass


def tuple_codes(size: int, arity: int) -> np.ndarray:
    """All argument tuples in code order, shape (size**arity, arity)."""
    return np.array(list(product(range(size), repeat=arity)), dtype=np.int64).reshape(-1, arity)


def projection(size: int, arity: int, i: int) -> np.ndarray:
    return tuple_codes(size, arity)[:, i].copy()


def _compose_all(size: int, f_ops: np.ndarray, g_ops: np.ndarray, n: int) -> np.ndarray:
    """h[f, gcode, x] = f(g_1(x), ..., g_n(x)) for every f and every n-tuple of g's."""
    count_g, width = g_ops.shape
    gt = tuple_codes(count_g, n)  # (count_g**n, n)
    weights = size ** np.arange(n - 1, -1, -1, dtype=np.int64)
    arg = np.tensordot(g_ops[gt], weights, axes=([1], [0]))  # (count_g**n, width)
    return f_ops[:, arg]


def _index_rows(ops: np.ndarray) -> dict:
    return {row.tobytes(): i for i, row in enumerate(ops)}


def _lookup(index: dict, rows: np.ndarray) -> np.ndarray:
    flat = rows.reshape(-1, rows.shape[-1])
    out = np.empty(len(flat), dtype=np.int64)
    for i, r in enumerate(flat):
        j = index.get(r.tobytes())
        if j is None:
            raise TruncationIncomplete("composite is not among the operations of its arity")
        out[i] = j
    return out.reshape(rows.shape[:-1])


@dataclass
class TruncatedClone:
    domain: DomainSpec
    cap: int
    ops: dict  # arity -> (count, size**arity) int array
    cmp: dict = field(default_factory=dict)  # (n, k) -> (count_n, count_k**n) int array

    @property
    def size(self) -> int:
        return self.domain.size

    def count(self, arity: int) -> int:
        return len(self.ops[arity])

    def total(self) -> int:
        return sum(self.count(n) for n in self.ops)

    def index(self, arity: int, op) -> int:
        row = np.asarray(op, dtype=np.int64)
        for i, r in enumerate(self.ops[arity]):
            if np.array_equal(r, row):
                return i
        raise KeyError("operation not in clone")

    def projection_index(self, arity: int, i: int) -> int:
        return self.index(arity, projection(self.size, arity, i))

    def cmp_lookup(self, n: int, k: int, f: int, gs) -> int:
        code = 0
        for g in gs:
            code = code * self.count(k) + int(g)
        return int(self.cmp[(n, k)][f, code])

    def apply(self, arity: int, f: int, args) -> int:
        code = 0
        for a in args:
            code = code * self.size + int(a)
        return int(self.ops[arity][f, code])


def build_cmp_tables(size: int, ops: dict, cap: int) -> dict:
    index = {k: _index_rows(ops[k]) for k in ops}
    return {(n, k): _lookup(index[k], _compose_all(size, ops[n], ops[k], n))
            for n in range(1, cap + 1) for k in range(1, cap + 1)}


def clone_close(generators, arity_cap: int = 2, size_budget: int = DEFAULT_CLONE_BUDGET,
                domain: DomainSpec | None = None) -> TruncatedClone:
    """Least cap-truncated clone containing the projections and ``generators``.

    ``generators`` holds FinitaryFns (unary) or ``(arity, flat table)`` pairs.
    ``size_budget`` bounds the number of operations of each arity.
    """
    if not 2 <= arity_cap <= MAX_ARITY_CAP:
        raise ValueError(f"arity cap must lie in 2..{MAX_ARITY_CAP}")
    gens = []
    for g in generators:
        if isinstance(g, FinitaryFn):
            domain = domain or g.domain
            gens.append((1, np.array(g.map, dtype=np.int64)))
        else:
            arity, tab = g
            gens.append((int(arity), np.asarray(tab, dtype=np.int64)))
    if domain is None:
        raise ValueError("domain needed when there are no unary generators")
    if domain.finitary:
        raise ValueError("clones are built on finite domains")
    size = domain.size
    ops = {n: [projection(size, n, i) for i in range(n)] for n in range(1, arity_cap + 1)}
    for arity, tab in gens:
        if arity > arity_cap:
            raise ValueError("generator arity exceeds the cap")
        if tab.shape != (size**arity,) or tab.min() < 0 or tab.max() >= size:
            raise ValueError("generator table does not fit the domain")
        ops[arity].append(tab)
    ops = {n: np.unique(np.array(v), axis=0) for n, v in ops.items()}
    while True:
        grown = False
        for n in range(1, arity_cap + 1):
            for k in range(1, arity_cap + 1):
                if len(ops[k]) ** n * len(ops[n]) > 4_000_000:
                    raise BudgetExceeded("composition sweep too large")
                new = _compose_all(size, ops[n], ops[k], n).reshape(-1, size**k)
                merged = np.unique(np.concatenate([ops[k], new]), axis=0)
                if len(merged) > size_budget:
                    raise BudgetExceeded(f"arity {k} exceeds {size_budget} operations")
                if len(merged) != len(ops[k]):
                    ops[k] = merged
                    grown = True
        if not grown:
            break
    return TruncatedClone(domain, arity_cap, ops, build_cmp_tables(size, ops, arity_cap))


def is_semi_transitive(C: TruncatedClone) -> bool:
    unary = C.ops[1]
    for a in range(C.size):
        for b in range(C.size):
            if not ((unary == a)[:, None, :] & (unary == b)[None, :, :]).any():
                return False
    return True


def tuple_witness(C: TruncatedClone, args):
    """``(c, [g_1, ..., g_n])`` with unary g_i(c) = a_i, or None."""
    unary = C.ops[1]
    for c in range(C.size):
        gs = []
        for a in args:
            hits = np.flatnonzero(unary[:, c] == a)
            if not len(hits):
                break
            gs.append(int(hits[0]))
        else:
            return c, gs
    return None


def recover_app_n(app1: np.ndarray, cmp_n1: np.ndarray, n: int) -> np.ndarray:
    """App_n from App_1 and Cmp_{n,1} alone.

    ``app1[g, z]`` is unary application over recovered points; ``cmp_n1`` is the
    (count_n, count_1**n) table.  Every witness (z, g_1..g_n) is visited: it
    certifies f(g_1(z), ..., g_n(z)) = App_1(Cmp(f, g), z).
    """
    count1, size = app1.shape
    gt = tuple_codes(count1, n)  # column order of cmp_n1
    weights = size ** np.arange(n - 1, -1, -1, dtype=np.int64)
    out = np.full((cmp_n1.shape[0], size**n), -1, dtype=np.int64)
    for z in range(size):
        arg = (app1[gt, z] * weights).sum(axis=1)  # tuple code per witness
        val = app1[cmp_n1, z]  # (count_n, count1**n)
        for f in range(cmp_n1.shape[0]):
            cur = out[f, arg]
            out[f, arg] = val[f]
            # catches clashes with earlier z and among witnesses for this z
            if ((cur >= 0) & (cur != val[f])).any() or (out[f, arg] != val[f]).any():
                raise TableIncoherence(f"conflicting values for operation {f}")
    if (out < 0).any():
        raise CannotRecover("some tuple has no witness; the unary part is not semi-transitive")
    return out


def define_cmp_from_app(size: int, app: dict, cap: int) -> dict:
    """Composition tables from the application tables alone."""
    return build_cmp_tables(size, app, cap)


# ---------------------------------------------------------------- opaque clones

class OpaqueClone:
    """A clone given only by its composition relations over anonymous global ids.

    ``cmp[(n, k)]`` is an int array of rows ``(f, g_1, ..., g_n, h)``.
    """

    def __init__(self, cmp: dict, size: int, provenance=None):
        self.cmp = {key: np.asarray(v) for key, v in cmp.items()}
        for v in self.cmp.values():
            v.flags.writeable = False
        self.size = size  # number of ids
        self.__provenance = provenance

    def _provenance(self):
        return self.__provenance


def global_ids(C: TruncatedClone) -> dict:
    """(arity, local index) -> id in the unscrambled global numbering."""
    out, nxt = {}, 0
    for n in sorted(C.ops):
        for i in range(C.count(n)):
            out[(n, i)] = nxt
            nxt += 1
    return out


def scrambled_ids(C: TruncatedClone, permutation_seed=None) -> dict:
    """(arity, local index) -> id as assigned by ``strip_clone`` with this seed."""
    ids = global_ids(C)
    new_of_old = (np.arange(len(ids)) if permutation_seed is None
                  else np.random.default_rng(permutation_seed).permutation(len(ids)))
    return {key: int(new_of_old[v]) for key, v in ids.items()}


def strip_clone(C: TruncatedClone, permutation_seed=None) -> OpaqueClone:
    gid = scrambled_ids(C, permutation_seed)
    total = len(gid)
    cmp = {}
    for (n, k), tab in C.cmp.items():
        gt = tuple_codes(C.count(k), n)
        fs = np.repeat(np.arange(C.count(n)), len(gt))
        gs = np.tile(gt, (C.count(n), 1))
        hs = tab.reshape(-1)
        rows = np.column_stack([[gid[(n, f)] for f in fs]]
                               + [[gid[(k, g)] for g in gs[:, j]] for j in range(n)]
                               + [[gid[(k, h)] for h in hs]])
        cmp[(n, k)] = rows[np.lexsort(rows.T[::-1])]
    backing = [None] * total
    for (n, i), g in gid.items():
        backing[g] = (n, C.ops[n][i])
    return OpaqueClone(cmp, total, (C.domain, backing))


def reveal_clone_provenance(M: OpaqueClone):
    """Hidden ground truth: (domain, list of (arity, table) by id).  Test use only."""
    return M._provenance()


@dataclass
class CloneAction:
    unary_ids: list
    arity_ids: dict  # arity -> sorted global ids
    semigroup: ReconstructedAction
    app: dict  # arity -> (count, points**arity) array, rows in arity_ids order

    @property
    def points(self) -> int:
        return len(self.semigroup.points)


def _arity_ids(M: OpaqueClone, n: int) -> list:
    # operations of arity n are exactly the first arguments of Cmp_{n,1}
    return sorted(set(M.cmp[(n, 1)][:, 0].tolist()))


def _local_cmp_n1(M: OpaqueClone, n: int, pos_n: dict, pos_1: dict) -> np.ndarray:
    count1 = len(pos_1)
    out = np.full((len(pos_n), count1**n), -1, dtype=np.int64)
    for row in M.cmp[(n, 1)]:
        code = 0
        for g in row[1:-1]:
            code = code * count1 + pos_1[int(g)]
        out[pos_n[int(row[0])], code] = pos_1[int(row[-1])]
    if (out < 0).any():
        raise TableIncoherence(f"Cmp_{n},1 is not total")
    return out


def reconstruct_clone_action(M: OpaqueClone, cap: int) -> CloneAction:
    unary = _arity_ids(M, 1)
    pos_1 = {g: i for i, g in enumerate(unary)}
    table = _local_cmp_n1(M, 1, pos_1, pos_1)
    R = reconstruct(OpaqueAlgebra(table))
    arity_ids = {1: unary}
    app = {1: R.app}
    for n in range(2, cap + 1):
        ids = _arity_ids(M, n)
        arity_ids[n] = ids
        pos_n = {g: i for i, g in enumerate(ids)}
        app[n] = recover_app_n(R.app, _local_cmp_n1(M, n, pos_n, pos_1), n)
    return CloneAction(unary, arity_ids, R, app)


def conjugate_clone(C: TruncatedClone, sigma) -> tuple:
    """The clone {sigma f(sigma^-1 x) } and the induced map (arity, index) -> index."""
    s = np.asarray(sigma.map if isinstance(sigma, FinitaryFn) else sigma, dtype=np.int64)
    si = np.argsort(s)
    size = C.size
    ops, induced = {}, {}
    for n, tab in C.ops.items():
        codes = tuple_codes(size, n)
        weights = size ** np.arange(n - 1, -1, -1, dtype=np.int64)
        pre = (si[codes] * weights).sum(axis=1)  # code of sigma^-1 applied coordinatewise
        images = s[tab[:, pre]]
        order = np.lexsort(images.T[::-1])
        ops[n] = images[order]
        induced[n] = np.argsort(order)
    return TruncatedClone(C.domain, C.cap, ops, build_cmp_tables(size, ops, C.cap)), induced


def clone_tau(A: CloneAction, B: CloneAction, phi_global) -> np.ndarray:
    """Point bijection from a global-id isomorphism, via the unary reconstructions."""
    pos_b = {g: i for i, g in enumerate(B.unary_ids)}
    phi_unary = np.array([pos_b[int(phi_global[g])] for g in A.unary_ids])
    return extract_tau(A.semigroup, B.semigroup, phi_unary)


def clone_equivariant(A: CloneAction, B: CloneAction, phi_global, tau) -> bool:
    """phi(f)(tau a_1, ..., tau a_n) = tau(f(a_1, ..., a_n)) for every recovered arity."""
    tau = np.asarray(tau)
    size = len(tau)
    for n, ids in A.arity_ids.items():
        pos_b = {g: i for i, g in enumerate(B.arity_ids[n])}
        rows = np.array([pos_b[int(phi_global[g])] for g in ids])
        codes = tuple_codes(size, n)
        weights = size ** np.arange(n - 1, -1, -1, dtype=np.int64)
        moved = (tau[codes] * weights).sum(axis=1)
        if not np.array_equal(B.app[n][rows][:, moved], tau[A.app[n]]):
            return False
    return True


def clone_point_labels(M: OpaqueClone, A: CloneAction) -> np.ndarray:
    """True point behind each recovered point, read from provenance.  Test use only."""
    _, backing = reveal_clone_provenance(M)
    labels = []
    for t, s in (h.rep for h in A.semigroup.points):
        ft, fs = backing[A.unary_ids[t]][1], backing[A.unary_ids[s]][1]
        ar = np.arange(len(ft))
        common = np.flatnonzero((ft != ar) & (fs != ar))
        if len(common) != 1:
            raise ValueError("pair does not share exactly one moved point")
        labels.append(int(common[0]))
    return np.array(labels, dtype=np.int64)
