"""Rebuild points and the application map from a bare composition table.

Pipeline: identity and group part, the transposition class, points as classes
of non-commuting transposition pairs, the conjugation action of the group on
those points, and finally the full application map through constants (when
the table has them) or through the fixed-image formulas (when it does not).
Everything here reads only ``OpaqueAlgebra.table``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .formulas import FormulaIncoherence, constant_elements, eval_app, eval_exists_cnst, identity_elements


class ReconstructionError(RuntimeError):
    pass


class AmbiguousTranspositionClass(ReconstructionError):
    pass


class InconsistentTable(ReconstructionError):
    pass


class NotAnIsomorphism(ReconstructionError):
    pass


class ExcludedGroupOrder(ReconstructionError):
    pass


# group orders of Sym(A) for the excluded sizes 1, 2 and 6
EXCLUDED_GROUP_ORDERS = frozenset({1, 2, 720})


@dataclass(frozen=True)
class PointHandle:
    rep: tuple
    members: tuple = ()


@dataclass
class ReconstructedAction:
    identity: int
    transpositions: list
    points: list
    gr_app: np.ndarray  # rows outside the group part are -1
    app: np.ndarray
    branch: str
    pair_point: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return self.app.shape[0]

    def point_of_pair(self, t: int, s: int) -> int:
        return self.pair_point[(min(t, s), max(t, s))]


def _identity(table: np.ndarray) -> int:
    ids = identity_elements(table)
    if len(ids) != 1:
        raise InconsistentTable(f"expected one identity element, found {len(ids)}")
    return ids[0]


def inverses(table: np.ndarray, e: int) -> np.ndarray:
    """inv[g] for g in the group part, -1 elsewhere."""
    both = (table == e) & (table.T == e)
    inv = np.full(table.shape[0], -1, dtype=np.int64)
    has = both.any(axis=1)
    inv[has] = both[has].argmax(axis=1)
    return inv


def _order_at_most_3(table: np.ndarray, p: np.ndarray, e: int) -> np.ndarray:
    p2 = table[p, p]
    p3 = table[p2, p]
    return (p == e) | (p2 == e) | (p3 == e)


def detect_transpositions(M) -> list:
    """Ids of the transpositions, found as the unique qualifying involution class.

    A class qualifies when two of its members fail to commute and every product
    of two members has order 1, 2 or 3.
    """
    T = M.table
    e = _identity(T)
    inv = inverses(T, e)
    group = np.flatnonzero(inv >= 0)
    invol = [int(g) for g in group if g != e and T[g, g] == e]
    remaining = set(invol)
    qualifying = []
    while remaining:
        t = min(remaining)
        cls = np.unique(T[T[group, t], inv[group]])
        remaining -= set(cls.tolist())
        prods = T[np.ix_(cls, cls)]
        noncomm = (prods != prods.T).any()
        if noncomm and _order_at_most_3(T, prods, e).all():
            qualifying.append(sorted(cls.tolist()))
    if len(qualifying) != 1:
        raise AmbiguousTranspositionClass(
            f"{len(qualifying)} involution classes qualify as transpositions")
    return qualifying[0]


def _moves_matrix(M, trans: list, pairs: list) -> np.ndarray:
    """moves[k, u] = Moves(trans[u]; pairs[k])."""
    T = M.table
    e = _identity(T)
    tr = np.array(trans)
    comm = T[np.ix_(tr, tr)] == T[np.ix_(tr, tr)].T
    pos = {t: i for i, t in enumerate(trans)}
    out = np.zeros((len(pairs), len(trans)), dtype=bool)
    for k, (t, s) in enumerate(pairs):
        it, is_ = pos[t], pos[s]
        ts = T[t, s]
        tsu = T[ts, tr]
        star = T[tsu, tsu] != e
        row = (~comm[it] & ~comm[is_] & star)
        row[it] = row[is_] = True
        out[k] = row
    return out


def same_point(M, pair1: tuple, pair2: tuple, trans: list | None = None) -> bool:
    trans = trans if trans is not None else detect_transpositions(M)
    mv = _moves_matrix(M, trans, [tuple(pair1), tuple(pair2)])
    return bool((mv[0] == mv[1]).all())


def _noncommuting_pairs(T: np.ndarray, trans: list) -> list:
    out = []
    for i, t in enumerate(trans):
        for s in trans[i + 1:]:
            if T[t, s] != T[s, t]:
                out.append((t, s))
    return out


def build_points(M, trans: list | None = None):
    """Points as classes of non-commuting transposition pairs; also the pair -> point map."""
    trans = sorted(trans if trans is not None else detect_transpositions(M))
    pairs = _noncommuting_pairs(M.table, trans)
    mv = _moves_matrix(M, trans, pairs)
    groups: dict = {}
    for k, p in enumerate(pairs):
        groups.setdefault(mv[k].tobytes(), []).append(p)
    handles = sorted((PointHandle(min(ps), tuple(sorted(ps))) for ps in groups.values()),
                     key=lambda h: h.rep)
    pair_point = {p: i for i, h in enumerate(handles) for p in h.members}
    return handles, pair_point


def gr_action(M, points: list, pair_point: dict, trans: list) -> np.ndarray:
    T = M.table
    e = _identity(T)
    inv = inverses(T, e)
    tset = set(trans)
    out = np.full((T.shape[0], len(points)), -1, dtype=np.int64)
    for g in np.flatnonzero(inv >= 0):
        gi = inv[g]
        for p, h in enumerate(points):
            t, s = h.rep
            ct, cs = int(T[T[g, t], gi]), int(T[T[g, s], gi])
            if ct not in tset or cs not in tset:
                raise InconsistentTable("conjugate of a transposition is not a transposition")
            try:
                out[g, p] = pair_point[(min(ct, cs), max(ct, cs))]
            except KeyError:
                raise InconsistentTable("conjugated pair commutes") from None
        if len(set(out[g].tolist())) != len(points):
            raise InconsistentTable("group element does not permute the points")
    return out


def _transposition_of_points(M, trans: list, points: list) -> np.ndarray:
    """tr_id[x, y] = the transposition id moving exactly points x and y."""
    reps = [h.rep for h in points]
    mv = _moves_matrix(M, trans, reps)  # [point, transposition]
    n = len(points)
    out = np.full((n, n), -1, dtype=np.int64)
    for x in range(n):
        for y in range(n):
            if x != y:
                hits = np.flatnonzero(mv[x] & mv[y])
                if len(hits) != 1:
                    raise InconsistentTable("points do not determine a unique transposition")
                out[x, y] = trans[hits[0]]
    return out


def reconstruct_cnst_branch(M, points: list, trans: list) -> np.ndarray:
    T = M.table
    consts = constant_elements(T)
    if not consts:
        raise ReconstructionError("table has no constants")
    mv = _moves_matrix(M, trans, [h.rep for h in points])
    tr = np.array(trans)
    const_of_point = []
    for p in range(len(points)):
        ok = [k for k in consts
              if (T[tr[~mv[p]], k] == k).all() and (T[tr[mv[p]], k] != k).all()]
        if len(ok) != 1:
            raise InconsistentTable(f"point {p} matches {len(ok)} constants")
        const_of_point.append(ok[0])
    if len(set(const_of_point)) != len(points) or len(consts) != len(points):
        raise InconsistentTable("constants and points are not in bijection")
    point_of_const = {k: p for p, k in enumerate(const_of_point)}
    img = T[:, const_of_point]  # f o cnst_a
    try:
        return np.vectorize(point_of_const.__getitem__, otypes=[np.int64])(img)
    except KeyError:
        raise InconsistentTable("product with a constant is not a constant") from None


class TableActGr:
    """Point-aware view of an opaque group table, enough to run the application formula."""

    def __init__(self, M, points, trans, gr_app):
        self.T = M.table
        self.e = _identity(self.T)
        self.n = len(points)
        self.tr_id = _transposition_of_points(M, trans, points)
        self.gr_app = gr_app
        self._guard: dict = {}
        self._scnst = None

    def lift(self, f):
        return int(f)

    def t(self, x: int, y: int) -> int:
        return int(self.tr_id[x, y])

    def compose(self, f: int, g: int) -> int:
        return int(self.T[f, g])

    @staticmethod
    def same(f: int, g: int) -> bool:
        return f == g

    def _is_semi_constant(self, g: int) -> bool:
        if self.T[g, g] != g:  # not a projection
            return False
        cls = [[y for y in range(self.n) if x == y or self.T[g, self.tr_id[x, y]] == g]
               for x in range(self.n)]
        return any(len(c) >= 2 and all(len(cls[b]) == 1 for b in range(self.n) if b not in c)
                   for c in cls)

    def guard(self, f: int) -> str:
        if f not in self._guard:
            if self._scnst is None:
                self._scnst = any(self._is_semi_constant(g) for g in range(self.T.shape[0]))
            if self._scnst:
                self._guard[f] = "J1"
            elif self.gr_app[f, 0] >= 0:
                self._guard[f] = "J4"
            else:
                self._guard[f] = "other"
        return self._guard[f]

    def fxd_img(self, f: int, x: int) -> bool:
        if self.guard(f) != "J4":
            raise FormulaIncoherence("finite table without constants must be a group")
        return int(self.gr_app[f, x]) == x


def reconstruct_nocnst_branch(M, points: list, trans: list, gr_app: np.ndarray) -> np.ndarray:
    if (gr_app[:, 0] < 0).any():
        raise InconsistentTable("finite table without constants is not a group")
    view = TableActGr(M, points, trans, gr_app)
    n = len(points)
    app = np.empty((M.size, n), dtype=np.int64)
    for f in range(M.size):
        for x in range(n):
            ys = [y for y in range(n) if eval_app(view, f, x, y)]
            if len(ys) != 1:
                raise FormulaIncoherence(f"application formula gives {ys} for element {f}, point {x}")
            app[f, x] = ys[0]
    return app


def group_order_admissible(M) -> bool:
    e = _identity(M.table)
    return int((inverses(M.table, e) >= 0).sum()) not in EXCLUDED_GROUP_ORDERS


def reconstruct(M) -> ReconstructedAction:
    if not group_order_admissible(M):
        raise ExcludedGroupOrder("group part has the order of an excluded symmetric group")
    trans = detect_transpositions(M)
    points, pair_point = build_points(M, trans)
    gapp = gr_action(M, points, pair_point, trans)
    if eval_exists_cnst(M.table):
        app, branch = reconstruct_cnst_branch(M, points, trans), "constants"
    else:
        app, branch = reconstruct_nocnst_branch(M, points, trans, gapp), "no-constants"
    grp = gapp[:, 0] >= 0
    if not np.array_equal(app[grp], gapp[grp]):
        raise InconsistentTable("application disagrees with the group action")
    return ReconstructedAction(_identity(M.table), trans, points, gapp, app, branch, pair_point)


def extract_tau(RM: ReconstructedAction, RN: ReconstructedAction, phi) -> np.ndarray:
    """tau[p] = point of N carrying the image pair of point p's representative."""
    phi = np.asarray(phi)
    tau = np.empty(len(RM.points), dtype=np.int64)
    for p, h in enumerate(RM.points):
        t, s = h.rep
        try:
            tau[p] = RN.point_of_pair(int(phi[t]), int(phi[s]))
        except KeyError:
            raise NotAnIsomorphism("image pair is not a point of the target") from None
    if not _equivariant(RM.app, RN.app, phi, tau):
        raise NotAnIsomorphism("application is not preserved")
    return tau


def _equivariant(app_m: np.ndarray, app_n: np.ndarray, phi: np.ndarray, tau: np.ndarray) -> bool:
    return np.array_equal(app_n[phi][:, tau], tau[app_m])


def action_extensions(app_m: np.ndarray, app_n: np.ndarray, phi) -> list:
    """Every point bijection tau making (phi, tau) an isomorphism of actions."""
    phi = np.asarray(phi)
    n = app_m.shape[1]
    out = []
    for perm in permutations(range(n)):
        tau = np.array(perm)
        if _equivariant(app_m, app_n, phi, tau):
            out.append(tau)
    return out
