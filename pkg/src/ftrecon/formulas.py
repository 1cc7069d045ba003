"""Hand-compiled evaluators for the first-order formulas over Act^Gr structures.

Each evaluator follows the quantifier structure of its formula literally, with
the quantifier ranges fixed by an :class:`EvalContext`:

* point variables range over ``ctx.points`` (the finite domain, or a finitary
  window plus fresh points),
* transposition variables over all transpositions of those points,
* semi-constant variables over semi-constants whose constant domain has two
  or three points (only when the semigroup has semi-constants).

Functions are handled as integer arrays over ``ctx.points``; composition is
``f[g]`` (f after g).  Class masks ``h == h[b]`` stand for the sim relation,
whose literal evaluator :func:`eval_sim` is checked against them in tests.
"""
from __future__ import annotations

from itertools import combinations

import numpy as np

from .catalog import OpenSemigroup, SemigroupTable
from .functions import FinitaryFn, classify

_CACHE_LIMIT = 20000


class NeedsPoints(ValueError):
    pass


class NeedsGroupAction(ValueError):
    pass


class UndefinedBranch(ValueError):
    pass


class WrongBranch(ValueError):
    pass


class FormulaIncoherence(ValueError):
    pass


class DegenerateInput(ValueError):
    """J3 formulas need at least three one-one pairs to carry their meaning."""


# ---------------------------------------------------------------- table level
# These quantify over all elements of a closed table and need no point structure.

def eval_id(table: np.ndarray, f: int) -> bool:
    ar = np.arange(table.shape[0])
    return bool((table[f] == ar).all() and (table[:, f] == ar).all())


def identity_elements(table: np.ndarray) -> list:
    ar = np.arange(table.shape[0])
    ok = (table == ar[None, :]).all(axis=1) & (table == ar[:, None]).all(axis=0)
    return [int(i) for i in np.flatnonzero(ok)]


def eval_gr(table: np.ndarray, f: int, identity: int | None = None) -> bool:
    """``identity`` may pass a precomputed phi_Id witness to skip the scan."""
    if identity is None:
        ids = identity_elements(table)
        if not ids:
            return False
        identity = ids[0]
    return bool(((table[f] == identity) & (table[:, f] == identity)).any())


def eval_cnst(table: np.ndarray, f: int) -> bool:
    return bool((table[f] == f).all())


def eval_exists_cnst(table: np.ndarray) -> bool:
    ar = np.arange(table.shape[0])
    return bool((table == ar[:, None]).all(axis=1).any())


def constant_elements(table: np.ndarray) -> list:
    ar = np.arange(table.shape[0])
    return [int(i) for i in np.flatnonzero((table == ar[:, None]).all(axis=1))]


# ---------------------------------------------------------------- contexts

class EvalContext:
    """Quantifier ranges and element lookups for evaluating formulas on one semigroup.

    ``semigroup`` is either a closed :class:`SemigroupTable` with backing
    functions (finite mode) or an :class:`OpenSemigroup` (finitary mode).
    """

    def __init__(self, semigroup, fresh_points: int | None = None, window: int | None = None):
        self.S = semigroup
        dom = semigroup.domain
        if dom.finitary:
            dom = dom.widened(window=window, fresh_points=fresh_points)
        self.domain = dom
        n = dom.universe
        self.n = n
        self.points = np.arange(n)
        pairs = list(combinations(range(n), 2))
        self.tr_pairs = np.array(pairs, dtype=np.intp).reshape(-1, 2)
        tr = np.tile(np.arange(n), (len(pairs), 1))
        rows = np.arange(len(pairs))
        tr[rows, self.tr_pairs[:, 0]] = self.tr_pairs[:, 1]
        tr[rows, self.tr_pairs[:, 1]] = self.tr_pairs[:, 0]
        self.tr = tr
        self.tr_index = np.full((n, n), -1, dtype=np.intp)
        self.tr_index[self.tr_pairs[:, 0], self.tr_pairs[:, 1]] = rows
        self.tr_index[self.tr_pairs[:, 1], self.tr_pairs[:, 0]] = rows
        self._cache: dict = {}
        self._build_semi_constants()

    @property
    def finitary(self) -> bool:
        return self.domain.finitary

    def _build_semi_constants(self):
        n = self.n
        arrays, values, doms = [], [], []
        if isinstance(self.S, OpenSemigroup):
            if self.S.semi_constants:
                for size in (2, 3):
                    for block in combinations(range(n), size):
                        for v in block:
                            g = np.arange(n)
                            g[list(block)] = v
                            arrays.append(g)
                            values.append(v)
                            m = np.zeros(n, dtype=bool)
                            m[list(block)] = True
                            doms.append(m)
        else:
            for e in self.S.elements:
                c = classify(e)
                if c.is_semi_constant:
                    arrays.append(e.extended(n))
                    values.append(c.cnst_value)
                    m = np.zeros(n, dtype=bool)
                    m[list(c.cnst_dom)] = True
                    doms.append(m)
        self.sc = np.array(arrays, dtype=np.intp).reshape(-1, n)
        self.sc_value = np.array(values, dtype=np.intp)
        self.sc_dom = np.array(doms, dtype=bool).reshape(-1, n)

    def lift(self, f) -> np.ndarray:
        if isinstance(f, FinitaryFn):
            return f.extended(self.n)
        f = np.asarray(f, dtype=np.intp)
        if len(f) < self.n:
            out = np.arange(self.n)
            out[: len(f)] = f
            return out
        return f

    def t(self, a: int, b: int) -> np.ndarray:
        return self.tr[self.tr_index[a, b]]

    @staticmethod
    def compose(f: np.ndarray, g: np.ndarray) -> np.ndarray:
        return f[g]

    @staticmethod
    def same(f: np.ndarray, g: np.ndarray) -> bool:
        return bool((f == g).all())

    def has_semi_constants(self) -> bool:
        return len(self.sc) > 0

    def in_group(self, f: np.ndarray) -> bool:
        """phi_Gr: some g in S has f g = g f = id (phi_Id read as identity, checked on tables)."""
        if isinstance(self.S, OpenSemigroup):
            # the only candidate g is the two-sided inverse; every finitary bijection's inverse is in S
            if len(np.unique(f)) != self.n:
                return False
            g = np.argsort(f)
            return bool((f[g] == self.points).all() and (g[f] == self.points).all())
        key = tuple(int(v) for v in f[: self.S.domain.size])
        idx = self.S._index.get(key)
        if idx is None:
            return False
        ids = self.cached("identity", lambda: identity_elements(self.S.table))
        return bool(ids) and eval_gr(self.S.table, idx, ids[0])

    def app_gr(self, f: np.ndarray, x: int) -> int:
        if not self.in_group(f):
            raise NeedsGroupAction("App^Gr is defined only on the group part")
        return int(f[x])

    def cached(self, key, compute):
        try:
            return self._cache[key]
        except KeyError:
            if len(self._cache) > _CACHE_LIMIT:
                self._cache.clear()
            val = self._cache[key] = compute()
            return val


def _cls(h: np.ndarray, b: int) -> np.ndarray:
    return h == h[b]


# ---------------------------------------------------------------- basic predicates

def eval_prj(ctx: EvalContext, f) -> bool:
    f = ctx.lift(f)
    return bool((f[f] == f).all())


def eval_tr(ctx: EvalContext, f, x: int, y: int) -> bool:
    f = ctx.lift(f)
    if x == y or not ctx.in_group(f):
        return False
    if f[x] != y or f[y] != x:
        return False
    others = np.ones(ctx.n, dtype=bool)
    others[[x, y]] = False
    return bool((f[others] == ctx.points[others]).all())


def eval_sim(ctx, f, x: int, y: int) -> bool:
    if x == y:
        return True
    f = ctx.lift(f)
    return ctx.same(ctx.compose(f, ctx.t(x, y)), f)


def sim_class(ctx: EvalContext, f, x: int) -> np.ndarray:
    """Mask of y with phi_sim(f, x, y), evaluated through compositions."""
    f = ctx.lift(f)
    out = np.zeros(ctx.n, dtype=bool)
    out[x] = True
    others = np.flatnonzero(ctx.points != x)
    comps = f[ctx.tr[ctx.tr_index[x, others]]]
    out[others] = (comps == f).all(axis=1)
    return out


def eval_scnst(ctx: EvalContext, f) -> bool:
    f = ctx.lift(f)
    if not eval_prj(ctx, f):
        return False
    for a in range(ctx.n):
        ca = _cls(f, a)
        if ca.sum() < 2:
            continue
        rest = np.flatnonzero(~ca)
        if all(_cls(f, b).sum() == 1 for b in rest):
            return True
    return False


def eval_exists_scnst(ctx: EvalContext) -> bool:
    if isinstance(ctx.S, OpenSemigroup):
        # the open element set beyond its semi-constants is finitary permutations
        # and designated members, none of which are semi-constants
        candidates = list(ctx.sc) + [ctx.lift(f) for f in ctx.S.members]
    else:
        candidates = [ctx.lift(e) for e in ctx.S.elements]
    return any(eval_scnst(ctx, g) for g in candidates)


def eval_basic(kind: str, ctx, f=None) -> bool:
    """Id, Gr, Cnst and ExistsCnst take a table (or context over one) and an element index."""
    if kind in ("Id", "Gr", "Cnst", "ExistsCnst"):
        table = ctx.table if hasattr(ctx, "table") else ctx.S.table
        if kind == "ExistsCnst":
            return eval_exists_cnst(table)
        return {"Id": eval_id, "Gr": eval_gr, "Cnst": eval_cnst}[kind](table, f)
    if not isinstance(ctx, EvalContext):
        raise NeedsPoints(f"{kind} needs point structure")
    if kind == "Prj":
        return eval_prj(ctx, f)
    if kind == "Scnst":
        return eval_scnst(ctx, f)
    if kind == "ExistsScnst":
        return eval_exists_scnst(ctx)
    raise ValueError(f"unknown formula kind {kind}")


def eval_cnst_value(ctx: EvalContext, f, b: int) -> bool:
    """Recognise b as the constant value of a non-constant semi-constant f."""
    f = ctx.lift(f)
    if (f == f[0]).all():
        raise UndefinedBranch("constant functions have no distinguished constant value here")
    cb = _cls(f, b)
    if cb.sum() < 2:
        return False
    for a in np.flatnonzero(~cb):
        h = f[ctx.t(int(a), b)]
        if not (h[h[h]] == h).all():
            return False
    return True


# ---------------------------------------------------------------- J1

def eval_fxd_img_scnst(ctx: EvalContext, f, b: int) -> bool:
    f = ctx.lift(f)
    cb = _cls(f, b)
    f2 = f[f]
    c2 = _cls(f2, b)
    G = ctx.sc
    fgf = f[G[:, f]]
    inc = ~(_batch_cls(fgf, b) & ~c2).any(axis=1)  # [b]_{fgf} subset of [b]_{f^2}
    value_out = ~cb[ctx.sc_value]
    for a in np.flatnonzero(cb):
        relevant = ~ctx.sc_dom[:, a] & value_out
        if inc[relevant].all():
            return True
    return False


def _batch_cls(H: np.ndarray, b: int) -> np.ndarray:
    return H == H[..., b : b + 1]


# ---------------------------------------------------------------- J2

def eval_alpha(ctx: EvalContext, f, b: int) -> bool:
    f = ctx.lift(f)
    cb = _cls(f, b)
    perm = ~cb[ctx.tr_pairs[:, 0]] & ~cb[ctx.tr_pairs[:, 1]]
    if not perm.any():
        return False
    P = ctx.tr[perm]
    fpf = f[P[:, f]]
    c2 = _cls(f[f], b)
    return bool((_batch_cls(fpf, b) != c2).any())


_BETA_CHUNK = 24


def eval_beta(ctx: EvalContext, f, b: int) -> bool:
    f = ctx.lift(f)
    return ctx.cached(("beta", f.tobytes(), b), lambda: _beta(ctx, f, b))


def _beta(ctx: EvalContext, f: np.ndarray, b: int) -> bool:
    cb = _cls(f, b)
    sig = ~cb[ctx.tr_pairs[:, 0]] & ~cb[ctx.tr_pairs[:, 1]]
    n = ctx.n
    H_all = f[ctx.tr[sig]]  # f sigma, one row per permissible sigma
    # sigma in chunks: stops at the first witness and keeps the tensors small
    for start in range(0, len(H_all), _BETA_CHUNK):
        H = H_all[start : start + _BETA_CHUNK]
        m = len(H)
        ch = _batch_cls(H, b)
        pi_ok = ~ch[:, ctx.tr_pairs[:, 0]] & ~ch[:, ctx.tr_pairs[:, 1]]  # (sigma, pi)
        H2 = H[np.arange(m)[:, None], H]
        c2 = _batch_cls(H2, b)
        # h pi h as a (pi, sigma, n) tensor via flat indexing into H
        HPH = H.ravel()[ctx.tr[:, H] + (np.arange(m) * n)[None, :, None]]
        differs = (_batch_cls(HPH, b) != c2[None, :, :]).any(axis=2)
        if (differs.T & pi_ok).any():
            return True
    return False


def eval_fxd_img_j2(ctx: EvalContext, f, b: int) -> bool:
    return not eval_beta(ctx, f, b)


# ---------------------------------------------------------------- one-one pairs

def phi1_literal(ctx: EvalContext, f, x1: int, u1: int, x2: int, u2: int) -> bool:
    """phi^1 by explicit composition of the two transpositions with f."""
    f = ctx.lift(f)
    if u1 == u2 or eval_sim(ctx, f, x1, x2):
        return False
    return bool((ctx.t(u1, u2)[f[ctx.t(x1, x2)]] == f).all())


def _phi1_tensor(ctx: EvalContext, f: np.ndarray) -> np.ndarray:
    """P[x1, u1, x2, u2] = phi^1(f, x1, u1, x2, u2) for every argument tuple.

    (<u1,u2> f <x1,x2>)(z) equals <u1,u2>(f(z)) off {x1, x2}, <u1,u2>(f(x2)) at
    x1 and <u1,u2>(f(x1)) at x2; the equation with f is checked pointwise.
    """
    n = ctx.n
    tf = ctx.tr[:, f]  # tf[t, z] = t(f(z))
    bad = tf != f
    nbad = bad.sum(axis=1)
    off = (nbad[:, None, None] - bad[:, :, None] - bad[:, None, :]) == 0
    at_x1 = tf[:, None, :] == f[None, :, None]  # [t, x1, x2]: t(f(x2)) = f(x1)
    at_x2 = tf[:, :, None] == f[None, None, :]  # [t, x1, x2]: t(f(x1)) = f(x2)
    cond = off & at_x1 & at_x2
    full = cond[np.maximum(ctx.tr_index, 0)]  # [u1, u2, x1, x2]
    full &= (ctx.tr_index >= 0)[:, :, None, None]
    apart = f[:, None] != f[None, :]  # x1 not ~f x2
    P = full.transpose(2, 0, 3, 1) & apart[:, None, :, None]
    return P


class OneOneView:
    """Truth tables of the one-one and range formulas for a single function."""

    def __init__(self, ctx: EvalContext, f: np.ndarray):
        n = ctx.n
        self.phi1 = P = _phi1_tensor(ctx, f)
        # phi_Oo-pair(x,u): witnesses (y,v),(z,w) of phi^1(x,u,.,.) with v != w
        self.oo_pair = P.any(axis=2).sum(axis=2) >= 2
        eye = np.eye(n, dtype=bool)
        self.smpl_pair = self.oo_pair & ~eye
        self.idp = np.diag(self.oo_pair).copy()
        self.oo_pre = self.oo_pair.any(axis=1)
        self.oo_img = self.oo_pair.any(axis=0)
        self.oo_img_pairs = P.any(axis=(2, 3)).any(axis=0)
        self.smpl_pre = self.smpl_pair.any(axis=1)
        self.smpl_img = self.smpl_pair.any(axis=0)
        self.oo_pre_sim = (f[:, None] == f[None, :]).sum(axis=1) == 1
        self.not_in_rng = self._not_in_rng(ctx, f)
        self.mo_img = ~self.not_in_rng & ~self.oo_img
        self.mo_pre = ~self.oo_pre_sim

    def _not_in_rng(self, ctx: EvalContext, f: np.ndarray) -> np.ndarray:
        n = ctx.n
        f2 = f[f]
        fixes_f2 = (ctx.tr[:, f2] == f2).all(axis=1)  # per transposition t: t f^2 = f^2
        out = np.zeros(n, dtype=bool)
        for x in range(n):
            others = np.flatnonzero(ctx.points != x)
            tx = ctx.tr_index[x, others]
            smpl = self.smpl_pair[x, others]
            if (smpl & fixes_f2[tx]).any():  # (N1)
                out[x] = True
                continue
            if smpl.any():  # (III) fails
                continue
            H = f[ctx.tr[tx]]  # f <x,y>, one row per y != x
            H2 = np.take_along_axis(H, H, axis=1)
            swapped = ctx.tr[tx][:, H2]  # [z, y, .] = <x,z> (f<x,y>)^2
            eq = (swapped == H2[None, :, :]).all(axis=2)  # [z, y]
            pairs = self.oo_pair[np.ix_(others, others)]  # [y, z]
            out[x] = bool((eq.T & pairs).any())  # (IV)
        return out


def one_one_view(ctx: EvalContext, f) -> OneOneView:
    f = ctx.lift(f)
    return ctx.cached(("oneone", f.tobytes()), lambda: OneOneView(ctx, f))


def oo_pair_table(ctx: EvalContext, f) -> np.ndarray:
    return one_one_view(ctx, f).oo_pair


def eval_oo_pre_sim(ctx: EvalContext, f, x: int) -> bool:
    f = ctx.lift(f)
    return bool(sim_class(ctx, f, x).sum() == 1)


def eval_one_one(kind: str, ctx: EvalContext, f, *args) -> bool:
    v = one_one_view(ctx, f)
    if kind == "Phi1":
        return bool(v.phi1[args])
    if kind == "Phi2":
        x1, u1, x2, u2, x3, u3 = args
        return bool(u2 != u3 and v.phi1[x1, u1, x2, u2] and v.phi1[x1, u1, x3, u3])
    if kind == "OoGe3":
        return int(v.oo_pre_sim.sum()) >= 3
    table = {
        "OoPair": v.oo_pair, "SmplPair": v.smpl_pair, "Idp": v.idp, "OoPre": v.oo_pre,
        "OoPreSim": v.oo_pre_sim, "OoImg": v.oo_img, "OoImgPairs": v.oo_img_pairs,
        "SmplPre": v.smpl_pre, "SmplImg": v.smpl_img,
    }
    if kind not in table:
        raise ValueError(f"unknown one-one formula {kind}")
    return bool(table[kind][args])


# ---------------------------------------------------------------- range

def eval_rng(kind: str, ctx: EvalContext, f, x: int | None = None) -> bool:
    f = ctx.lift(f)
    if kind == "NotRngGe2":
        return bool((ctx.tr[:, f] == f).all(axis=1).any())
    if kind == "InRng1":
        return not any((ctx.t(x, y)[f] == f).all() for y in range(ctx.n) if y != x)
    v = one_one_view(ctx, f)
    if kind == "NotInRng":
        return bool(v.not_in_rng[x])
    if kind == "InRng":
        return not v.not_in_rng[x]
    if kind == "MoImg":
        return bool(v.mo_img[x])
    raise ValueError(f"unknown range formula {kind}")


def mo_img_mask(ctx: EvalContext, f) -> np.ndarray:
    return one_one_view(ctx, f).mo_img


# ---------------------------------------------------------------- J3

def _blocks(ctx: EvalContext, f: np.ndarray) -> list:
    """The ~f classes with at least two members, as masks."""
    seen = np.zeros(ctx.n, dtype=bool)
    out = []
    for x in range(ctx.n):
        if not seen[x]:
            c = _cls(f, x)
            seen |= c
            if c.sum() >= 2:
                out.append(c)
    return out


def eval_b_ge3(ctx: EvalContext, f) -> bool:
    return len(_blocks(ctx, ctx.lift(f))) >= 3


def _smpl_pairs(ctx: EvalContext, f: np.ndarray) -> list:
    return [(int(u), int(v)) for u, v in zip(*np.nonzero(one_one_view(ctx, f).smpl_pair))]


def phi_b1(ctx: EvalContext, f: np.ndarray, x: int) -> bool:
    mo_pre = one_one_view(ctx, f).mo_pre
    inter = mo_pre & mo_img_mask(ctx, f)
    return bool(inter.sum() == 1 and inter[_cls(f, x)].any())


def phi_b21(ctx: EvalContext, f: np.ndarray, x: int) -> bool:
    return bool(not (mo_img_mask(ctx, f) & ~_cls(f, x)).any())


def phi_b22(ctx: EvalContext, f: np.ndarray, x: int) -> bool:
    cx = _cls(f, x)
    mo_img = mo_img_mask(ctx, f)
    ys = [int(y) for y in np.flatnonzero(cx & ~mo_img) if y != x]
    pairs = _smpl_pairs(ctx, f)
    for y in ys:
        for u, v in pairs:
            if v in (x, y):
                continue
            h = f[ctx.t(v, y)]
            h2 = h[h]
            if h2[u] != h2[x]:
                return False
    return True


def phi_b23(ctx: EvalContext, f: np.ndarray, x: int) -> bool:
    cx = _cls(f, x)
    mo_img = mo_img_mask(ctx, f)
    mo_pre = one_one_view(ctx, f).mo_pre
    zs = np.flatnonzero(mo_pre & ~cx)
    pairs = _smpl_pairs(ctx, f)
    for y in np.flatnonzero(cx & ~mo_img):
        for u, v in pairs:
            if cx[v]:
                continue
            h = ctx.t(v, int(y))[f]
            h2 = h[h]
            # universal over z; empty when f has a single block
            if (h2[zs] == h2[u]).any():
                return False
    return True


def j3_guards(ctx: EvalContext, f, x: int) -> list:
    """Truth values of the five situation guards, in order."""
    f = ctx.lift(f)
    if not eval_one_one("OoGe3", ctx, f):
        raise DegenerateInput("fewer than three one-one pairs")
    if one_one_view(ctx, f).oo_pre_sim[x]:
        return [True, False, False, False, False]
    blocks = _blocks(ctx, f)
    cx = _cls(f, x)
    mo_img = mo_img_mask(ctx, f)
    nb = len(blocks)
    g3 = nb == 2 and any(not (mo_img & ~_cls(f, t)).any() for t in range(ctx.n))
    k = int((cx & mo_img).sum())
    size = int(cx.sum())
    return [False, nb == 1, g3, size >= 3 and k == 1, size == 2 and k == 1]


J3_BRANCHES = (
    lambda ctx, f, x: eval_one_one("Idp", ctx, f, x),
    phi_b1,
    phi_b21,
    phi_b22,
    phi_b23,
)


def eval_fxd_img_j3(ctx: EvalContext, f, x: int) -> bool:
    f = ctx.lift(f)
    guards = j3_guards(ctx, f, x)
    return any(g and J3_BRANCHES[i](ctx, f, x) for i, g in enumerate(guards))


# ---------------------------------------------------------------- J4 and dispatch

def eval_fxd_img_j4(ctx: EvalContext, f, x: int) -> bool:
    f = ctx.lift(f)
    return ctx.app_gr(f, x) == x


def pair_guard(ctx: EvalContext, f) -> str:
    """Which of the J1..J4 guard formulas holds for f."""
    f = ctx.lift(f)
    if isinstance(ctx.S, SemigroupTable) and eval_exists_cnst(ctx.S.table):
        raise WrongBranch("semigroup contains constants")
    if ctx.has_semi_constants() and eval_exists_scnst(ctx):
        return "J1"
    if eval_b_ge3(ctx, f):
        return "J2"
    if ctx.in_group(f):
        return "J4"
    return "J3"


def eval_fxd_img(ctx: EvalContext, f, x: int) -> bool:
    f = ctx.lift(f)
    guard = ctx.cached(("guard", f.tobytes()), lambda: pair_guard(ctx, f))
    branch = {"J1": eval_fxd_img_scnst, "J2": eval_fxd_img_j2,
              "J3": eval_fxd_img_j3, "J4": eval_fxd_img_j4}[guard]
    return ctx.cached(("fxd", f.tobytes(), x), lambda: branch(ctx, f, x))


def eval_app(ctx, f, x: int, y: int) -> bool:
    """Whether f(x) = y, decided through fixed-image formulas only.

    ``ctx`` needs ``lift``, ``t``, ``compose``, ``same``, ``n`` and optionally
    its own ``fxd_img``; this lets the same formula run on opaque tables.
    """
    f = ctx.lift(f)
    fxd = fxd_img_of(ctx)
    if fxd(ctx, f, x):
        if not eval_sim(ctx, f, x, y):
            return False
        for z in range(ctx.n):
            if eval_sim(ctx, f, x, z):
                continue
            if not fxd(ctx, ctx.compose(ctx.t(y, z), f), x):
                return True
        return False
    return y != x and fxd(ctx, ctx.compose(ctx.t(x, y), f), x)


def fxd_img_of(ctx):
    own = getattr(ctx, "fxd_img", None)
    return (lambda c, f, x: own(f, x)) if own else eval_fxd_img


def recover_graph(ctx, f) -> list:
    """For each point x, the unique y with eval_app; raises if not unique."""
    f = ctx.lift(f)
    out = []
    for x in range(ctx.n):
        ys = [y for y in range(ctx.n) if eval_app(ctx, f, x, y)]
        if len(ys) != 1:
            raise FormulaIncoherence(f"application formula gives {ys} at point {x}")
        out.append(ys[0])
    return out
