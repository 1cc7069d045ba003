"""Dual-evaluation campaign: every formula evaluator against ground truth from backing functions.

Ground truth here is computed straight from function arrays (preimage counts,
ranges, f(f(x)) == f(x)) and never calls the formula evaluators.  Each check
has a functional name; results accumulate in a :class:`Scoreboard`.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import formulas as fm
from .catalog import PairClass, catalog_finite_ft
from .corpus import Instance, generate

MAX_DUMPS = 5
STABILITY_CONFIGS = ((12, 4), (12, 6), (16, 4), (16, 6))  # (window, fresh points)
COMMON_POINTS = 16
APP_STABILITY_SAMPLE = 25


@dataclass
class Score:
    passed: int = 0
    failed: int = 0
    dumps: list = field(default_factory=list)

    def record(self, ok: bool, detail=None):
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if len(self.dumps) < MAX_DUMPS:
                self.dumps.append(detail)

    def merge(self, other: "Score"):
        self.passed += other.passed
        self.failed += other.failed
        self.dumps.extend(other.dumps[: MAX_DUMPS - len(self.dumps)])


class Scoreboard:
    def __init__(self):
        self.scores: dict = {}

    def check(self, name: str, ok, detail=None):
        self.scores.setdefault(name, Score()).record(bool(ok), detail)

    def check_array(self, name: str, got, want, detail):
        """One verdict per entry; a mismatch dumps the first differing index."""
        got, want = np.asarray(got), np.asarray(want)
        score = self.scores.setdefault(name, Score())
        bad = got != want
        nbad = int(bad.sum())
        score.passed += bad.size - nbad
        score.failed += nbad
        if nbad and len(score.dumps) < MAX_DUMPS:
            idx = tuple(int(i) for i in np.argwhere(bad)[0])
            score.dumps.append({**detail, "at": idx, "got": bool(got[idx]), "want": bool(want[idx])})

    def merge(self, other: "Scoreboard"):
        for name, s in other.scores.items():
            self.scores.setdefault(name, Score()).merge(s)

    @property
    def all_pass(self) -> bool:
        return all(s.failed == 0 for s in self.scores.values())

    @property
    def total(self) -> int:
        return sum(s.passed + s.failed for s in self.scores.values())

    def rows(self) -> list:
        return [{"check": k, "pass": s.passed, "fail": s.failed, "counterexamples": s.dumps}
                for k, s in sorted(self.scores.items())]


# ---------------------------------------------------------------- ground truth

def preimage_counts(f: np.ndarray) -> np.ndarray:
    return np.bincount(f, minlength=len(f))


def truth_one_one(f: np.ndarray) -> np.ndarray:
    """oo[x, u]: f^-1[{u}] == {x}."""
    n = len(f)
    cnt = preimage_counts(f)
    oo = np.zeros((n, n), dtype=bool)
    ok = cnt[f] == 1
    oo[np.arange(n)[ok], f[ok]] = True
    return oo


def truth_phi1(f: np.ndarray) -> np.ndarray:
    """[x1, u1, x2, u2]: both pairs one-one (in either matching) with u1 != u2."""
    oo = truth_one_one(f)
    straight = oo[:, :, None, None] & oo[None, None, :, :]
    crossed = oo[:, None, None, :] & oo.T[None, :, :, None]
    n = len(f)
    distinct = ~np.eye(n, dtype=bool)[None, :, None, :]
    return (straight | crossed) & distinct


def truth_fxd_img(f: np.ndarray) -> np.ndarray:
    return f[f] == f


# ---------------------------------------------------------------- shared check groups

def _check_one_one(sb: Scoreboard, ctx, f: np.ndarray, ident: str, rng: np.random.Generator):
    n = len(f)
    oo = truth_one_one(f)
    cnt = preimage_counts(f)
    in_rng = cnt > 0
    det = {"instance": ident}
    sb.check("one-one.at-least-three", fm.eval_one_one("OoGe3", ctx, f) == (oo.sum() >= 3), det)
    if oo.sum() < 3:
        return
    v = fm.one_one_view(ctx, f)
    sb.check_array("one-one.pair-swap", v.phi1, truth_phi1(f), det)
    # literal composition route on a sample of argument tuples
    for x1, u1, x2, u2 in rng.integers(0, n, size=(8, 4)):
        sb.check("one-one.pair-swap.literal",
                 fm.phi1_literal(ctx, f, x1, u1, x2, u2) == bool(v.phi1[x1, u1, x2, u2]), det)
    pairs = np.argwhere(oo)
    picks = [rng.integers(0, n, size=6) for _ in range(30)]
    picks += [pairs[rng.integers(0, len(pairs), size=3)].reshape(-1) for _ in range(30)]
    for x1, u1, x2, u2, x3, u3 in picks:
        want = (oo[x1, u1] and oo[x2, u2] and oo[x3, u3] and len({u1, u2, u3}) == 3)
        sb.check("one-one.double-swap", fm.eval_one_one("Phi2", ctx, f, x1, u1, x2, u2, x3, u3) == want,
                 {**det, "args": [int(a) for a in (x1, u1, x2, u2, x3, u3)]})
    eye = np.eye(n, dtype=bool)
    sb.check_array("one-one.pair", v.oo_pair, oo, det)
    sb.check_array("one-one.simple-pair", v.smpl_pair, oo & ~eye, det)
    sb.check_array("one-one.identity-point", v.idp, np.diag(oo), det)
    sb.check_array("one-one.preimage", v.oo_pre, oo.any(axis=1), det)
    sb.check_array("one-one.image", v.oo_img, cnt == 1, det)
    sb.check_array("one-one.image.witnessed", v.oo_img_pairs, cnt == 1, det)
    sb.check_array("one-one.simple-preimage", v.smpl_pre, (oo & ~eye).any(axis=1), det)
    sb.check_array("one-one.simple-image", v.smpl_img, (oo & ~eye).any(axis=0), det)
    sb.check_array("range.not-in-range", v.not_in_rng, ~in_rng, det)
    sb.check_array("range.in-range", ~v.not_in_rng, in_rng, det)
    sb.check_array("range.many-one-image", v.mo_img, cnt >= 2, det)
    missing = int((~in_rng).sum())
    sb.check("range.two-missing", fm.eval_rng("NotRngGe2", ctx, f) == (missing >= 2), det)
    if missing >= 2:
        got = [fm.eval_rng("InRng1", ctx, f, x) for x in range(n)]
        sb.check_array("range.in-range-simple", got, in_rng, det)
    # fixed images meet one-one preimages exactly in identity points
    fxd = truth_fxd_img(f)
    sb.check_array("one-one.fixed-image-meets-preimage", fxd & v.oo_pre, v.idp, det)


def _check_basics(sb: Scoreboard, ctx, f: np.ndarray, ident: str):
    n = len(f)
    det = {"instance": ident}
    ar = np.arange(n)
    got = np.array([[fm.eval_sim(ctx, f, x, y) for y in range(n)] for x in range(n)])
    sb.check_array("basic.sim", got, f[:, None] == f[None, :], det)
    sb.check("basic.projection", fm.eval_prj(ctx, f) == bool((f[f] == f).all()), det)
    many = np.flatnonzero(preimage_counts(f) >= 2)
    block = f == many[0] if len(many) else np.zeros(n, dtype=bool)
    semi = len(many) == 1 and bool(block[many[0]]) and bool((f[~block] == ar[~block]).all())
    sb.check("basic.semi-constant", fm.eval_scnst(ctx, f) == semi, det)
    moved = np.flatnonzero(f != ar)
    if len(moved) == 2:
        x, y = moved
        sb.check("basic.transposition", fm.eval_tr(ctx, f, x, y) == bool(f[x] == y and f[y] == x), det)
    else:
        for x, y in ((0, 1), (1, 2)):
            sb.check("basic.transposition", not fm.eval_tr(ctx, f, x, y), det)


def _check_constant_value(sb: Scoreboard, ctx, g: np.ndarray, value: int, ident: str):
    got = [fm.eval_cnst_value(ctx, g, b) for b in range(len(g))]
    sb.check_array("semi-constant.value", got, np.arange(len(g)) == value, {"instance": ident})


# ---------------------------------------------------------------- catalog

def check_catalog_member(S) -> Scoreboard:
    sb = Scoreboard()
    ctx = fm.EvalContext(S)
    n = S.domain.size
    ar = np.arange(n)
    table = S.table
    rng = np.random.default_rng(S.size)
    has_cnst = fm.eval_exists_cnst(table)
    ids = fm.identity_elements(table)
    sb.check("table.unique-identity", len(ids) == 1, {"instance": S.label})
    identity = ids[0]
    sb.check("table.has-constant", has_cnst == S.has_constant, {"instance": S.label})
    sb.check("basic.has-semi-constant", fm.eval_exists_scnst(ctx) == S.has_semi_constant, {"instance": S.label})
    for i, e in enumerate(S.elements):
        f = e.array
        ident = f"{S.label}#{i}"
        det = {"instance": ident}
        bij = len(np.unique(f)) == n
        const = bool((f == f[0]).all())
        sb.check("table.identity", fm.eval_id(table, i) == bool((f == ar).all()), det)
        sb.check("table.group-part", fm.eval_gr(table, i, identity) == bij, det)
        sb.check("table.constant", fm.eval_cnst(table, i) == const, det)
        _check_basics(sb, ctx, f, ident)
        cnt = preimage_counts(f)
        if fm.eval_scnst(ctx, f) and not const:
            value = int(np.flatnonzero(cnt >= 2)[0])
            _check_constant_value(sb, ctx, f, value, ident)
        _check_one_one(sb, ctx, f, ident, rng)
        fxd = truth_fxd_img(f)
        for b in range(n):
            beta = fm.eval_beta(ctx, f, b)
            sb.check("not-fixed.sound", not (beta and fxd[b]), {**det, "b": b})
            sb.check("not-fixed.alpha-sound", not (fm.eval_alpha(ctx, f, b) and fxd[b]), {**det, "b": b})
        if not has_cnst:
            sb.check("dispatch.guard", fm.pair_guard(ctx, f) == "J4", det)
            got = [fm.eval_fxd_img(ctx, f, b) for b in range(n)]
            sb.check_array("dispatch.fixed-image", got, fxd, det)
            sb.check_array("application.graph", fm.recover_graph(ctx, f), f, det)
    return sb


# ---------------------------------------------------------------- finitary corpus

def _j3_checks(sb: Scoreboard, ctx, f: np.ndarray, ident: str):
    fxd = truth_fxd_img(f)
    names = ("fixed-image.j3.one-one", "fixed-image.j3.one-block", "fixed-image.j3.images-in-class",
             "fixed-image.j3.wide-class", "fixed-image.j3.narrow-class")
    for x in range(ctx.n):
        det = {"instance": ident, "x": x}
        guards = fm.j3_guards(ctx, f, x)
        if fxd[x]:
            sb.check("fixed-image.j3.guards-cover", any(guards), det)
        for i, g in enumerate(guards):
            if g:
                sb.check(names[i], fm.J3_BRANCHES[i](ctx, f, x) == fxd[x], det)
        sb.check("fixed-image.j3", fm.eval_fxd_img_j3(ctx, f, x) == fxd[x], det)


def instance_verdicts(inst: Instance, window: int, fresh_points: int, with_app: bool,
                      sb: Scoreboard | None = None) -> dict:
    """Per-point formula verdicts on the first COMMON_POINTS points; also scores them when ``sb`` is given."""
    ctx = fm.EvalContext(inst.semigroup, fresh_points=fresh_points, window=window)
    f = ctx.lift(inst.f)
    n = ctx.n
    fxd = truth_fxd_img(f)
    out = {}
    v = fm.one_one_view(ctx, f)
    cut = slice(0, COMMON_POINTS)
    out["one-one"] = v.oo_pair[cut, cut]
    out["not-in-range"] = v.not_in_rng[cut]
    out["many-one-image"] = v.mo_img[cut]
    fx = np.array([fm.eval_fxd_img(ctx, f, x) for x in range(n)])
    out["fixed-image"] = fx[cut]
    out["guard"] = fm.pair_guard(ctx, f)
    if inst.pair_class is PairClass.J1:
        out["j1"] = np.array([fm.eval_fxd_img_scnst(ctx, f, b) for b in range(COMMON_POINTS)])
    if inst.pair_class is PairClass.J2:
        out["beta"] = np.array([fm.eval_beta(ctx, f, b) for b in range(COMMON_POINTS)])
    if with_app:
        out["app"] = np.array(fm.recover_graph(ctx, f))[cut]
    if sb is None:
        return out
    ident = inst.ident
    det = {"instance": ident}
    rng = np.random.default_rng([ord(c) for c in ident])
    sb.check("dispatch.guard", out["guard"] == inst.pair_class.value, det)
    sb.check_array("dispatch.fixed-image", fx, fxd, det)
    _check_basics(sb, ctx, f, ident)
    _check_one_one(sb, ctx, f, ident, rng)
    if inst.pair_class is PairClass.J1:
        got = [fm.eval_fxd_img_scnst(ctx, f, b) for b in range(n)]
        sb.check_array("fixed-image.j1", got, fxd, det)
        for k in rng.choice(len(ctx.sc), size=6, replace=False):
            _check_constant_value(sb, ctx, ctx.sc[k], int(ctx.sc_value[k]), ident)
    if inst.pair_class is PairClass.J2:
        beta = np.array([fm.eval_beta(ctx, f, b) for b in range(n)])
        sb.check_array("fixed-image.j2", ~beta, fxd, det)
        alpha = np.array([fm.eval_alpha(ctx, f, b) for b in range(n)])
        sb.check_array("not-fixed.alpha-sound", alpha & fxd, np.zeros(n, dtype=bool), det)
    if inst.pair_class is PairClass.J3:
        _j3_checks(sb, ctx, f, ident)
    if inst.pair_class is PairClass.J4:
        got = [fm.eval_fxd_img_j4(ctx, f, x) for x in range(n)]
        sb.check_array("fixed-image.j4", got, fxd, det)
    if with_app:
        sb.check_array("application.graph", fm.recover_graph(ctx, f), f, det)
    return out


def _verdicts_equal(a: dict, b: dict) -> bool:
    if a.keys() != b.keys():
        return False
    return all(np.array_equal(a[k], b[k]) if isinstance(a[k], np.ndarray) else a[k] == b[k] for k in a)


@dataclass
class CorpusItem:
    instance: Instance
    configs: tuple
    with_app: bool
    app_stability: bool


def run_corpus_item(item: CorpusItem):
    sb = Scoreboard()
    w0, k0 = item.configs[0]
    base = instance_verdicts(item.instance, w0, k0, item.with_app, sb)
    unstable = []
    for w, k in item.configs[1:]:
        other = instance_verdicts(item.instance, w, k, item.with_app and item.app_stability)
        ref = base if item.app_stability else {key: val for key, val in base.items() if key != "app"}
        if not _verdicts_equal(ref, other):
            unstable.append((w, k))
    sb.check("locality.stable", not unstable, {"instance": item.instance.ident, "configs": unstable})
    return item.instance.ident, sb


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("FTR_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    workers = _workers()
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


def corpus_campaign(per_class: int, seed: int, window: int = 12, fresh_points: int = 4,
                    stability: tuple = STABILITY_CONFIGS, app: bool = True,
                    app_stability_sample: int = APP_STABILITY_SAMPLE) -> Scoreboard:
    configs = ((window, fresh_points),) + tuple(c for c in stability if c != (window, fresh_points))
    items = []
    for cls in PairClass:
        for i, inst in enumerate(generate(cls, per_class, seed, window, fresh_points)):
            items.append(CorpusItem(inst, configs, app, i < app_stability_sample))
    results = sorted(_map(run_corpus_item, items), key=lambda r: r[0])
    sb = Scoreboard()
    for _, part in results:
        sb.merge(part)
    return sb


def catalog_campaign(sizes=(3, 4, 5)) -> Scoreboard:
    members = [S for size in sizes for S in catalog_finite_ft(size)]
    sb = Scoreboard()
    for part in _map(check_catalog_member, members):
        sb.merge(part)
    return sb


def clone_campaign() -> Scoreboard:
    from .clone import clone_close, is_semi_transitive, recover_app_n
    from .functions import DomainSpec, all_transpositions, constant

    sb = Scoreboard()
    for size in (3, 4):
        dom = DomainSpec.finite(size)
        for extra in ([], [constant(dom, 0)]):
            C = clone_close(all_transpositions(dom) + extra, 2)
            det = {"instance": f"clone({size},{len(extra)})"}
            sb.check("clone.semi-transitive", is_semi_transitive(C), det)
            got = recover_app_n(C.ops[1], C.cmp[(2, 1)], 2)
            sb.check_array("clone.binary-application", got, C.ops[2], det)
    return sb


def full_campaign(seed: int = 0, per_class: int = 200, window: int = 12, fresh_points: int = 4,
                  stability: tuple = STABILITY_CONFIGS) -> Scoreboard:
    sb = catalog_campaign()
    sb.merge(corpus_campaign(per_class, seed, window, fresh_points, stability))
    sb.merge(clone_campaign())
    return sb
