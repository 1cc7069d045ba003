"""Acceptance criteria 1-7, each reported as one pass/fail line."""
import time

import numpy as np
import pytest

from acceptance_log import report
from ftrecon.catalog import catalog_finite_ft, catalog_member
from ftrecon.cli import main
from ftrecon.clone import (
    clone_close,
    clone_point_labels,
    is_semi_transitive,
    reconstruct_clone_action,
    recover_app_n,
    strip_clone,
    tuple_codes,
)
from ftrecon.formulas import FormulaIncoherence
from ftrecon.functions import DomainSpec, all_transpositions
from ftrecon.opaque import (
    NotAssociative,
    OpaqueAlgebra,
    conjugate_copy,
    point_labels,
    reveal_provenance,
    scramble_permutation,
    strip,
)
from ftrecon.reconstruct import (
    AmbiguousTranspositionClass,
    ReconstructionError,
    action_extensions,
    detect_transpositions,
    extract_tau,
    reconstruct,
)
from ftrecon.verify import catalog_campaign, clone_campaign, corpus_campaign

import oracles

SEED = 0
PER_CLASS = 200
SCRAMBLES = 10
CONJUGATES = 10

# check-name families that must appear in the dual-evaluation campaign
REQUIRED_CHECKS = (
    "table.identity", "table.group-part", "table.constant", "basic.projection", "basic.semi-constant",
    "basic.sim", "basic.transposition", "semi-constant.value", "fixed-image.j1", "fixed-image.j2",
    "not-fixed.alpha-sound", "one-one.pair-swap", "one-one.double-swap", "one-one.pair",
    "one-one.simple-pair", "one-one.identity-point", "one-one.preimage", "one-one.image", "one-one.image.witnessed",
    "range.not-in-range", "range.in-range", "range.many-one-image", "range.two-missing",
    "fixed-image.j3.one-one", "fixed-image.j3.one-block", "fixed-image.j3.images-in-class",
    "fixed-image.j3.wide-class", "fixed-image.j3.narrow-class", "fixed-image.j3",
    "fixed-image.j3.guards-cover", "fixed-image.j4", "dispatch.guard", "dispatch.fixed-image",
    "application.graph",
)


def true_labels(M, R):
    return point_labels(M, [h.rep for h in R.points])


def app_matches_backing(M, R) -> bool:
    labels = true_labels(M, R)
    maps = np.array([e.map for e in reveal_provenance(M)[1]])
    return bool(np.array_equal(labels[R.app], maps[:, labels]))


@pytest.fixture(scope="module")
def campaign():
    t = time.perf_counter()
    sb = catalog_campaign((3, 4, 5))
    sb.merge(corpus_campaign(PER_CLASS, SEED, window=12, fresh_points=4))
    sb.merge(clone_campaign())
    return sb, time.perf_counter() - t


# ---------------------------------------------------------------- 1

def test_criterion_1_catalog():
    t = time.perf_counter()
    got = {n: catalog_finite_ft(n) for n in (3, 4)}
    elapsed = time.perf_counter() - t
    sizes = {n: [S.size for S in got[n]] for n in got}
    ok = sizes[3] == [6, 9, 27] and sizes[4][:2] == [24, 28]
    ok &= sizes == {n: oracles.catalog_sizes(n) for n in (3, 4)}
    ok &= all(S.is_ft and S.check_backing() for n in got for S in got[n])
    ok &= elapsed < 1.0
    assert report(1, "catalog orders", ok, f"sizes {sizes}, {elapsed:.2f}s")


# ---------------------------------------------------------------- 2 and 3

def test_criterion_2_dual_evaluation(campaign):
    sb, elapsed = campaign
    rows = {r["check"]: r for r in sb.rows() if r["check"] != "locality.stable"}
    missing = [c for c in REQUIRED_CHECKS if c not in rows or rows[c]["pass"] == 0]
    failed = {c: (r["fail"], r["counterexamples"][:2]) for c, r in rows.items() if r["fail"]}
    ok = not missing and not failed and elapsed < 300
    verdicts = sum(r["pass"] + r["fail"] for r in rows.values())
    assert report(2, "dual evaluation", ok,
                  f"{verdicts} verdicts, {len(failed)} failing checks, missing {missing}, {elapsed:.0f}s"), failed


def test_criterion_3_locality_stability(campaign):
    sb, _ = campaign
    r = next(r for r in sb.rows() if r["check"] == "locality.stable")
    ok = r["fail"] == 0 and r["pass"] == 4 * PER_CLASS
    assert report(3, "locality stability", ok,
                  f"{r['pass']} stable, {r['fail']} unstable instances"), r["counterexamples"]


# ---------------------------------------------------------------- 4

def test_criterion_4_end_to_end():
    t = time.perf_counter()
    total = recovered = 0
    for n in (3, 4, 5, 7):
        for S in catalog_finite_ft(n):
            base = strip(S)
            R0 = reconstruct(base)
            lab0 = true_labels(base, R0)
            for s in range(SCRAMBLES):
                M = strip(S, s)
                R = reconstruct(M)
                tau = extract_tau(R0, R, scramble_permutation(S.size, s))
                total += 1
                # a scramble plants the identity bijection
                recovered += app_matches_backing(M, R) and np.array_equal(true_labels(M, R)[tau], lab0)
            for s in range(CONJUGATES):
                sigma = np.random.default_rng([s, n]).permutation(n)
                T, phi = conjugate_copy(S, sigma)
                N = strip(T, 100 + s)
                RN = reconstruct(N)
                tau = extract_tau(R0, RN, scramble_permutation(T.size, 100 + s)[phi])
                total += 1
                recovered += app_matches_backing(N, RN) and np.array_equal(true_labels(N, RN)[tau], sigma[lab0])
    elapsed = time.perf_counter() - t
    ok = total > 0 and recovered == total and elapsed < 120
    assert report(4, "end-to-end reconstruction", ok, f"{recovered}/{total} recovered, {elapsed:.1f}s")


# ---------------------------------------------------------------- 5

def test_criterion_5_uniqueness():
    per_instance = []
    ok = True
    for n in (3, 4):
        for S in catalog_finite_ft(n):
            M = strip(S, 1)
            RM = reconstruct(M)
            pm = scramble_permutation(S.size, 1)
            tested = 0
            for s in range(6):
                sigma = np.random.default_rng([s, 5]).permutation(n)
                T, phi_st = conjugate_copy(S, sigma)
                N = strip(T, 50 + s)
                RN = reconstruct(N)
                phi = np.empty(S.size, dtype=np.int64)
                phi[pm] = scramble_permutation(T.size, 50 + s)[phi_st]
                exts = action_extensions(RM.app, RN.app, phi)
                ok &= len(exts) == 1 and np.array_equal(exts[0], extract_tau(RM, RN, phi))
                tested += 1
            per_instance.append(tested)
    ok &= min(per_instance) >= 5
    assert report(5, "unique action extension", ok,
                  f"{len(per_instance)} instances, {sum(per_instance)} isomorphisms")


# ---------------------------------------------------------------- 6

def test_criterion_6_clone():
    t = time.perf_counter()
    C = clone_close(all_transpositions(DomainSpec.finite(3)), arity_cap=2)
    direct = np.array_equal(recover_app_n(C.ops[1], C.cmp[(2, 1)], 2), C.ops[2])
    M = strip_clone(C, 3)
    A = reconstruct_clone_action(M, 2)
    labels = clone_point_labels(M, A)
    _, backing = M._provenance()
    match = True
    for n, ids in A.arity_ids.items():
        codes = tuple_codes(3, n)
        w = 3 ** np.arange(n - 1, -1, -1)
        for row, g in enumerate(ids):
            match &= bool(np.array_equal(labels[A.app[n][row]], backing[g][1][(labels[codes] * w).sum(axis=1)]))
    elapsed = time.perf_counter() - t
    ok = is_semi_transitive(C) and direct and match and elapsed < 60
    assert report(6, "clone application recovery", ok,
                  f"direct {direct}, provenance {match}, {elapsed:.1f}s")


# ---------------------------------------------------------------- 7

def corruption_detected(table: np.ndarray, prov) -> bool:
    try:
        M = OpaqueAlgebra(table, prov)
        R = reconstruct(M)
    except (NotAssociative, ReconstructionError, FormulaIncoherence):
        return True
    try:
        return not app_matches_backing(M, R)
    except ValueError:
        return True


def test_criterion_7_negative_controls(tmp_path):
    S6 = strip(catalog_member(6, None, allow_excluded=True), 1)
    try:
        detect_transpositions(S6)
        ambiguous = False
    except AmbiguousTranspositionClass:
        ambiguous = True
    refused = main(["gen", "--size", "6", "--out", str(tmp_path)]) == 2
    S9 = next(S for S in catalog_finite_ft(3) if S.size == 9)
    base = strip(S9)
    prov = reveal_provenance(base)
    flips = caught = 0
    for i in range(9):
        for j in range(9):
            for v in range(9):
                if v == base.table[i, j]:
                    continue
                bad = base.table.copy()
                bad[i, j] = v
                flips += 1
                caught += corruption_detected(bad, prov)
    ok = ambiguous and refused and flips == 648 and caught == flips
    assert report(7, "negative controls", ok,
                  f"ambiguous {ambiguous}, refused {refused}, {caught}/{flips} corruptions caught")
