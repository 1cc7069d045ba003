import numpy as np
import pytest

from ftrecon.catalog import (
    BranchError,
    BudgetExceeded,
    OpenSemigroup,
    PairClass,
    SemigroupKind,
    SemigroupTable,
    act_gr_structure,
    act_structure,
    catalog_finite_ft,
    catalog_member,
    catalog_member_size,
    classify_pair,
    classify_semigroup,
    close,
    composition_table,
    symmetric_group,
)
from ftrecon.functions import (
    DomainError,
    DomainSpec,
    FinitaryFn,
    all_transpositions,
    constant,
    identity,
    semi_constant,
)

import oracles

# Frozen from oracles.catalog_sizes, which enumerates every map of the domain.
CATALOG_ORDERS = {3: [6, 9, 27], 4: [24, 28, 112, 256], 5: [120, 125, 425, 1925], 7: []}


def test_frozen_orders_match_oracle():
    for n in (3, 4, 5):
        assert oracles.catalog_sizes(n) == CATALOG_ORDERS[n]


@pytest.mark.parametrize("n", [3, 4, 5, 7])
def test_catalog_orders(n):
    assert [S.size for S in catalog_finite_ft(n)] == CATALOG_ORDERS[n]


def test_catalog_rejects_excluded_size():
    with pytest.raises(DomainError):
        catalog_finite_ft(6)


def test_member_size_formula_matches_oracle():
    assert catalog_member_size(4, 1) == 28
    assert catalog_member_size(7, None) == 5040
    for n in (3, 4, 5):
        assert [catalog_member_size(n, c) for c in [None, *range(1, n)]][: len(CATALOG_ORDERS[n])] == CATALOG_ORDERS[n]


def test_every_member_is_closed_and_ft(catalog):
    for members in catalog.values():
        for S in members:
            assert S.is_ft
            assert S.check_backing()


def test_group_part_is_the_symmetric_group(catalog):
    for n, members in catalog.items():
        for S in members:
            perms = {i for i, e in enumerate(S.elements) if e.is_bijective()}
            assert S.gr == perms
            assert len(S.gr) == len(symmetric_group(DomainSpec.finite(n)))


def test_non_surjective_member_implies_constant(catalog):
    for members in catalog.values():
        for S in members:
            if any(not e.is_bijective() for e in S.elements):
                assert S.has_constant


# ---------------------------------------------------------------- close

def test_close_transpositions_of_three_points():
    S = close(all_transpositions(DomainSpec.finite(3)))
    want = oracles.closure([t for t in oracles.transpositions(3)])
    assert S.size == 6 and {e.map for e in S.elements} == want


def test_close_identity():
    assert close([identity(DomainSpec.finite(4))]).size == 1


def test_close_with_a_constant_contains_all_constants():
    d = DomainSpec.finite(3)
    S = close(all_transpositions(d) + [constant(d, 0)])
    want = oracles.closure(oracles.transpositions(3) + [(0, 0, 0)])
    assert {e.map for e in S.elements} == want
    assert {(0, 0, 0), (1, 1, 1), (2, 2, 2)} <= want
    assert S.size == len(want) == 9


def test_close_budget():
    with pytest.raises(BudgetExceeded):
        close(all_transpositions(DomainSpec.finite(5)), max_size=50)


def test_composition_table_matches_pointwise(catalog):
    S = catalog[3][1]
    maps = [e.map for e in S.elements]
    index = {m: i for i, m in enumerate(maps)}
    for i, f in enumerate(maps):
        for j, g in enumerate(maps):
            assert S.table[i, j] == index[oracles.comp(f, g)]


def test_composition_table_rejects_unclosed_sets():
    d = DomainSpec.finite(3)
    with pytest.raises(ValueError):
        composition_table([FinitaryFn(d, (1, 0, 2)), FinitaryFn(d, (0, 2, 1))])


# ---------------------------------------------------------------- classification

def test_classify_semigroup(catalog):
    assert classify_semigroup(catalog[4][0]) is SemigroupKind.NO_SCNST
    assert classify_semigroup(catalog[4][1]) is SemigroupKind.EXISTS_CNST
    dom = DomainSpec.open(10)
    S = OpenSemigroup(dom, True, (semi_constant(dom, {0, 1}, 0),))
    assert classify_semigroup(S) is SemigroupKind.EXISTS_SCNST


def test_classify_semigroup_needs_ft():
    d = DomainSpec.finite(3)
    S = close([FinitaryFn(d, (1, 2, 0))])
    with pytest.raises(BranchError):
        classify_semigroup(S)


def test_classify_pair_examples(catalog):
    S = catalog[4][0]
    for i, e in enumerate(S.elements):
        assert classify_pair(S, e) is PairClass.J4
    dom = DomainSpec.open(10)
    assert classify_pair(OpenSemigroup(dom, True), FinitaryFn(dom, range(10))) is PairClass.J1
    f = FinitaryFn(dom, [6, 6, 7, 7, 8, 8, 6, 7, 8, 9])
    assert classify_pair(OpenSemigroup(dom, False, (f,)), f) is PairClass.J2
    g = FinitaryFn(dom, [2, 2, 3, 4, 5, 6, 7, 8, 9, 0])
    assert classify_pair(OpenSemigroup(dom, False, (g,)), g) is PairClass.J3
    with pytest.raises(BranchError):
        classify_pair(catalog[4][1], catalog[4][1].elements[0])


def test_pair_classes_partition_open_maps():
    dom = DomainSpec.open(8)
    rng = np.random.default_rng(3)
    for _ in range(300):
        f = FinitaryFn(dom, rng.integers(0, 8, size=8))
        S = OpenSemigroup(dom, False, ())
        got = classify_pair(S, f)
        nblocks = sum(1 for v in np.bincount(f.array, minlength=8) if v >= 2)
        want = PairClass.J2 if nblocks >= 3 else (PairClass.J4 if f.is_bijective() else PairClass.J3)
        assert got is want


# ---------------------------------------------------------------- action tables

def test_act_structures(catalog):
    S3 = catalog[3][0]
    assert act_structure(S3).tolist() == [list(e.map) for e in S3.elements]
    T = catalog[3][1]
    gr = act_gr_structure(T)
    rows = [i for i in range(T.size) if gr[i, 0] >= 0]
    assert len(rows) == 6 and all(T.elements[i].is_bijective() for i in rows)
    k2 = T.index_of(FinitaryFn(T.domain, (2, 2, 2)))
    assert (act_structure(T)[k2] == 2).all()


def test_table_without_backing():
    S = SemigroupTable(DomainSpec.finite(3), np.zeros((1, 1), dtype=int))
    assert S.size == 1 and S.gr == {0}
