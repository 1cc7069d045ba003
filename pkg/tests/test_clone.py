from itertools import product

import numpy as np
import pytest

from ftrecon.catalog import BudgetExceeded
from ftrecon.clone import (
    CannotRecover,
    TableIncoherence,
    TruncationIncomplete,
    clone_close,
    clone_equivariant,
    clone_point_labels,
    clone_tau,
    conjugate_clone,
    define_cmp_from_app,
    global_ids,
    is_semi_transitive,
    projection,
    reconstruct_clone_action,
    recover_app_n,
    scrambled_ids,
    strip_clone,
    tuple_codes,
    tuple_witness,
)
from ftrecon.functions import DomainSpec, all_transpositions, constant

import oracles

D3, D4 = DomainSpec.finite(3), DomainSpec.finite(4)


def ft_clone(dom=D3, cap=2, extra=()):
    return clone_close(list(all_transpositions(dom)) + list(extra), arity_cap=cap)


def pointwise(C, n, f, args):
    code = 0
    for a in args:
        code = code * C.size + a
    return int(C.ops[n][f, code])


def recovered_in_true_labels(M, A, n):
    """App_n read back in true point labels, rows keyed by backing table bytes."""
    labels = clone_point_labels(M, A)
    _, backing = M._provenance()
    pos = np.argsort(labels)  # recovered index of each true point
    codes = tuple_codes(len(labels), n)
    weights = len(labels) ** np.arange(n - 1, -1, -1)
    out = {}
    for row, g in enumerate(A.arity_ids[n]):
        arity, tab = backing[g]
        assert arity == n
        rec = A.app[n][row][(pos[codes] * weights).sum(axis=1)]
        out[tab.tobytes()] = (labels[rec], tab)
    return out


# ---------------------------------------------------------------- closure

def test_ft_closure_size3_cap2():
    C = ft_clone()
    assert {tuple(r) for r in C.ops[1]} == oracles.closure(oracles.transpositions(3))
    # binary part: g o p_{2,i}
    want = {tuple(g[c[i]] for c in product(range(3), repeat=2))
            for g in oracles.closure(oracles.transpositions(3)) for i in (0, 1)}
    assert {tuple(r) for r in C.ops[2]} == want
    assert C.count(1) == 6 and C.count(2) == 12


def test_projections_only():
    C = clone_close([], arity_cap=2, domain=D3)
    assert C.count(1) == 1 and C.count(2) == 2
    assert not is_semi_transitive(C)
    assert tuple_witness(C, (0, 1)) is None


def test_binary_max_closure():
    mx = np.array([max(a, b) for a, b in product(range(3), repeat=2)])
    C = clone_close([(2, mx)], arity_cap=2, domain=D3)
    got = {tuple(r) for r in C.ops[2]}
    assert tuple(mx) in got
    assert tuple(projection(3, 2, 0)) in got and tuple(projection(3, 2, 1)) in got
    # identifying variables of max gives back a projection; no new unary maps appear
    assert C.count(1) == 1 and len(got) == 3


def test_clone_is_closed_and_consistent():
    C = ft_clone(extra=[constant(D3, 0)])
    for (n, k), tab in C.cmp.items():
        gt = tuple_codes(C.count(k), n)
        for f in range(C.count(n)):
            for col, gs in enumerate(gt):
                h = C.ops[k][tab[f, col]]
                for code, x in enumerate(tuple_codes(3, k)):
                    inner = [pointwise(C, k, g, x) for g in gs]
                    assert h[code] == pointwise(C, n, f, inner)


def test_arity_cap_bounds():
    with pytest.raises(ValueError):
        ft_clone(cap=4)
    with pytest.raises(ValueError):
        ft_clone(cap=1)


def test_budget():
    with pytest.raises(BudgetExceeded):
        clone_close(list(all_transpositions(D3)) + [constant(D3, 0)], arity_cap=2, size_budget=10)


# ---------------------------------------------------------------- witnesses

def test_ft_clone_is_semi_transitive():
    assert is_semi_transitive(ft_clone())
    assert is_semi_transitive(ft_clone(D4))


def test_tuple_witness():
    C = ft_clone(cap=3)
    c, gs = tuple_witness(C, (0, 1, 2))
    assert [C.ops[1][g, c] for g in gs] == [0, 1, 2]


# ---------------------------------------------------------------- App_n recovery

@pytest.mark.parametrize("dom,cap", [(D3, 2), (D3, 3), (D4, 2)])
def test_recovered_app_equals_direct(dom, cap):
    C = ft_clone(dom, cap, extra=[constant(dom, 1)] if dom is D3 else ())
    for n in range(2, cap + 1):
        assert np.array_equal(recover_app_n(C.ops[1], C.cmp[(n, 1)], n), C.ops[n])


def test_recovered_projection_and_essentially_unary():
    C = ft_clone()
    app2 = recover_app_n(C.ops[1], C.cmp[(2, 1)], 2)
    p21 = C.projection_index(2, 0)
    assert [app2[p21, a * 3 + b] for a, b in product(range(3), repeat=2)] == [a for a, _ in product(range(3), repeat=2)]
    g = [1, 2, 0]
    gp = C.index(2, [g[b] for _, b in product(range(3), repeat=2)])
    assert [app2[gp, a * 3 + b] for a, b in product(range(3), repeat=2)] == [g[b] for _, b in product(range(3), repeat=2)]


def test_recovery_needs_semi_transitivity():
    C = clone_close([], arity_cap=2, domain=D3)
    with pytest.raises(CannotRecover):
        recover_app_n(C.ops[1], C.cmp[(2, 1)], 2)


def test_recovery_detects_conflicts():
    C = ft_clone()
    bad = C.cmp[(2, 1)].copy()
    bad[3, 5] = (bad[3, 5] + 1) % C.count(1)
    with pytest.raises(TableIncoherence):
        recover_app_n(C.ops[1], bad, 2)


def test_cmp_round_trip():
    C = ft_clone(extra=[constant(D3, 2)])
    again = define_cmp_from_app(3, C.ops, 2)
    assert all(np.array_equal(again[key], C.cmp[key]) for key in C.cmp)
    assert C.cmp_lookup(2, 2, C.projection_index(2, 0), [4, 7]) == 4


def test_cmp_needs_every_composite():
    C = ft_clone()
    partial = {1: C.ops[1][:3], 2: C.ops[2]}
    with pytest.raises(TruncationIncomplete):
        define_cmp_from_app(3, partial, 2)


# ---------------------------------------------------------------- opaque clones

def test_strip_clone_relations():
    C = ft_clone()
    M = strip_clone(C, 4)
    gid = scrambled_ids(C, 4)
    assert sorted(gid.values()) == list(range(C.total()))
    assert len(M.cmp[(2, 1)]) == C.count(2) * C.count(1) ** 2
    assert set(global_ids(C)) == set(gid)


@pytest.mark.parametrize("dom,cap,seed", [(D3, 2, 0), (D3, 2, 7), (D3, 3, 1), (D4, 2, 2)])
def test_clone_action_matches_provenance(dom, cap, seed):
    C = ft_clone(dom, cap)
    M = strip_clone(C, seed)
    A = reconstruct_clone_action(M, cap)
    assert A.points == dom.size
    for n in range(1, cap + 1):
        for got, tab in recovered_in_true_labels(M, A, n).values():
            assert np.array_equal(got, tab)


def test_clone_projections_recovered():
    C = ft_clone()
    M = strip_clone(C, 3)
    A = reconstruct_clone_action(M, 2)
    gid = scrambled_ids(C, 3)
    for i in (0, 1):
        row = A.arity_ids[2].index(gid[(2, C.projection_index(2, i))])
        codes = tuple_codes(3, 2)
        assert np.array_equal(A.app[2][row], codes[:, i])


@pytest.mark.parametrize("sigma", [[1, 0, 2], [1, 2, 0], [2, 1, 0]])
def test_conjugate_clone_equivariance(sigma):
    C = ft_clone(extra=[constant(D3, 0)])
    K, induced = conjugate_clone(C, sigma)
    MA, MB = strip_clone(C, 5), strip_clone(K, 6)
    ga, gb = scrambled_ids(C, 5), scrambled_ids(K, 6)
    phi = np.empty(C.total(), dtype=np.int64)
    for (n, i), g in ga.items():
        phi[g] = gb[(n, int(induced[n][i]))]
    A, B = reconstruct_clone_action(MA, 2), reconstruct_clone_action(MB, 2)
    tau = clone_tau(A, B, phi)
    assert clone_equivariant(A, B, phi, tau)
    la, lb = clone_point_labels(MA, A), clone_point_labels(MB, B)
    true = np.empty(3, dtype=np.int64)
    true[la] = lb[tau]
    assert true.tolist() == sigma
    assert not clone_equivariant(A, B, phi, tau[[1, 2, 0]])
